"""Built-in benchmark problems and the JSON problem-config loader.

Forcing terms are derived from the stated exact solutions:

* ``edp1``: ``u = exp(2t - x^2)`` on the real line, ``u_xx + 2x u_x + 2u = 0``
  so ``a4 = D_t^a u``;
* ``edp2``: ``u = exp(2t + 1.5x)`` on ``[-1.1, 1.3]`` with Robin data;
* ``edp3``: ``u = exp(x) t^6`` on ``[0, 1]`` with Dirichlet data.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .exceptions import ConfigurationError
from .expr import BinOp, Call, Expression, Neg, ParseError, Var
from .pde import BoundaryConditions, Interval, PdeProblem, RealLine
from .specfun import gamma_fn, lower_incomplete_gamma, upper_incomplete_gamma

__all__ = ["BUILTIN_CASES", "EDP1_HERMITE_SCALE", "make_case", "make_edp1", "make_edp2", "make_edp3",
           "problem_from_dict", "load_config"]

# Chosen from a sweep over b; the Gaussian factor then matches exp(-x^2) exactly.
EDP1_HERMITE_SCALE = 1.0 / math.sqrt(2.0)


def make_edp1(alpha: float = 0.17, N_t: int = 2700, nx: int = 16,
              hermite_scale: float = EDP1_HERMITE_SCALE) -> PdeProblem:
    s = 1.0 - alpha
    g = gamma_fn(s)

    def a4(t, x):
        t = np.asarray(t, dtype=float)
        return 2.0**alpha * lower_incomplete_gamma(s, 2.0 * t) * np.exp(2.0 * t) / g * np.exp(-np.asarray(x) ** 2)

    return PdeProblem(
        alpha=alpha,
        t_f=1.2,
        N_t=N_t,
        domain=RealLine(nx, hermite_scale),
        a1=lambda x: np.ones_like(x),
        a2=lambda x: 2.0 * x,
        a3=lambda x: 2.0 * np.ones_like(x),
        a4=a4,
        u0=lambda x: np.exp(-(x**2)),
        exact=lambda t, x: np.exp(2.0 * t - x**2),
        name="edp1",
    )


def make_edp2(alpha: float = 0.17, N_t: int = 2700, nx: int = 15) -> PdeProblem:
    s = 1.0 - alpha
    g = gamma_fn(s)
    p = 2.0**alpha

    def a4(t, x):
        t = np.asarray(t, dtype=float)
        return -p * upper_incomplete_gamma(s, 2.0 * t) * np.exp(2.0 * t) / g * np.exp(1.5 * np.asarray(x))

    bc = BoundaryConditions(
        1.0, 2.0, lambda t: 4.0 * np.exp(2.0 * t - 1.65),
        3.0, 4.0, lambda t: 9.0 * np.exp(2.0 * t + 1.95),
    )
    return PdeProblem(
        alpha=alpha,
        t_f=1.2,
        N_t=N_t,
        domain=Interval(-1.1, 1.3, nx),
        a1=lambda x: p * (1.0 + x**2) / 2.25,
        a2=lambda x: p * x**2 / 1.5,
        a3=lambda x: -2.0 * p * x**2,
        a4=a4,
        u0=lambda x: np.exp(1.5 * x),
        bc=bc,
        exact=lambda t, x: np.exp(2.0 * t + 1.5 * x),
        name="edp2",
    )


def make_edp3(alpha: float = 0.1, N_t: int = 3500, nx: int = 10) -> PdeProblem:
    c = 720.0 / gamma_fn(7.0 - alpha)
    return PdeProblem(
        alpha=alpha,
        t_f=1.0,
        N_t=N_t,
        domain=Interval(0.0, 1.0, nx),
        a1=lambda x: np.ones_like(x),
        a2=lambda x: -np.ones_like(x),
        a3=lambda x: np.zeros_like(x),
        a4=lambda t, x: c * np.exp(x) * np.asarray(t, dtype=float) ** (6.0 - alpha),
        u0=lambda x: np.zeros_like(x),
        bc=BoundaryConditions.dirichlet(lambda t: t**6, lambda t: math.e * t**6),
        exact=lambda t, x: np.exp(x) * t**6,
        name="edp3",
    )


BUILTIN_CASES = {"edp1": make_edp1, "edp2": make_edp2, "edp3": make_edp3}


def make_case(name: str, **overrides) -> PdeProblem:
    try:
        factory = BUILTIN_CASES[name]
    except KeyError:
        raise ConfigurationError(f"unknown case {name!r}; choose from {sorted(BUILTIN_CASES)}") from None
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    if name != "edp1":
        kwargs.pop("hermite_scale", None)
    return factory(**kwargs)


def _free_vars(node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return _free_vars(node.operand)
    if isinstance(node, BinOp):
        return _free_vars(node.left) | _free_vars(node.right)
    if isinstance(node, Call):
        return set().union(*(_free_vars(a) for a in node.args))
    return set()


def _function(spec: Mapping, key: str, alpha: float, allowed: set, where: str):
    if key not in spec:
        raise ConfigurationError(f"{where}{key}: missing")
    raw = spec[key]
    if isinstance(raw, bool) or not isinstance(raw, (str, int, float)):
        raise ConfigurationError(f"{where}{key}: expected an expression string or number")
    try:
        ex = Expression(str(raw), alpha)
    except ParseError as exc:
        raise ConfigurationError(f"{where}{key}: {exc}") from exc
    bad = _free_vars(ex.ast) - allowed - {"alpha"}
    if bad:
        raise ConfigurationError(f"{where}{key}: may not depend on {', '.join(sorted(bad))}")
    return ex


def _of_x(ex: Expression):
    return lambda x: ex(0.0, x)


def _of_t(ex: Expression):
    return lambda t: ex(t, 0.0)


def _number(spec: Mapping, key: str, where: str, kind=float, default: Any = None):
    if key not in spec:
        if default is not None:
            return default
        raise ConfigurationError(f"{where}{key}: missing")
    val = spec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigurationError(f"{where}{key}: expected a number, got {val!r}")
    if kind is int:
        if int(val) != val:
            raise ConfigurationError(f"{where}{key}: expected an integer, got {val!r}")
        return int(val)
    return float(val)


def problem_from_dict(cfg: Mapping, *, name: str = "config", **overrides) -> PdeProblem:
    """Build a :class:`PdeProblem` from the config schema.

    ``overrides`` (``alpha``, ``N_t``, ``nx``, ``hermite_scale``) replace the
    corresponding config values when not ``None``.
    """
    if not isinstance(cfg, Mapping):
        raise ConfigurationError("config root must be an object")
    ov = {k: v for k, v in overrides.items() if v is not None}
    alpha = float(ov.get("alpha", _number(cfg, "alpha", "")))
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha: must lie in (0, 1), got {alpha}")
    tf = _number(cfg, "tf", "")
    nt = int(ov.get("N_t", _number(cfg, "nt", "", int)))
    dom = cfg.get("domain")
    if not isinstance(dom, Mapping):
        raise ConfigurationError("domain: missing or not an object")
    kind = dom.get("type")
    nx = int(ov.get("nx", _number(dom, "nx", "domain.", int)))
    if kind in ("real_line", "real-line", "R"):
        b = float(ov.get("hermite_scale", _number(dom, "hermite_scale", "domain.", float, 1.0)))
        domain = RealLine(nx, b)
    elif kind == "interval":
        domain = Interval(_number(dom, "xa", "domain."), _number(dom, "xb", "domain."), nx)
    else:
        raise ConfigurationError(f"domain.type: expected 'real_line' or 'interval', got {kind!r}")

    fx = {"x"}
    a1 = _function(cfg, "a1", alpha, fx, "")
    a2 = _function(cfg, "a2", alpha, fx, "")
    a3 = _function(cfg, "a3", alpha, fx, "")
    a4 = _function(cfg, "a4", alpha, {"t", "x"}, "")
    u0 = _function(cfg, "u0", alpha, fx, "")
    exact = _function(cfg, "exact", alpha, {"t", "x"}, "") if cfg.get("exact") is not None else None

    bc = None
    if isinstance(domain, Interval):
        b = cfg.get("bc")
        if not isinstance(b, Mapping):
            raise ConfigurationError("bc: required for an interval domain")
        try:
            bc = BoundaryConditions(
                _number(b, "ca", "bc."), _number(b, "da", "bc."),
                _of_t(_function(b, "ua", alpha, {"t"}, "bc.")),
                _number(b, "cb", "bc."), _number(b, "db", "bc."),
                _of_t(_function(b, "ub", alpha, {"t"}, "bc.")),
            )
        except ConfigurationError:
            raise
    elif cfg.get("bc") is not None:
        raise ConfigurationError("bc: not allowed on the real line")
    try:
        return PdeProblem(
            alpha=alpha, t_f=tf, N_t=nt, domain=domain,
            a1=_of_x(a1), a2=_of_x(a2), a3=_of_x(a3), a4=a4, u0=_of_x(u0),
            bc=bc, exact=exact, name=str(cfg.get("name", name)),
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_config(path, **overrides) -> PdeProblem:
    """Read a JSON problem file; errors name the file and the offending field."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return problem_from_dict(cfg, name=path.stem, **overrides)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
