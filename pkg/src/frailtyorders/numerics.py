"""Special functions, quadrature, differentiation and 1-D minimisation.

Everything here is a pure function of its arguments.  Callables handed to
:func:`integrate` and :func:`integrate_panels` should accept numpy arrays;
scalar-only callables are detected and evaluated point by point.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "DomainError",
    "ConvergenceError",
    "QuadratureConfig",
    "OptimConfig",
    "log1mexp",
    "log_upper_incomplete_gamma",
    "upper_incomplete_gamma",
    "log_regularized_lower_incomplete_gamma",
    "regularized_lower_incomplete_gamma",
    "log_regularized_upper_incomplete_gamma",
    "log_upper_incomplete_gamma_step",
    "integrate",
    "integrate_panels",
    "minimize_1d",
    "numeric_derivative",
    "bisect",
]

_EPS = np.finfo(float).eps
_FPMIN = 1e-300
_MAXIT = 100_000


class DomainError(ValueError):
    """Argument outside the domain of a function or distribution."""


class ConvergenceError(RuntimeError):
    """An iterative routine ran out of budget before meeting its tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_subdivisions: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class OptimConfig:
    bracket_lo: float
    bracket_hi: float
    x_tol: float = 1e-9
    max_iters: int = 500

    def __post_init__(self):
        if not self.bracket_lo < self.bracket_hi:
            raise DomainError("bracket_lo must be < bracket_hi")
        if not self.x_tol > 0:
            raise DomainError("x_tol must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")


DEFAULT_QUAD = QuadratureConfig()


def log1mexp(x):
    """``log(1 - exp(x))`` for ``x <= 0``, accurate at both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            x > -math.log(2.0),
            np.log(-np.expm1(np.minimum(x, 0.0))),
            np.log1p(-np.exp(np.minimum(x, 0.0))),
        )
    return out[()] if out.ndim == 0 else out


def _log1mexp_scalar(x: float) -> float:
    if x == 0.0:
        return -math.inf
    if x > -math.log(2.0):
        return math.log(-math.expm1(x))
    return math.log1p(-math.exp(x))


# ---------------------------------------------------------------------------
# incomplete gamma, log space


def _check_gamma_args(a, x):
    if not (a > 0) or not math.isfinite(a):
        raise DomainError(f"incomplete gamma needs a > 0, got {a}")
    if not (x >= 0):
        raise DomainError(f"incomplete gamma needs x >= 0, got {x}")


def _log_lower_series(a: float, x: float) -> float:
    # log of gamma(a, x) = x^a e^-x sum_n x^n / (a (a+1) ... (a+n))
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            return a * math.log(x) - x + math.log(total)
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _log_upper_cf(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Gamma(a, x)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return a * math.log(x) - x + math.log(h)
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def _scalar_log_upper(a: float, x: float) -> float:
    _check_gamma_args(a, x)
    if x == 0.0:
        return math.lgamma(a)
    if math.isinf(x):
        return -math.inf
    if x < a + 1.0:
        log_p = _log_lower_series(a, x) - math.lgamma(a)
        return math.lgamma(a) + _log1mexp_scalar(min(log_p, 0.0))
    return _log_upper_cf(a, x)


def _scalar_log_lower_reg(a: float, x: float) -> float:
    _check_gamma_args(a, x)
    if x == 0.0:
        return -math.inf
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return _log_lower_series(a, x) - math.lgamma(a)
    return _log1mexp_scalar(min(_log_upper_cf(a, x) - math.lgamma(a), 0.0))


def _broadcast(fn, a, x):
    a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if a_arr.ndim == 0:
        return fn(float(a_arr), float(x_arr))
    out = np.empty(a_arr.shape)
    for idx in np.ndindex(a_arr.shape):
        out[idx] = fn(float(a_arr[idx]), float(x_arr[idx]))
    return out


def log_upper_incomplete_gamma(a, x):
    """Natural log of the upper incomplete gamma ``int_x^inf t^(a-1) e^-t dt``.

    Uses the power series for ``x < a + 1`` and a continued fraction
    otherwise, both assembled in log space so that large ``x`` never
    overflows or underflows.  Broadcasts over array arguments.
    """
    return _broadcast(_scalar_log_upper, a, x)


def upper_incomplete_gamma(a, x):
    """Upper incomplete gamma function ``Gamma(a, x)``; ``Gamma(a, 0) = Gamma(a)``."""
    return np.exp(log_upper_incomplete_gamma(a, x))


def log_regularized_lower_incomplete_gamma(a, x):
    return _broadcast(_scalar_log_lower_reg, a, x)


def regularized_lower_incomplete_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``."""
    return np.exp(log_regularized_lower_incomplete_gamma(a, x))


def log_regularized_upper_incomplete_gamma(a, x):
    """``log Q(a, x) = log(Gamma(a, x) / Gamma(a))``."""
    a_arr = np.asarray(a, dtype=float)
    lg = np.vectorize(math.lgamma)(a_arr) if a_arr.ndim else math.lgamma(float(a_arr))
    return log_upper_incomplete_gamma(a, x) - lg


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def log_upper_incomplete_gamma_step(a: float, x: float, dx):
    """``log(Gamma(a, x + dx) / Gamma(a, x))`` for ``x > 0``, ``dx >= 0``.

    Subtracting two logs loses all relative accuracy when ``dx`` is tiny, so
    short steps integrate the density over ``[x, x + dx]`` directly and
    return ``log1p`` of minus that mass.
    """
    a, x = float(a), float(x)
    if not (a > 0 and x > 0):
        raise DomainError(f"need a > 0 and x > 0, got a={a}, x={x}")
    dx = np.asarray(dx, dtype=float)
    if np.any(dx < 0):
        raise DomainError("dx must be non-negative")
    log_base = _scalar_log_upper(a, x)
    short = dx <= min(0.1 * x, 1.0)
    out = np.empty(dx.shape)
    if short.any():
        h = 0.5 * dx[short]
        u = x + h[..., None] * (1.0 + _GL_NODES)
        dens = np.exp((a - 1.0) * np.log(u) - u - log_base)
        out[short] = np.log1p(-h * (dens @ _GL_WEIGHTS))
    if (~short).any():
        out[~short] = log_upper_incomplete_gamma(a, x + dx[~short]) - log_base
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# quadrature

# Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _vectorize_callable(f):
    state = {}

    def g(x):
        mode = state.get("mode")
        if mode is None:
            try:
                y = np.asarray(f(x), dtype=float)
                if y.shape != x.shape:
                    raise TypeError
                state["mode"] = "array"
                return y
            except (TypeError, ValueError):
                state["mode"] = "scalar"
        elif mode == "array":
            return np.asarray(f(x), dtype=float)
        return np.array([float(f(xi)) for xi in x.ravel()]).reshape(x.shape)

    return g


def _gk15(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = f(center + half * _NODES)
    if not np.all(np.isfinite(y)):
        raise DomainError("integrand is not finite on the integration range")
    k = half * np.dot(_KW, y)
    g = half * np.dot(_GW, y)
    resabs = abs(half) * np.dot(_KW, np.abs(y))
    return k, max(abs(k - g), 50.0 * _EPS * resabs)


def integrate(f: Callable, lo: float, hi: float, cfg: QuadratureConfig | None = None,
              points=None) -> float:
    """Adaptive Gauss-Kronrod (7/15) quadrature of ``f`` over ``[lo, hi]``.

    ``hi`` may be ``inf``; the tail is mapped onto ``(0, 1]`` with
    ``u = 1 / (1 + t - lo)`` before subdivision.  ``points`` are interior
    break points where the integrand changes character (peaks, kinks).

    Raises
    ------
    ConvergenceError
        If ``cfg.max_subdivisions`` panels are used without meeting
        ``max(abs_tol, rel_tol * |value|)``.
    """
    cfg = cfg or DEFAULT_QUAD
    if math.isinf(lo):
        raise DomainError("lower limit must be finite")
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate(f, hi, lo, cfg, points)
    fv = _vectorize_callable(f)

    if math.isinf(hi):
        def g(u):
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                t = lo + (1.0 - u) / u
                y = fv(t) / (u * u)
            # u * u underflows only where the integrand has long decayed
            return np.where(u * u > 0.0, y, 0.0)
        a, b = 0.0, 1.0
        breaks = [1.0 / (1.0 + (p - lo)) for p in (points or ()) if lo < p]
    else:
        g = fv
        a, b = lo, hi
        breaks = [p for p in (points or ()) if lo < p < hi]
    edges = sorted({a, b, *breaks})

    heap = []
    total = 0.0
    err_total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        val, err = _gk15(g, left, right)
        total += val
        err_total += err
        heapq.heappush(heap, (-err, left, right, val))
    n_panels = len(heap)
    while err_total > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if n_panels >= cfg.max_subdivisions:
            raise ConvergenceError(
                f"quadrature budget of {cfg.max_subdivisions} panels exhausted "
                f"(estimate {total:.6g}, error {err_total:.3g})")
        neg_err, left, right, val = heapq.heappop(heap)
        mid = 0.5 * (left + right)
        v1, e1 = _gk15(g, left, mid)
        v2, e2 = _gk15(g, mid, right)
        total += v1 + v2 - val
        err_total += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, left, mid, v1))
        heapq.heappush(heap, (-e2, mid, right, v2))
        n_panels += 1
    return float(total)


def integrate_panels(f: Callable, lo, hi, cfg: QuadratureConfig | None = None,
                     pass_owner: bool = False) -> np.ndarray:
    """Integrate over many finite intervals ``[lo[i], hi[i]]`` in one batch.

    ``f`` must be vectorised.  With ``pass_owner`` it is called as
    ``f(nodes, owner)`` where ``nodes`` has shape ``(m, 15)`` and ``owner[j]``
    is the interval index of row ``j``; this lets each interval carry its
    own scaling.  Every sub-panel is refined until its error is below
    ``max(abs_tol * width / total_width, rel_tol * |panel|)``, which bounds
    the relative error of each result by ``rel_tol`` for non-negative
    integrands.
    """
    cfg = cfg or DEFAULT_QUAD
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    out = np.zeros(lo.shape)
    if lo.size == 0:
        return out
    span = float(np.sum(np.abs(hi - lo))) or 1.0
    owner = np.arange(lo.size)
    a, b = lo.copy(), hi.copy()
    used = np.ones(lo.size, dtype=int)
    while a.size:
        center = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes = center[:, None] + half[:, None] * _NODES[None, :]
        if pass_owner:
            y = np.asarray(f(nodes, owner), dtype=float).reshape(nodes.shape)
        else:
            y = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
        if not np.all(np.isfinite(y)):
            raise DomainError("integrand is not finite on the integration range")
        k = half * (y @ _KW)
        g = half * (y @ _GW)
        resabs = np.abs(half) * (np.abs(y) @ _KW)
        err = np.maximum(np.abs(k - g), 50.0 * _EPS * resabs)
        tol = np.maximum(cfg.abs_tol * np.abs(b - a) / span, cfg.rel_tol * np.abs(k))
        ok = err <= tol
        np.add.at(out, owner[ok], k[ok])
        bad = ~ok
        if not bad.any():
            break
        np.add.at(used, owner[bad], 1)
        if used.max() > cfg.max_subdivisions:
            raise ConvergenceError(
                f"panel quadrature budget of {cfg.max_subdivisions} exhausted")
        mid = center[bad]
        a = np.concatenate([a[bad], mid])
        b = np.concatenate([mid, b[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
    return out


# ---------------------------------------------------------------------------
# optimisation and roots

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_1d(f: Callable[[float], float], cfg: OptimConfig) -> tuple[float, float]:
    """Golden-section search for a minimum of ``f`` on the configured bracket.

    Returns ``(argmin, min_value)``.  For unimodal ``f`` the argmin is
    within ``cfg.x_tol`` of the true minimiser; a minimum sitting on a
    bracket end is returned as that end.
    """
    lo, hi = float(cfg.bracket_lo), float(cfg.bracket_hi)
    f_lo, f_hi = f(lo), f(hi)
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(cfg.max_iters):
        if hi - lo <= 2.0 * cfg.x_tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    else:
        raise ConvergenceError(f"golden-section search did not converge in {cfg.max_iters} iterations")
    x_best, f_best = (x1, f1) if f1 <= f2 else (x2, f2)
    # monotone objectives converge onto a bracket end
    if f_lo < f_best:
        return float(cfg.bracket_lo), float(f_lo)
    if f_hi < f_best:
        return float(cfg.bracket_hi), float(f_hi)
    return float(x_best), float(f_best)


def numeric_derivative(f: Callable[[float], float], x: float, h: float | None = None) -> float:
    """Central difference ``(f(x+h) - f(x-h)) / 2h``; ``h`` defaults to ``1e-6 max(1, |x|)``."""
    if h is None:
        h = 1e-6 * max(1.0, abs(x))
    if not h > 0:
        raise DomainError("step h must be positive")
    try:
        up, down = f(x + h), f(x - h)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"function not evaluable on stencil around {x}") from exc
    if not (math.isfinite(up) and math.isfinite(down)):
        raise DomainError(f"function not finite on stencil around {x}")
    return (up - down) / (2.0 * h)


def bisect(f: Callable[[float], float], lo: float, hi: float, x_tol: float = 1e-12,
           max_iters: int = 400) -> float:
    """Root of a monotone ``f`` bracketed by ``[lo, hi]`` (sign change required)."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise ConvergenceError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        if hi - lo <= x_tol * max(1.0, abs(mid)) or mid in (lo, hi):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise ConvergenceError("bisection did not converge")
