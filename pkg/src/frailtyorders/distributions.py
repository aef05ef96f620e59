"""Lifetime distributions and mixing (frailty / resilience) laws.

Lifetime distributions are evaluated in log space first: ``logsf``,
``logcdf`` and ``logpdf`` are the primitives and everything else is
derived from them.  All evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
import shlex
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import (
    ConvergenceError,
    DomainError,
    QuadratureConfig,
    bisect,
    integrate,
    integrate_panels,
    log1mexp,
    log_regularized_lower_incomplete_gamma,
    log_regularized_upper_incomplete_gamma,
    log_upper_incomplete_gamma,
    log_upper_incomplete_gamma_step,
)

__all__ = [
    "ContinuousDistribution",
    "WeibullParams",
    "GammaParams",
    "Weibull",
    "GammaLifetime",
    "UniformLifetime",
    "ExpQuadratic",
    "PdfDistribution",
    "make_weibull",
    "exponential",
    "distribution_from_pdf", "make_gamma_pdf_distribution",
    "MixingDistribution",
    "GammaMixing",
    "TruncatedGammaMixing",
    "UniformMixing",
    "DegenerateMixing",
    "gamma_frailty_mixing",
    "mixing_sample_support_check",
    "parse_spec",
    "parse_distribution",
    "parse_mixing",
]

NEG_INF = -np.inf
FINE_QUAD = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-12, max_subdivisions=4000)


def _arr(x):
    return np.asarray(x, dtype=float)


def _out(y):
    y = np.asarray(y, dtype=float)
    return float(y) if y.ndim == 0 else y


def _log_panels(logf, a, b, offsets, cfg):
    """``log int_a^b exp(logf(u) - offset) du`` for arrays of intervals."""
    def f(nodes, owner):
        with np.errstate(under="ignore"):
            return np.exp(_arr(logf(nodes)) - offsets[owner][:, None])

    vals = integrate_panels(f, a, b, cfg, pass_owner=True)
    with np.errstate(divide="ignore"):
        return np.log(vals)


class ContinuousDistribution(ABC):
    """Absolutely continuous lifetime law on ``[support_lo, support_hi]``.

    Subclasses provide ``logsf``, ``logcdf`` and ``logpdf``.  ``scale`` is a
    characteristic length used to condition tail quadrature and quantile
    bracketing.
    """

    support_lo: float = 0.0
    support_hi: float = math.inf
    scale: float = 1.0
    quad: QuadratureConfig = FINE_QUAD

    @abstractmethod
    def logsf(self, x): ...

    @abstractmethod
    def logcdf(self, x): ...

    @abstractmethod
    def logpdf(self, x): ...

    def sf(self, x):
        return _out(np.exp(self.logsf(x)))

    def cdf(self, x):
        return _out(np.exp(self.logcdf(x)))

    def pdf(self, x):
        return _out(np.exp(self.logpdf(x)))

    def hazard(self, x):
        """``f / sf``; NaN where the survival function vanishes."""
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            r = np.exp(_arr(self.logpdf(x)) - _arr(self.logsf(x)))
        return _out(np.where(np.isfinite(r), r, np.nan))

    def reversed_hazard(self, x):
        """``f / F``; NaN where the distribution function vanishes."""
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            r = np.exp(_arr(self.logpdf(x)) - _arr(self.logcdf(x)))
        return _out(np.where(np.isfinite(r), r, np.nan))

    # -- integrated sf / cdf ------------------------------------------------

    def log_tail_integral(self, x):
        """``log int_x^inf sf(u) du``, all points from one cumulative table."""
        x = _arr(x)
        pts = np.unique(np.clip(x.ravel(), self.support_lo, self.support_hi))
        pts = pts[pts < self.support_hi]
        vals = np.full(pts.shape, NEG_INF)
        if pts.size:
            offsets = _arr(self.logsf(pts))
            live = np.isfinite(offsets)
            pieces = np.full(pts.shape, NEG_INF)  # piece i covers [pts[i], pts[i+1]]
            idx = np.nonzero(live[:-1])[0]
            if idx.size:
                pieces[idx] = offsets[idx] + _log_panels(
                    self.logsf, pts[idx], pts[idx + 1], offsets[idx], self.quad)
            if live[-1]:
                pieces[-1] = offsets[-1] + self._log_last_tail(pts[-1], offsets[-1])
            vals = np.logaddexp.accumulate(pieces[::-1])[::-1]
        out = np.full(x.shape, NEG_INF)
        inside = x < self.support_hi
        if pts.size:
            pos = np.searchsorted(pts, np.clip(x[inside], self.support_lo, self.support_hi))
            out[inside] = vals[pos]
        return _out(out)

    def _log_last_tail(self, start, offset):
        if math.isfinite(self.support_hi):
            return float(_log_panels(self.logsf, np.array([start]), np.array([self.support_hi]),
                                     np.array([offset]), self.quad)[0])
        sigma = self.scale

        def g(s):
            with np.errstate(under="ignore"):
                return np.exp(_arr(self.logsf(start + sigma * s)) - offset)

        try:
            val = integrate(g, 0.0, math.inf, self.quad, points=[1.0, 5.0, 25.0])
        except ConvergenceError:
            # a tail no lighter than 1/u has no finite mean
            far = np.array([1e6, 1e8])
            if np.all(far * g(far) > 1e-12):
                return math.inf
            raise
        return math.log(sigma * val) if val > 0 else NEG_INF

    def log_head_integral(self, x):
        """``log int_{support_lo}^x F(u) du``."""
        x = _arr(x)
        pts = np.unique(np.clip(x.ravel(), self.support_lo, self.support_hi))
        pts = pts[pts > self.support_lo]
        vals = np.full(pts.shape, NEG_INF)
        if pts.size:
            left = np.concatenate([[self.support_lo], pts[:-1]])
            offsets = _arr(self.logcdf(pts))
            live = np.isfinite(offsets)
            pieces = np.full(pts.shape, NEG_INF)
            if live.any():
                pieces[live] = offsets[live] + _log_panels(
                    self.logcdf, left[live], pts[live], offsets[live], self.quad)
            vals = np.logaddexp.accumulate(pieces)
        out = np.full(x.shape, NEG_INF)
        inside = x > self.support_lo
        if pts.size:
            pos = np.searchsorted(pts, np.clip(x[inside], self.support_lo, self.support_hi))
            out[inside] = vals[pos]
        return _out(out)

    def mrl(self, x):
        """Mean residual life ``int_x^inf sf(u) du / sf(x)``."""
        with np.errstate(invalid="ignore"):
            m = np.exp(_arr(self.log_tail_integral(x)) - _arr(self.logsf(x)))
        return _out(np.where(np.isfinite(m), m, np.nan))

    def mit(self, x):
        """Mean inactivity time ``int_0^x F(u) du / F(x)``."""
        with np.errstate(invalid="ignore"):
            m = np.exp(_arr(self.log_head_integral(x)) - _arr(self.logcdf(x)))
        return _out(np.where(np.isfinite(m), m, np.nan))

    def quantile(self, u):
        """Inverse cdf by bisection on ``cdf``."""
        u = _arr(u)
        out = np.array([self._quantile_scalar(float(ui)) for ui in u.ravel()]).reshape(u.shape)
        return _out(out)

    def _quantile_scalar(self, u):
        if not 0.0 < u < 1.0:
            raise DomainError(f"quantile level must lie in (0, 1), got {u}")
        lo, hi = self.support_lo, self.support_hi
        if not math.isfinite(hi):
            hi = lo + self.scale
            while self.cdf(hi) < u:
                hi = lo + 2.0 * (hi - lo)
                if hi > 1e300:
                    raise ConvergenceError("could not bracket quantile")
        try:
            return bisect(lambda z: self.cdf(z) - u, lo, hi, x_tol=1e-14)
        except ConvergenceError as exc:
            raise ConvergenceError(f"quantile bisection failed at u={u}") from exc


# ---------------------------------------------------------------------------
# parametric baselines


@dataclass(frozen=True)
class WeibullParams:
    scale: float
    shape: float

    def __post_init__(self):
        if not (self.scale > 0 and self.shape > 0):
            raise DomainError(f"Weibull needs scale > 0 and shape > 0, got {self}")


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError(f"gamma needs shape > 0 and rate > 0, got {self}")


class Weibull(ContinuousDistribution):
    """Weibull law with ``F(x) = 1 - exp(-(x / scale) ** shape)``."""

    def __init__(self, params: WeibullParams):
        self.params = params
        self.scale = params.scale
        self.shape = params.shape

    def __repr__(self):
        return f"Weibull(scale={self.scale!r}, shape={self.shape!r})"

    def cumhaz(self, x):
        x = np.maximum(_arr(x), 0.0)
        return (x / self.scale) ** self.shape

    def logsf(self, x):
        return _out(-self.cumhaz(x))

    def logcdf(self, x):
        return _out(log1mexp(-self.cumhaz(x)))

    def logpdf(self, x):
        x = _arr(x)
        k, b = self.shape, self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.maximum(x, 0.0) / b
            val = math.log(k / b) + (k - 1.0) * np.log(z) - z ** k
            if k == 1.0:
                val = math.log(1.0 / b) - z
        return _out(np.where(x < 0, NEG_INF, val))

    def hazard(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (self.shape / self.scale) * (np.maximum(x, 0.0) / self.scale) ** (self.shape - 1.0)
        return _out(np.where(np.isfinite(r) & (x >= 0), r, np.nan))

    def log_tail_integral(self, x):
        # int_x^inf exp(-(u/b)^k) du = (b/k) Gamma(1/k, (x/b)^k)
        z = self.cumhaz(x)
        return _out(math.log(self.scale / self.shape)
                    + _arr(log_upper_incomplete_gamma(1.0 / self.shape, z)))

    def quantile(self, u):
        u = _arr(u)
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("quantile level must lie in (0, 1)")
        return _out(self.scale * (-np.log1p(-u)) ** (1.0 / self.shape))


def make_weibull(params: WeibullParams) -> Weibull:
    return Weibull(params)


def exponential(rate: float = 1.0) -> Weibull:
    if not rate > 0:
        raise DomainError("exponential rate must be positive")
    return Weibull(WeibullParams(1.0 / rate, 1.0))


class GammaLifetime(ContinuousDistribution):
    """Gamma lifetime with density ``rate^shape x^(shape-1) e^(-rate x) / Gamma(shape)``."""

    def __init__(self, params: GammaParams):
        self.params = params
        self.shape = params.shape
        self.rate = params.rate
        self.scale = params.shape / params.rate

    def __repr__(self):
        return f"GammaLifetime(shape={self.shape!r}, rate={self.rate!r})"

    def logsf(self, x):
        z = self.rate * np.maximum(_arr(x), 0.0)
        return _out(log_regularized_upper_incomplete_gamma(self.shape, z))

    def logcdf(self, x):
        z = self.rate * np.maximum(_arr(x), 0.0)
        return _out(log_regularized_lower_incomplete_gamma(self.shape, z))

    def logpdf(self, x):
        x = _arr(x)
        a, r = self.shape, self.rate
        with np.errstate(divide="ignore", invalid="ignore"):
            val = a * math.log(r) - math.lgamma(a) + (a - 1.0) * np.log(np.maximum(x, 0.0)) - r * x
            if a == 1.0:
                val = math.log(r) - r * x
        return _out(np.where(x < 0, NEG_INF, val))


class UniformLifetime(ContinuousDistribution):
    """Uniform lifetime on ``[lo, hi]``."""

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        if not (0.0 <= lo < hi):
            raise DomainError(f"uniform lifetime needs 0 <= lo < hi, got ({lo}, {hi})")
        self.support_lo, self.support_hi = float(lo), float(hi)
        self.scale = hi - lo

    def __repr__(self):
        return f"UniformLifetime(lo={self.support_lo!r}, hi={self.support_hi!r})"

    def _u(self, x):
        return np.clip((_arr(x) - self.support_lo) / (self.support_hi - self.support_lo), 0.0, 1.0)

    def logsf(self, x):
        with np.errstate(divide="ignore"):
            return _out(np.log1p(-self._u(x)))

    def logcdf(self, x):
        with np.errstate(divide="ignore"):
            return _out(np.log(self._u(x)))

    def logpdf(self, x):
        x = _arr(x)
        inside = (x >= self.support_lo) & (x <= self.support_hi)
        return _out(np.where(inside, -math.log(self.support_hi - self.support_lo), NEG_INF))


class ExpQuadratic(ContinuousDistribution):
    """Bounded law on ``[0, upper]`` with ``F(x) = expm1(rate x^2) / expm1(rate upper^2)``.

    Its reversed hazard ``2 rate x / (1 - exp(-rate x^2))`` increases once
    ``rate x^2`` exceeds about 1.8, so the cdf is log-convex on the upper
    part of the support.  Used as an increasing-reversed-failure-rate
    baseline, which no law with unbounded-below-free support can be
    globally.
    """

    def __init__(self, rate: float, upper: float):
        if not (rate > 0 and upper > 0):
            raise DomainError("expquad needs rate > 0 and upper > 0")
        self.rate, self.support_hi = float(rate), float(upper)
        self.scale = upper
        self._top = rate * upper * upper
        self._log_norm = self._top + float(log1mexp(-self._top))  # log expm1(top)

    def __repr__(self):
        return f"ExpQuadratic(rate={self.rate!r}, upper={self.support_hi!r})"

    def _y(self, x):
        x = np.clip(_arr(x), 0.0, self.support_hi)
        return self.rate * x * x

    def logcdf(self, x):
        y = self._y(x)
        with np.errstate(divide="ignore"):
            log_expm1 = np.where(y > 30.0, y + log1mexp(-np.maximum(y, 30.0)),
                                 np.log(np.expm1(np.minimum(y, 30.0))))
        return _out(log_expm1 - self._log_norm)

    def logsf(self, x):
        y = self._y(x)
        return _out(self._top + log1mexp(y - self._top) - self._log_norm)

    def logpdf(self, x):
        x = _arr(x)
        inside = (x >= 0) & (x <= self.support_hi)
        with np.errstate(divide="ignore"):
            val = np.log(2.0 * self.rate * np.maximum(x, 0.0)) + self._y(x) - self._log_norm
        return _out(np.where(inside, val, NEG_INF))


class PdfDistribution(ContinuousDistribution):
    """Distribution given only by a density, with cdf/sf from quadrature.

    A table of cumulative masses at knots is built eagerly; queries add one
    short panel integral to the nearest knot.  The smaller of the two tail
    masses is computed directly and the other as its complement, so
    ``cdf + sf == 1`` to rounding.
    """

    _KNOTS = np.concatenate([np.linspace(0.0, 1.0, 21)[:-1], np.linspace(1.0, 8.0, 29)[:-1],
                             np.linspace(8.0, 60.0, 27)])

    def __init__(self, pdf: Callable, support_lo: float = 0.0, support_hi: float = math.inf,
                 scale: float = 1.0, normalize: bool = False, quad: QuadratureConfig = FINE_QUAD):
        self._raw_pdf = pdf
        self.support_lo, self.support_hi = float(support_lo), float(support_hi)
        self.scale = float(scale)
        self.quad = quad
        total = integrate(self._eval_raw, self.support_lo, self.support_hi, quad)
        if not normalize and abs(total - 1.0) > 1e-6:
            raise DomainError(f"density integrates to {total:.9g}, not 1")
        self._norm = total
        if math.isfinite(self.support_hi):
            knots = np.linspace(self.support_lo, self.support_hi, 65)
        else:
            knots = self.support_lo + self.scale * self._KNOTS
        self._knots = knots
        pieces = integrate_panels(self._density, knots[:-1], knots[1:], quad)
        if math.isfinite(self.support_hi):
            last_tail = 0.0
        else:
            last_tail = integrate(self._density, knots[-1], math.inf, quad)
        self._head = np.concatenate([[0.0], np.cumsum(pieces)])
        tails = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + last_tail
        self._tail = tails

    def __repr__(self):
        return f"PdfDistribution({getattr(self._raw_pdf, '__name__', 'pdf')})"

    def _eval_raw(self, x):
        x = _arr(x)
        try:
            y = np.asarray(self._raw_pdf(x), dtype=float)
            if y.shape != x.shape:
                raise TypeError
        except (TypeError, ValueError):
            y = np.array([float(self._raw_pdf(v)) for v in x.ravel()]).reshape(x.shape)
        inside = (x >= self.support_lo) & (x <= self.support_hi)
        return np.where(inside, y, 0.0)

    def _density(self, x):
        return self._eval_raw(x) / getattr(self, "_norm", 1.0)

    def _masses(self, x):
        x = np.clip(_arr(x), self.support_lo, self.support_hi)
        flat = x.ravel()
        k = np.clip(np.searchsorted(self._knots, flat, side="right") - 1, 0, self._knots.size - 1)
        head = self._head[k] + integrate_panels(self._density, self._knots[k], flat, self.quad)
        tail = np.empty_like(flat)
        inner = k < self._knots.size - 1
        kk = k[inner]
        tail[inner] = self._tail[kk + 1] + integrate_panels(
            self._density, flat[inner], self._knots[kk + 1], self.quad)
        for i in np.nonzero(~inner)[0]:
            tail[i] = integrate(self._density, flat[i], self.support_hi, self.quad)
        use_head = head <= tail
        cdf = np.where(use_head, head, 1.0 - tail)
        sf = np.where(use_head, 1.0 - head, tail)
        return np.maximum(cdf, 0.0).reshape(x.shape), np.maximum(sf, 0.0).reshape(x.shape)

    def logcdf(self, x):
        with np.errstate(divide="ignore"):
            return _out(np.log(self._masses(x)[0]))

    def logsf(self, x):
        with np.errstate(divide="ignore"):
            return _out(np.log(self._masses(x)[1]))

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return _out(np.log(self._density(x)))


def distribution_from_pdf(pdf: Callable, support_lo: float = 0.0, support_hi: float = math.inf,
                          scale: float = 1.0) -> PdfDistribution:
    """Build a lifetime law from a density that integrates to one (within 1e-6)."""
    return PdfDistribution(pdf, support_lo, support_hi, scale)


def make_gamma_pdf_distribution(pdf: Callable | None = None, support_lo: float = 0.0,
                                support_hi: float = math.inf, scale: float = 1.0) -> PdfDistribution:
    """Tabulated law for a user density; defaults to the gamma density ``x e^-x``."""
    if pdf is None:
        def pdf(x):
            return x * np.exp(-x)
    return PdfDistribution(pdf, support_lo, support_hi, scale)


# ---------------------------------------------------------------------------
# mixing laws


class MixingDistribution(ABC):
    """Law of the frailty (or resilience) variable.

    The core quantity is the scaled Laplace transform
    ``E[L^m exp(-s L)]``, returned in log space by :meth:`log_laplace`
    (closed form) and :meth:`log_laplace_quadrature` (integration against
    the density).  Mixture models only ever need ``m`` in ``{0, 1}``.
    """

    support_lo: float
    support_hi: float

    @property
    def support_in_unit_interval(self) -> bool:
        return self.support_lo >= 0.0 and self.support_hi <= 1.0

    @property
    def support_geq_one(self) -> bool:
        return self.support_lo >= 1.0

    @abstractmethod
    def logpdf(self, lam): ...

    @abstractmethod
    def log_laplace(self, s, m: int = 0): ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray: ...

    def pdf(self, lam):
        return _out(np.exp(self.logpdf(lam)))

    def log_laplace_quadrature(self, s, m: int = 0, cfg: QuadratureConfig = FINE_QUAD):
        """``log E[L^m exp(-s L)]`` by adaptive quadrature against the density."""
        s_arr = _arr(s)
        out = np.empty(s_arr.shape)
        lo, hi = self.support_lo, self.support_hi
        for idx in np.ndindex(s_arr.shape):
            si = float(s_arr[idx])
            shift = si * lo

            def integrand(lam, si=si, shift=shift):
                lam = _arr(lam)
                with np.errstate(divide="ignore", under="ignore"):
                    lm = m * np.log(lam) if m else 0.0
                    return np.exp(lm - si * lam + shift + _arr(self.logpdf(lam)))

            breaks = [lo + c / si for c in (1.0, 8.0, 40.0)] if si > 0 else []
            breaks = [p for p in breaks if p < hi]
            if lo == 0.0 and m == 0:
                breaks.append(min(hi, 1.0) * 1e-3)
            val = integrate(integrand, lo, hi, cfg, points=breaks)
            out[idx] = math.log(val) - shift if val > 0 else NEG_INF
        return _out(out)


class GammaMixing(MixingDistribution):
    """Gamma(shape, rate) on ``(0, inf)``."""

    def __init__(self, params: GammaParams):
        self.params = params
        self.shape, self.rate = params.shape, params.rate
        self.support_lo, self.support_hi = 0.0, math.inf

    def __repr__(self):
        return f"GammaMixing(shape={self.shape!r}, rate={self.rate!r})"

    def logpdf(self, lam):
        lam = _arr(lam)
        a, b = self.shape, self.rate
        with np.errstate(divide="ignore", invalid="ignore"):
            val = a * math.log(b) - math.lgamma(a) + (a - 1.0) * np.log(lam) - b * lam
        return _out(np.where(lam > 0, val, NEG_INF))

    def log_laplace(self, s, m: int = 0):
        s = _arr(s)
        a, b = self.shape, self.rate
        # log1p keeps 1 - E[exp(-s L)] accurate for small s
        return _out(math.lgamma(a + m) - math.lgamma(a) - m * math.log(b) - (a + m) * np.log1p(s / b))

    def sample(self, rng, n):
        return rng.gamma(self.shape, 1.0 / self.rate, size=n)


class TruncatedGammaMixing(MixingDistribution):
    """Gamma(shape, rate) conditioned on ``[lower, inf)``."""

    def __init__(self, params: GammaParams, lower: float = 1.0):
        if not lower > 0:
            raise DomainError("truncation point must be positive")
        self.params = params
        self.shape, self.rate = params.shape, params.rate
        self.support_lo, self.support_hi = float(lower), math.inf
        self._log_mass = float(log_regularized_upper_incomplete_gamma(self.shape, self.rate * lower))

    def __repr__(self):
        return (f"TruncatedGammaMixing(shape={self.shape!r}, rate={self.rate!r}, "
                f"lower={self.support_lo!r})")

    def logpdf(self, lam):
        lam = _arr(lam)
        a, b = self.shape, self.rate
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (a * math.log(b) - math.lgamma(a) + (a - 1.0) * np.log(lam) - b * lam
                   - self._log_mass)
        return _out(np.where(lam >= self.support_lo, val, NEG_INF))

    def log_laplace(self, s, m: int = 0):
        # int_L^inf l^m e^{-s l} b^a l^{a-1} e^{-b l} / Gamma(a) dl / Q(a, bL)
        s = _arr(s)
        a, b, low = self.shape, self.rate, self.support_lo
        if m == 0:
            # two negative terms, so the sum stays accurate as s -> 0
            return _out(-a * np.log1p(s / b) + log_upper_incomplete_gamma_step(a, b * low, s * low))
        rate = b + s
        return _out(a * math.log(b) - (a + m) * np.log(rate)
                    + _arr(log_upper_incomplete_gamma(a + m, rate * low))
                    - math.lgamma(a) - self._log_mass)

    def sample(self, rng, n):
        out = np.empty(0)
        while out.size < n:
            draw = rng.gamma(self.shape, 1.0 / self.rate, size=max(2 * n, 64))
            out = np.concatenate([out, draw[draw >= self.support_lo]])
        return out[:n]


def _alternating_series(z, coef):
    # sum_{n>=1} coef(n) (-z)^n / n!  for 0 <= z < 1, to double precision
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(1, 30):
        term = term * (-z) / n
        total = total + coef(n) * term
    return total


def _log_phi(z):
    # log((1 - e^-z) / z), z >= 0; the series keeps relative accuracy as z -> 0
    z = _arr(z)
    small = z < 1.0
    zs = np.where(small, z, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        big = np.log(-np.expm1(-z)) - np.log(z)
    series = np.log1p(_alternating_series(zs, lambda n: 1.0 / (n + 1)))
    return np.where(small, series, big)


def _log_psi(z):
    # log(int_0^1 u e^{-z u} du) = log((1 - e^-z (1 + z)) / z^2), z >= 0
    z = _arr(z)
    small = z < 1.0
    zs = np.where(small, z, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        num = -np.expm1(-z) - z * np.exp(-z)
        big = np.log(num) - 2.0 * np.log(z)
    series = np.log(0.5 + _alternating_series(zs, lambda n: 1.0 / (n + 2)))
    return np.where(small, series, big)


class UniformMixing(MixingDistribution):
    """Uniform mixing law on ``[lo, hi]``, ``0 <= lo < hi``."""

    def __init__(self, lo: float, hi: float):
        if not (0.0 <= lo < hi < math.inf):
            raise DomainError(f"uniform mixing needs 0 <= lo < hi, got ({lo}, {hi})")
        self.support_lo, self.support_hi = float(lo), float(hi)

    def __repr__(self):
        return f"UniformMixing(lo={self.support_lo!r}, hi={self.support_hi!r})"

    def logpdf(self, lam):
        lam = _arr(lam)
        inside = (lam >= self.support_lo) & (lam <= self.support_hi)
        return _out(np.where(inside, -math.log(self.support_hi - self.support_lo), NEG_INF))

    def log_laplace(self, s, m: int = 0):
        s = _arr(s)
        lo, w = self.support_lo, self.support_hi - self.support_lo
        if m == 0:
            return _out(-s * lo + _log_phi(s * w))
        if m == 1:
            # E[L e^{-sL}] = e^{-s lo} (lo phi(sw) + w psi(sw))
            with np.errstate(divide="ignore"):
                first = math.log(lo) + _log_phi(s * w) if lo > 0 else np.full(s.shape, NEG_INF)
            return _out(-s * lo + np.logaddexp(first, math.log(w) + _log_psi(s * w)))
        raise DomainError("uniform mixing Laplace transform implemented for m in {0, 1}")

    def sample(self, rng, n):
        return rng.uniform(self.support_lo, self.support_hi, size=n)


class DegenerateMixing(MixingDistribution):
    """Point mass at ``value``; mixtures reduce to the proportional model."""

    def __init__(self, value: float):
        if not value > 0:
            raise DomainError("degenerate mixing value must be positive")
        self.value = float(value)
        self.support_lo = self.support_hi = self.value

    def __repr__(self):
        return f"DegenerateMixing({self.value!r})"

    def logpdf(self, lam):
        raise DomainError("degenerate mixing has no density")

    def log_laplace(self, s, m: int = 0):
        s = _arr(s)
        return _out(m * math.log(self.value) - s * self.value)

    def log_laplace_quadrature(self, s, m: int = 0, cfg=FINE_QUAD):
        return self.log_laplace(s, m)

    def sample(self, rng, n):
        return np.full(n, self.value)


def gamma_frailty_mixing(a: float, lower: float = 1.0) -> TruncatedGammaMixing:
    """Gamma(1/a^2, rate 1/a^2) restricted to ``[lower, inf)``."""
    if not a > 0:
        raise DomainError("a must be positive")
    alpha = 1.0 / (a * a)
    return TruncatedGammaMixing(GammaParams(alpha, alpha), lower)


def mixing_sample_support_check(mixing: MixingDistribution, predicate: str) -> bool:
    """Support condition read off the parameters: ``"unit-interval"`` or ``"geq-one"``."""
    if predicate in ("unit-interval", "unit"):
        return mixing.support_in_unit_interval and mixing.support_hi > 0
    if predicate in ("geq-one", "geq_one"):
        return mixing.support_geq_one
    raise DomainError(f"unknown support predicate {predicate!r}")


# ---------------------------------------------------------------------------
# text specs, e.g. "weibull scale=986.672 shape=1.24044"


def parse_spec(text: str) -> tuple[str, dict[str, str]]:
    """Split ``family key=value ...`` into the family name and raw values."""
    tokens = shlex.split(text)
    if not tokens:
        raise DomainError("empty distribution spec")
    family, params = tokens[0].lower(), {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise DomainError(f"expected key=value, got {tok!r} in {text!r}")
        key, value = tok.split("=", 1)
        params[key.lower()] = value
    return family, params


def _floats(params: dict[str, str], *names, **defaults) -> list[float]:
    unknown = set(params) - set(names) - set(defaults)
    if unknown:
        raise DomainError(f"unexpected parameters {sorted(unknown)}")
    out = []
    for name in names:
        if name not in params:
            raise DomainError(f"missing parameter {name!r}")
        out.append(float(params[name]))
    for name, default in defaults.items():
        out.append(float(params.get(name, default)))
    return out


def parse_distribution(text: str) -> ContinuousDistribution:
    """Parse a baseline spec.

    Families: ``weibull scale= shape=``, ``exponential rate=``,
    ``gamma shape= rate=``, ``gammapdf`` (density ``x e^-x``),
    ``uniform lo= hi=``, ``expquad rate= upper=``.
    """
    family, params = parse_spec(text)
    if family == "weibull":
        scale, shape = _floats(params, "scale", "shape")
        return Weibull(WeibullParams(scale, shape))
    if family in ("exponential", "exp"):
        (rate,) = _floats(params, rate=1.0)
        return exponential(rate)
    if family == "gamma":
        shape, rate = _floats(params, "shape", rate=1.0)
        return GammaLifetime(GammaParams(shape, rate))
    if family == "gammapdf":
        _floats(params)
        return GammaLifetime(GammaParams(2.0, 1.0))
    if family == "uniform":
        lo, hi = _floats(params, lo=0.0, hi=1.0)
        return UniformLifetime(lo, hi)
    if family == "expquad":
        rate, upper = _floats(params, "rate", "upper")
        return ExpQuadratic(rate, upper)
    raise DomainError(f"unknown distribution family {family!r}")


def parse_mixing(text: str) -> MixingDistribution:
    """Parse a mixing spec.

    Families: ``gamma shape= rate=``, ``truncgamma shape= rate= lower=``,
    ``gammafrailty a= [lower=1]`` (Gamma(1/a^2, 1/a^2) on ``[lower, inf)``),
    ``uniform lo= hi=``, ``degenerate value=``.
    """
    family, params = parse_spec(text)
    if family == "gamma":
        shape, rate = _floats(params, "shape", "rate")
        return GammaMixing(GammaParams(shape, rate))
    if family == "truncgamma":
        shape, rate, lower = _floats(params, "shape", "rate", lower=1.0)
        return TruncatedGammaMixing(GammaParams(shape, rate), lower)
    if family == "gammafrailty":
        a, lower = _floats(params, "a", lower=1.0)
        return gamma_frailty_mixing(a, lower)
    if family == "uniform":
        lo, hi = _floats(params, "lo", "hi")
        return UniformMixing(lo, hi)
    if family == "degenerate":
        (value,) = _floats(params, "value")
        return DegenerateMixing(value)
    raise DomainError(f"unknown mixing family {family!r}")
