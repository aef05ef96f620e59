"""Frailty and resilience mixtures of a baseline lifetime law.

Frailty:    sf*(t)  = E[sf(t) ** L]   (L multiplies the hazard)
Resilience: cdf*(t) = E[cdf(t) ** W]  (W multiplies the reversed hazard)

With ``s = -log sf(t)`` (or ``-log cdf(t)``) both reduce to the Laplace
transform of the mixing law: ``log sf* = log E[exp(-s L)]`` and
``f* = hazard(t) * E[L exp(-s L)]``.  Working with ``s`` instead of the
powered survival function keeps the leukaemia time scale (``sf`` far below
1e-300) finite.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .distributions import (
    ContinuousDistribution,
    DegenerateMixing,
    MixingDistribution,
    Weibull,
    WeibullParams,
    gamma_frailty_mixing,
    parse_distribution,
    parse_mixing,
    parse_spec,
)
from .numerics import (
    DomainError,
    QuadratureConfig,
    log1mexp,
    log_upper_incomplete_gamma,
    log_upper_incomplete_gamma_step,
)

__all__ = [
    "TailDomainWarning",
    "FrailtyModel",
    "ResilienceModel",
    "frailty_sf",
    "frailty_pdf",
    "resilience_cdf",
    "resilience_pdf",
    "GammaFrailtyWeibull",
    "GammaResilienceWeibull",
    "gamma_frailty_closed_form",
    "gamma_resilience_closed_form",
    "generic_gamma_model",
    "parse_model",
]

NEG_INF = -np.inf
_METHODS = ("auto", "quadrature")


class TailDomainWarning(RuntimeWarning):
    """Mixture density requested where the baseline tail mass is exactly zero."""


def _arr(x):
    return np.asarray(x, dtype=float)


def _out(y):
    y = np.asarray(y, dtype=float)
    return float(y) if y.ndim == 0 else y


class _Mixture(ContinuousDistribution):
    def __init__(self, baseline: ContinuousDistribution, mixing: MixingDistribution,
                 method: str = "auto", quad: QuadratureConfig | None = None):
        if method not in _METHODS:
            raise DomainError(f"method must be one of {_METHODS}, got {method!r}")
        self.baseline = baseline
        self.mixing = mixing
        self.method = method
        self.support_lo = baseline.support_lo
        self.support_hi = baseline.support_hi
        self.scale = baseline.scale
        if quad is not None:
            self.quad = quad

    def __repr__(self):
        return f"{type(self).__name__}({self.baseline!r}, {self.mixing!r})"

    def _log_laplace(self, s, m):
        s = _arr(s)
        out = np.full(s.shape, NEG_INF)
        live = np.isfinite(s)
        if live.any():
            if self.method == "quadrature" and not isinstance(self.mixing, DegenerateMixing):
                out[live] = self.mixing.log_laplace_quadrature(s[live], m, self.quad)
            else:
                out[live] = self.mixing.log_laplace(s[live], m)
        return out

    def _warn_if_dead(self, s, x):
        dead = ~np.isfinite(s) & (x > self.support_lo) & (x < self.support_hi)
        if dead.any() and self.mixing.support_lo < 1.0:
            warnings.warn("baseline tail mass underflows to zero inside the support; "
                          "mixture density reported as 0 there", TailDomainWarning, stacklevel=3)


class FrailtyModel(_Mixture):
    """Frailty mixture ``sf*(t) = E[sf(t) ** L]``.

    ``method="auto"`` uses the closed-form Laplace transform of the mixing
    law; ``"quadrature"`` integrates against its density instead.
    """

    def _s(self, x):
        return -_arr(self.baseline.logsf(x))

    def logsf(self, x):
        return _out(self._log_laplace(self._s(x), 0))

    def logcdf(self, x):
        return _out(log1mexp(self._log_laplace(self._s(x), 0)))

    def logpdf(self, x):
        x = _arr(x)
        s = self._s(x)
        self._warn_if_dead(s, x)
        with np.errstate(invalid="ignore"):
            log_h = _arr(self.baseline.logpdf(x)) + s
        log_h = np.where(np.isfinite(s), log_h, NEG_INF)
        return _out(log_h + self._log_laplace(s, 1))


class ResilienceModel(_Mixture):
    """Resilience mixture ``cdf*(t) = E[cdf(t) ** W]``."""

    def _s(self, x):
        return -_arr(self.baseline.logcdf(x))

    def logcdf(self, x):
        return _out(self._log_laplace(self._s(x), 0))

    def logsf(self, x):
        return _out(log1mexp(self._log_laplace(self._s(x), 0)))

    def logpdf(self, x):
        x = _arr(x)
        s = self._s(x)
        self._warn_if_dead(s, x)
        with np.errstate(invalid="ignore"):
            log_rh = _arr(self.baseline.logpdf(x)) + s
        log_rh = np.where(np.isfinite(s), log_rh, NEG_INF)
        return _out(log_rh + self._log_laplace(s, 1))


def frailty_sf(model: FrailtyModel, t):
    return model.sf(t)


def frailty_pdf(model: FrailtyModel, t):
    return model.pdf(t)


def resilience_cdf(model: ResilienceModel, t):
    return model.cdf(t)


def resilience_pdf(model: ResilienceModel, t):
    return model.pdf(t)


# ---------------------------------------------------------------------------
# gamma mixing over a Weibull baseline, closed forms
#
# With L ~ Gamma(alpha, rate b) restricted to [1, inf), alpha = b = 1/a^2:
#   E[exp(-s L)]   = b^alpha (b+s)^-alpha     G(alpha,   b+s) / G(alpha, b)
#   E[L exp(-s L)] = b^alpha (b+s)^-alpha-1   G(alpha+1, b+s) / G(alpha, b)
# where G is the upper incomplete gamma function.


class _GammaWeibull(ContinuousDistribution):
    def __init__(self, baseline: WeibullParams, a: float):
        if not a > 0:
            raise DomainError("a must be positive")
        self.params = baseline
        self.a = float(a)
        self.alpha = 1.0 / (a * a)
        self.weibull = Weibull(baseline)
        self.scale = baseline.scale
        self._log_norm = self.alpha * math.log(self.alpha) - float(
            log_upper_incomplete_gamma(self.alpha, self.alpha))

    def __repr__(self):
        return (f"{type(self).__name__}(scale={self.params.scale!r}, "
                f"shape={self.params.shape!r}, a={self.a!r})")

    def _log_e0(self, s):
        s = _arr(s)
        return -self.alpha * np.log1p(s / self.alpha) + log_upper_incomplete_gamma_step(self.alpha, self.alpha, s)

    def _log_e1(self, s):
        z = self.alpha + s
        return (self._log_norm - (self.alpha + 1.0) * np.log(z)
                + _arr(log_upper_incomplete_gamma(self.alpha + 1.0, z)))


class GammaFrailtyWeibull(_GammaWeibull):
    """Closed-form gamma frailty model over a Weibull baseline."""

    def logsf(self, x):
        return _out(self._log_e0(self.weibull.cumhaz(x)))

    def logcdf(self, x):
        return _out(log1mexp(self._log_e0(self.weibull.cumhaz(x))))

    def logpdf(self, x):
        x = _arr(x)
        k, beta = self.params.shape, self.params.scale
        with np.errstate(divide="ignore"):
            log_h = math.log(k / beta) + (k - 1.0) * np.log(np.maximum(x, 0.0) / beta)
        return _out(np.where(x < 0, NEG_INF, log_h + self._log_e1(self.weibull.cumhaz(x))))


class GammaResilienceWeibull(_GammaWeibull):
    """Closed-form gamma resilience model over a Weibull baseline."""

    def _s(self, x):
        # -log(1 - exp(-H)), guarded where 1 - exp(-H) underflows at t -> 0
        return -_arr(self.weibull.logcdf(x))

    def logcdf(self, x):
        s = self._s(x)
        with np.errstate(invalid="ignore"):
            val = self._log_e0(np.where(np.isfinite(s), s, 0.0))
        return _out(np.where(np.isfinite(s), val, NEG_INF))

    def logsf(self, x):
        return _out(log1mexp(_arr(self.logcdf(x))))

    def logpdf(self, x):
        x = _arr(x)
        s = self._s(x)
        with np.errstate(invalid="ignore"):
            log_rh = _arr(self.weibull.logpdf(x)) + s
            val = log_rh + self._log_e1(np.where(np.isfinite(s), s, 0.0))
        return _out(np.where(np.isfinite(s), val, NEG_INF))


def gamma_frailty_closed_form(baseline: WeibullParams, a: float) -> GammaFrailtyWeibull:
    """Weibull baseline with Gamma(1/a^2, 1/a^2) frailty restricted to [1, inf)."""
    return GammaFrailtyWeibull(baseline, a)


def gamma_resilience_closed_form(baseline: WeibullParams, a: float) -> GammaResilienceWeibull:
    """Weibull baseline with Gamma(1/a^2, 1/a^2) resilience restricted to [1, inf)."""
    return GammaResilienceWeibull(baseline, a)


def generic_gamma_model(kind: str, baseline: WeibullParams, a: float,
                        method: str = "quadrature") -> _Mixture:
    """The same gamma mixture built from the generic mixture machinery."""
    cls = {"frailty": FrailtyModel, "resilience": ResilienceModel}[kind]
    return cls(Weibull(baseline), gamma_frailty_mixing(a), method=method)


def parse_model(text: str) -> _Mixture:
    """Parse ``frailty baseline="<spec>" mixing="<spec>" [method=quadrature]``."""
    kind, params = parse_spec(text)
    classes = {"frailty": FrailtyModel, "resilience": ResilienceModel}
    if kind not in classes:
        raise DomainError(f"model kind must be frailty or resilience, got {kind!r}")
    missing = {"baseline", "mixing"} - set(params)
    if missing:
        raise DomainError(f"model spec missing {sorted(missing)}")
    extra = set(params) - {"baseline", "mixing", "method"}
    if extra:
        raise DomainError(f"unexpected model parameters {sorted(extra)}")
    return classes[kind](parse_distribution(params["baseline"]), parse_mixing(params["mixing"]),
                         method=params.get("method", "auto"))
