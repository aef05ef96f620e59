"""Weibull baseline fitting, goodness of fit and the mixing parameter ``a``.

Estimation is two-stage: the Weibull baseline is fitted by maximum
likelihood first, then ``a`` of the Gamma(1/a^2, 1/a^2) mixing law on
``[1, inf)`` is fitted with the baseline held fixed.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .distributions import MixingDistribution, Weibull, WeibullParams
from .mixture import gamma_frailty_closed_form, gamma_resilience_closed_form
from .numerics import DomainError, OptimConfig, bisect, log1mexp, minimize_1d

__all__ = [
    "Sample",
    "load_sample",
    "FitResult",
    "ADResult",
    "AFit",
    "FlatLikelihoodWarning",
    "BoundaryWarning",
    "weibull_loglik",
    "weibull_mle",
    "anderson_darling_statistic",
    "anderson_darling_weibull",
    "qq_data",
    "frailty_loglik",
    "resilience_loglik",
    "fit_frailty_a",
    "fit_resilience_a",
    "a_diagnostics",
    "sample_frailty",
    "sample_resilience",
    "CHI2_1_95",
]

CHI2_1_95 = 3.841458820694124  # 0.95 quantile of chi-square with one degree of freedom
A_BRACKET = (0.05, 20.0)


class FlatLikelihoodWarning(RuntimeWarning):
    """Likelihood curvature at the optimum is too small to pin the estimate."""


class BoundaryWarning(RuntimeWarning):
    """Optimum sits on the edge of the search bracket."""


@dataclass(frozen=True)
class Sample:
    """Complete (uncensored) lifetimes."""

    observations: tuple[float, ...]
    label: str = "sample"

    def __post_init__(self):
        obs = tuple(float(v) for v in self.observations)
        if not obs:
            raise DomainError("sample is empty")
        if any(not (v > 0 and math.isfinite(v)) for v in obs):
            raise DomainError("observations must be positive and finite")
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "_sorted", np.sort(np.array(obs)))

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def values(self) -> np.ndarray:
        return np.array(self.observations)

    @property
    def sorted(self) -> np.ndarray:
        return self._sorted.copy()


def load_sample(path: str | Path, label: str | None = None) -> Sample:
    """Read lifetimes from a text/CSV file.

    One value per line (commas and whitespace also separate values); text
    after ``#`` is ignored.
    """
    path = Path(path)
    values = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for tok in re.split(r"[,\s;]+", line):
            if not tok:
                continue
            try:
                values.append(float(tok))
            except ValueError:
                raise DomainError(f"{path}:{lineno}: not a number: {tok!r}") from None
    return Sample(tuple(values), label or path.stem)


# ---------------------------------------------------------------------------
# Weibull maximum likelihood


@dataclass(frozen=True)
class FitResult:
    params: WeibullParams
    loglik: float
    ci_95: dict[str, tuple[float, float]]
    n: int
    method: str = "profile likelihood ratio"

    def to_dict(self):
        return {"scale": self.params.scale, "shape": self.params.shape, "loglik": self.loglik,
                "ci_95": {k: list(v) for k, v in self.ci_95.items()}, "n": self.n,
                "ci_method": self.method}


def weibull_loglik(x: np.ndarray, scale: float, shape: float) -> float:
    x = np.asarray(x, dtype=float)
    z = x / scale
    return float(np.sum(math.log(shape / scale) + (shape - 1.0) * np.log(z) - z ** shape))


def _profile_scale(x, k):
    # argmax over scale for fixed shape: (mean x^k)^(1/k), computed relative to max(x)
    m = x.max()
    return m * float(np.mean((x / m) ** k)) ** (1.0 / k)


def _profile_over_k(x):
    n, slog = x.size, float(np.sum(np.log(x)))

    def ll(k):
        return n * math.log(k) - n * k * math.log(_profile_scale(x, k)) + (k - 1.0) * slog - n

    return ll


def _best_k_given_scale(x, scale):
    cfg = OptimConfig(math.log(0.01), math.log(100.0), 1e-12, 500)
    lk, nll = minimize_1d(lambda u: -weibull_loglik(x, scale, math.exp(u)), cfg)
    return math.exp(lk), -nll


def _lr_interval(profile, center, ll_max, lo_limit, hi_limit):
    """Points where ``2 (ll_max - profile)`` crosses the chi-square(1) 95% quantile."""
    target = ll_max - CHI2_1_95 / 2.0

    def g(v):
        return profile(v) - target

    out = []
    for limit in (lo_limit, hi_limit):
        end = center
        step = 0.1 * center
        while True:
            probe = end - step if limit < center else end + step
            if (limit < center and probe <= limit) or (limit > center and probe >= limit):
                out.append(math.nan)
                break
            if g(probe) < 0:
                a, b = sorted((end, probe))
                out.append(bisect(g, a, b, x_tol=1e-10 * center))
                break
            end, step = probe, step * 1.5
    return out[0], out[1]


def weibull_mle(data: Sample | Sequence[float]) -> FitResult:
    """Complete-sample Weibull MLE with profile likelihood-ratio 95% intervals."""
    sample = data if isinstance(data, Sample) else Sample(tuple(data))
    x = sample.values
    if sample.n < 3:
        raise DomainError("Weibull fit needs at least three observations")
    if np.ptp(x) == 0:
        raise DomainError("degenerate sample: all observations are equal")
    prof_k = _profile_over_k(x)
    cfg = OptimConfig(math.log(0.02), math.log(200.0), 1e-12, 1000)
    lk, nll = minimize_1d(lambda u: -prof_k(math.exp(u)), cfg)
    k = math.exp(lk)
    beta = _profile_scale(x, k)
    ll = weibull_loglik(x, beta, k)
    k_ci = _lr_interval(prof_k, k, ll, 1e-3, 1e3)
    beta_ci = _lr_interval(lambda b: _best_k_given_scale(x, b)[1], beta, ll, 0.0, math.inf)
    ci = {"scale": tuple(map(float, beta_ci)), "shape": tuple(map(float, k_ci))}
    return FitResult(WeibullParams(float(beta), float(k)), float(ll), ci, sample.n)


# ---------------------------------------------------------------------------
# Anderson-Darling


@dataclass(frozen=True)
class ADResult:
    statistic: float
    p_value: float
    critical_value: float
    n_boot: int = 10_000
    seed: int = 20240101
    null: str = "fixed"

    def to_dict(self):
        return {"statistic": self.statistic, "p_value": self.p_value,
                "critical_value_5pct": self.critical_value, "n_boot": self.n_boot,
                "seed": self.seed, "null": self.null}


def anderson_darling_statistic(log_u: np.ndarray, log_1mu: np.ndarray) -> float | np.ndarray:
    """A^2 from sorted ``log u_(i)`` and ``log(1 - u_(i))`` (last axis is the sample)."""
    log_u = np.asarray(log_u, dtype=float)
    log_1mu = np.asarray(log_1mu, dtype=float)
    n = log_u.shape[-1]
    w = 2.0 * np.arange(1, n + 1) - 1.0
    s = np.sum(w * (log_u + log_1mu[..., ::-1]), axis=-1)
    return -n - s / n


def _ad_of_sample(x_sorted, params: WeibullParams):
    dist = Weibull(params)
    return float(anderson_darling_statistic(dist.logcdf(x_sorted), dist.logsf(x_sorted)))


def anderson_darling_weibull(data: Sample, params: WeibullParams, n_boot: int = 10_000,
                             seed: int = 20240101, null: str = "fixed") -> ADResult:
    """Anderson-Darling test of ``data`` against Weibull(``params``).

    ``null="fixed"`` treats the parameters as known, so the null law of A^2 is
    that of sorted uniforms; ``null="refit"`` simulates from the fitted law
    and refits every replicate (the estimated-parameter null).  The p-value
    is ``(1 + #{A*_b >= A}) / (n_boot + 1)`` and the critical value is the
    0.95 quantile of the replicates.
    """
    if null not in ("fixed", "refit"):
        raise DomainError("null must be 'fixed' or 'refit'")
    if n_boot < 1:
        raise DomainError("n_boot must be positive")
    x = data.sorted
    stat = _ad_of_sample(x, params)
    rng = np.random.default_rng(seed)
    n = data.n
    if null == "fixed":
        reps = np.empty(n_boot)
        for start in range(0, n_boot, 2000):
            m = min(2000, n_boot - start)
            u = np.sort(rng.random((m, n)), axis=1)
            reps[start:start + m] = anderson_darling_statistic(np.log(u), np.log1p(-u))
    else:
        dist = Weibull(params)
        reps = np.empty(n_boot)
        for b in range(n_boot):
            sim = np.sort(dist.quantile(rng.random(n)))
            fit = weibull_mle(Sample(tuple(sim)))
            reps[b] = _ad_of_sample(sim, fit.params)
    p = (1.0 + np.count_nonzero(reps >= stat)) / (n_boot + 1.0)
    return ADResult(stat, float(p), float(np.quantile(reps, 0.95)), n_boot, seed, null)


def qq_data(data: Sample, params: WeibullParams) -> list[tuple[float, float]]:
    """``(F^-1((i - 0.5)/n), x_(i))`` pairs."""
    n = data.n
    u = (np.arange(1, n + 1) - 0.5) / n
    theo = np.atleast_1d(Weibull(params).quantile(u))
    return [(float(a), float(b)) for a, b in zip(theo, data.sorted)]


# ---------------------------------------------------------------------------
# mixing parameter a


class AFit(NamedTuple):
    a: float
    loglik: float


def frailty_loglik(a: float, data: Sample, baseline: WeibullParams) -> float:
    return float(np.sum(gamma_frailty_closed_form(baseline, a).logpdf(data.values)))


def resilience_loglik(a: float, data: Sample, baseline: WeibullParams) -> float:
    return float(np.sum(gamma_resilience_closed_form(baseline, a).logpdf(data.values)))


_LOGLIK = {"frailty": frailty_loglik, "resilience": resilience_loglik}


def a_diagnostics(kind: str, data: Sample, baseline: WeibullParams, a: float,
                  bracket: tuple[float, float] = A_BRACKET) -> dict:
    """Boundary flag, curvature in ``log a`` and the log-likelihood at the bracket ends."""
    ll = _LOGLIK[kind]
    lo, hi = bracket
    h = 1e-3
    u = math.log(a)
    vals = [ll(math.exp(u + d), data, baseline) for d in (-h, 0.0, h)] if lo < a * math.exp(-h) \
        and a * math.exp(h) < hi else None
    curvature = None if vals is None else -(vals[0] - 2 * vals[1] + vals[2]) / h ** 2
    at_boundary = min(abs(math.log(a / lo)), abs(math.log(hi / a))) < 1e-6
    return {"a": a, "at_boundary": at_boundary, "curvature_log_a": curvature,
            "loglik_at_lo": ll(lo, data, baseline), "loglik_at_hi": ll(hi, data, baseline),
            "baseline_loglik": weibull_loglik(data.values, baseline.scale, baseline.shape)}


def _fit_a(kind, data, baseline, bracket, x_tol):
    ll = _LOGLIK[kind]
    lo, hi = bracket
    if not 0 < lo < hi:
        raise DomainError("bracket must satisfy 0 < lo < hi")
    cfg = OptimConfig(math.log(lo), math.log(hi), x_tol, 500)
    u, nll = minimize_1d(lambda v: -ll(math.exp(v), data, baseline), cfg)
    a = math.exp(u)
    diag = a_diagnostics(kind, data, baseline, a, bracket)
    if diag["at_boundary"]:
        warnings.warn(f"{kind} likelihood is maximised at the bracket edge a = {a:.6g}",
                      BoundaryWarning, stacklevel=3)
    elif diag["curvature_log_a"] is not None and diag["curvature_log_a"] < 1e-3:
        warnings.warn(f"{kind} likelihood is flat near a = {a:.6g}", FlatLikelihoodWarning,
                      stacklevel=3)
    return AFit(a, -nll)


def fit_frailty_a(data: Sample, baseline: WeibullParams, bracket: tuple[float, float] = A_BRACKET,
                  x_tol: float = 1e-9) -> AFit:
    """MLE of ``a`` for the gamma frailty model with the baseline held fixed."""
    return _fit_a("frailty", data, baseline, bracket, x_tol)


def fit_resilience_a(data: Sample, baseline: WeibullParams,
                     bracket: tuple[float, float] = A_BRACKET, x_tol: float = 1e-9) -> AFit:
    """MLE of ``a`` for the gamma resilience model with the baseline held fixed."""
    return _fit_a("resilience", data, baseline, bracket, x_tol)


# ---------------------------------------------------------------------------
# simulation


def sample_frailty(baseline: WeibullParams, mixing: MixingDistribution, n: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draws from ``sf*(t) = E[exp(-L (t/scale)^shape)]``."""
    lam = mixing.sample(rng, n)
    h = rng.standard_exponential(n) / lam
    return baseline.scale * h ** (1.0 / baseline.shape)


def sample_resilience(baseline: WeibullParams, mixing: MixingDistribution, n: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Draws from ``cdf*(t) = E[cdf(t) ** W]`` with a Weibull cdf."""
    w = mixing.sample(rng, n)
    log_g = np.log(rng.random(n)) / w  # log cdf at the draw
    h = -log1mexp(log_g)
    return baseline.scale * h ** (1.0 / baseline.shape)
