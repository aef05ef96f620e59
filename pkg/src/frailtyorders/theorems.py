"""Executable comparison theorems for frailty and resilience mixtures.

Each theorem says: if the baseline belongs to an ageing class and the
mixing variable lives in ``(0, 1]`` (or ``[1, inf)``), then one ratio of
mixture and baseline quantities is monotone in ``x`` for every shift
``t``.  :func:`verify_theorem` checks the hypotheses first and only then
the conclusion.

Part (ii) of each pair states the opposite monotonicity of the same ratio
as part (i); it is encoded as ``reverse=True`` on that ratio.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .ageing import AgeingClass, classify
from .distributions import (
    ContinuousDistribution,
    DegenerateMixing,
    ExpQuadratic,
    GammaLifetime,
    GammaParams,
    MixingDistribution,
    UniformMixing,
    Weibull,
    WeibullParams,
    gamma_frailty_mixing,
    mixing_sample_support_check,
)
from .mixture import FrailtyModel, ResilienceModel
from .monotonicity import GridSpec, MonotonicityReport, Verdict
from .numerics import DomainError
from .orders import OrderRelation, check_order

__all__ = [
    "Theorem",
    "THEOREMS",
    "get_theorem",
    "TheoremReport",
    "verify_theorem",
    "Example",
    "EXAMPLES",
    "ExampleResult",
    "EXAMPLE_GRID",
    "reproduce_examples",
    "random_instance",
    "mit_regime_report",
    "DUAL_CLASS",
]

A = AgeingClass
R = OrderRelation

DUAL_CLASS = {
    A.ILR: A.DLR, A.DLR: A.ILR, A.IFR: A.DFR, A.DFR: A.IFR,
    A.DRFR: A.IRFR, A.IRFR: A.DRFR, A.IMRL: A.DMRL, A.DMRL: A.IMRL, A.IMIT: A.IMIT,
}


@dataclass(frozen=True)
class Theorem:
    """One part of a comparison theorem.

    The conclusion is ``check_order(X, X*, relation, reverse=reverse)``
    when ``mixture_is_y`` and ``check_order(X*, X, ...)`` otherwise.
    """

    id: str
    model: str  # "frailty" or "resilience"
    ageing: AgeingClass
    support: str  # "unit-interval" or "geq-one"
    relation: OrderRelation
    mixture_is_y: bool
    reverse: bool
    ratio: str
    conclusion: str

    @property
    def direction(self) -> str:
        base = -1 if self.relation in (R.mit_up, R.mit_down) else 1
        return "increasing" if base * (-1 if self.reverse else 1) > 0 else "decreasing"


def _t(id, model, cls, support, rel, reverse, ratio, conclusion, mixture_is_y=True):
    return Theorem(id, model, cls, support, rel, mixture_is_y, reverse, ratio, conclusion)


_U, _G = "unit-interval", "geq-one"
THEOREMS: dict[str, Theorem] = {t.id: t for t in [
    _t("3.1i", "frailty", A.ILR, _U, R.lr_up, False, "f*(x)/f(x+t)", "X* >= X in lr_up"),
    _t("3.1ii", "frailty", A.DLR, _G, R.lr_up, True, "f*(x)/f(x+t)", "f*(x)/f(x+t) decreasing"),
    _t("3.2i", "frailty", A.DLR, _U, R.lr_down, False, "f*(x+t)/f(x)", "X* >= X in lr_down"),
    _t("3.2ii", "frailty", A.ILR, _G, R.lr_down, True, "f*(x+t)/f(x)", "f*(x+t)/f(x) decreasing"),
    _t("3.3i", "frailty", A.IFR, _U, R.hr_up, False, "sf*(x)/sf(x+t)", "X* >= X in hr_up"),
    _t("3.3ii", "frailty", A.DFR, _G, R.hr_up, True, "sf*(x)/sf(x+t)", "sf*(x)/sf(x+t) decreasing"),
    _t("3.4i", "frailty", A.DFR, _U, R.hr_down, False, "sf*(x+t)/sf(x)", "X* >= X in hr_down"),
    _t("3.4ii", "frailty", A.IFR, _G, R.hr_down, True, "sf*(x+t)/sf(x)", "sf*(x+t)/sf(x) decreasing"),
    _t("3.5i", "frailty", A.IMRL, _U, R.mrl_up, False, "int_{x+t} sf* / int_x sf", "X* >= X in mrl_up"),
    _t("3.5ii", "frailty", A.DMRL, _G, R.mrl_up, True, "int_{x+t} sf* / int_x sf",
       "int_{x+t} sf* / int_x sf decreasing"),
    _t("3.6i", "frailty", A.DMRL, _U, R.mrl_down, False, "int_x sf* / int_{x+t} sf", "X* >= X in mrl_down"),
    _t("3.6ii", "frailty", A.IMRL, _G, R.mrl_down, True, "int_x sf* / int_{x+t} sf",
       "int_x sf* / int_{x+t} sf decreasing"),
    _t("4.1i", "resilience", A.ILR, _G, R.lr_up, False, "g*(x)/g(x+t)", "X* >= X in lr_up"),
    _t("4.1ii", "resilience", A.DLR, _U, R.lr_up, True, "g*(x)/g(x+t)", "g*(x)/g(x+t) decreasing"),
    _t("4.2i", "resilience", A.DLR, _G, R.lr_down, False, "g*(x+t)/g(x)", "X* >= X in lr_down"),
    _t("4.2ii", "resilience", A.ILR, _U, R.lr_down, True, "g*(x+t)/g(x)", "g*(x+t)/g(x) decreasing"),
    _t("4.3i", "resilience", A.DRFR, _G, R.rh_up, False, "G*(x)/G(x+t)", "X* >= X in rh_up"),
    _t("4.3ii", "resilience", A.IRFR, _U, R.rh_up, True, "G*(x)/G(x+t)", "G*(x)/G(x+t) decreasing"),
    _t("4.4i", "resilience", A.IRFR, _G, R.rh_down, False, "G*(x+t)/G(x)", "X* >= X in rh_down"),
    _t("4.4ii", "resilience", A.DRFR, _U, R.rh_down, True, "G*(x+t)/G(x)", "G*(x+t)/G(x) decreasing"),
    # mean inactivity time: the provable statements in the two support regimes
    _t("4.5i", "resilience", A.IMIT, _U, R.mit_up, False, "int_0^{x+t} G* / int_0^x G",
       "X* <= X in mit_up", mixture_is_y=False),
    _t("4.5ii", "resilience", A.IMIT, _G, R.mit_up, False, "int_0^{x+t} G / int_0^x G*",
       "X* >= X in mit_up"),
]}

_ALIASES = {"mit.i": "4.5i", "mit.ii": "4.5ii", "miti": "4.5i", "mitii": "4.5ii"}


def get_theorem(theorem_id: str) -> Theorem:
    """Look up ``"3.1i"``, ``"3.1(ii)"``, ``"4.5i"`` or ``"mit.ii"``."""
    key = re.sub(r"[\s()]", "", str(theorem_id).lower())
    key = _ALIASES.get(key, key)
    if key not in THEOREMS:
        raise DomainError(f"unknown theorem {theorem_id!r}; known: {', '.join(THEOREMS)}")
    return THEOREMS[key]


def _model(theorem: Theorem, baseline, mixing):
    cls = FrailtyModel if theorem.model == "frailty" else ResilienceModel
    return cls(baseline, mixing)


@dataclass
class TheoremReport:
    theorem: Theorem
    hypothesis: MonotonicityReport
    dual_hypothesis: MonotonicityReport | None
    support_ok: bool
    conclusion: MonotonicityReport
    status: str  # holds | fails | inconclusive | hypotheses not met

    @property
    def hypotheses_met(self) -> bool:
        return self.hypothesis.holds is Verdict.HOLDS and self.support_ok

    @property
    def matched_classes(self) -> list[str]:
        out = [self.theorem.ageing.value] if self.hypothesis.holds is Verdict.HOLDS else []
        if self.dual_hypothesis is not None and self.dual_hypothesis.holds is Verdict.HOLDS:
            out.append(self.dual_hypothesis.relation.value)
        return out

    @property
    def exit_code(self) -> int:
        return {"holds": 0, "fails": 1, "hypotheses not met": 1, "inconclusive": 2}[self.status]

    def to_dict(self) -> dict[str, Any]:
        th = self.theorem
        return {
            "theorem": th.id,
            "model": th.model,
            "hypothesis_class": th.ageing.value,
            "support_condition": th.support,
            "ratio": th.ratio,
            "required": th.direction,
            "claim": th.conclusion,
            "status": self.status,
            "hypotheses_met": self.hypotheses_met,
            "support_ok": self.support_ok,
            "matched_classes": self.matched_classes,
            "hypothesis": self.hypothesis.to_dict(),
            "conclusion": self.conclusion.to_dict(),
        }


def verify_theorem(theorem_id: str | Theorem, baseline: ContinuousDistribution,
                   mixing: MixingDistribution, grid: GridSpec) -> TheoremReport:
    """Check hypotheses, then the concluded ratio.

    The conclusion ratio is always evaluated and reported, but it only
    decides ``status`` when the ageing class and the support condition hold.
    """
    th = theorem_id if isinstance(theorem_id, Theorem) else get_theorem(theorem_id)
    hyp = classify(baseline, th.ageing, grid)
    dual_cls = DUAL_CLASS[th.ageing]
    dual = classify(baseline, dual_cls, grid) if dual_cls is not th.ageing else None
    support_ok = mixing_sample_support_check(mixing, th.support)
    model = _model(th, baseline, mixing)
    X, Y = (baseline, model) if th.mixture_is_y else (model, baseline)
    concl = check_order(X, Y, th.relation, grid, reverse=th.reverse)
    if hyp.holds is Verdict.INCONCLUSIVE:
        status = "inconclusive"
    elif hyp.holds is Verdict.FAILS or not support_ok:
        status = "hypotheses not met"
    else:
        status = concl.holds.value
    return TheoremReport(th, hyp, dual, support_ok, concl, status)


# ---------------------------------------------------------------------------
# worked examples


EXAMPLE_GRID = GridSpec(0.05, 3.0, 128, (0.1, 0.5, 1.0, 2.0))


@dataclass(frozen=True)
class Example:
    id: str
    model: str
    baseline: Callable[[], ContinuousDistribution]
    mixing: Callable[[], MixingDistribution]
    relation: OrderRelation
    reverse: bool
    claim: str
    theorem: str


EXAMPLES: list[Example] = [
    Example("3.1", "frailty", lambda: GammaLifetime(GammaParams(2.0, 1.0)),
            lambda: UniformMixing(0.0, 1.0), R.lr_up, False,
            "f*(x)/f(x+t) increasing", "3.1i"),
    Example("3.2", "frailty", lambda: Weibull(WeibullParams(1.0, 3.0)),
            lambda: UniformMixing(1.0, 3.0), R.lr_up, True,
            "f*(x)/f(x+t) decreasing", "3.1ii"),
    Example("3.3", "frailty", lambda: Weibull(WeibullParams(1.0, 2.0)),
            lambda: UniformMixing(0.0, 1.0), R.hr_up, False,
            "sf*(x)/sf(x+t) increasing", "3.3i"),
    Example("3.4", "frailty", lambda: Weibull(WeibullParams(1.0, 0.5)),
            lambda: UniformMixing(2.0, 5.0), R.hr_up, True,
            "sf*(x)/sf(x+t) decreasing", "3.3ii"),
    Example("4.1", "resilience", lambda: Weibull(WeibullParams(math.sqrt(0.5), 2.0)),
            lambda: UniformMixing(2.0, 5.0), R.rh_up, False,
            "G*(x)/G(x+t) increasing", "4.3i"),
    Example("4.2", "resilience", lambda: Weibull(WeibullParams(1.0, 3.0)),
            lambda: UniformMixing(0.0, 1.0), R.rh_down, True,
            "G*(x+t)/G(x) decreasing", "4.4ii"),
]


@dataclass
class ExampleResult:
    example: Example
    claim_report: MonotonicityReport
    theorem_report: TheoremReport

    @property
    def holds(self) -> bool:
        return self.claim_report.holds is Verdict.HOLDS

    def to_dict(self):
        return {"example": self.example.id, "claim": self.example.claim,
                "claim_check": self.claim_report.to_dict(),
                "theorem": self.theorem_report.to_dict()}


def run_example(example: Example, grid: GridSpec = EXAMPLE_GRID) -> ExampleResult:
    baseline, mixing = example.baseline(), example.mixing()
    model = (FrailtyModel if example.model == "frailty" else ResilienceModel)(baseline, mixing)
    claim = check_order(baseline, model, example.relation, grid, reverse=example.reverse)
    return ExampleResult(example, claim, verify_theorem(example.theorem, baseline, mixing, grid))


def reproduce_examples(grid: GridSpec = EXAMPLE_GRID) -> list[ExampleResult]:
    """Run every worked example: its stated ratio and the theorem it illustrates."""
    return [run_example(ex, grid) for ex in EXAMPLES]


def degenerate_sanity(grid: GridSpec = EXAMPLE_GRID) -> dict[str, MonotonicityReport]:
    """Unit point-mass mixing returns the baseline: every usual order holds both ways."""
    base = Weibull(WeibullParams(1.0, 2.0))
    out = {}
    for kind, cls in (("frailty", FrailtyModel), ("resilience", ResilienceModel)):
        model = cls(base, DegenerateMixing(1.0))
        for rel in (R.lr, R.hr, R.rh, R.mrl):
            out[f"{kind}:{rel.value}"] = check_order(base, model, rel, grid)
            out[f"{kind}:{rel.value}:reverse"] = check_order(model, base, rel, grid)
    return out


# ---------------------------------------------------------------------------
# random instances with hypotheses satisfied by construction


def _light_baseline(rng):
    if rng.random() < 0.5:
        return Weibull(WeibullParams(rng.uniform(0.5, 3.0), rng.uniform(1.2, 4.0)))
    return GammaLifetime(GammaParams(rng.uniform(1.2, 4.0), rng.uniform(0.5, 2.0)))


def _heavy_baseline(rng):
    if rng.random() < 0.5:
        return Weibull(WeibullParams(rng.uniform(0.5, 3.0), rng.uniform(0.5, 0.9)))
    return GammaLifetime(GammaParams(rng.uniform(0.5, 0.9), rng.uniform(0.5, 2.0)))


def _unit_mixing(rng):
    lo = rng.uniform(0.2, 0.8)
    return UniformMixing(lo, rng.uniform(lo + 0.05, 1.0))


def _geq_mixing(rng):
    if rng.random() < 0.7:
        lo = rng.uniform(1.0, 2.0)
        return UniformMixing(lo, lo + rng.uniform(0.2, 3.0))
    return gamma_frailty_mixing(rng.uniform(0.3, 1.5))


def _default_grid(dist, n_x):
    s = dist.scale
    return GridSpec(0.05 * s, 3.0 * s, n_x)


def random_instance(theorem_id: str | Theorem, rng: np.random.Generator,
                    n_x: int = 64) -> tuple[ContinuousDistribution, MixingDistribution, GridSpec]:
    """Baseline, mixing law and grid for which the theorem's hypotheses hold."""
    th = theorem_id if isinstance(theorem_id, Theorem) else get_theorem(theorem_id)
    mixing = _unit_mixing(rng) if th.support == _U else _geq_mixing(rng)
    if th.ageing in (A.ILR, A.IFR, A.DMRL, A.DRFR):
        base = _light_baseline(rng)
    elif th.ageing in (A.DLR, A.DFR, A.IMRL):
        base = _heavy_baseline(rng)
    elif th.ageing is A.IMIT:
        base = Weibull(WeibullParams(rng.uniform(0.5, 3.0), rng.uniform(0.5, 4.0)))
    else:  # IRFR needs a bounded support and a grid where the cdf is log-convex
        rate = rng.uniform(20.0, 60.0)
        base = ExpQuadratic(rate, 1.0)
        x_lo = math.sqrt(2.5 / rate)
        x_hi = (2.0 + x_lo) / 3.0  # keeps x + max(t) inside the support
        return base, mixing, GridSpec(x_lo, x_hi, n_x)
    return base, mixing, _default_grid(base, n_x)


# ---------------------------------------------------------------------------


def mit_regime_report(baseline: ContinuousDistribution, grid: GridSpec,
                      unit_mixing: MixingDistribution | None = None,
                      geq_mixing: MixingDistribution | None = None) -> dict[str, dict[str, str]]:
    """All four mean-inactivity-time statements in both support regimes.

    Keys are ``"unit-interval"`` and ``"geq-one"``; values map statements such
    as ``"X* <= X in mit_up"`` to the observed verdict.
    """
    regimes = {_U: unit_mixing or UniformMixing(0.3, 0.9), _G: geq_mixing or UniformMixing(1.5, 3.0)}
    out: dict[str, dict[str, str]] = {}
    for name, mixing in regimes.items():
        model = ResilienceModel(baseline, mixing)
        row = {}
        for rel in (R.mit_up, R.mit_down):
            row[f"X* <= X in {rel.value}"] = check_order(model, baseline, rel, grid).holds.value
            row[f"X* >= X in {rel.value}"] = check_order(baseline, model, rel, grid).holds.value
        out[name] = row
    return out
