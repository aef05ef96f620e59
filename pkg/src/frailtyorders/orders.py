"""Shifted and usual stochastic orders between two lifetime laws.

``check_order(X, Y, rel)`` tests ``X <=_rel Y``.  For the shifted orders
the defining ratios are

=========  ==========================================  ==========
relation   ratio in x (t > 0)                          required
=========  ==========================================  ==========
hr_up      sf_Y(x) / sf_X(x+t)                         increasing
hr_down    sf_Y(x+t) / sf_X(x)                         increasing
rh_up      cdf_Y(x) / cdf_X(x+t)                       increasing
rh_down    cdf_Y(x+t) / cdf_X(x)                       increasing
lr_up      pdf_Y(x) / pdf_X(x+t)                       increasing
lr_down    pdf_Y(x+t) / pdf_X(x)                       increasing
mrl_up     int_{x+t}^inf sf_Y / int_x^inf sf_X         increasing
mrl_down   int_x^inf sf_Y / int_{x+t}^inf sf_X         increasing
mit_up     int_0^{x+t} cdf_X / int_0^x cdf_Y           decreasing
mit_down   int_0^x cdf_X / int_0^{x+t} cdf_Y           decreasing
=========  ==========================================  ==========

and the usual orders ``lr``, ``hr``, ``rh``, ``mrl`` are the ``t = 0``
forms.  ``reverse=True`` asks for the opposite direction of the same
ratio.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .distributions import ContinuousDistribution
from .monotonicity import (
    GridSpec,
    InsufficientGridError,
    MonotonicityReport,
    Verdict,
    monotone_report,
)
from .numerics import ConvergenceError, DomainError, numeric_derivative

__all__ = [
    "OrderRelation",
    "ORDER_RULES",
    "USUAL_COUNTERPART",
    "check_order",
    "check_consequence",
    "check_implication_chain",
    "ImplicationReport",
    "check_dispersive",
    "ratio_table",
]


class OrderRelation(str, enum.Enum):
    lr_up = "lr_up"
    lr_down = "lr_down"
    hr_up = "hr_up"
    hr_down = "hr_down"
    rh_up = "rh_up"
    rh_down = "rh_down"
    mrl_up = "mrl_up"
    mrl_down = "mrl_down"
    mit_up = "mit_up"
    mit_down = "mit_down"
    lr = "lr"
    hr = "hr"
    rh = "rh"
    mrl = "mrl"
    disp = "disp"

    @property
    def shifted(self) -> bool:
        return self.value.endswith(("_up", "_down"))


@dataclass(frozen=True)
class _Rule:
    fn: str
    num_owner: str  # "X" or "Y"
    num_shift: bool
    den_shift: bool
    direction: int


_R = OrderRelation
ORDER_RULES: dict[OrderRelation, _Rule] = {
    _R.hr_up: _Rule("logsf", "Y", False, True, +1),
    _R.hr_down: _Rule("logsf", "Y", True, False, +1),
    _R.rh_up: _Rule("logcdf", "Y", False, True, +1),
    _R.rh_down: _Rule("logcdf", "Y", True, False, +1),
    _R.lr_up: _Rule("logpdf", "Y", False, True, +1),
    _R.lr_down: _Rule("logpdf", "Y", True, False, +1),
    _R.mrl_up: _Rule("log_tail_integral", "Y", True, False, +1),
    _R.mrl_down: _Rule("log_tail_integral", "Y", False, True, +1),
    _R.mit_up: _Rule("log_head_integral", "X", True, False, -1),
    _R.mit_down: _Rule("log_head_integral", "X", False, True, -1),
    _R.hr: _Rule("logsf", "Y", False, False, +1),
    _R.rh: _Rule("logcdf", "Y", False, False, +1),
    _R.lr: _Rule("logpdf", "Y", False, False, +1),
    _R.mrl: _Rule("log_tail_integral", "Y", False, False, +1),
}

USUAL_COUNTERPART: dict[OrderRelation, OrderRelation] = {
    _R.lr_up: _R.lr, _R.lr_down: _R.lr,
    _R.hr_up: _R.hr, _R.hr_down: _R.hr,
    _R.rh_up: _R.rh, _R.rh_down: _R.rh,
    _R.mrl_up: _R.mrl, _R.mrl_down: _R.mrl,
}


def _eval(dist, fn, xs, ts, shift):
    if not shift:
        return np.broadcast_to(np.asarray(getattr(dist, fn)(xs), dtype=float), (ts.size, xs.size))
    pts = (xs[None, :] + ts[:, None]).ravel()
    return np.asarray(getattr(dist, fn)(pts), dtype=float).reshape(ts.size, xs.size)


def ratio_table(X: ContinuousDistribution, Y: ContinuousDistribution, rel: OrderRelation | str,
                grid: GridSpec) -> tuple[np.ndarray, np.ndarray, int]:
    """Log of the defining ratio, shape ``(n_t, n_x)``, the shifts used and the direction."""
    rel = OrderRelation(rel)
    if rel not in ORDER_RULES:
        raise DomainError(f"{rel.value} has no ratio form; use check_dispersive")
    rule = ORDER_RULES[rel]
    xs = grid.xs
    ts = grid.ts if rel.shifted else np.zeros(1)
    num_dist, den_dist = (Y, X) if rule.num_owner == "Y" else (X, Y)
    num = _eval(num_dist, rule.fn, xs, ts, rule.num_shift)
    den = _eval(den_dist, rule.fn, xs, ts, rule.den_shift)
    with np.errstate(invalid="ignore"):
        return num - den, ts, rule.direction


def check_order(X: ContinuousDistribution, Y: ContinuousDistribution, rel: OrderRelation | str,
                grid: GridSpec, reverse: bool = False) -> MonotonicityReport:
    """Test ``X <=_rel Y`` on ``grid`` (or the opposite monotonicity with ``reverse``)."""
    rel = OrderRelation(rel)
    table, ts, direction = ratio_table(X, Y, rel, grid)
    if reverse:
        direction = -direction
    details = {"direction": "increasing" if direction > 0 else "decreasing", "reverse": reverse}
    return monotone_report(rel, table, grid.xs, ts if rel.shifted else [0.0], direction,
                           grid.slack, details)


# ---------------------------------------------------------------------------
# pointwise consequences at two time points


def _kappa(dist, xs):
    out = np.empty(xs.shape)
    for i, x in enumerate(xs):
        try:
            out[i] = numeric_derivative(lambda z: float(dist.logpdf(z)), float(x))
        except DomainError:
            out[i] = np.nan
    return out


# relation -> (quantity, sense, ordering) meaning q_X(t1) sense q_Y(t2) for pairs with ordering
_CONSEQUENCE = {
    "hr": ("hazard", +1), "rh": ("reversed_hazard", -1), "lr": ("kappa", -1),
    "mrl": ("mrl", -1), "mit": ("mit", +1),
}


def check_consequence(X: ContinuousDistribution, Y: ContinuousDistribution, rel: OrderRelation | str,
                      grid: GridSpec, reverse: bool = False, n_points: int = 32,
                      rel_slack: float | None = None) -> MonotonicityReport:
    """Two-time-point comparison implied by ``X <=_rel Y``.

    ``hr_up``: ``r_X(t1) >= r_Y(t2)`` for ``t1 >= t2``; ``hr_down``: the same
    for ``t2 >= t1``.  ``rh`` and ``lr`` (through ``f'/f``) flip the
    inequality, ``mrl`` flips it and swaps the time ordering, ``mit`` keeps
    the ``hr`` pattern.  ``reverse`` flips the inequality.  Pairs come from a
    ``n_points`` grid on ``[x_lo, x_hi]``; margins are relative.
    """
    rel = OrderRelation(rel)
    if rel is OrderRelation.disp:
        raise DomainError("dispersive order has no two-point consequence here")
    family = rel.value.split("_")[0]
    quantity, sense = _CONSEQUENCE[family]
    if reverse:
        sense = -sense
    pts = np.linspace(grid.x_lo, grid.x_hi, n_points)
    if quantity == "kappa":
        qx, qy = _kappa(X, pts), _kappa(Y, pts)
        slack = rel_slack if rel_slack is not None else 1e-6
    else:
        qx = np.asarray(getattr(X, quantity)(pts), dtype=float)
        qy = np.asarray(getattr(Y, quantity)(pts), dtype=float)
        slack = rel_slack if rel_slack is not None else max(grid.slack, 1e-9)
    i1, i2 = np.meshgrid(np.arange(n_points), np.arange(n_points), indexing="ij")
    t1_first = rel.value.endswith("_up") != (family == "mrl")
    if not rel.shifted:
        mask, ordering = i1 == i2, "t1 == t2"
    elif t1_first:
        mask, ordering = i1 >= i2, "t1 >= t2"
    else:
        mask, ordering = i2 >= i1, "t2 >= t1"
    a, b = qx[i1[mask]], qy[i2[mask]]
    usable = np.isfinite(a) & np.isfinite(b)
    skipped = 1.0 - usable.mean() if usable.size else 1.0
    if usable.sum() < 8:
        raise InsufficientGridError(f"only {int(usable.sum())} usable pairs for {rel.value}")
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    margins = sense * (a - b) / scale
    margins = np.where(usable, margins, np.inf)
    j = int(np.argmin(margins))
    worst = float(margins[j])
    t1s, t2s = pts[i1[mask]], pts[i2[mask]]
    if worst < -slack:
        verdict, witness = Verdict.FAILS, (float(t1s[j]), float(t2s[j]))
    elif skipped > 0.2:
        verdict, witness = Verdict.INCONCLUSIVE, None
    else:
        verdict, witness = Verdict.HOLDS, None
    details = {"quantity": quantity, "inequality": ">=" if sense > 0 else "<=",
               "ordering": ordering}
    return MonotonicityReport(rel, verdict, worst, witness, float(skipped), slack,
                              int(usable.sum()), details)


# ---------------------------------------------------------------------------


@dataclass
class ImplicationReport:
    """Shifted orders that hold strictly, paired with their usual counterparts."""

    pairs: list[tuple[MonotonicityReport, MonotonicityReport | None]] = field(default_factory=list)
    inconsistencies: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.inconsistencies

    def to_dict(self):
        return {
            "consistent": self.consistent,
            "inconsistencies": self.inconsistencies,
            "pairs": [{"shifted": s.to_dict(), "usual": None if u is None else u.to_dict()}
                      for s, u in self.pairs],
        }


def check_implication_chain(X: ContinuousDistribution, Y: ContinuousDistribution, grid: GridSpec,
                            relations: Sequence[OrderRelation] | None = None) -> ImplicationReport:
    """For each shifted order that holds strictly, require its usual counterpart to hold.

    The implication is the ``t -> 0`` limit of the shifted order, so the
    shifted check also runs at a tenth and a hundredth of the smallest grid
    shift; a coarse shift set alone can miss failures that only appear for
    short shifts.
    """
    report = ImplicationReport()
    ts = grid.ts
    fine = replace(grid, t_values=tuple(sorted({*ts, ts.min() / 10, ts.min() / 100})))
    for rel in relations or list(USUAL_COUNTERPART):
        rel = OrderRelation(rel)
        try:
            shifted = check_order(X, Y, rel, fine)
        except InsufficientGridError:
            continue
        if not shifted.strict:
            continue
        usual_rel = USUAL_COUNTERPART.get(rel)
        if usual_rel is None:
            report.pairs.append((shifted, None))
            continue
        usual = check_order(X, Y, usual_rel, grid)
        report.pairs.append((shifted, usual))
        if usual.holds is not Verdict.HOLDS:
            report.inconsistencies.append(
                f"{rel.value} holds strictly but {usual_rel.value} is {usual.holds.value}"
                f" (worst margin {usual.worst_margin:.3g} at {usual.witness})")
    return report


def check_dispersive(X: ContinuousDistribution, Y: ContinuousDistribution,
                     u_grid: Sequence[float] | None = None, slack: float = 1e-9) -> MonotonicityReport:
    """``X <=_disp Y``: ``Y.quantile(u) - X.quantile(u)`` nondecreasing in ``u``."""
    u = np.asarray(u_grid if u_grid is not None else np.linspace(0.01, 0.99, 99), dtype=float)
    if u.size < 2 or np.any(np.diff(u) <= 0) or u[0] <= 0 or u[-1] >= 1:
        raise DomainError("u_grid must be strictly increasing inside (0, 1)")
    try:
        qx = np.asarray(X.quantile(u), dtype=float)
        qy = np.asarray(Y.quantile(u), dtype=float)
    except ConvergenceError as exc:
        raise ConvergenceError(f"quantile evaluation failed: {exc}") from exc
    gap = qy - qx
    # steps relative to the quantile magnitude absorb bisection tolerance
    steps = np.diff(gap) / np.maximum(1.0, np.maximum(np.abs(qx), np.abs(qy)))[1:]
    j = int(np.argmin(steps))
    worst = float(steps[j])
    details = {"gap_first": float(gap[0]), "gap_last": float(gap[-1]),
               "gap_step_min": float(np.diff(gap).min()), "gap_step_max": float(np.diff(gap).max())}
    if worst < -slack:
        return MonotonicityReport(OrderRelation.disp, Verdict.FAILS, worst, (float(u[j]), None),
                                  0.0, slack, steps.size, details)
    return MonotonicityReport(OrderRelation.disp, Verdict.HOLDS, worst, None, 0.0, slack,
                              steps.size, details)
