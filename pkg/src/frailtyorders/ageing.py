"""Ageing classes checked as monotone shift ratios on a grid.

Each class is a statement that ``L(x + t) - L(x)`` moves in one direction
in ``x`` for every ``t > 0``, where ``L`` is the log of the density, the
survival function, the cdf, the integrated survival function or the
integrated cdf.
"""

from __future__ import annotations

import enum

import numpy as np

from .distributions import ContinuousDistribution
from .monotonicity import GridSpec, MonotonicityReport, monotone_report

__all__ = ["AgeingClass", "GridSpec", "classify", "classify_all", "CLASS_RULES"]


class AgeingClass(str, enum.Enum):
    ILR = "ILR"
    DLR = "DLR"
    IFR = "IFR"
    DFR = "DFR"
    DRFR = "DRFR"
    IRFR = "IRFR"
    IMRL = "IMRL"
    DMRL = "DMRL"
    IMIT = "IMIT"


# class -> (log-function name, required direction of L(x+t) - L(x) in x)
CLASS_RULES: dict[AgeingClass, tuple[str, int]] = {
    AgeingClass.ILR: ("logpdf", -1),
    AgeingClass.DLR: ("logpdf", +1),
    AgeingClass.IFR: ("logsf", -1),
    AgeingClass.DFR: ("logsf", +1),
    AgeingClass.DRFR: ("logcdf", -1),
    AgeingClass.IRFR: ("logcdf", +1),
    AgeingClass.IMRL: ("log_tail_integral", +1),
    AgeingClass.DMRL: ("log_tail_integral", -1),
    AgeingClass.IMIT: ("log_head_integral", -1),
}


def _shift_table(dist: ContinuousDistribution, fn: str, grid: GridSpec) -> np.ndarray:
    xs, ts = grid.xs, grid.ts
    # one call over base points and all shifted points keeps integral tables shared
    pts = np.concatenate([xs, (xs[None, :] + ts[:, None]).ravel()])
    vals = np.asarray(getattr(dist, fn)(pts), dtype=float)
    base, shifted = vals[: xs.size], vals[xs.size:].reshape(ts.size, xs.size)
    with np.errstate(invalid="ignore"):
        return shifted - base[None, :]


def classify(dist: ContinuousDistribution, cls: AgeingClass | str, grid: GridSpec) -> MonotonicityReport:
    """Check whether ``dist`` belongs to ``cls`` on ``grid``."""
    cls = AgeingClass(cls.upper())
    fn, direction = CLASS_RULES[cls]
    table = _shift_table(dist, fn, grid)
    return monotone_report(cls, table, grid.xs, grid.ts, direction, grid.slack)


def classify_all(dist: ContinuousDistribution, grid: GridSpec) -> dict[AgeingClass, MonotonicityReport]:
    """Run :func:`classify` for every class, sharing one table per log-function."""
    tables: dict[str, np.ndarray] = {}
    out = {}
    for cls, (fn, direction) in CLASS_RULES.items():
        if fn not in tables:
            tables[fn] = _shift_table(dist, fn, grid)
        out[cls] = monotone_report(cls, tables[fn], grid.xs, grid.ts, direction, grid.slack)
    return out
