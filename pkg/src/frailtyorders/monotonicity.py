"""Grid protocol and verdicts for ratio-monotonicity checks.

Every ageing class and shifted order reduces to "this log-ratio, sampled on
an x grid for each shift t, moves in one direction".  Adjacent usable grid
points are compared; entries that are not finite (a zero denominator, an
underflowed tail) are skipped and counted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .numerics import DomainError

__all__ = [
    "Verdict",
    "GridSpec",
    "MonotonicityReport",
    "InsufficientGridError",
    "monotone_report",
    "MIN_USABLE_POINTS",
    "INCONCLUSIVE_SKIP_FRACTION",
]

MIN_USABLE_POINTS = 8
INCONCLUSIVE_SKIP_FRACTION = 0.2


class InsufficientGridError(DomainError):
    """Fewer than eight usable grid points survived domain skipping."""


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: ``n_x`` evenly spaced points on ``[x_lo, x_hi]`` and shift offsets.

    ``t_values=None`` selects ``{0.1, 0.5, 1, 2} * (x_hi - x_lo) / 4``.
    ``slack`` is the tolerated move against the required direction, applied
    to log-ratios, i.e. relative to the local ratio magnitude.
    """

    x_lo: float
    x_hi: float
    n_x: int = 128
    t_values: tuple[float, ...] | None = None
    slack: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.x_lo) and math.isfinite(self.x_hi) and self.x_lo < self.x_hi):
            raise DomainError(f"grid needs finite x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")
        if int(self.n_x) != self.n_x or self.n_x < 16:
            raise DomainError(f"n_x must be an integer >= 16, got {self.n_x}")
        if self.slack < 0:
            raise DomainError("slack must be nonnegative")
        if self.t_values is not None:
            ts = tuple(float(t) for t in self.t_values)
            if not ts or any(not (t > 0 and math.isfinite(t)) for t in ts):
                raise DomainError(f"t_values must be positive, got {self.t_values}")
            object.__setattr__(self, "t_values", ts)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, int(self.n_x))

    @property
    def ts(self) -> np.ndarray:
        if self.t_values is None:
            return np.array([0.1, 0.5, 1.0, 2.0]) * (self.x_hi - self.x_lo) / 4.0
        return np.asarray(self.t_values, dtype=float)

    def describe(self) -> dict[str, Any]:
        return {"x_lo": self.x_lo, "x_hi": self.x_hi, "n_x": int(self.n_x),
                "t_values": [float(t) for t in self.ts], "slack": self.slack}


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of one monotonicity check.

    ``worst_margin`` is the smallest signed step in the required direction
    over all adjacent usable pairs (negative means a move the wrong way).
    ``witness`` is the ``(x, t)`` of the left end of the worst pair when the
    check fails.
    """

    relation: Any
    holds: Verdict
    worst_margin: float
    witness: tuple[float, float | None] | None
    skipped_fraction: float
    slack: float = 1e-9
    n_pairs: int = 0
    details: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def strict(self) -> bool:
        """Holds with every step strictly beyond the slack."""
        return self.holds is Verdict.HOLDS and self.worst_margin > self.slack

    def to_dict(self) -> dict[str, Any]:
        rel = getattr(self.relation, "value", self.relation)
        return {
            "relation": str(rel),
            "verdict": self.holds.value,
            "strict": self.strict,
            "worst_margin": None if not math.isfinite(self.worst_margin) else self.worst_margin,
            "witness": None if self.witness is None else list(self.witness),
            "skipped_fraction": self.skipped_fraction,
            "n_pairs": self.n_pairs,
            **self.details,
        }


def monotone_report(relation, values: np.ndarray, xs: np.ndarray, ts, direction: int,
                    slack: float, details: dict | None = None) -> MonotonicityReport:
    """Check each row of ``values`` (shape ``(len(ts), len(xs))``) for monotonicity.

    ``direction`` is +1 for nondecreasing, -1 for nonincreasing.  Rows are
    log-ratios, so a fixed ``slack`` is a relative tolerance on the ratio.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    ts = list(ts)
    usable = np.isfinite(values)
    skipped = 1.0 - usable.mean()
    if usable.sum(axis=1).max(initial=0) < MIN_USABLE_POINTS:
        raise InsufficientGridError(
            f"only {int(usable.sum(axis=1).max(initial=0))} usable grid points for {relation}")
    worst, witness, n_pairs = math.inf, None, 0
    for row, t in zip(range(values.shape[0]), ts):
        idx = np.nonzero(usable[row])[0]
        if idx.size < 2:
            continue
        steps = direction * np.diff(values[row, idx])
        n_pairs += steps.size
        j = int(np.argmin(steps))
        if steps[j] < worst:
            worst = float(steps[j])
            witness = (float(xs[idx[j]]), None if t is None else float(t))
    if worst < -slack:
        verdict = Verdict.FAILS
    elif skipped > INCONCLUSIVE_SKIP_FRACTION:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.HOLDS
    return MonotonicityReport(relation, verdict, worst,
                              witness if verdict is Verdict.FAILS else None,
                              float(skipped), slack, n_pairs, dict(details or {}))
