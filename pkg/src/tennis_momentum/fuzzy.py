"""Two-level fuzzy comprehensive evaluation of in-match player momentum.

Eleven indicators are arranged in four first-level groups:

* physical fitness: x21, x22
* serving proficiency: x9, x10, x11, x12
* winning capability: x1, x2 (x2 is smaller-is-better and gets reversed)
* overall scoring: x5, x4, x7

First-level group weights are fixed at (0.15, 0.25, 0.35, 0.25); weights
inside each group come from the entropy-weight method. Normalized indicator
values in [0, 1] are graded onto the seven-level comment scale
{Very weak ... Very strong} by piecewise-linear membership functions, the
grades are composed with the weighted-average operator, and the composite
membership row is collapsed to a score in [10, 100].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataQualityWarning, DegenerateRangeError
from .indicators import indicator_vector, normalize_minmax, point_durations, positivize
from .ingest import MatchTimeline

COMMENT_GRADES = (
    "Very weak", "Weak", "Weaker", "Moderate", "Stronger", "Strong", "Very strong",
)
GRADE_SCORE_WEIGHTS = (10.0, 30.0, 40.0, 60.0, 70.0, 80.0, 100.0)

DEFAULT_FIRST_LEVEL_WEIGHTS = (0.15, 0.25, 0.35, 0.25)
DEFAULT_GROUPS = (
    ("physical_fitness", ("x21", "x22")),
    ("serving_proficiency", ("x9", "x10", "x11", "x12")),
    ("winning_capability", ("x1", "x2")),
    ("overall_scoring", ("x5", "x4", "x7")),
)
SMALLER_IS_BETTER = frozenset({"x2"})


@dataclass(frozen=True)
class FuzzyHierarchy:
    """First-level weights plus the indicator grouping they apply to."""

    first_level_weights: tuple[float, ...] = DEFAULT_FIRST_LEVEL_WEIGHTS
    groups: tuple[tuple[str, tuple[str, ...]], ...] = DEFAULT_GROUPS
    smaller_is_better: frozenset[str] = SMALLER_IS_BETTER

    def __post_init__(self):
        w = np.asarray(self.first_level_weights, dtype=float)
        if len(self.groups) != w.size:
            raise ValueError("one weight per group is required")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("first-level weights must be >= 0 and sum to 1")

    @property
    def indicator_names(self) -> tuple[str, ...]:
        return tuple(n for _, names in self.groups for n in names)


@dataclass(frozen=True)
class MembershipVector:
    """Degrees of belonging to the 7 comment grades.

    ``raw`` holds the membership functions evaluated as written; ``grades``
    is the normalized row (sum 1). ``fallback`` marks inputs that hit a
    coverage hole and were graded from the nearest covered value.
    """

    raw: tuple[float, ...]
    grades: tuple[float, ...]
    fallback: bool = False


@dataclass(frozen=True)
class MomentumPoint:
    elapsed_seconds: int
    player: int
    score: float


# Membership functions over U in [0, 1]. Each grade is a sum of segments
# active on [lo, hi): either a plateau of 1 or a linear ramp (u - x0) / w.
def _ramp(x0: float, w: float):
    return lambda u: (u - x0) / w


def _flat(_u: float) -> float:
    return 1.0


_MEMBERSHIP_SEGMENTS: tuple[tuple[tuple[float, float, object], ...], ...] = (
    # Very weak
    ((0.0, 0.05, _flat), (0.05, 0.065, _ramp(0.065, -0.015))),
    # Weak
    ((0.06, 0.16, _ramp(0.06, 0.1)), (0.16, 0.3, _flat), (0.3, 0.35, _ramp(0.35, -0.05))),
    # Weaker
    ((0.25, 0.3, _ramp(0.25, 0.05)), (0.3, 0.35, _flat), (0.35, 0.4, _ramp(0.4, -0.05))),
    # Moderate (ascending ramp active only on [0.35, 0.4); see README notes)
    ((0.35, 0.4, _ramp(0.25, 0.15)), (0.4, 0.6, _flat), (0.6, 0.75, _ramp(0.75, -0.15))),
    # Stronger
    ((0.5, 0.52, _ramp(0.5, 0.1)), (0.55, 0.6, _flat), (0.6, 0.7, _ramp(0.7, -0.1))),
    # Strong
    ((0.65, 0.7, _ramp(0.65, 0.05)), (0.7, 0.84, _flat), (0.84, 0.9, _ramp(0.9, -0.06))),
    # Very strong
    ((0.75, 0.8, _ramp(0.75, 0.05)), (0.8, 1.0, _flat)),
)


def _raw_membership(u: float) -> np.ndarray:
    out = np.zeros(7)
    for g, segments in enumerate(_MEMBERSHIP_SEGMENTS):
        total = 0.0
        for lo, hi, f in segments:
            if lo <= u < hi:
                total += f(u)
        out[g] = total
    return out


def evaluate_membership(u: float, warn_on_fallback: bool = True) -> MembershipVector:
    """Grade a normalized indicator value onto the 7-level comment scale.

    The piecewise functions leave a few values of U (notably U = 1.0)
    matching no branch; such inputs borrow the raw grades of the nearest
    covered U, and the result is flagged as a fallback.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"membership input must be in [0, 1], got {u!r}")
    raw = _raw_membership(u)
    fallback = False
    if raw.sum() <= 0.0:
        fallback = True
        raw = _nearest_covered_raw(u)
        if warn_on_fallback:
            warnings.warn(
                f"U={u!r} matches no membership branch; "
                "graded from the nearest covered value",
                DataQualityWarning,
                stacklevel=2,
            )
    grades = raw / raw.sum()
    return MembershipVector(
        tuple(float(v) for v in raw), tuple(float(v) for v in grades), fallback
    )


def _nearest_covered_raw(u: float, step: float = 1e-4) -> np.ndarray:
    for k in range(1, int(1.0 / step) + 2):
        for candidate in (u - k * step, u + k * step):
            if 0.0 <= candidate <= 1.0:
                raw = _raw_membership(candidate)
                if raw.sum() > 0.0:
                    return raw
    raise AssertionError("no covered membership value found in [0, 1]")


def entropy_weights(matrix: np.ndarray) -> np.ndarray:
    """Entropy-method weights for the columns of a non-negative sample matrix.

    Column values are turned into probabilities p_ij = z_ij / sum_i z_ij,
    the information entropy e_j = -(1/ln n) * sum_i p_ij ln p_ij (with
    0 ln 0 = 0) gives the utility d_j = 1 - e_j, and weights are the
    normalized utilities. Uniform columns carry no information (weight 0);
    if every column is uniform, equal weights are returned with a warning.
    """
    z = np.asarray(matrix, dtype=float)
    if z.ndim != 2:
        raise ValueError("matrix must be 2-D")
    n, j = z.shape
    if n < 2:
        raise ValueError("entropy weights need at least 2 samples")
    if (z < 0).any():
        raise ValueError("matrix entries must be non-negative")
    sums = z.sum(axis=0)
    if (sums <= 0).any():
        bad = int(np.argmax(sums <= 0))
        raise ValueError(f"column {bad} sums to zero")
    p = z / sums
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    e = -plogp.sum(axis=0) / np.log(n)
    d = np.maximum(1.0 - e, 0.0)
    total = d.sum()
    if total <= 0.0:
        warnings.warn(
            "all columns are uniform; falling back to equal weights",
            DataQualityWarning,
            stacklevel=2,
        )
        return np.full(j, 1.0 / j)
    return d / total


def first_level_eval(group_weights: Sequence[float], rows: np.ndarray) -> np.ndarray:
    """Weighted-average composition of one group's membership rows."""
    w = np.asarray(group_weights, dtype=float)
    r = np.asarray(rows, dtype=float)
    if r.ndim != 2 or r.shape[1] != 7:
        raise ValueError("rows must have shape (j, 7)")
    if w.shape != (r.shape[0],):
        raise ValueError("one weight per membership row is required")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("group weights must sum to 1")
    return w @ r


def second_level_eval(first_level_weights: Sequence[float], b_rows: np.ndarray) -> np.ndarray:
    """Compose the four group rows with the first-level weights; renormalize."""
    a = np.asarray(first_level_weights, dtype=float)
    b = np.asarray(b_rows, dtype=float)
    if b.ndim != 2 or b.shape[1] != 7:
        raise ValueError("b_rows must have shape (groups, 7)")
    if a.shape != (b.shape[0],):
        raise ValueError("one weight per group row is required")
    out = a @ b
    total = out.sum()
    if total <= 0:
        raise ValueError("composed membership row sums to zero")
    return out / total


def momentum_score(b: Sequence[float]) -> float:
    """Collapse a normalized 7-grade membership row to a score in [10, 100]."""
    arr = np.asarray(b, dtype=float)
    if arr.shape != (7,):
        raise ValueError("membership row must have 7 grades")
    if (arr < 0).any() or abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError("membership row must be normalized (non-negative, sum 1)")
    return float(np.dot(GRADE_SCORE_WEIGHTS, arr))


def _window_indicator_matrix(
    timeline: MatchTimeline, player: int, window: int, hierarchy: FuzzyHierarchy
) -> np.ndarray:
    records = timeline.records
    durations = point_durations(records)
    names = hierarchy.indicator_names
    rows = []
    with warnings.catch_warnings():
        # Degenerate windows (no points won, etc.) are routine here.
        warnings.simplefilter("ignore", DataQualityWarning)
        for end in range(window - 1, len(records)):
            seg = records[end + 1 - window : end + 1]
            vec = indicator_vector(
                seg, player, durations=durations[end + 1 - window : end + 1]
            )
            rows.append([getattr(vec, n) for n in names])
    return np.asarray(rows, dtype=float)


def momentum_series(
    timeline: MatchTimeline,
    player: int,
    window: int = 20,
    hierarchy: FuzzyHierarchy | None = None,
) -> list[MomentumPoint]:
    """Momentum score at every sliding-window position of a match.

    For each window of ``window`` consecutive points ending at point t the
    eleven hierarchy indicators are computed; x2 is orientation-reversed;
    every indicator is min-max normalized across the match; group weights
    come from the entropy method over the per-window samples; membership,
    composition and scoring then yield one MomentumPoint per position.
    """
    if player not in (1, 2):
        raise ValueError(f"player must be 1 or 2, got {player!r}")
    if hierarchy is None:
        hierarchy = FuzzyHierarchy()
    n = len(timeline.records)
    if not 1 <= window <= n:
        raise ValueError(f"window must be in [1, {n}], got {window}")

    matrix = _window_indicator_matrix(timeline, player, window, hierarchy)
    names = hierarchy.indicator_names

    for j, name in enumerate(names):
        if name in hierarchy.smaller_is_better:
            try:
                matrix[:, j] = positivize(matrix[:, j])
            except DegenerateRangeError:
                matrix[:, j] = 0.5
    u = normalize_minmax(matrix)

    weights: list[np.ndarray] = []
    offset = 0
    for _, group_names in hierarchy.groups:
        cols = u[:, offset : offset + len(group_names)]
        if u.shape[0] >= 2:
            weights.append(entropy_weights(cols))
        else:
            warnings.warn(
                "single-window series; using equal weights inside groups",
                DataQualityWarning,
                stacklevel=2,
            )
            weights.append(np.full(len(group_names), 1.0 / len(group_names)))
        offset += len(group_names)

    fallbacks = 0
    points = []
    a = hierarchy.first_level_weights
    for t in range(u.shape[0]):
        offset = 0
        b_rows = []
        for g, (_, group_names) in enumerate(hierarchy.groups):
            rows = []
            for j in range(len(group_names)):
                mv = evaluate_membership(u[t, offset + j], warn_on_fallback=False)
                fallbacks += mv.fallback
                rows.append(mv.grades)
            b_rows.append(first_level_eval(weights[g], np.asarray(rows)))
            offset += len(group_names)
        b = second_level_eval(a, np.asarray(b_rows))
        record = timeline.records[window - 1 + t]
        points.append(
            MomentumPoint(
                elapsed_seconds=record.elapsed_seconds,
                player=player,
                score=momentum_score(b),
            )
        )
    if fallbacks:
        warnings.warn(
            f"{fallbacks} membership evaluations hit coverage holes and used "
            "the nearest covered value",
            DataQualityWarning,
            stacklevel=2,
        )
    return points
