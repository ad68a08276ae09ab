"""Krippendorff's alpha for ordinal Likert data, plus rating aggregation.

Uses the coincidence-matrix formulation, which handles missing cells
directly: an absent cell is simply an untested (rater, item) pair and is
never imputed. The ordinal distance between levels c and k is the squared
difference of cumulative-frequency midpoints,

    d(c, k)^2 = (sum_{g=c..k} n_g - (n_c + n_k) / 2)^2,

with level frequencies n_g taken over the pairable values.

Degenerate inputs are reported as errors, never as agreement: a matrix
where no item has two ratings raises InsufficientData, and one where every
pairable value is identical (expected disagreement zero) raises
DegenerateData rather than returning 1.0.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import CascadekitError


class InsufficientData(CascadekitError):
    """No item carries two or more ratings; alpha is undefined."""


class DegenerateData(CascadekitError):
    """All pairable values identical; expected disagreement is zero."""


class EmptyInput(CascadekitError):
    pass


@dataclass
class RatingMatrix:
    """Sparse raters-by-items matrix of integer levels in 1..levels."""

    raters: list[str]
    items: list[str]
    cells: dict[tuple[str, str], int]
    levels: int = 5

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        for (rater, item), value in self.cells.items():
            if rater not in self.raters or item not in self.items:
                raise ValueError(f"cell ({rater!r}, {item!r}) outside matrix")
            if not 1 <= value <= self.levels:
                raise ValueError(
                    f"value {value} for ({rater!r}, {item!r}) outside 1..{self.levels}"
                )

    @classmethod
    def from_records(
        cls, records: Iterable[tuple[str, str, int]], levels: int = 5
    ) -> "RatingMatrix":
        raters: list[str] = []
        items: list[str] = []
        cells: dict[tuple[str, str], int] = {}
        for rater, item, value in records:
            if rater not in raters:
                raters.append(rater)
            if item not in items:
                items.append(item)
            cells[(rater, item)] = value
        return cls(raters, items, cells, levels)

    def item_values(self) -> dict[str, list[int]]:
        by_item: dict[str, list[int]] = defaultdict(list)
        for rater in self.raters:
            for item in self.items:
                value = self.cells.get((rater, item))
                if value is not None:
                    by_item[item].append(value)
        return dict(by_item)


@dataclass
class AgreementReport:
    alpha: float
    metric: str
    n_pairable: int
    per_system_means: dict = field(default_factory=dict)


def krippendorff_alpha(matrix: RatingMatrix, metric: str = "ordinal") -> AgreementReport:
    """alpha = 1 - D_observed / D_expected over the coincidence matrix."""
    if metric not in ("ordinal", "nominal"):
        raise ValueError(f"metric must be 'ordinal' or 'nominal', got {metric!r}")

    pairable = {
        item: values
        for item, values in matrix.item_values().items()
        if len(values) >= 2
    }
    if not pairable:
        raise InsufficientData("no item has two or more ratings")

    # Coincidence counts: each ordered within-unit pair contributes
    # 1/(m_u - 1). Marginals reduce to plain value frequencies.
    coincidence: dict[tuple[int, int], float] = defaultdict(float)
    freq: Counter = Counter()
    for values in pairable.values():
        m = len(values)
        freq.update(values)
        for i, vi in enumerate(values):
            for j, vj in enumerate(values):
                if i != j:
                    coincidence[(vi, vj)] += 1.0 / (m - 1)
    n = sum(freq.values())

    def delta_sq(c: int, k: int) -> float:
        if c == k:
            return 0.0
        if metric == "nominal":
            return 1.0
        lo, hi = min(c, k), max(c, k)
        span = sum(freq[g] for g in range(lo, hi + 1))
        return (span - (freq[c] + freq[k]) / 2.0) ** 2

    d_observed = sum(
        weight * delta_sq(c, k) for (c, k), weight in coincidence.items()
    ) / n
    d_expected = sum(
        freq[c] * freq[k] * delta_sq(c, k)
        for c in freq
        for k in freq
        if c != k
    ) / (n * (n - 1))
    if d_expected == 0.0:
        raise DegenerateData(
            "all pairable values identical; alpha is undefined, not 1.0"
        )
    return AgreementReport(
        alpha=1.0 - d_observed / d_expected, metric=metric, n_pairable=n
    )


@dataclass(frozen=True)
class SystemRating:
    """One rater's Likert pair for one item of one system."""

    system: str
    fluency: int
    adequacy: int
    sentence_type: Optional[str] = None
    rater: Optional[str] = None
    item: Optional[str] = None

    def __post_init__(self):
        for name in ("fluency", "adequacy"):
            value = getattr(self, name)
            if not 1 <= value <= 5:
                raise ValueError(f"{name} {value} outside 1..5")


@dataclass
class RatingSummary:
    """Arithmetic means per system, and per (system, sentence type)."""

    per_system: dict[str, dict[str, float]]
    per_system_type: dict[tuple[str, str], dict[str, float]]


def _means(ratings: list[SystemRating]) -> dict[str, float]:
    n = len(ratings)
    return {
        "fluency": sum(r.fluency for r in ratings) / n,
        "adequacy": sum(r.adequacy for r in ratings) / n,
        "n": n,
    }


def aggregate_ratings(records: Iterable[SystemRating]) -> RatingSummary:
    """Per-system means across raters, split by sentence type when tagged."""
    records = list(records)
    if not records:
        raise EmptyInput("no rating records")
    by_system: dict[str, list[SystemRating]] = defaultdict(list)
    by_system_type: dict[tuple[str, str], list[SystemRating]] = defaultdict(list)
    for record in records:
        by_system[record.system].append(record)
        if record.sentence_type is not None:
            by_system_type[(record.system, record.sentence_type)].append(record)
    return RatingSummary(
        per_system={system: _means(rs) for system, rs in by_system.items()},
        per_system_type={key: _means(rs) for key, rs in by_system_type.items()},
    )
