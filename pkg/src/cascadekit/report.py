"""Score tables: condition deltas, scenario comparisons, per-type breakdowns.

Numbers are kept full-precision internally and rounded only at render time
(round-half-even, 2 decimals for corpus metrics, 3 for Likert means).
Storing rounded values invites drift: a relative drop recomputed from
rounded operands can disagree with one computed upstream.

Every table renders to three formats: line-delimited records (full
precision), comma-separated values, and a plain markup table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Iterable, Mapping, Optional, Sequence, Union

from .corpus import SENTENCE_TYPES, UnknownType
from .errors import CascadekitError
from .metrics import CorpusScore

FORMATS = ("records", "csv", "md")

SCENARIO_ORDER = ("A", "B", "C")


class ZeroBaseline(CascadekitError):
    pass


class MissingBaseline(CascadekitError):
    pass


def round_half_even(value: float, places: int) -> Decimal:
    # repr() keeps the shortest faithful form, so 2.675 stays 2.675, not
    # the binary expansion — rounding then behaves as a reader expects.
    return Decimal(repr(value)).quantize(
        Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN
    )


def fmt(value: float, places: int = 2) -> str:
    return str(round_half_even(value, places))


def fmt_signed(value: float, places: int = 2) -> str:
    quantized = round_half_even(value, places)
    text = str(quantized)
    return text if text.startswith("-") else "+" + text


# ---------------------------------------------------------------------------
# Deltas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Delta:
    """Treated-vs-baseline comparison; derived values are never stored."""

    baseline: float
    treated: float

    @property
    def delta(self) -> float:
        return self.treated - self.baseline

    @property
    def relative_pct(self) -> float:
        if self.baseline == 0:
            raise ZeroBaseline("relative change undefined for zero baseline")
        return self.delta / self.baseline * 100

    def render(self) -> str:
        text = fmt_signed(self.delta)
        try:
            text += f" ({fmt_signed(self.relative_pct)}%)"
        except ZeroBaseline:
            pass
        return text


def delta(baseline: float, treated: float) -> Delta:
    return Delta(baseline=baseline, treated=treated)


@dataclass(frozen=True)
class DeltaRow:
    label: str
    metric: str
    baseline: float
    treated: float


def delta_table(rows: Sequence[DeltaRow], fmt_name: str = "md") -> str:
    header = ["label", "metric", "baseline", "treated", "delta", "relative_pct"]
    body = []
    for row in rows:
        d = Delta(row.baseline, row.treated)
        try:
            relative: Optional[float] = d.relative_pct
        except ZeroBaseline:
            relative = None
        body.append(
            {
                "label": row.label,
                "metric": row.metric,
                "baseline": row.baseline,
                "treated": row.treated,
                "delta": d.delta,
                "relative_pct": relative,
            }
        )
    if fmt_name == "records":
        return _records(body)
    rendered = [
        [
            row["label"],
            row["metric"],
            fmt(row["baseline"]),
            fmt(row["treated"]),
            fmt_signed(row["delta"]),
            "—" if row["relative_pct"] is None else fmt_signed(row["relative_pct"]) + "%",
        ]
        for row in body
    ]
    return _csv(header, rendered) if fmt_name == "csv" else _md(header, rendered)


# ---------------------------------------------------------------------------
# Scenario comparison
# ---------------------------------------------------------------------------

Score = Union[float, CorpusScore]


def _as_float(value: Score) -> float:
    return value.value if isinstance(value, CorpusScore) else float(value)


def scenario_table(
    runs: Mapping[str, Mapping[str, Score]], fmt_name: str = "md"
) -> str:
    """BLEU, chrF++, and ΔBLEU against scenario A, in fixed A, B, C order.

    `runs` maps scenario name → {"bleu": ..., "chrf_pp": ...}; extra
    scenarios beyond A/B/C follow in sorted order.
    """
    if "A" not in runs:
        raise MissingBaseline("scenario A is the delta baseline and must be present")
    baseline_bleu = _as_float(runs["A"]["bleu"])
    names = [n for n in SCENARIO_ORDER if n in runs] + sorted(
        n for n in runs if n not in SCENARIO_ORDER
    )
    body = []
    for name in names:
        scores = runs[name]
        bleu = _as_float(scores["bleu"])
        chrf = _as_float(scores["chrf_pp"]) if "chrf_pp" in scores else None
        body.append(
            {
                "scenario": name,
                "bleu": bleu,
                "chrf_pp": chrf,
                "delta_bleu": None if name == "A" else bleu - baseline_bleu,
            }
        )
    if fmt_name == "records":
        return _records(body)
    header = ["scenario", "bleu", "chrf_pp", "delta_bleu"]
    rendered = [
        [
            row["scenario"],
            fmt(row["bleu"]),
            "" if row["chrf_pp"] is None else fmt(row["chrf_pp"]),
            "—" if row["delta_bleu"] is None else fmt_signed(row["delta_bleu"]),
        ]
        for row in body
    ]
    return _csv(header, rendered) if fmt_name == "csv" else _md(header, rendered)


# ---------------------------------------------------------------------------
# Sentence-type breakdown
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypedScore:
    sentence_type: str
    system: str
    value: float


def type_breakdown(records: Iterable[TypedScore], fmt_name: str = "md") -> str:
    """Per-type per-system means; the markup view bolds each row's maximum.

    Ties bold every maximal cell.  Means render at 3 decimals (Likert
    resolution); tie detection uses the rendered precision so the bolding
    matches what a reader can actually distinguish.
    """
    records = list(records)
    sums: dict[tuple[str, str], float] = {}
    counts: dict[tuple[str, str], int] = {}
    systems: list[str] = []
    for record in records:
        if record.sentence_type not in SENTENCE_TYPES:
            raise UnknownType(f"sentence_type {record.sentence_type!r}")
        key = (record.sentence_type, record.system)
        sums[key] = sums.get(key, 0.0) + record.value
        counts[key] = counts.get(key, 0) + 1
        if record.system not in systems:
            systems.append(record.system)
    systems.sort()
    types = [t for t in SENTENCE_TYPES if any(k[0] == t for k in sums)]

    body = []
    for sentence_type in types:
        row: dict[str, object] = {"sentence_type": sentence_type}
        for system in systems:
            key = (sentence_type, system)
            row[system] = sums[key] / counts[key] if key in counts else None
        body.append(row)
    if fmt_name == "records":
        return _records(body)

    header = ["sentence_type"] + systems
    rendered = []
    for row in body:
        cells = {
            system: None if row[system] is None else round_half_even(row[system], 3)
            for system in systems
        }
        present = [v for v in cells.values() if v is not None]
        best = max(present) if present else None
        line = [str(row["sentence_type"])]
        for system in systems:
            value = cells[system]
            if value is None:
                line.append("")
            elif fmt_name == "md" and value == best:
                line.append(f"**{value}**")
            else:
                line.append(str(value))
        rendered.append(line)
    return _csv(header, rendered) if fmt_name == "csv" else _md(header, rendered)


# ---------------------------------------------------------------------------
# Renderers
# ---------------------------------------------------------------------------


def _records(rows: list[dict]) -> str:
    return "".join(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n" for row in rows)


def _csv(header: list[str], rows: list[list[str]]) -> str:
    def esc(cell: str) -> str:
        if any(ch in cell for ch in ',"\n'):
            return '"' + cell.replace('"', '""') + '"'
        return cell

    lines = [",".join(esc(c) for c in header)]
    lines += [",".join(esc(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _md(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]

    def line(cells: list[str]) -> str:
        return "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells)) + " |"

    out = [line(header), "| " + " | ".join("-" * w for w in widths) + " |"]
    out += [line(row) for row in rows]
    return "\n".join(out) + "\n"
