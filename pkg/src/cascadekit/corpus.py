"""Evaluation manifests, corpus filtering, and restoration-pair building.

The manifest is line-delimited JSON, UTF-8, one evaluation item per line.
Known fields are validated; unknown fields are preserved on round-trip so
manifests can grow without breaking older tooling.

Filtering mirrors common speech/parallel-corpus hygiene: drop utterances
containing numerals, drop clips strictly longer than a duration bound,
drop pairs at or below a similarity threshold (strictly greater passes),
and drop pairs whose auxiliary translation scores below a chrF++ cutoff.
Similarity scores are ingested, never computed here: embedding inference
stays outside the toolkit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from . import metrics
from .errors import CascadekitError
from .restore import RestorePair
from .textcore import DEFAULT_PUNCT, DegradeMode, PunctClass, degrade, normalize

SENTENCE_TYPES = ("statement", "question", "command", "complex", "named_entity")

_DEVANAGARI_DIGITS = {chr(cp) for cp in range(0x0966, 0x0970)}
_ASCII_DIGITS = set("0123456789")
_NUMERALS = _DEVANAGARI_DIGITS | _ASCII_DIGITS


class ParseError(CascadekitError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateId(CascadekitError):
    def __init__(self, item_id: str, first_line: int, second_line: int):
        super().__init__(
            f"duplicate id {item_id!r} on lines {first_line} and {second_line}"
        )
        self.item_id = item_id
        self.lines = (first_line, second_line)


class UnknownType(CascadekitError):
    pass


class MissingSimilarity(CascadekitError):
    pass


@dataclass
class EvalItem:
    """One test sentence: reference transcript, translations, and metadata."""

    id: str
    ref_transcript: str
    ref_translations: list[str]
    sentence_type: str
    audio_path: Optional[str] = None
    duration_s: Optional[float] = None
    speaker_id: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sentence_type not in SENTENCE_TYPES:
            raise UnknownType(
                f"sentence_type {self.sentence_type!r} not in {SENTENCE_TYPES}"
            )
        if not self.ref_translations:
            raise ValueError(f"item {self.id!r} has no reference translations")
        if self.duration_s is not None and self.duration_s <= 0:
            raise ValueError(f"item {self.id!r} duration_s must be > 0")
        self.ref_transcript = normalize(self.ref_transcript)
        self.ref_translations = [normalize(t) for t in self.ref_translations]

    def to_json(self) -> dict:
        record = {
            "id": self.id,
            "ref_transcript": self.ref_transcript,
            "ref_translations": self.ref_translations,
            "sentence_type": self.sentence_type,
        }
        for name in ("audio_path", "duration_s", "speaker_id"):
            value = getattr(self, name)
            if value is not None:
                record[name] = value
        record.update(self.extra)
        return record


_KNOWN_FIELDS = {
    "id",
    "ref_transcript",
    "ref_translations",
    "sentence_type",
    "audio_path",
    "duration_s",
    "speaker_id",
}


def load_manifest(path: str | Path) -> list[EvalItem]:
    """Parse and validate a manifest; duplicate ids and bad types are errors."""
    items: list[EvalItem] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except ValueError as exc:
                raise ParseError(line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ParseError(line_no, "record is not an object")
            missing = {"id", "ref_transcript", "ref_translations", "sentence_type"} - set(record)
            if missing:
                raise ParseError(line_no, f"missing fields: {sorted(missing)}")
            item_id = str(record["id"])
            if item_id in seen:
                raise DuplicateId(item_id, seen[item_id], line_no)
            seen[item_id] = line_no
            try:
                items.append(
                    EvalItem(
                        id=item_id,
                        ref_transcript=record["ref_transcript"],
                        ref_translations=list(record["ref_translations"]),
                        sentence_type=record["sentence_type"],
                        audio_path=record.get("audio_path"),
                        duration_s=record.get("duration_s"),
                        speaker_id=record.get("speaker_id"),
                        extra={
                            key: value
                            for key, value in record.items()
                            if key not in _KNOWN_FIELDS
                        },
                    )
                )
            except UnknownType as exc:
                raise UnknownType(f"line {line_no}: {exc}") from exc
            except (TypeError, ValueError) as exc:
                raise ParseError(line_no, str(exc)) from exc
    return items


def save_manifest(items: Iterable[EvalItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for item in items:
            handle.write(json.dumps(item.to_json(), ensure_ascii=False) + "\n")


def type_stats(items: Iterable[EvalItem]) -> dict[str, int]:
    """Exact counts per sentence type; every category present, zeros kept."""
    counts = {t: 0 for t in SENTENCE_TYPES}
    for item in items:
        counts[item.sentence_type] += 1
    return counts


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FilterSpec:
    """Which predicates are enabled and their thresholds."""

    drop_numerals: bool = False
    max_duration_s: Optional[float] = None
    min_similarity: Optional[float] = None
    chrf_cutoff: Optional[float] = None

    def __post_init__(self):
        if self.min_similarity is not None and not 0 <= self.min_similarity <= 1:
            raise ValueError("min_similarity must be in [0, 1]")
        if self.chrf_cutoff is not None and not 0 <= self.chrf_cutoff <= 100:
            raise ValueError("chrf_cutoff must be in [0, 100]")


@dataclass
class FilterRecord:
    """A parallel/speech record as seen by the filters."""

    id: str
    text: str
    duration_s: Optional[float] = None
    translation: Optional[str] = None
    ref_translation: Optional[str] = None
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FilterDecision:
    id: str
    kept: bool
    reason: Optional[str] = None  # first failing predicate only


def contains_numeral(text: str) -> bool:
    return any(ch in _NUMERALS for ch in text)


def apply_filters(
    records: Sequence[FilterRecord],
    spec: FilterSpec,
    sim_scores: Optional[Mapping[str, float]] = None,
) -> tuple[list[FilterRecord], list[FilterDecision]]:
    """Partition records into kept and dropped-with-reason.

    Predicates run in a fixed order (numerals, duration, similarity, chrF
    cutoff) and the first failure names the drop reason. Duration and
    similarity bounds are strict: duration exactly at the bound is kept,
    similarity exactly at the threshold is dropped.
    """
    if spec.min_similarity is not None:
        sim_scores = sim_scores or {}
        for record in records:
            if record.id not in sim_scores:
                raise MissingSimilarity(f"no similarity score for id {record.id!r}")

    kept: list[FilterRecord] = []
    decisions: list[FilterDecision] = []
    for record in records:
        reason = None
        if spec.drop_numerals and contains_numeral(record.text):
            reason = "numeral"
        elif (
            spec.max_duration_s is not None
            and record.duration_s is not None
            and record.duration_s > spec.max_duration_s
        ):
            reason = "duration"
        elif (
            spec.min_similarity is not None
            and sim_scores[record.id] <= spec.min_similarity
        ):
            reason = "similarity"
        elif (
            spec.chrf_cutoff is not None
            and record.translation is not None
            and record.ref_translation is not None
        ):
            score = metrics.chrf_pp([record.translation], [[record.ref_translation]])
            if score.value < spec.chrf_cutoff:
                reason = "chrf_cutoff"
        if reason is None:
            kept.append(record)
            decisions.append(FilterDecision(record.id, True))
        else:
            decisions.append(FilterDecision(record.id, False, reason))
    return kept, decisions


# ---------------------------------------------------------------------------
# Restoration training data
# ---------------------------------------------------------------------------


def build_restore_pairs(
    sentences: Iterable[str],
    modes: Iterable[DegradeMode] = (DegradeMode.PUNCT_ONLY, DegradeMode.FUSED),
    punct: PunctClass = DEFAULT_PUNCT,
) -> list[RestorePair]:
    """One (degraded, reference) pair per sentence per requested mode."""
    pairs = []
    for sentence in sentences:
        target = normalize(sentence)
        for mode in modes:
            pairs.append(
                RestorePair(input=degrade(target, mode, punct), target=target, mode=mode)
            )
    return pairs
