"""Statistical punctuation-and-segmentation restorer.

A smoothed character-context decision table stands in for a neural
text-to-text restoration stage: fully native, deterministic, and trainable
in seconds at desk scale. A real model can attach through the adapters
module instead when higher accuracy is wanted.

The model views any text as an alternation of *core* code points (neither
whitespace nor configured punctuation) and *gap material* (the whitespace
and punctuation between consecutive core code points, including the ends of
the string). Training walks each (degraded input, punctuated target) pair:
the target fixes the desired material at every gap, and the gap's context
window in the degraded input (k code points each side, excluding the gap's
own material) is credited with that decision. Both degradation conditions
of a sentence contribute their own context windows, so the table learns
spaced and fused regimes separately.

Decoding is greedy per gap (no beam): the argmax decision under add-alpha
smoothing, with ties broken toward inserting nothing. An uncertain restorer
must not damage its input, so restoration never deletes or reorders
existing non-space content; with ``preserve_spaces`` existing spaces are
immutable as well and space decisions only apply at space-free gaps.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CascadekitError
from .textcore import DEFAULT_PUNCT, DegradeMode, PunctClass, degrade, normalize

MODEL_FORMAT = "cascadekit-boundary-model"
MODEL_VERSION = 1

# Canonical decision spellings: "" inserts nothing, " " a space, any other
# string is punctuation (optionally with an attached space, e.g. ". ").
DECISION_NONE = ""
DECISION_SPACE = " "


class InvalidPair(CascadekitError):
    """A training pair fails its degradation round-trip invariant."""


class EmptyInput(CascadekitError):
    pass


class EmptyModel(CascadekitError):
    """The model has no trained contexts."""


class CorruptModel(CascadekitError):
    """A model file failed checksum, format, or version validation."""


@dataclass(frozen=True)
class RestorePair:
    """One (degraded input, punctuated target) training example."""

    input: str
    target: str
    mode: DegradeMode

    def validate(self, punct: PunctClass = DEFAULT_PUNCT) -> None:
        expected = degrade(normalize(self.target), self.mode, punct)
        if expected != normalize(self.input):
            raise InvalidPair(
                f"degrade(target, {self.mode.value}) == {expected!r} "
                f"!= input {self.input!r}"
            )


def split_gaps(text: str, punct: PunctClass = DEFAULT_PUNCT) -> tuple[str, list[str]]:
    """Split text into its core string and the material at each gap.

    Returns ``(core, materials)`` with ``len(materials) == len(core) + 1``:
    materials[0] precedes the first core code point, materials[i] sits
    between core[i-1] and core[i], materials[-1] trails the last one.
    Joining them back (material, char, material, char, ..., material)
    reproduces the text exactly.
    """
    core: list[str] = []
    materials: list[str] = [""]
    for ch in text:
        if ch.isspace() or ch in punct:
            materials[-1] += ch
        else:
            core.append(ch)
            materials.append("")
    return "".join(core), materials


def join_gaps(core: str, materials: Sequence[str]) -> str:
    parts = [materials[0]]
    for ch, material in zip(core, materials[1:]):
        parts.append(ch)
        parts.append(material)
    return "".join(parts)


def _context_windows(text: str, punct: PunctClass, k: int) -> list[tuple[str, str]]:
    """Per-gap (left, right) windows of k code points from the raw text.

    The window for a gap ends at / starts from its adjacent core code
    points, so the gap's own material never appears in its own context
    (neighboring gaps' material does).
    """
    core_positions = [
        i for i, ch in enumerate(text) if not (ch.isspace() or ch in punct)
    ]
    windows = []
    for gap in range(len(core_positions) + 1):
        left_end = core_positions[gap - 1] + 1 if gap > 0 else 0
        right_start = (
            core_positions[gap] if gap < len(core_positions) else len(text)
        )
        windows.append((text[max(0, left_end - k) : left_end], text[right_start : right_start + k]))
    return windows


@dataclass
class BoundaryModel:
    """Context-conditioned gap decision counts."""

    k: int = 3
    smoothing_alpha: float = 0.1
    punct: PunctClass = DEFAULT_PUNCT
    counts: dict[tuple[str, str], Counter] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("context order k must be >= 1")
        if self.smoothing_alpha <= 0:
            raise ValueError("smoothing_alpha must be > 0")

    def decisions(self) -> set[str]:
        inventory = {DECISION_NONE, DECISION_SPACE}
        for counter in self.counts.values():
            inventory.update(counter)
        return inventory

    def decide(self, context: tuple[str, str]) -> str:
        """Smoothed argmax decision; ties prefer inserting nothing.

        Add-alpha smoothing shifts every decision equally, so the argmax
        reduces to raw counts; an unseen context is an all-way tie and
        falls to the no-insertion decision.
        """
        counter = self.counts.get(context)
        if not counter:
            return DECISION_NONE
        best_count = max(counter.values())
        if best_count <= counter.get(DECISION_NONE, 0):
            return DECISION_NONE
        return min(d for d, c in counter.items() if c == best_count)

    def distribution(self, context: tuple[str, str]) -> dict[str, float]:
        counter = self.counts.get(context, Counter())
        inventory = sorted(self.decisions())
        total = sum(counter.get(d, 0) for d in inventory) + self.smoothing_alpha * len(
            inventory
        )
        return {
            d: (counter.get(d, 0) + self.smoothing_alpha) / total for d in inventory
        }

    def checksum(self) -> str:
        return hashlib.sha256(
            _canonical_json(_payload(self)).encode("utf-8")
        ).hexdigest()


def train(
    pairs: Iterable[RestorePair],
    k: int = 3,
    alpha: float = 0.1,
    punct: PunctClass = DEFAULT_PUNCT,
) -> BoundaryModel:
    """Fold training pairs into a decision table.

    Every pair must satisfy its round-trip invariant; counting is a plain
    sum, so the result does not depend on pair order.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no training pairs")
    model = BoundaryModel(k=k, smoothing_alpha=alpha, punct=punct)
    for pair in pairs:
        pair.validate(punct)
        target = normalize(pair.target)
        source = normalize(pair.input)
        core, target_materials = split_gaps(target, punct)
        windows = _context_windows(source, punct, k)
        # cores agree because the round-trip invariant held
        for window, material in zip(windows, target_materials):
            model.counts.setdefault(window, Counter())[material] += 1
    return model


def _apply_decision(decision: str, existing: str, preserve_spaces: bool) -> str:
    """Merge a decided gap material with what the input already has there.

    Existing punctuation is never deleted or duplicated; under
    ``preserve_spaces`` existing spaces are immutable and the decision can
    only add punctuation ahead of them or a missing space.
    """
    if not preserve_spaces:
        existing = existing.replace(" ", "")
    if decision == DECISION_NONE:
        return existing
    existing_punct = existing.replace(" ", "")
    decision_has_space = " " in decision
    if existing_punct:
        if decision_has_space and " " not in existing:
            return existing + " "
        return existing
    if " " in existing:
        return decision.replace(" ", "") + existing
    return decision


def restore(
    model: BoundaryModel, text: str, preserve_spaces: bool = True
) -> str:
    """Greedy per-gap restoration of punctuation and segmentation.

    With ``preserve_spaces`` false the input's spaces are discarded and
    every gap is re-decided from scratch (full re-segmentation); with it
    true the input's segmentation is kept and only missing material is
    added.
    """
    if not model.counts:
        raise EmptyModel("model has no trained contexts")
    source = normalize(text)
    if not preserve_spaces:
        source = source.replace(" ", "")
    core, existing = split_gaps(source, model.punct)
    windows = _context_windows(source, model.punct, model.k)
    materials = [
        _apply_decision(model.decide(window), material, preserve_spaces)
        for window, material in zip(windows, existing)
    ]
    return normalize(join_gaps(core, materials))


# ---------------------------------------------------------------------------
# Serialization: versioned, checksummed JSON container
# ---------------------------------------------------------------------------


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=True, separators=(",", ":"))


def _payload(model: BoundaryModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "k": model.k,
        "smoothing_alpha": model.smoothing_alpha,
        "punct_marks": sorted(model.punct.marks),
        "contexts": [
            [left, right, dict(sorted(counter.items()))]
            for (left, right), counter in sorted(model.counts.items())
        ],
    }


def serialize(model: BoundaryModel) -> str:
    payload = _payload(model)
    payload["checksum"] = model.checksum()
    return _canonical_json(payload) + "\n"


def save(model: BoundaryModel, path: str | Path) -> None:
    Path(path).write_text(serialize(model), encoding="utf-8")


def load(path: str | Path) -> BoundaryModel:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CorruptModel(f"unreadable model file {path}: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("format") != MODEL_FORMAT:
        raise CorruptModel(f"{path} is not a boundary model file")
    if raw.get("version") != MODEL_VERSION:
        raise CorruptModel(
            f"unsupported model version {raw.get('version')!r}, "
            f"expected {MODEL_VERSION}"
        )
    stored_checksum = raw.get("checksum")
    payload = {key: value for key, value in raw.items() if key != "checksum"}
    actual = hashlib.sha256(_canonical_json(payload).encode("utf-8")).hexdigest()
    if actual != stored_checksum:
        raise CorruptModel(f"checksum mismatch in {path}")
    try:
        model = BoundaryModel(
            k=raw["k"],
            smoothing_alpha=raw["smoothing_alpha"],
            punct=PunctClass(frozenset(raw["punct_marks"])),
            counts={
                (left, right): Counter(
                    {decision: int(count) for decision, count in decisions.items()}
                )
                for left, right, decisions in raw["contexts"]
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model payload in {path}: {exc}") from exc
    return model
