"""Unicode normalization, punctuation classes, and text degradation.

Covers Devanagari + ASCII text as it moves through a cascaded
speech-translation pipeline:

- canonical (composed) Unicode normalization with whitespace collapsing,
  applied at every module boundary so edit-distance and n-gram metrics are
  never sensitive to encoding variants;
- a configurable punctuation class (danda/double danda plus common ASCII
  marks by default);
- the two degradation conditions used to emulate ASR output: punctuation
  stripping, and full fusion (spaces and punctuation both removed).

Zero-width joiner/non-joiner are orthographically significant in Devanagari
and are never treated as whitespace or punctuation here.

All functions are pure; values are immutable and safe to share across
workers.
"""

from __future__ import annotations

import enum
import re
import unicodedata

# Any Unicode whitespace run collapses to a single ASCII space. ZWJ/ZWNJ are
# category Cf, not matched by \s, so they survive.
_WS_RE = re.compile(r"\s+", flags=re.UNICODE)

DANDA = "।"
DOUBLE_DANDA = "॥"

# Broader than sentence-final marks alone: evaluation sets contain questions
# and quoted speech, so those marks must be strippable too. Callers can pass
# their own PunctClass per run.
DEFAULT_PUNCT_MARKS = frozenset(
    {DANDA, DOUBLE_DANDA, ",", ".", "?", "!", ";", ":", "'", '"'}
)


def is_punct_or_symbol(ch: str) -> bool:
    """True when the code point's Unicode category is P* or S*."""
    return unicodedata.category(ch)[0] in ("P", "S")


class PunctClass:
    """An immutable set of code points treated as punctuation.

    Every member must be classified as punctuation or symbol by its Unicode
    category, or be the danda/double danda (which are Po anyway, but are
    allowed explicitly so the invariant does not silently depend on the
    Unicode version).
    """

    __slots__ = ("marks",)

    def __init__(self, marks=DEFAULT_PUNCT_MARKS):
        marks = frozenset(marks)
        if not marks:
            raise ValueError("punctuation class must be non-empty")
        for ch in marks:
            if len(ch) != 1:
                raise ValueError(f"marks must be single code points, got {ch!r}")
            if ch not in (DANDA, DOUBLE_DANDA) and not is_punct_or_symbol(ch):
                raise ValueError(
                    f"{ch!r} (category {unicodedata.category(ch)}) is not "
                    "punctuation or symbol"
                )
        object.__setattr__(self, "marks", marks)

    def __setattr__(self, name, value):
        raise AttributeError("PunctClass is immutable")

    def __contains__(self, ch: str) -> bool:
        return ch in self.marks

    def __eq__(self, other) -> bool:
        return isinstance(other, PunctClass) and self.marks == other.marks

    def __hash__(self) -> int:
        return hash(self.marks)

    def __repr__(self) -> str:
        return f"PunctClass({sorted(self.marks)!r})"


DEFAULT_PUNCT = PunctClass()


class DegradeMode(enum.Enum):
    """The two degradation conditions applied to reference text."""

    PUNCT_ONLY = "punct_only"  # punctuation removed, word boundaries kept
    FUSED = "fused"  # punctuation and inter-word spaces both removed

    @classmethod
    def parse(cls, name: str) -> "DegradeMode":
        for mode in cls:
            if name in (mode.value, mode.name, mode.name.lower()):
                return mode
        raise ValueError(f"unknown degrade mode: {name!r}")


def normalize(raw: str) -> str:
    """Canonical-composed form, trimmed, internal whitespace runs collapsed.

    Idempotent; empty in, empty out.
    """
    return _WS_RE.sub(" ", unicodedata.normalize("NFC", raw)).strip()


def strip_punctuation(text: str, punct: PunctClass = DEFAULT_PUNCT) -> str:
    """Remove every code point of ``punct``; re-collapse the result.

    Non-punctuation content and word boundaries are preserved.
    """
    return normalize("".join(ch for ch in text if ch not in punct))


def fuse_words(text: str) -> str:
    """Remove all whitespace, preserving every other code point in order."""
    return _WS_RE.sub("", text)


def degrade(text: str, mode: DegradeMode, punct: PunctClass = DEFAULT_PUNCT) -> str:
    """Apply one degradation condition to normalized text."""
    if mode is DegradeMode.PUNCT_ONLY:
        return strip_punctuation(text, punct)
    if mode is DegradeMode.FUSED:
        return fuse_words(strip_punctuation(text, punct))
    raise ValueError(f"unknown mode: {mode!r}")
