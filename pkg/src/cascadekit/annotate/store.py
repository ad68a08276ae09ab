"""Blind rating sessions: state, durability, and unblinded export.

A session interleaves the hypotheses of several pipeline runs over the same
items, shuffles them under a seed, and hands each one to raters under an
opaque random key.  Which run produced which hypothesis lives only in the
server-side blind map and is revealed exclusively by finalize.

Durability is an append-only JSONL event log (session, rating, finalize
events).  Restarting replays the log; an acked rating is never lost.
Summary statistics are pure functions of the ratings, so they are
recomputed rather than logged.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .. import agreement
from ..errors import CascadekitError

OPEN = "open"
FINALIZED = "finalized"


class UnknownSession(CascadekitError):
    pass


class UnknownItemKey(CascadekitError):
    pass


class CoverageMismatch(CascadekitError):
    pass


class OutOfRange(CascadekitError):
    pass


class DuplicateRating(CascadekitError):
    pass


class SessionFinalized(CascadekitError):
    pass


@dataclass(frozen=True)
class ItemMeta:
    """Rater-facing context for one evaluation item."""

    source_text: str
    reference_text: str
    sentence_type: str


@dataclass(frozen=True)
class PresentationItem:
    item_key: str
    source_text: str
    reference_text: str
    hypothesis_text: str


@dataclass(frozen=True)
class RatingRecord:
    session_id: str
    rater: str
    item_key: str
    fluency: int
    adequacy: int
    timestamp: float


@dataclass
class Session:
    id: str
    seed: int
    items: list[PresentationItem]
    blind_map: dict[str, tuple[str, str]]  # item_key -> (run name, item id)
    item_meta: dict[str, ItemMeta]  # item id -> context
    state: str = OPEN
    ratings: dict[tuple[str, str], RatingRecord] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "seed": self.seed,
            "items": [
                {
                    "item_key": p.item_key,
                    "source_text": p.source_text,
                    "reference_text": p.reference_text,
                    "hypothesis_text": p.hypothesis_text,
                }
                for p in self.items
            ],
            "blind_map": {k: list(v) for k, v in self.blind_map.items()},
            "item_meta": {
                i: {
                    "source_text": m.source_text,
                    "reference_text": m.reference_text,
                    "sentence_type": m.sentence_type,
                }
                for i, m in self.item_meta.items()
            },
        }

    @classmethod
    def from_json(cls, record: dict) -> "Session":
        return cls(
            id=record["id"],
            seed=record["seed"],
            items=[PresentationItem(**p) for p in record["items"]],
            blind_map={k: (v[0], v[1]) for k, v in record["blind_map"].items()},
            item_meta={i: ItemMeta(**m) for i, m in record["item_meta"].items()},
        )


def _validate_likert(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
        raise OutOfRange(f"{name} must be an integer in 1..5, got {value!r}")


def build_session(
    hyps: Mapping[str, Mapping[str, str]],
    item_meta: Mapping[str, ItemMeta],
    seed: int,
    session_id: Optional[str] = None,
) -> Session:
    """Deterministically shuffle run×item hypotheses under opaque keys.

    `hyps` maps run name → item id → hypothesis.  Every run must cover the
    same ids and every id must have metadata.  The shuffle and the keys are
    fully determined by the seed, so recreating a session reproduces the
    identical presentation order.
    """
    if not hyps:
        raise CoverageMismatch("no runs supplied")
    run_names = sorted(hyps)
    id_sets = {name: frozenset(hyps[name]) for name in run_names}
    base = id_sets[run_names[0]]
    if not base:
        raise CoverageMismatch("runs contain no items")
    for name in run_names[1:]:
        if id_sets[name] != base:
            missing = sorted(base.symmetric_difference(id_sets[name]))[:5]
            raise CoverageMismatch(f"run {name!r} covers different ids (e.g. {missing})")
    absent = sorted(base - set(item_meta))[:5]
    if absent:
        raise CoverageMismatch(f"manifest lacks items {absent}")

    rng = random.Random(seed)
    pairs = [
        (run, item_id)
        for run in run_names
        for item_id in sorted(base)
    ]
    rng.shuffle(pairs)
    keys: set[str] = set()
    items: list[PresentationItem] = []
    blind_map: dict[str, tuple[str, str]] = {}
    for run, item_id in pairs:
        while True:
            key = f"{rng.getrandbits(64):016x}"
            if key not in keys:
                keys.add(key)
                break
        meta = item_meta[item_id]
        items.append(
            PresentationItem(
                item_key=key,
                source_text=meta.source_text,
                reference_text=meta.reference_text,
                hypothesis_text=hyps[run][item_id],
            )
        )
        blind_map[key] = (run, item_id)

    if session_id is None:
        session_id = f"{rng.getrandbits(48):012x}"
    meta_subset = {i: item_meta[i] for i in base}
    return Session(session_id, seed, items, blind_map, meta_subset)


class AnnotateStore:
    """In-memory session index backed by an optional append-only event log."""

    def __init__(self, log_path: Optional[str | Path] = None):
        self.log_path = Path(log_path) if log_path is not None else None
        self.sessions: dict[str, Session] = {}
        if self.log_path is not None and self.log_path.exists():
            self._replay()

    # -- persistence -------------------------------------------------------

    def _append(self, event: dict) -> None:
        if self.log_path is None:
            return
        with open(self.log_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
            handle.flush()

    def _replay(self) -> None:
        with open(self.log_path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                kind = event["event"]
                if kind == "session":
                    session = Session.from_json(event["session"])
                    self.sessions[session.id] = session
                elif kind == "rating":
                    record = RatingRecord(**event["rating"])
                    session = self.sessions[record.session_id]
                    session.ratings[(record.rater, record.item_key)] = record
                elif kind == "finalize":
                    self.sessions[event["session_id"]].state = FINALIZED

    # -- operations --------------------------------------------------------

    def create_session(
        self,
        hyps: Mapping[str, Mapping[str, str]],
        item_meta: Mapping[str, ItemMeta],
        seed: int,
        session_id: Optional[str] = None,
    ) -> Session:
        session = build_session(hyps, item_meta, seed, session_id)
        if session.id in self.sessions:
            existing = self.sessions[session.id]
            if existing.seed == seed and existing.items == session.items:
                return existing  # idempotent re-create
            raise CascadekitError(f"session id {session.id!r} already exists")
        self.sessions[session.id] = session
        self._append({"event": "session", "session": session.to_json()})
        return session

    def _session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def next_item(
        self, session_id: str, rater: str
    ) -> tuple[Optional[PresentationItem], int, int]:
        """(item or None when done, number already rated, total)."""
        session = self._session(session_id)
        if session.state != OPEN:
            raise SessionFinalized(f"session {session_id!r} is finalized")
        rated = sum(1 for (r, _key) in session.ratings if r == rater)
        for item in session.items:
            if (rater, item.item_key) not in session.ratings:
                return item, rated, len(session.items)
        return None, rated, len(session.items)

    def submit_rating(
        self,
        session_id: str,
        rater: str,
        item_key: str,
        fluency: int,
        adequacy: int,
        timestamp: Optional[float] = None,
    ) -> tuple[RatingRecord, bool]:
        """Returns (record, was_new); identical resubmission acks without append."""
        session = self._session(session_id)
        if session.state != OPEN:
            raise SessionFinalized(f"session {session_id!r} is finalized")
        if item_key not in session.blind_map:
            raise UnknownItemKey(f"no item {item_key!r} in session {session_id!r}")
        _validate_likert("fluency", fluency)
        _validate_likert("adequacy", adequacy)
        if not rater:
            raise OutOfRange("rater id must be non-empty")
        existing = session.ratings.get((rater, item_key))
        if existing is not None:
            if (existing.fluency, existing.adequacy) == (fluency, adequacy):
                return existing, False
            raise DuplicateRating(
                f"rater {rater!r} already rated item {item_key!r} differently"
            )
        record = RatingRecord(
            session_id=session_id,
            rater=rater,
            item_key=item_key,
            fluency=fluency,
            adequacy=adequacy,
            timestamp=time.time() if timestamp is None else timestamp,
        )
        session.ratings[(rater, item_key)] = record
        self._append({"event": "rating", "rating": record.__dict__})
        return record, True

    def finalize(self, session_id: str) -> dict:
        session = self._session(session_id)
        if session.state == FINALIZED:
            return self.export(session_id)  # idempotent
        session.state = FINALIZED
        self._append({"event": "finalize", "session_id": session_id})
        return self.export(session_id)

    def export(self, session_id: str) -> dict:
        """Unblinded rows plus summary stats; only meaningful once finalized."""
        session = self._session(session_id)
        if session.state != FINALIZED:
            raise SessionFinalized(f"session {session_id!r} is not finalized yet")
        rows = []
        system_ratings = []
        for (rater, item_key), record in sorted(session.ratings.items()):
            run, item_id = session.blind_map[item_key]
            sentence_type = session.item_meta[item_id].sentence_type
            rows.append(
                {
                    "rater": rater,
                    "scenario": run,
                    "item_id": item_id,
                    "item_key": item_key,
                    "sentence_type": sentence_type,
                    "fluency": record.fluency,
                    "adequacy": record.adequacy,
                    "timestamp": record.timestamp,
                }
            )
            system_ratings.append(
                agreement.SystemRating(
                    system=run,
                    fluency=record.fluency,
                    adequacy=record.adequacy,
                    sentence_type=sentence_type,
                    rater=rater,
                    item=item_key,
                )
            )
        summary: dict = {"n_ratings": len(rows)}
        if system_ratings:
            aggregated = agreement.aggregate_ratings(system_ratings)
            summary["per_system"] = aggregated.per_system
            summary["per_type"] = {
                f"{system}/{stype}": means
                for (system, stype), means in aggregated.per_system_type.items()
            }
            summary["alpha"] = {
                "fluency": self._alpha(session, dimension="fluency"),
                "adequacy": self._alpha(session, dimension="adequacy"),
            }
        return {
            "session_id": session_id,
            "state": session.state,
            "seed": session.seed,
            "rows": rows,
            "summary": summary,
        }

    def _alpha(self, session: Session, dimension: str) -> Optional[float]:
        raters = sorted({r for r, _ in session.ratings})
        item_keys = [p.item_key for p in session.items]
        cells = {
            (rater, key): getattr(record, dimension)
            for (rater, key), record in session.ratings.items()
        }
        matrix = agreement.RatingMatrix(raters=raters, items=item_keys, cells=cells)
        try:
            report = agreement.krippendorff_alpha(matrix, metric="ordinal")
        except (agreement.InsufficientData, agreement.DegenerateData):
            return None
        return report.alpha


def meta_from_items(items: Iterable) -> dict[str, ItemMeta]:
    """Adapt manifest EvalItems to rater-facing metadata."""
    meta = {}
    for item in items:
        meta[item.id] = ItemMeta(
            source_text=item.ref_transcript,
            reference_text=item.ref_translations[0],
            sentence_type=item.sentence_type,
        )
    return meta
