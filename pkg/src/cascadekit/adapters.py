"""Uniform stage interface for pipeline steps.

A stage (speech recognition, boundary restoration, translation) can be
backed by an identity mapping, a fixture file, the builtin restorer, or an
external process speaking a line-delimited JSON protocol over stdin/stdout:

    parent → child   {"protocol": 1, "stage": "translate"}   (handshake)
    parent → child   {"id": "s1", "text": "..."}             (request)
    child  → parent  {"id": "s1", "text": "..."}             (response)
    child  → parent  {"id": "s1", "error": "detail"}         (failure)

One record per line, UTF-8, flushed per record.  Responses may arrive in
any order; the runner matches them to requests by id, so the child is free
to batch its inference.  A non-zero child exit mid-stream is a hard error.
"""

from __future__ import annotations

import hashlib
import json
import queue
import subprocess
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import CascadekitError
from .restore import BoundaryModel, restore
from .textcore import normalize


class StageKind(str, Enum):
    ASR = "asr"
    RESTORE = "restore"
    TRANSLATE = "translate"


class MissingFixture(CascadekitError):
    def __init__(self, item_id: str):
        super().__init__(f"fixture has no entry for id {item_id!r}")
        self.item_id = item_id


class ProcessExit(CascadekitError):
    def __init__(self, code: Optional[int], detail: str = ""):
        message = f"stage process exited with code {code}"
        if detail:
            message += f": {detail}"
        super().__init__(message)
        self.code = code


class StageTimeout(CascadekitError):
    def __init__(self, item_id: str, timeout_ms: int):
        super().__init__(f"no response for id {item_id!r} within {timeout_ms} ms")
        self.item_id = item_id


class ProtocolViolation(CascadekitError):
    pass


class StageItemError(CascadekitError):
    """Child answered {id, error} for an item."""

    def __init__(self, item_id: str, detail: str):
        super().__init__(f"stage failed on id {item_id!r}: {detail}")
        self.item_id = item_id
        self.detail = detail


# ---------------------------------------------------------------------------
# Backings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    """Pass-through stage (e.g. a no-op restore slot)."""


@dataclass(frozen=True)
class FixtureFile:
    """Pre-recorded outputs keyed by item id, one {id, text} record per line."""

    path: str


@dataclass(frozen=True)
class Builtin:
    """In-process boundary restorer; only valid for the restore stage."""

    model: BoundaryModel
    preserve_spaces: bool = True


@dataclass(frozen=True)
class ExternalProcess:
    cmd: tuple[str, ...]
    timeout_ms: int = 30000

    def __post_init__(self):
        if not self.cmd:
            raise ValueError("cmd must be non-empty")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")


Backing = Union[Identity, FixtureFile, Builtin, ExternalProcess]


class StageCache:
    """Content-addressed output store, optionally persisted one file per key."""

    def __init__(self, path: Optional[str | Path] = None):
        self.path = Path(path) if path is not None else None
        self._mem: dict[str, str] = {}
        self.hits = 0
        self.misses = 0
        if self.path is not None:
            self.path.mkdir(parents=True, exist_ok=True)

    def get(self, key: str) -> Optional[str]:
        if key in self._mem:
            self.hits += 1
            return self._mem[key]
        if self.path is not None:
            entry = self.path / key
            if entry.exists():
                value = json.loads(entry.read_text(encoding="utf-8"))
                self._mem[key] = value
                self.hits += 1
                return value
        self.misses += 1
        return None

    def put(self, key: str, value: str) -> None:
        self._mem[key] = value
        if self.path is not None:
            tmp = self.path / f".{key}.tmp"
            tmp.write_text(json.dumps(value, ensure_ascii=False), encoding="utf-8")
            tmp.replace(self.path / key)


# ---------------------------------------------------------------------------
# External process plumbing
# ---------------------------------------------------------------------------

_EOF = object()


class _Child:
    """One external process; a reader thread feeds parsed lines to a queue."""

    def __init__(self, cmd: Sequence[str], kind: StageKind):
        try:
            self.proc = subprocess.Popen(
                list(cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProcessExit(None, f"could not start {cmd[0]!r}: {exc}") from exc
        self.lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.send({"protocol": 1, "stage": kind.value})

    def _read_loop(self):
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(_EOF)

    def send(self, record: dict) -> None:
        try:
            self.proc.stdin.write(json.dumps(record, ensure_ascii=False) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError):
            # Reported by the receive side as ProcessExit with the real code.
            pass

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


# ---------------------------------------------------------------------------
# Adapter
# ---------------------------------------------------------------------------


@dataclass
class StageAdapter:
    kind: StageKind
    backing: Backing
    cache: Optional[StageCache] = None
    external_calls: int = field(default=0, init=False)
    _fixture: Optional[dict[str, str]] = field(default=None, init=False, repr=False)
    _backing_id: Optional[str] = field(default=None, init=False, repr=False)
    _child: Optional[_Child] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind is StageKind.ASR and isinstance(self.backing, (Identity, Builtin)):
            raise ValueError("asr stage needs a fixture or external backing")
        if isinstance(self.backing, Builtin) and self.kind is not StageKind.RESTORE:
            raise ValueError("builtin restorer backing only fits the restore stage")

    # -- cache keys --------------------------------------------------------

    def backing_identity(self) -> str:
        if self._backing_id is None:
            backing = self.backing
            if isinstance(backing, Identity):
                self._backing_id = "identity"
            elif isinstance(backing, FixtureFile):
                digest = hashlib.sha256(Path(backing.path).read_bytes()).hexdigest()
                self._backing_id = f"fixture:{digest}"
            elif isinstance(backing, Builtin):
                self._backing_id = (
                    f"builtin:{backing.model.checksum()}"
                    f":preserve={int(backing.preserve_spaces)}"
                )
            else:
                self._backing_id = "external:" + "\x00".join(backing.cmd)
        return self._backing_id

    def cache_key(self, text: str) -> str:
        material = "\x1f".join((self.kind.value, self.backing_identity(), text))
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    # -- execution ---------------------------------------------------------

    def run(self, inputs: Sequence[tuple[str, str]]) -> list[tuple[str, str]]:
        """Run the stage over (id, text) pairs; output follows input order."""
        ids = [item_id for item_id, _ in inputs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item ids in stage input")
        normalized = [(item_id, normalize(text)) for item_id, text in inputs]

        results: dict[str, str] = {}
        pending: list[tuple[str, str]] = []
        for item_id, text in normalized:
            if self.cache is not None:
                hit = self.cache.get(self.cache_key(text))
                if hit is not None:
                    results[item_id] = hit
                    continue
            pending.append((item_id, text))

        if pending:
            outputs = self._dispatch(pending)
            for (item_id, text), output in zip(pending, outputs):
                output = normalize(output)
                results[item_id] = output
                if self.cache is not None:
                    self.cache.put(self.cache_key(text), output)

        return [(item_id, results[item_id]) for item_id in ids]

    def _dispatch(self, pending: list[tuple[str, str]]) -> list[str]:
        backing = self.backing
        if isinstance(backing, Identity):
            return [text for _, text in pending]
        if isinstance(backing, FixtureFile):
            fixture = self._load_fixture(backing.path)
            for item_id, _ in pending:
                if item_id not in fixture:
                    raise MissingFixture(item_id)
            return [fixture[item_id] for item_id, _ in pending]
        if isinstance(backing, Builtin):
            return [
                restore(backing.model, text, preserve_spaces=backing.preserve_spaces)
                for _, text in pending
            ]
        return self._run_external(backing, pending)

    def _load_fixture(self, path: str) -> dict[str, str]:
        if self._fixture is None:
            fixture: dict[str, str] = {}
            with open(path, encoding="utf-8") as handle:
                for line_no, line in enumerate(handle, 1):
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    if "id" not in record or "text" not in record:
                        raise ProtocolViolation(
                            f"{path}:{line_no}: fixture record needs id and text"
                        )
                    fixture[str(record["id"])] = str(record["text"])
            self._fixture = fixture
        return self._fixture

    def _run_external(
        self, backing: ExternalProcess, pending: list[tuple[str, str]]
    ) -> list[str]:
        if self._child is None:
            self._child = _Child(backing.cmd, self.kind)
        child = self._child
        self.external_calls += len(pending)

        # Writer thread keeps the request pipe draining even if the child
        # interleaves responses immediately — avoids a full-pipe deadlock.
        def write_all():
            for item_id, text in pending:
                child.send({"id": item_id, "text": text})

        writer = threading.Thread(target=write_all, daemon=True)
        writer.start()

        awaiting = {item_id for item_id, _ in pending}
        answers: dict[str, str] = {}
        deadline = time.monotonic() + backing.timeout_ms / 1000
        while awaiting:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise StageTimeout(self._first_missing(pending, awaiting), backing.timeout_ms)
            try:
                line = child.lines.get(timeout=remaining)
            except queue.Empty:
                raise StageTimeout(
                    self._first_missing(pending, awaiting), backing.timeout_ms
                ) from None
            if line is _EOF:
                code = child.proc.wait()
                if code != 0:
                    raise ProcessExit(code)
                raise ProtocolViolation(
                    f"process ended before answering {len(awaiting)} request(s)"
                )
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except ValueError:
                raise ProtocolViolation(f"unparseable line from stage: {stripped!r}") from None
            if not isinstance(record, dict) or "id" not in record:
                raise ProtocolViolation(f"response without id: {stripped!r}")
            item_id = str(record["id"])
            if item_id not in awaiting:
                raise ProtocolViolation(f"response for unknown or duplicate id {item_id!r}")
            if "error" in record:
                raise StageItemError(item_id, str(record["error"]))
            if "text" not in record:
                raise ProtocolViolation(f"response for {item_id!r} has neither text nor error")
            answers[item_id] = str(record["text"])
            awaiting.discard(item_id)
        writer.join()
        return [answers[item_id] for item_id, _ in pending]

    @staticmethod
    def _first_missing(pending: list[tuple[str, str]], awaiting: set[str]) -> str:
        for item_id, _ in pending:
            if item_id in awaiting:
                return item_id
        return "?"

    def close(self):
        if self._child is not None:
            self._child.close()
            self._child = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def run_stage(
    adapter: StageAdapter, inputs: Sequence[tuple[str, str]]
) -> list[tuple[str, str]]:
    return adapter.run(inputs)
