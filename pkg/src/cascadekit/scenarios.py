"""Pipeline composition: wire stage adapters into experimental setups.

Three canonical cascades over speech-recognition output:

  A: recognize → translate                       (direct baseline)
  B: recognize → fuse spaces → restore → translate
  C: recognize → restore (keeping spaces) → translate

plus a text-only paired setup translating each sentence twice, with and
without punctuation, to isolate punctuation's effect on the translator.

Every run yields one trace per item recording each stage's post-preprocessing
input and output, so downstream analysis can see exactly where a cascade
diverged.  The recognition stage is always fixture- or process-backed; its
"input" in a trace is the audio key (audio path or item id), never text.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .adapters import StageAdapter, StageKind, Builtin
from .corpus import EvalItem
from .errors import CascadekitError
from .textcore import (
    DEFAULT_PUNCT,
    DegradeMode,
    PunctClass,
    degrade,
    fuse_words,
    normalize,
    strip_punctuation,
)

SCENARIO_NAMES = ("A", "B", "C", "PunctImpact", "Custom")


class Preprocessing(str, Enum):
    NONE = "none"
    FUSE_SPACES = "fuse_spaces"
    STRIP_PUNCT = "strip_punct"

    def apply(self, text: str) -> str:
        if self is Preprocessing.FUSE_SPACES:
            return fuse_words(text)
        if self is Preprocessing.STRIP_PUNCT:
            return strip_punctuation(text)
        return text


class ScenarioError(CascadekitError):
    """Adapter failure annotated with the stage (and item when known)."""


@dataclass(frozen=True)
class ScenarioStage:
    adapter: StageAdapter
    preprocessing: Preprocessing = Preprocessing.NONE


@dataclass
class ScenarioConfig:
    name: str
    stages: list[ScenarioStage]

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise ValueError(f"scenario name must be one of {SCENARIO_NAMES}")
        kinds = [stage.adapter.kind for stage in self.stages]
        order = [StageKind.ASR, StageKind.RESTORE, StageKind.TRANSLATE]
        ranks = [order.index(kind) for kind in kinds]
        if ranks != sorted(ranks):
            raise ValueError("stage kinds must appear in pipeline order")
        if self.name == "A" and kinds != [StageKind.ASR, StageKind.TRANSLATE]:
            raise ValueError("scenario A is recognize → translate")
        if self.name in ("B", "C"):
            if kinds != [StageKind.ASR, StageKind.RESTORE, StageKind.TRANSLATE]:
                raise ValueError(f"scenario {self.name} needs recognize, restore, translate")
            restore_stage = self.stages[1]
            if self.name == "B" and restore_stage.preprocessing is not Preprocessing.FUSE_SPACES:
                raise ValueError("scenario B fuses spaces before restoring")
            if self.name == "C":
                if restore_stage.preprocessing is not Preprocessing.NONE:
                    raise ValueError("scenario C feeds recognizer output to restore unchanged")
                backing = restore_stage.adapter.backing
                if isinstance(backing, Builtin) and not backing.preserve_spaces:
                    raise ValueError("scenario C's restorer must keep existing spaces")


def scenario_a(asr: StageAdapter, translate: StageAdapter) -> ScenarioConfig:
    return ScenarioConfig("A", [ScenarioStage(asr), ScenarioStage(translate)])


def scenario_b(
    asr: StageAdapter, restore: StageAdapter, translate: StageAdapter
) -> ScenarioConfig:
    return ScenarioConfig(
        "B",
        [
            ScenarioStage(asr),
            ScenarioStage(restore, Preprocessing.FUSE_SPACES),
            ScenarioStage(translate),
        ],
    )


def scenario_c(
    asr: StageAdapter, restore: StageAdapter, translate: StageAdapter
) -> ScenarioConfig:
    return ScenarioConfig(
        "C",
        [ScenarioStage(asr), ScenarioStage(restore), ScenarioStage(translate)],
    )


@dataclass(frozen=True)
class StageStep:
    stage: str
    preprocessing: str
    input: str
    output: str


@dataclass(frozen=True)
class StageTrace:
    item_id: str
    steps: tuple[StageStep, ...]
    hypothesis: str

    def to_json(self) -> dict:
        return {
            "id": self.item_id,
            "steps": [
                {
                    "stage": step.stage,
                    "preprocessing": step.preprocessing,
                    "input": step.input,
                    "output": step.output,
                }
                for step in self.steps
            ],
            "hypothesis": self.hypothesis,
        }

    @classmethod
    def from_json(cls, record: dict) -> "StageTrace":
        steps = tuple(
            StageStep(s["stage"], s["preprocessing"], s["input"], s["output"])
            for s in record["steps"]
        )
        return cls(record["id"], steps, record["hypothesis"])

    def check_consistency(self) -> None:
        """Replaying declared preprocessing on prior outputs must match inputs."""
        for prev, step in zip(self.steps, self.steps[1:]):
            replayed = Preprocessing(step.preprocessing).apply(prev.output)
            if replayed != step.input:
                raise ScenarioError(
                    f"item {self.item_id!r}: stage {step.stage!r} input does not "
                    "replay from previous output"
                )
        if self.steps and self.hypothesis != self.steps[-1].output:
            raise ScenarioError(f"item {self.item_id!r}: hypothesis != last output")


def _audio_key(item: EvalItem) -> str:
    return item.audio_path or item.id


def run_scenario(cfg: ScenarioConfig, items: Sequence[EvalItem]) -> list[StageTrace]:
    """One trace per item, manifest order; adapter errors name item and stage."""
    if not cfg.stages:
        raise ValueError("scenario has no stages")
    if cfg.stages[0].adapter.kind is StageKind.ASR:
        current = [(item.id, _audio_key(item)) for item in items]
    else:
        current = [(item.id, item.ref_transcript) for item in items]

    steps: dict[str, list[StageStep]] = {item.id: [] for item in items}
    for stage in cfg.stages:
        name = stage.adapter.kind.value
        fed = [(item_id, stage.preprocessing.apply(text)) for item_id, text in current]
        try:
            outputs = stage.adapter.run(fed)
        except CascadekitError as exc:
            item_id = getattr(exc, "item_id", None)
            where = f"item {item_id!r}, stage {name!r}" if item_id else f"stage {name!r}"
            raise ScenarioError(f"{where}: {exc}") from exc
        for (item_id, fed_text), (_, out_text) in zip(fed, outputs):
            steps[item_id].append(
                StageStep(name, stage.preprocessing.value, fed_text, out_text)
            )
        current = outputs

    return [
        StageTrace(item.id, tuple(steps[item.id]), steps[item.id][-1].output)
        for item in items
    ]


@dataclass(frozen=True)
class PunctImpactResult:
    """Paired translations keyed by item id."""

    punctuated: dict[str, str]
    unpunctuated: dict[str, str]

    def hypothesis_pairs(self, items: Sequence[EvalItem]) -> list[tuple[str, str]]:
        return [(self.punctuated[i.id], self.unpunctuated[i.id]) for i in items]


def run_punct_impact(
    items: Sequence[EvalItem],
    translate: StageAdapter,
    punct: PunctClass = DEFAULT_PUNCT,
) -> PunctImpactResult:
    """Translate each reference transcript twice: as-is and punctuation-stripped."""
    if translate.kind is not StageKind.TRANSLATE:
        raise ValueError("run_punct_impact needs a translate adapter")
    with_punct = [(item.id, item.ref_transcript) for item in items]
    without = [
        (item.id, strip_punctuation(item.ref_transcript, punct)) for item in items
    ]
    try:
        punctuated = dict(translate.run(with_punct))
        unpunctuated = dict(translate.run(without))
    except CascadekitError as exc:
        item_id = getattr(exc, "item_id", None)
        where = f"item {item_id!r}, stage 'translate'" if item_id else "stage 'translate'"
        raise ScenarioError(f"{where}: {exc}") from exc
    return PunctImpactResult(punctuated, unpunctuated)


# ---------------------------------------------------------------------------
# Run directory persistence
# ---------------------------------------------------------------------------


def write_run_dir(path: str | Path, cfg: ScenarioConfig, traces: Sequence[StageTrace]) -> None:
    """Persist config snapshot, traces, and final hypotheses, all JSONL/JSON.

    Output is canonical (sorted keys) so identical runs are byte-identical.
    """
    run_dir = Path(path)
    run_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "name": cfg.name,
        "stages": [
            {
                "kind": stage.adapter.kind.value,
                "preprocessing": stage.preprocessing.value,
                "backing": stage.adapter.backing_identity(),
            }
            for stage in cfg.stages
        ],
    }
    _write_atomic(run_dir / "config.json", json.dumps(config, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
    _write_atomic(
        run_dir / "traces.jsonl",
        "".join(
            json.dumps(t.to_json(), ensure_ascii=False, sort_keys=True) + "\n"
            for t in traces
        ),
    )
    _write_atomic(
        run_dir / "hypotheses.jsonl",
        "".join(
            json.dumps({"id": t.item_id, "text": t.hypothesis}, ensure_ascii=False, sort_keys=True) + "\n"
            for t in traces
        ),
    )


def load_traces(path: str | Path) -> list[StageTrace]:
    traces = []
    with open(Path(path) / "traces.jsonl", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                traces.append(StageTrace.from_json(json.loads(line)))
    return traces


def _write_atomic(target: Path, content: str) -> None:
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    tmp.replace(target)


# ---------------------------------------------------------------------------
# Synthetic recognition fixtures
# ---------------------------------------------------------------------------


def write_asr_fixture(
    items: Sequence[EvalItem],
    path: str | Path,
    mode: DegradeMode = DegradeMode.PUNCT_ONLY,
    noise_rate: float = 0.0,
    seed: int = 0,
    punct: PunctClass = DEFAULT_PUNCT,
) -> None:
    """Emulate recognizer output: degraded references plus optional noise.

    Noise substitutes non-space characters with others drawn from the
    corpus alphabet at the given rate, deterministically per seed.
    """
    if not 0 <= noise_rate < 1:
        raise ValueError("noise_rate must be in [0, 1)")
    degraded = {item.id: degrade(item.ref_transcript, mode, punct) for item in items}
    alphabet = sorted({ch for text in degraded.values() for ch in text if ch != " "})
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as handle:
        for item in items:
            text = degraded[item.id]
            if noise_rate > 0 and alphabet:
                text = "".join(
                    rng.choice(alphabet)
                    if ch != " " and rng.random() < noise_rate
                    else ch
                    for ch in text
                )
            record = {"id": item.id, "text": normalize(text)}
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
