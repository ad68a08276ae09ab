"""Shared fixtures: a small Nepali manifest whose English references match
the word-for-word dictionary translator in tests/children/dict_translate.py."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

from cascadekit.corpus import EvalItem

CHILDREN = Path(__file__).parent / "children"

# (id, transcript, reference translation per dict_translate, type)
SENTENCES = [
    ("s1", "म घर जान्छु।", "I home go .", "statement"),
    ("s2", "तिमी खाना खान्छौ?", "you food eat ?", "question"),
    ("s3", "ऊ भोलि आउँछ।", "he tomorrow comes .", "statement"),
    ("s4", "रामले किताब पढ्यो।", "Ram book read .", "named_entity"),
    ("s5", "हिजो पानी पर्यो।", "yesterday water fell .", "statement"),
]


def child_cmd(script: str, *args: str) -> tuple[str, ...]:
    return (sys.executable, str(CHILDREN / script), *args)


def make_items() -> list[EvalItem]:
    return [
        EvalItem(
            id=item_id,
            ref_transcript=transcript,
            ref_translations=[translation],
            sentence_type=sentence_type,
        )
        for item_id, transcript, translation, sentence_type in SENTENCES
    ]


def write_fixture(path: Path, mapping: dict[str, str]) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for item_id, text in mapping.items():
            handle.write(
                json.dumps({"id": item_id, "text": text}, ensure_ascii=False) + "\n"
            )
    return path


@pytest.fixture
def items() -> list[EvalItem]:
    return make_items()


@pytest.fixture
def manifest_path(tmp_path, items) -> Path:
    from cascadekit.corpus import save_manifest

    path = tmp_path / "manifest.jsonl"
    save_manifest(items, path)
    return path
