"""Acceptance gate: one test per release criterion.

Each test prints a single [PASS]/[FAIL] line on the real stdout so the
verdicts survive pytest's capture and land in CI logs verbatim.
"""

import json
import random
import time
from contextlib import contextmanager

import pytest
from fastapi.testclient import TestClient

import oracles
from conftest import child_cmd, make_items
from cascadekit import agreement, metrics, report
from cascadekit.adapters import (
    Builtin,
    ExternalProcess,
    FixtureFile,
    StageAdapter,
    StageCache,
    StageKind,
)
from cascadekit.annotate.server import create_app
from cascadekit.annotate.store import AnnotateStore
from cascadekit.corpus import FilterRecord, FilterSpec, apply_filters, build_restore_pairs
from cascadekit.restore import RestorePair, restore, split_gaps, train
from cascadekit.scenarios import (
    ScenarioConfig,
    ScenarioStage,
    run_scenario,
    scenario_a,
    scenario_b,
    scenario_c,
    write_asr_fixture,
    write_run_dir,
)
from cascadekit.textcore import (
    DegradeMode,
    degrade,
    fuse_words,
    normalize,
    strip_punctuation,
)


@contextmanager
def criterion(name: str, capsys):
    """Print the verdict outside pytest's capture so logs always show it."""

    def emit(line):
        with capsys.disabled():
            # leading newline: pytest's progress dots leave the cursor mid-line
            print("\n" + line, flush=True)

    started = time.monotonic()
    try:
        yield
    except BaseException:
        emit(f"[FAIL] {name}")
        raise
    emit(f"[PASS] {name} ({time.monotonic() - started:.1f}s)")


WORDS = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran"]
NEPALI = ["म", "घर", "जान्छु", "तिमी", "खाना", "रामले", "पानी", "भोलि"]
MARKS = ["।", ".", ",", "?", "!"]


def _sentence(rng, vocab, max_tokens=8):
    toks = [rng.choice(vocab) for _ in range(rng.randint(0, max_tokens))]
    if toks and rng.random() < 0.3:
        toks.append(rng.choice(MARKS))
    return " ".join(toks)


def test_metric_oracle_equivalence(capsys):
    with criterion(
        "metric oracle equivalence: 200+ randomized cases per metric, 1e-9",
        capsys,
    ):
        start = time.monotonic()
        rng = random.Random(20260823)
        vocab = WORDS + NEPALI

        for _ in range(200):
            hyp = _sentence(rng, vocab)
            ref = _sentence(rng, vocab)
            while not ref.strip():
                ref = _sentence(rng, vocab)
            assert metrics.wer(hyp, ref) == pytest.approx(
                oracles.wer(hyp, ref), abs=1e-9
            )
            assert metrics.cer(hyp, ref) == pytest.approx(
                oracles.cer(hyp, ref), abs=1e-9
            )
            if hyp.strip():
                assert metrics.meteor_exact(hyp, ref) == pytest.approx(
                    oracles.meteor_exact(hyp, ref), abs=1e-9
                )

        for _ in range(200):
            n = rng.randint(1, 3)
            hyps = [_sentence(rng, vocab) for _ in range(n)]
            refs = []
            for _ in range(n):
                bundle = [_sentence(rng, vocab) for _ in range(rng.randint(1, 2))]
                while all(not r.strip() for r in bundle):
                    bundle = [_sentence(rng, vocab)]
                refs.append(bundle)
            assert metrics.bleu(hyps, refs).value == pytest.approx(
                oracles.bleu(hyps, refs), abs=1e-9
            )
            assert metrics.chrf_pp(hyps, refs).value == pytest.approx(
                oracles.chrf_pp(hyps, refs), abs=1e-9
            )

        assert time.monotonic() - start < 60


def test_published_delta_arithmetic(capsys):
    with criterion("published delta arithmetic: exact at two decimals", capsys):
        cases = [
            (29.04, 23.13, "-5.91"),
            (28.48, 24.12, "-4.36"),
            (39.66, 28.40, "-11.26"),
            (31.48, 32.77, "+1.29"),
            (31.48, 36.38, "+4.90"),
        ]
        for baseline, treated, expected in cases:
            assert report.fmt_signed(report.delta(baseline, treated).delta) == expected
        assert report.delta(29.04, 23.13).render() == "-5.91 (-20.35%)"
        assert report.delta(39.66, 28.40).render() == "-11.26 (-28.39%)"


def _fuzz_pool():
    devanagari = [chr(cp) for cp in range(0x0900, 0x0980)]
    ascii_chars = [chr(cp) for cp in range(0x20, 0x7F)]
    specials = list(" \t\n‌‍।॥.,?!;:'\"")
    return devanagari + ascii_chars + specials


def test_perturbation_properties(capsys):
    with criterion(
        "perturbation properties: idempotence + strip/fuse commutation, 1000 strings",
        capsys,
    ):
        rng = random.Random(404)
        pool = _fuzz_pool()
        for _ in range(1000):
            text = "".join(rng.choice(pool) for _ in range(rng.randint(0, 40)))
            for mode in DegradeMode:
                once = degrade(text, mode)
                assert degrade(once, mode) == once
            assert strip_punctuation(fuse_words(normalize(text))) == fuse_words(
                strip_punctuation(text)
            )
            assert normalize(normalize(text)) == normalize(text)


WORD_A = "कख"
WORD_B = "गघ"


def _boundary_f1(predicted: str, target: str) -> float:
    _, pred = split_gaps(predicted)
    _, gold = split_gaps(target)
    tp = sum(1 for p, g in zip(pred, gold) if p and p == g)
    fp = sum(1 for p, g in zip(pred, gold) if p and p != g)
    fn = sum(1 for p, g in zip(pred, gold) if g and p != g)
    if tp == 0:
        return 0.0
    precision, recall = tp / (tp + fp), tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def test_restorer_correctness(capsys):
    with criterion(
        "restorer: held-out boundary F1 = 1.0 and Scenario C BLEU > Scenario A",
        capsys,
    ):
        start = time.monotonic()

        # deterministic two-word language: every gap decided by its 3-window
        train_sentences = []
        for mask in range(16):
            words = [WORD_A if (mask >> i) & 1 else WORD_B for i in range(4)]
            train_sentences.append(" ".join(words) + "।")
        pairs = [
            RestorePair(
                input=degrade(s, DegradeMode.FUSED), target=s, mode=DegradeMode.FUSED
            )
            for s in train_sentences
        ]
        model = train(pairs, k=3)
        rng = random.Random(515)
        for _ in range(50):
            words = [rng.choice([WORD_A, WORD_B]) for _ in range(rng.randint(3, 9))]
            target = " ".join(words) + "।"
            restored = restore(
                model, degrade(target, DegradeMode.FUSED), preserve_spaces=False
            )
            assert _boundary_f1(restored, target) == 1.0

        # danda-sensitive dictionary translator: C must strictly beat A
        items = make_items()
        fixture = None
        import tempfile, pathlib

        with tempfile.TemporaryDirectory() as tmp:
            fixture = pathlib.Path(tmp) / "asr.jsonl"
            write_asr_fixture(items, fixture, mode=DegradeMode.PUNCT_ONLY)
            refs = [item.ref_translations for item in items]

            def translate_stage():
                return StageAdapter(
                    StageKind.TRANSLATE,
                    ExternalProcess(cmd=child_cmd("dict_translate.py")),
                )

            with StageAdapter(StageKind.ASR, FixtureFile(str(fixture))) as asr, \
                    translate_stage() as tr:
                traces_a = run_scenario(scenario_a(asr, tr), items)
            restorer = train(
                build_restore_pairs([i.ref_transcript for i in items]), k=3
            )
            with StageAdapter(StageKind.ASR, FixtureFile(str(fixture))) as asr, \
                    StageAdapter(StageKind.RESTORE, Builtin(restorer)) as rest, \
                    translate_stage() as tr:
                traces_c = run_scenario(scenario_c(asr, rest, tr), items)

            bleu_a = metrics.bleu([t.hypothesis for t in traces_a], refs).value
            bleu_c = metrics.bleu([t.hypothesis for t in traces_c], refs).value
            assert bleu_c > bleu_a
            table = report.scenario_table(
                {
                    "A": {"bleu": bleu_a, "chrf_pp": 0.0},
                    "C": {"bleu": bleu_c, "chrf_pp": 0.0},
                },
                "records",
            )
            delta_c = next(
                r["delta_bleu"]
                for r in map(json.loads, table.splitlines())
                if r["scenario"] == "C"
            )
            assert delta_c > 0

        assert time.monotonic() - start < 60


def test_scenario_machinery(capsys):
    with criterion(
        "scenario machinery: B/C differ only at restore input; cached reruns "
        "byte-identical; shuffled echo matched",
        capsys,
    ):
        import tempfile, pathlib

        items = make_items()
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            asr_path = tmp / "asr.jsonl"
            write_asr_fixture(items, asr_path, mode=DegradeMode.PUNCT_ONLY)
            restore_path = tmp / "restore.jsonl"
            translate_path = tmp / "translate.jsonl"
            with open(restore_path, "w", encoding="utf-8") as fh:
                for item in items:
                    fh.write(json.dumps({"id": item.id, "text": item.ref_transcript},
                                        ensure_ascii=False) + "\n")
            with open(translate_path, "w", encoding="utf-8") as fh:
                for item in items:
                    fh.write(json.dumps({"id": item.id, "text": item.ref_translations[0]},
                                        ensure_ascii=False) + "\n")

            def stages():
                return (
                    StageAdapter(StageKind.ASR, FixtureFile(str(asr_path))),
                    StageAdapter(StageKind.RESTORE, FixtureFile(str(restore_path))),
                    StageAdapter(StageKind.TRANSLATE, FixtureFile(str(translate_path))),
                )

            asr, rest, tr = stages()
            traces_b = run_scenario(scenario_b(asr, rest, tr), items)
            asr, rest, tr = stages()
            traces_c = run_scenario(scenario_c(asr, rest, tr), items)
            for tb, tc in zip(traces_b, traces_c):
                assert tb.steps[0] == tc.steps[0]
                assert tb.steps[1].input == fuse_words(tc.steps[1].input)
                assert tb.steps[1].input != tc.steps[1].input
                assert tb.steps[1].output == tc.steps[1].output
                assert tb.steps[2] == tc.steps[2]
                assert tb.hypothesis == tc.hypothesis

            # rerun with a shared cache: run directories must be byte-identical
            def run_a_into(out_dir, cache):
                asr = StageAdapter(
                    StageKind.ASR, FixtureFile(str(asr_path)), cache=cache
                )
                tr = StageAdapter(
                    StageKind.TRANSLATE,
                    ExternalProcess(cmd=child_cmd("dict_translate.py")),
                    cache=cache,
                )
                with asr, tr:
                    cfg = scenario_a(asr, tr)
                    write_run_dir(out_dir, cfg, run_scenario(cfg, items))
                    return tr.external_calls

            calls_first = run_a_into(tmp / "r1", StageCache(tmp / "cache"))
            calls_second = run_a_into(tmp / "r2", StageCache(tmp / "cache"))
            assert calls_first == len(items)
            assert calls_second == 0
            for name in ("config.json", "traces.jsonl", "hypotheses.jsonl"):
                assert (tmp / "r1" / name).read_bytes() == (tmp / "r2" / name).read_bytes()

        # out-of-order echo child: answers shuffled within groups of five
        with StageAdapter(
            StageKind.TRANSLATE, ExternalProcess(cmd=child_cmd("echo_stage.py"))
        ) as echo:
            inputs = [(f"q{i}", f"payload {i}") for i in range(10)]
            assert echo.run(inputs) == [(i, f"echo:{t}") for i, t in inputs]


def test_agreement_acceptance(capsys):
    with criterion(
        "agreement: perfect matrix = 1.0 exactly; 50 random matrices vs oracle; "
        "degenerate inputs error",
        capsys,
    ):
        perfect = agreement.RatingMatrix.from_records(
            [(r, u, v) for r in ("a", "b") for u, v in (("i1", 1), ("i2", 5), ("i3", 3))]
        )
        assert agreement.krippendorff_alpha(perfect).alpha == 1.0

        rng = random.Random(606)
        checked = 0
        while checked < 50:
            raters = [f"r{i}" for i in range(rng.randint(2, 4))]
            units = [f"u{i}" for i in range(rng.randint(2, 6))]
            cells = {
                (r, u): rng.randint(1, 5)
                for r in raters
                for u in units
                if rng.random() > 0.25
            }
            try:
                matrix = agreement.RatingMatrix(raters, units, cells)
                got = agreement.krippendorff_alpha(matrix).alpha
            except (agreement.InsufficientData, agreement.DegenerateData):
                continue
            want = oracles.krippendorff_alpha(
                list(matrix.item_values().values()), "ordinal"
            )
            assert got == pytest.approx(want, abs=1e-9)
            checked += 1

        single = agreement.RatingMatrix.from_records([("solo", "i1", 2), ("solo", "i2", 4)])
        with pytest.raises(agreement.InsufficientData):
            agreement.krippendorff_alpha(single)
        constant = agreement.RatingMatrix.from_records(
            [(r, u, 3) for r in ("a", "b") for u in ("i1", "i2")]
        )
        with pytest.raises(agreement.DegenerateData):
            agreement.krippendorff_alpha(constant)


def test_corpus_filter_acceptance(capsys):
    with criterion(
        "corpus filters: Devanagari digits dropped; duration 5.0/5.01 and "
        "similarity 0.80/0.801 boundaries",
        capsys,
    ):
        for code_point in range(0x0966, 0x0970):
            records = [FilterRecord(id="d", text=f"घर {chr(code_point)} छ")]
            kept, decisions = apply_filters(records, FilterSpec(drop_numerals=True))
            assert kept == []
            assert decisions[0].reason == "numeral"

        kept, decisions = apply_filters(
            [
                FilterRecord(id="ok", text="घर", duration_s=5.0),
                FilterRecord(id="long", text="घर", duration_s=5.01),
            ],
            FilterSpec(max_duration_s=5.0),
        )
        assert [r.id for r in kept] == ["ok"]
        assert decisions[1].reason == "duration"

        kept, decisions = apply_filters(
            [FilterRecord(id="low", text="घर"), FilterRecord(id="high", text="घर")],
            FilterSpec(min_similarity=0.80),
            {"low": 0.80, "high": 0.801},
        )
        assert [r.id for r in kept] == ["high"]
        assert decisions[0].reason == "similarity"


RUN_TEXTS = {
    "RUN-ALPHA": "I home go .",
    "RUN-BETA": "home go",
    "RUN-GAMMA": "I home go",
}


def _ten_items():
    return [
        {
            "id": f"x{i}",
            "source_text": f"वाक्य {i}।",
            "reference_text": f"sentence {i} .",
            "sentence_type": "statement" if i % 2 else "question",
        }
        for i in range(10)
    ]


def test_blinding_acceptance(capsys):
    with criterion(
        "blinding: 3x10 session transcript free of run names; seed-reproducible; "
        "export means match agreement module",
        capsys,
    ):
        items = _ten_items()
        runs = {
            name: {item["id"]: text for item in items}
            for name, text in RUN_TEXTS.items()
        }
        body = {"seed": 99, "runs": runs, "items": items}

        client = TestClient(create_app(AnnotateStore()))
        created = client.post("/sessions", json=body)
        sid = created.json()["session_id"]
        transcript = [created.text]

        rng = random.Random(3)
        order = []
        while True:
            response = client.get(f"/sessions/{sid}/next", params={"rater": "r1"})
            transcript.append(response.text)
            payload = response.json()
            if payload["done"]:
                break
            key = payload["item"]["item_key"]
            order.append(key)
            rated = client.post(
                "/ratings",
                json={
                    "session_id": sid,
                    "rater": "r1",
                    "item_key": key,
                    "fluency": rng.randint(1, 5),
                    "adequacy": rng.randint(1, 5),
                },
            )
            transcript.append(rated.text)
        assert len(order) == 30

        blob = "\n".join(transcript)
        for name in RUN_TEXTS:
            assert name not in blob

        # identical seed on a fresh store reproduces the presentation order
        other = TestClient(create_app(AnnotateStore()))
        other_sid = other.post("/sessions", json=body).json()["session_id"]
        assert other_sid == sid
        replay = []
        for _ in range(3):
            item = other.get(
                f"/sessions/{other_sid}/next", params={"rater": "fresh"}
            ).json()["item"]
            replay.append(item["item_key"])
            other.post(
                "/ratings",
                json={
                    "session_id": other_sid,
                    "rater": "fresh",
                    "item_key": item["item_key"],
                    "fluency": 3,
                    "adequacy": 3,
                },
            )
        assert replay == order[:3]

        export = client.post(f"/sessions/{sid}/finalize").json()
        ratings = [
            agreement.SystemRating(
                system=row["scenario"],
                fluency=row["fluency"],
                adequacy=row["adequacy"],
                sentence_type=row["sentence_type"],
            )
            for row in export["rows"]
        ]
        expected = agreement.aggregate_ratings(ratings)
        assert export["summary"]["per_system"] == expected.per_system
