"""Command-line front door: one executable exposing every workflow.

Exit codes are a stable contract: 0 success, 1 runtime failure (diagnostic
on stderr), 2 usage error.  All file outputs are written atomically
(temp file + rename) so a crash never leaves a half-written artifact.

A JSON --config file may supply defaults for any flag (long name, dashes
or underscores); explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import adapters, agreement, corpus, metrics, report, restore, scenarios, textcore
from .errors import CascadekitError


def write_atomic(path: str | Path, content: str) -> None:
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    tmp.replace(target)


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle if line.strip()]


def _read_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _jsonl(records) -> str:
    return "".join(
        json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records
    )


def _out_or_stdout(args, content: str) -> None:
    if getattr(args, "out", None):
        write_atomic(args.out, content)
    else:
        sys.stdout.write(content if content.endswith("\n") else content + "\n")


# ---------------------------------------------------------------------------
# Adapter construction from flags
# ---------------------------------------------------------------------------


def _backing_from_flags(args, stage: str, allow_identity: bool = True):
    fixture = getattr(args, f"{stage}_fixture", None)
    cmd = getattr(args, f"{stage}_cmd", None)
    identity = getattr(args, f"{stage}_identity", False)
    chosen = [x for x in (fixture, cmd, identity or None) if x]
    if len(chosen) > 1:
        raise CascadekitError(f"give at most one --{stage}-* backing")
    if fixture:
        return adapters.FixtureFile(fixture)
    if cmd:
        return adapters.ExternalProcess(tuple(shlex.split(cmd)), args.timeout_ms)
    if identity:
        if not allow_identity:
            raise CascadekitError(f"--{stage}-identity is not valid here")
        return adapters.Identity()
    return None


def _restore_adapter(args, preserve_spaces: bool) -> Optional[adapters.StageAdapter]:
    model_path = getattr(args, "restore_model", None)
    backing = _backing_from_flags(args, "restore")
    if model_path and backing is not None:
        raise CascadekitError("give either --restore-model or one --restore-* backing")
    cache = adapters.StageCache(args.cache) if getattr(args, "cache", None) else None
    if model_path:
        model = restore.load(model_path)
        return adapters.StageAdapter(
            adapters.StageKind.RESTORE,
            adapters.Builtin(model, preserve_spaces=preserve_spaces),
            cache=cache,
        )
    if backing is not None:
        return adapters.StageAdapter(adapters.StageKind.RESTORE, backing, cache=cache)
    return None


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_score(args) -> int:
    hyps = _read_lines(args.hyp)
    ref_files = [_read_lines(path) for path in args.ref]
    for lines in ref_files:
        if len(lines) != len(hyps):
            raise CascadekitError(
                f"hypothesis count {len(hyps)} != reference count {len(lines)}"
            )
    refs = [[lines[i] for lines in ref_files] for i in range(len(hyps))]
    score = metrics.score_corpus(args.metric, hyps, refs, jobs=args.jobs)
    print(report.fmt(score.value))
    return 0


def cmd_perturb(args) -> int:
    mode = textcore.DegradeMode.parse(args.mode)
    lines = _read_lines(args.infile) if args.infile else [
        line.rstrip("\n") for line in sys.stdin if line.strip()
    ]
    degraded = [textcore.degrade(line, mode) for line in lines]
    content = "\n".join(degraded) + "\n" if degraded else ""
    if args.out:
        write_atomic(args.out, content)
    else:
        sys.stdout.write(content)
    return 0


def cmd_filter(args) -> int:
    spec = corpus.FilterSpec(
        drop_numerals=args.drop_numerals,
        max_duration_s=args.max_duration,
        min_similarity=args.min_similarity,
        chrf_cutoff=args.chrf_cutoff,
    )
    records = [
        corpus.FilterRecord(
            id=str(r["id"]),
            text=r.get("text", ""),
            duration_s=r.get("duration_s"),
            translation=r.get("translation"),
            ref_translation=r.get("ref_translation"),
            extra={k: v for k, v in r.items() if k not in
                   ("id", "text", "duration_s", "translation", "ref_translation")},
        )
        for r in _read_jsonl(args.infile)
    ]
    sim_scores = None
    if args.sim_scores:
        sim_scores = json.loads(Path(args.sim_scores).read_text(encoding="utf-8"))
    kept, decisions = corpus.apply_filters(records, spec, sim_scores)
    write_atomic(
        args.out,
        _jsonl(
            {
                "id": r.id,
                "text": r.text,
                **({"duration_s": r.duration_s} if r.duration_s is not None else {}),
                **({"translation": r.translation} if r.translation is not None else {}),
                **(
                    {"ref_translation": r.ref_translation}
                    if r.ref_translation is not None
                    else {}
                ),
                **r.extra,
            }
            for r in kept
        ),
    )
    if args.decisions:
        write_atomic(
            args.decisions,
            _jsonl(
                {"id": d.id, "kept": d.kept, "reason": d.reason} for d in decisions
            ),
        )
    dropped = sum(1 for d in decisions if not d.kept)
    print(f"kept {len(kept)}, dropped {dropped}")
    return 0


def cmd_build_restore_data(args) -> int:
    sentences = _read_lines(args.infile)
    modes = [textcore.DegradeMode.parse(m) for m in args.modes.split(",") if m]
    pairs = corpus.build_restore_pairs(sentences, modes)
    write_atomic(
        args.out,
        _jsonl(
            {"input": p.input, "target": p.target, "mode": p.mode.value} for p in pairs
        ),
    )
    print(f"wrote {len(pairs)} pairs")
    return 0


def cmd_restore_train(args) -> int:
    pairs = [
        restore.RestorePair(
            input=r["input"],
            target=r["target"],
            mode=textcore.DegradeMode.parse(r["mode"]),
        )
        for r in _read_jsonl(args.pairs)
    ]
    model = restore.train(pairs, k=args.window, alpha=args.smoothing)
    # save() writes via a temp file itself; route through write_atomic anyway
    payload = restore.serialize(model)
    write_atomic(args.out, payload)
    print(f"trained on {len(pairs)} pairs, {len(model.counts)} contexts")
    return 0


def cmd_restore_apply(args) -> int:
    model = restore.load(args.model)
    lines = _read_lines(args.infile)
    preserve = not args.resegment
    restored = [restore.restore(model, line, preserve_spaces=preserve) for line in lines]
    content = "\n".join(restored) + "\n" if restored else ""
    if args.out:
        write_atomic(args.out, content)
    else:
        sys.stdout.write(content)
    return 0


def _pipeline_config(args, items) -> scenarios.ScenarioConfig:
    cache = adapters.StageCache(args.cache) if args.cache else None
    asr_backing = _backing_from_flags(args, "asr", allow_identity=False)
    if asr_backing is None:
        raise CascadekitError("pipeline needs --asr-fixture or --asr-cmd")
    asr = adapters.StageAdapter(adapters.StageKind.ASR, asr_backing, cache=cache)
    translate_backing = _backing_from_flags(args, "translate")
    if translate_backing is None:
        raise CascadekitError(
            "pipeline needs --translate-fixture, --translate-cmd, or --translate-identity"
        )
    translate = adapters.StageAdapter(
        adapters.StageKind.TRANSLATE, translate_backing, cache=cache
    )

    name = args.scenario
    if name == "A":
        return scenarios.scenario_a(asr, translate)
    preserve = name != "B"  # B re-segments from fused text; C keeps spaces
    rest = _restore_adapter(args, preserve_spaces=preserve)
    if name in ("B", "C"):
        if rest is None:
            raise CascadekitError(f"scenario {name} needs a restore backing")
        maker = scenarios.scenario_b if name == "B" else scenarios.scenario_c
        return maker(asr, rest, translate)
    stages = [scenarios.ScenarioStage(asr)]
    if rest is not None:
        stages.append(scenarios.ScenarioStage(rest))
    stages.append(scenarios.ScenarioStage(translate))
    return scenarios.ScenarioConfig("Custom", stages)


def cmd_pipeline_run(args) -> int:
    items = corpus.load_manifest(args.manifest)
    cfg = _pipeline_config(args, items)
    try:
        traces = scenarios.run_scenario(cfg, items)
    finally:
        for stage in cfg.stages:
            stage.adapter.close()
    scenarios.write_run_dir(args.out, cfg, traces)
    print(f"wrote {len(traces)} traces to {args.out}")
    return 0


def cmd_pipeline_asr_fixture(args) -> int:
    items = corpus.load_manifest(args.manifest)
    mode = textcore.DegradeMode.parse(args.mode)
    scenarios.write_asr_fixture(
        items, args.out, mode=mode, noise_rate=args.noise_rate, seed=args.seed
    )
    print(f"wrote fixture for {len(items)} items")
    return 0


def cmd_impact(args) -> int:
    items = corpus.load_manifest(args.manifest)
    backing = _backing_from_flags(args, "translate")
    if backing is None:
        raise CascadekitError("impact needs a translate backing")
    cache = adapters.StageCache(args.cache) if args.cache else None
    translate = adapters.StageAdapter(adapters.StageKind.TRANSLATE, backing, cache=cache)
    try:
        result = scenarios.run_punct_impact(items, translate)
    finally:
        translate.close()
    refs = [item.ref_translations for item in items]
    base_hyps = [result.punctuated[item.id] for item in items]
    trt_hyps = [result.unpunctuated[item.id] for item in items]
    rows = []
    for metric in ("bleu", "chrf"):
        base = metrics.score_corpus(metric, base_hyps, refs, jobs=args.jobs)
        treated = metrics.score_corpus(metric, trt_hyps, refs, jobs=args.jobs)
        rows.append(
            report.DeltaRow(
                label="unpunctuated-vs-punctuated",
                metric=base.metric,
                baseline=base.value,
                treated=treated.value,
            )
        )
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_atomic(
            out_dir / "punctuated.jsonl",
            _jsonl({"id": i.id, "text": result.punctuated[i.id]} for i in items),
        )
        write_atomic(
            out_dir / "unpunctuated.jsonl",
            _jsonl({"id": i.id, "text": result.unpunctuated[i.id]} for i in items),
        )
        write_atomic(out_dir / "delta.md", report.delta_table(rows, "md"))
    sys.stdout.write(report.delta_table(rows, args.format))
    return 0


def cmd_report_delta(args) -> int:
    print(report.delta(args.baseline, args.treated).render())
    return 0


def cmd_report_scenario_table(args) -> int:
    if args.scores:
        runs = json.loads(Path(args.scores).read_text(encoding="utf-8"))
    else:
        if not args.run:
            raise CascadekitError("give --scores or at least one --run NAME=DIR")
        if not args.manifest:
            raise CascadekitError("--run needs --manifest for references")
        items = corpus.load_manifest(args.manifest)
        refs = [item.ref_translations for item in items]
        runs = {}
        for spec_arg in args.run:
            name, _, run_dir = spec_arg.partition("=")
            if not run_dir:
                raise CascadekitError(f"--run expects NAME=DIR, got {spec_arg!r}")
            traces = {t.item_id: t for t in scenarios.load_traces(run_dir)}
            missing = [item.id for item in items if item.id not in traces]
            if missing:
                raise CascadekitError(f"run {name!r} lacks items {missing[:5]}")
            hyps = [traces[item.id].hypothesis for item in items]
            runs[name] = {
                "bleu": metrics.bleu(hyps, refs, jobs=args.jobs).value,
                "chrf_pp": metrics.chrf_pp(hyps, refs, jobs=args.jobs).value,
            }
    _out_or_stdout(args, report.scenario_table(runs, args.format))
    return 0


def cmd_report_type_breakdown(args) -> int:
    records = [
        report.TypedScore(
            sentence_type=r["sentence_type"], system=r["system"], value=float(r["value"])
        )
        for r in _read_jsonl(args.infile)
    ]
    _out_or_stdout(args, report.type_breakdown(records, args.format))
    return 0


def cmd_alpha(args) -> int:
    records = _read_jsonl(args.infile)
    matrix = agreement.RatingMatrix.from_records(
        [(str(r["rater"]), str(r["item"]), int(r["value"])) for r in records],
        levels=args.levels,
    )
    result = agreement.krippendorff_alpha(matrix, metric=args.metric)
    print(report.fmt(result.alpha, 4))
    return 0


def cmd_annotate_serve(args) -> int:
    import uvicorn

    from .annotate.server import create_app
    from .annotate.store import AnnotateStore

    store = AnnotateStore(args.log)
    app = create_app(store, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_annotate_export(args) -> int:
    from .annotate.store import AnnotateStore

    store = AnnotateStore(args.log)
    export = store.finalize(args.session) if args.finalize else store.export(args.session)
    content = json.dumps(export, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if args.out:
        write_atomic(args.out, content)
    else:
        sys.stdout.write(content)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=1, help="worker threads for scoring")


def _add_backing(p, stage: str, identity: bool = True):
    p.add_argument(f"--{stage}-fixture", help=f"{stage} outputs JSONL (id, text)")
    p.add_argument(f"--{stage}-cmd", help=f"external {stage} process command line")
    if identity:
        p.add_argument(
            f"--{stage}-identity", action="store_true", help=f"pass-through {stage}"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascadekit",
        description="Build, perturb, run, and evaluate cascaded speech translation pipelines.",
    )
    parser.add_argument("--config", help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    p = sub.add_parser("score", help="score a hypothesis file against references")
    p.add_argument("--metric", required=True, choices=metrics.METRIC_NAMES)
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True, action="append",
                   help="reference file; repeat for multiple references")
    _add_jobs(p)
    p.set_defaults(func=cmd_score)
    subparsers.append(p)

    p = sub.add_parser("perturb", help="degrade text like recognizer output")
    p.add_argument("--mode", required=True, choices=[m.value for m in textcore.DegradeMode])
    p.add_argument("--in", dest="infile", help="input file (default stdin)")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_perturb)
    subparsers.append(p)

    p = sub.add_parser("filter", help="apply corpus hygiene filters")
    p.add_argument("--in", dest="infile", required=True, help="records JSONL")
    p.add_argument("--out", required=True, help="kept records JSONL")
    p.add_argument("--decisions", help="per-record decision JSONL")
    p.add_argument("--drop-numerals", action="store_true")
    p.add_argument("--max-duration", type=float)
    p.add_argument("--min-similarity", type=float)
    p.add_argument("--sim-scores", help="JSON object id -> similarity")
    p.add_argument("--chrf-cutoff", type=float)
    p.set_defaults(func=cmd_filter)
    subparsers.append(p)

    p = sub.add_parser("build-restore-data", help="make degraded/reference training pairs")
    p.add_argument("--in", dest="infile", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="pairs JSONL")
    p.add_argument("--modes", default="punct_only,fused")
    p.set_defaults(func=cmd_build_restore_data)
    subparsers.append(p)

    p_restore = sub.add_parser("restore", help="boundary restoration model")
    restore_sub = p_restore.add_subparsers(dest="restore_command", required=True)
    p = restore_sub.add_parser("train", help="train from pairs JSONL")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=3, help="context window size")
    p.add_argument("--smoothing", type=float, default=0.1, help="add-alpha smoothing")
    p.set_defaults(func=cmd_restore_train)
    subparsers.append(p)
    p = restore_sub.add_parser("apply", help="restore boundaries in a text file")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--resegment", action="store_true",
                   help="drop existing spaces and re-segment from scratch")
    p.set_defaults(func=cmd_restore_apply)
    subparsers.append(p)

    p_pipeline = sub.add_parser("pipeline", help="run cascades over a manifest")
    pipe_sub = p_pipeline.add_subparsers(dest="pipeline_command", required=True)
    p = pipe_sub.add_parser("run", help="run one scenario end to end")
    p.add_argument("--scenario", required=True, choices=["A", "B", "C", "custom"])
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--cache", help="stage cache directory")
    p.add_argument("--timeout-ms", type=int, default=30000)
    _add_backing(p, "asr", identity=False)
    p.add_argument("--restore-model", help="builtin restorer model file")
    _add_backing(p, "restore")
    _add_backing(p, "translate")
    p.set_defaults(func=cmd_pipeline_run)
    subparsers.append(p)
    p = pipe_sub.add_parser("asr-fixture", help="synthesize recognizer-output fixtures")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", default="punct_only",
                   choices=[m.value for m in textcore.DegradeMode])
    p.add_argument("--noise-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_pipeline_asr_fixture)
    subparsers.append(p)

    p = sub.add_parser("impact", help="translate with and without punctuation, report delta")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache")
    p.add_argument("--timeout-ms", type=int, default=30000)
    p.add_argument("--format", default="md", choices=report.FORMATS)
    _add_backing(p, "translate")
    _add_jobs(p)
    p.set_defaults(func=cmd_impact)
    subparsers.append(p)

    p_report = sub.add_parser("report", help="render tables from scores or runs")
    report_sub = p_report.add_subparsers(dest="report_command", required=True)
    p = report_sub.add_parser("delta", help="treated vs baseline with relative change")
    p.add_argument("--baseline", type=float, required=True)
    p.add_argument("--treated", type=float, required=True)
    p.set_defaults(func=cmd_report_delta)
    subparsers.append(p)
    p = report_sub.add_parser("scenario-table", help="BLEU/chrF++ per scenario with deltas")
    p.add_argument("--scores", help="JSON {scenario: {bleu, chrf_pp}}")
    p.add_argument("--run", action="append", help="NAME=RUN_DIR; repeatable")
    p.add_argument("--manifest")
    p.add_argument("--format", default="md", choices=report.FORMATS)
    p.add_argument("--out")
    _add_jobs(p)
    p.set_defaults(func=cmd_report_scenario_table)
    subparsers.append(p)
    p = report_sub.add_parser("type-breakdown", help="per-sentence-type means per system")
    p.add_argument("--in", dest="infile", required=True,
                   help="JSONL {sentence_type, system, value}")
    p.add_argument("--format", default="md", choices=report.FORMATS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report_type_breakdown)
    subparsers.append(p)

    p = sub.add_parser("alpha", help="Krippendorff agreement over rating records")
    p.add_argument("--in", dest="infile", required=True,
                   help="JSONL {rater, item, value}")
    p.add_argument("--metric", default="ordinal", choices=["ordinal", "nominal"])
    p.add_argument("--levels", type=int, default=5)
    p.set_defaults(func=cmd_alpha)
    subparsers.append(p)

    p_annotate = sub.add_parser("annotate", help="blind rating sessions")
    annotate_sub = p_annotate.add_subparsers(dest="annotate_command", required=True)
    p = annotate_sub.add_parser("serve", help="start the rating server")
    p.add_argument("--log", required=True, help="append-only event log path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--ui-dir", help="built frontend directory to serve at /")
    p.set_defaults(func=cmd_annotate_serve)
    subparsers.append(p)
    p = annotate_sub.add_parser("export", help="export a finalized session")
    p.add_argument("--log", required=True)
    p.add_argument("--session", required=True)
    p.add_argument("--finalize", action="store_true", help="finalize before export")
    p.add_argument("--out")
    p.set_defaults(func=cmd_annotate_export)
    subparsers.append(p)

    for p in subparsers:
        # accepted before or after the subcommand; consumed by _apply_config
        p.add_argument("--config", help=argparse.SUPPRESS)
    parser._all_subparsers = subparsers  # config defaults reach into these
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    if "--config" not in argv:
        return
    path = argv[list(argv).index("--config") + 1]
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    defaults = {key.replace("-", "_"): value for key, value in raw.items()}
    parser.set_defaults(**defaults)
    for sub in parser._all_subparsers:
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in defaults.items() if k in known})


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError, IndexError) as exc:
        print(f"error: cannot read --config: {exc}", file=sys.stderr)
        return 1
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CascadekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
