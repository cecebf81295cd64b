"""Command-line entry point for the whole toolkit.

Data-quality findings (failed tasks, rejected resolutions) never abort a
command; infrastructure and schema failures exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import report as report_mod
from .config import load_config
from .lang import LangError, ParseError, extract_code, interpret, parse
from .llm import DEFAULT_API_KEY_ENV, client_from_spec
from .manifest import build_manifest, write_manifest
from .metrics import MatchConfig, MetricsError, TaskScore, aggregate, score_task
from .reward import DETERMINISTIC, MODES
from .server import RewardService, serve

log = logging.getLogger("roboforge")

EXIT_OK = 0
EXIT_FAILURE = 1


class SchemaError(Exception):
    """Input files are malformed; the command must abort."""


def _robot_profiles(args) -> dict:
    from .sim import builtin_profiles, load_profile_dir

    profiles = builtin_profiles()
    profile_dir = getattr(args, "profile_dir", None)
    if profile_dir:
        profiles.update(load_profile_dir(profile_dir))
    return profiles


def _robot(args):
    profiles = _robot_profiles(args)
    name = getattr(args, "profile", None) or "uav"
    if name not in profiles:
        raise SchemaError(f"unknown robot profile {name!r}")
    return profiles[name]


def _client(args, cfg: dict, outdir: Path | None):
    spec = args.llm or cfg.get("llm", "mock")
    transcript_dir = cfg.get("transcript_dir")
    if transcript_dir is None and outdir is not None and not spec.startswith("mock:"):
        transcript_dir = str(outdir / "transcripts")
    return client_from_spec(
        spec,
        base_url=cfg.get("base_url"),
        model=cfg.get("model", "gpt-4o-mini"),
        temperature=float(cfg.get("temperature", "0.7")),
        api_key_env=cfg.get("api_key_env", DEFAULT_API_KEY_ENV),
        transcript_dir=transcript_dir,
    )


def _model_ids(cfg: dict, client) -> dict:
    return {
        "generator": cfg.get("generator_model", client.model),
        "grounder": cfg.get("grounder_model", client.model),
        "augmenter": cfg.get("augmenter_model", client.model),
        "judge": cfg.get("judge_model", client.model),
    }


def _read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    return rows


def _write_jsonl(path: str | Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _prompt_profiles(args):
    from .synthesis import PromptProfile, default_profiles

    path = getattr(args, "profiles", None)
    if not path:
        return default_profiles()
    from .templates import load_template

    data = json.loads(Path(path).read_text(encoding="utf-8"))
    profiles = {}
    for row in data:
        profiles[row["id"]] = PromptProfile(
            id=row["id"],
            system_prompt=(
                row.get("system_prompt")
                or load_template(row["system_prompt_template"])
            ),
            requested_counts=tuple(
                (str(p), int(n)) for p, n in row["requested_counts"]
            ),
            complexity_class=row["complexity_class"],
            split=row.get("split", "train"),
            augmentations_per_task=int(row.get("augmentations_per_task", 2)),
        )
    return profiles


# -- commands ----------------------------------------------------------------


def cmd_synth_instructions(args) -> int:
    from .synthesis import generate_instructions
    from .templates import template_hashes

    cfg = load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    client = _client(args, cfg, outdir)
    profiles = _prompt_profiles(args)

    records = []
    for profile_id in sorted(profiles):
        records.extend(generate_instructions(profiles[profile_id], client))
    out_path = outdir / "instructions.jsonl"
    _write_jsonl(out_path, (r.to_row() for r in records))

    by_profile = {}
    for r in records:
        by_profile[r.profile_id] = by_profile.get(r.profile_id, 0) + 1
    manifest = build_manifest(
        command="synth-instructions",
        config={**cfg, "llm": args.llm or cfg.get("llm", "mock")},
        inputs=[args.profiles] if args.profiles else [],
        outputs=[str(out_path)],
        seed=args.seed,
        model_ids=list({_model_ids(cfg, client)["generator"]}),
        template_hashes=template_hashes(),
        extra={"counts": {"total": len(records), "by_profile": by_profile}},
    )
    write_manifest(outdir, manifest)
    print(f"instructions: {len(records)} " + json.dumps(by_profile, sort_keys=True))
    return EXIT_OK


def cmd_ground(args) -> int:
    from .synthesis import InstructionRecord, ground_all
    from .templates import template_hashes

    cfg = load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    client = _client(args, cfg, outdir)
    robot = _robot(args)

    rows = _read_jsonl(args.instructions)
    try:
        records = [InstructionRecord.from_row(r) for r in rows]
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad instruction row: {exc}") from exc

    results = ground_all(records, client, robot,
                         max_rounds=args.max_rounds, jobs=args.jobs)
    out_path = outdir / "groundings.jsonl"
    _write_jsonl(out_path, (r.to_row() for r in results))

    by_status = {}
    for r in results:
        by_status[r.status] = by_status.get(r.status, 0) + 1
    manifest = build_manifest(
        command="ground",
        config={**cfg, "llm": args.llm or cfg.get("llm", "mock"),
                "max_rounds": args.max_rounds, "profile": robot.name},
        inputs=[args.instructions],
        outputs=[str(out_path)],
        seed=args.seed,
        model_ids=[_model_ids(cfg, client)["grounder"]],
        template_hashes=template_hashes(),
        extra={"counts": {"total": len(results), "by_status": by_status}},
    )
    write_manifest(outdir, manifest)
    print(f"groundings: {len(results)} " + json.dumps(by_status, sort_keys=True))
    return EXIT_OK


def cmd_review_export(args) -> int:
    from .synthesis import GroundingResult, export_review_queue

    results = [GroundingResult.from_row(r) for r in _read_jsonl(args.groundings)]
    try:
        count = export_review_queue(results, args.out)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    manifest = build_manifest(
        command="review-export",
        config={},
        inputs=[args.groundings],
        outputs=[args.out],
        extra={"counts": {"pending": count}},
    )
    write_manifest(Path(args.out).parent, manifest)
    print(f"review queue: {count} records -> {args.out}")
    return EXIT_OK


def cmd_review_import(args) -> int:
    from .synthesis import GroundingResult, ReviewQueueError, import_review_resolutions

    results = [GroundingResult.from_row(r) for r in _read_jsonl(args.groundings)]
    robot = _robot(args)
    try:
        updated, rejections = import_review_resolutions(results, args.queue, robot)
    except ReviewQueueError as exc:
        raise SchemaError(str(exc)) from exc
    _write_jsonl(args.out, (r.to_row() for r in updated))
    for task_id, err in rejections:
        print(f"rejected resolution for {task_id}: {err}", file=sys.stderr)
    accepted = sum(1 for r in updated if r.status == "reviewed_accepted")
    manifest = build_manifest(
        command="review-import",
        config={"profile": robot.name},
        inputs=[args.groundings, args.queue],
        outputs=[args.out],
        extra={"counts": {"reviewed_accepted": accepted,
                          "rejected": len(rejections)}},
    )
    write_manifest(Path(args.out).parent, manifest)
    print(f"review import: {accepted} accepted, {len(rejections)} rejected")
    return EXIT_OK


def cmd_augment(args) -> int:
    from .synthesis import (
        AUTO_ACCEPTED,
        REVIEWED_ACCEPTED,
        AugmentationError,
        GroundingResult,
        augment_instruction,
        augmentation_matches,
    )
    from .templates import template_hashes

    cfg = load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    client = _client(args, cfg, outdir)
    profiles = _prompt_profiles(args)
    robot = _robot(args)

    results = [GroundingResult.from_row(r) for r in _read_jsonl(args.groundings)]
    accepted = [r for r in results if r.status in (AUTO_ACCEPTED, REVIEWED_ACCEPTED)]

    jobs = []
    for r in accepted:
        if args.per_task is not None:
            n = args.per_task
        elif r.profile_id in profiles:
            n = profiles[r.profile_id].augmentations_per_task
        else:
            n = 2
        jobs.extend((r, k) for k in range(1, n + 1))

    def augment_one(job):
        r, k = job
        try:
            text = augment_instruction(r.instruction, r.code, client, variant=k)
        except AugmentationError as exc:
            return {"base_task_id": r.instruction_id, "k": k, "error": str(exc)}
        row = {"base_task_id": r.instruction_id, "k": k, "text": text,
               "flagged": False}
        if args.validate:
            row["flagged"] = not augmentation_matches(
                text, r.trajectory_rows or [], client, robot
            )
        return row

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        outcomes = list(pool.map(augment_one, jobs))
    outcomes.sort(key=lambda row: (row["base_task_id"], row["k"]))

    rows = []
    flagged = 0
    failures = 0
    for outcome in outcomes:
        if "error" in outcome:
            failures += 1
            print(f"augmentation failed for {outcome['base_task_id']}: "
                  f"{outcome['error']}", file=sys.stderr)
            continue
        flagged += 1 if outcome["flagged"] else 0
        rows.append(outcome)
    out_path = outdir / "augmented.jsonl"
    _write_jsonl(out_path, rows)
    manifest = build_manifest(
        command="augment",
        config={**cfg, "llm": args.llm or cfg.get("llm", "mock"),
                "validate": bool(args.validate)},
        inputs=[args.groundings],
        outputs=[str(out_path)],
        seed=args.seed,
        model_ids=[_model_ids(cfg, client)["augmenter"]],
        template_hashes=template_hashes(),
        extra={"counts": {"augmented": len(rows), "flagged": flagged,
                          "failed": failures}},
    )
    write_manifest(outdir, manifest)
    print(f"augmented: {len(rows)} (flagged {flagged}, failed {failures})")
    return EXIT_OK


def cmd_build_dataset(args) -> int:
    from .synthesis import GroundingResult, assemble_pairs, build_dataset
    from .templates import template_hashes

    cfg = load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    profiles = _prompt_profiles(args)

    groundings = [GroundingResult.from_row(r) for r in _read_jsonl(args.groundings)]
    augmentations: dict[str, list[str]] = {}
    if args.augmented:
        for row in _read_jsonl(args.augmented):
            if row.get("flagged"):
                continue
            augmentations.setdefault(row["base_task_id"], []).append(row["text"])

    model_ids = {
        "generator": cfg.get("generator_model", "mock"),
        "grounder": cfg.get("grounder_model", "mock"),
        "augmenter": cfg.get("augmenter_model", "mock"),
    }
    pairs = assemble_pairs(groundings, augmentations, profiles, model_ids)

    if args.split == "by_profile":
        split_spec = {"mode": "by_profile"}
    else:
        try:
            train_n, eval_n = (int(x) for x in args.split.split("/"))
        except ValueError as exc:
            raise SchemaError(
                f"--split must be 'by_profile' or 'TRAIN/EVAL', got {args.split!r}"
            ) from exc
        split_spec = {"mode": "sizes", "train": train_n, "eval": eval_n}

    try:
        train_path, eval_path, extra = build_dataset(pairs, split_spec, args.seed, outdir)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    manifest = build_manifest(
        command="build-dataset",
        config={**cfg, "split": args.split},
        inputs=[args.groundings] + ([args.augmented] if args.augmented else []),
        outputs=[str(train_path), str(eval_path)],
        seed=args.seed,
        model_ids=sorted(set(model_ids.values())),
        template_hashes=template_hashes(),
        extra=extra,
    )
    write_manifest(outdir, manifest)
    print(
        f"dataset: {extra['counts']['pairs']} pairs "
        f"({extra['counts']['train']} train / {extra['counts']['eval']} eval)"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .sim import Simulator

    robot = _robot(args)
    try:
        source = Path(args.code).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {args.code}: {exc}") from exc
    try:
        trajectory = interpret(parse(source), Simulator(robot))
    except LangError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    def fmt_pose(p):
        return (f"north={p.north:.3f} east={p.east:.3f} down={p.down:.3f} "
                f"yaw={p.yaw:.1f} airborne={'yes' if p.airborne else 'no'}")

    print(f"initial: {fmt_pose(trajectory.initial)}")
    print("transitions:")
    print(f"  {'#':>3}  {'kind':<10} {'dx':>9} {'dy':>9} {'dz':>9} {'dtheta':>8}")
    for i, row in enumerate(trajectory.rows(), 1):
        print(
            f"  {i:>3}  {row['kind']:<10} {row['dx']:>9.3f} {row['dy']:>9.3f} "
            f"{row['dz']:>9.3f} {row['dtheta']:>8.1f}"
        )
    print(f"final: {fmt_pose(trajectory.final)}")
    return EXIT_OK


def _collect_runs(path: Path) -> list[tuple[str, Path]]:
    if path.is_file():
        return [(path.stem, path)]
    if path.is_dir():
        direct = sorted(p for p in path.glob("*.jsonl"))
        if direct:
            return [(p.stem, p) for p in direct]
        nested = sorted(p for p in path.glob("*/predictions.jsonl"))
        if nested:
            return [(p.parent.name, p) for p in nested]
    raise SchemaError(f"no prediction runs found under {path}")


def _score_run(run_rows, gt, robot, cfg: MatchConfig) -> list[TaskScore]:
    from .sim import Simulator

    scores = []
    preds = {}
    for row in run_rows:
        if "task_id" not in row or "code" not in row:
            raise SchemaError("prediction rows need task_id and code fields")
        if row["task_id"] not in gt:
            raise SchemaError(f"prediction references unknown task {row['task_id']!r}")
        preds[row["task_id"]] = row["code"]
    for task_id, gt_traj in gt.items():
        raw = preds.get(task_id)
        if raw is None:
            scores.append(score_task(task_id, None, gt_traj, cfg,
                                     error="missing prediction"))
            continue
        code = extract_code(raw)
        if code is None:
            scores.append(score_task(task_id, None, gt_traj, cfg,
                                     error="no parseable code in prediction"))
            continue
        sim = Simulator(robot)
        try:
            program = parse(code)
        except ParseError as exc:
            scores.append(score_task(task_id, None, gt_traj, cfg, error=str(exc)))
            continue
        try:
            pred_traj = interpret(program, sim)
            scores.append(score_task(task_id, pred_traj, gt_traj, cfg))
        except LangError as exc:
            # Actions emitted before the failure still score.
            scores.append(score_task(task_id, sim.trajectory(), gt_traj, cfg,
                                     error=str(exc)))
    return scores


def cmd_score(args) -> int:
    from .sim import Simulator

    cfg_file = load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    robot = _robot(args)

    match_cfg = MatchConfig(
        position_tolerance=args.position_tolerance,
        yaw_tolerance=args.yaw_tolerance,
        mode=args.match_mode,
        strict_length=not args.no_strict_length,
        coalesce_rotations=args.coalesce_rotations,
    )

    gt_rows = _read_jsonl(args.ground_truth)
    gt: dict[str, object] = {}
    grouping: dict[str, str] = {}
    for row in gt_rows:
        if "task_id" not in row or "code" not in row:
            raise SchemaError("ground-truth rows need task_id and code fields")
        try:
            gt[row["task_id"]] = interpret(parse(row["code"]), Simulator(robot))
        except LangError as exc:
            raise SchemaError(
                f"ground-truth code for {row['task_id']!r} failed: {exc}"
            ) from exc
        if row.get("group"):
            grouping[row["task_id"]] = row["group"]
    if args.grouping:
        data = json.loads(Path(args.grouping).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise SchemaError("grouping file must be a JSON object task_id -> group")
        grouping.update(data)

    runs = {}
    for run_id, run_path in _collect_runs(Path(args.predictions)):
        runs[run_id] = _score_run(_read_jsonl(run_path), gt, robot, match_cfg)

    try:
        suite = aggregate(runs, grouping)
    except MetricsError as exc:
        raise SchemaError(str(exc)) from exc

    report_mod.write_report_json(suite, outdir / "report.json")
    report_mod.write_report_csv(suite, outdir / "report.csv")
    table = report_mod.render_table(suite)
    (outdir / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    figures = []
    if not args.no_figures:
        figures = [str(p) for p in report_mod.write_report_figures(suite, outdir)]

    manifest = build_manifest(
        command="score",
        config={**cfg_file, "profile": robot.name,
                "position_tolerance": args.position_tolerance,
                "yaw_tolerance": args.yaw_tolerance,
                "match_mode": args.match_mode,
                "strict_length": not args.no_strict_length},
        inputs=[args.predictions, args.ground_truth]
        + ([args.grouping] if args.grouping else []),
        outputs=[str(outdir / "report.json"), str(outdir / "report.csv"),
                 str(outdir / "report.txt")] + figures,
        seed=args.seed,
        extra={"counts": {"tasks": len(gt), "runs": len(runs)}},
    )
    write_manifest(outdir, manifest)
    return EXIT_OK


def cmd_serve_reward(args) -> int:
    import os

    cfg = load_config(args.config)
    profiles = _robot_profiles(args)
    client = None
    mode = args.mode or cfg.get("mode", DETERMINISTIC)
    if mode != DETERMINISTIC or (args.llm and args.llm != "mock"):
        client = _client(args, cfg, None)
    secret = os.environ.get(args.secret_env) if args.secret_env else None
    service = RewardService(
        profiles=profiles, default_mode=mode, client=client, secret=secret
    )
    server = serve(host=args.host, port=args.port, service=service)
    host, port = server.server_address[:2]
    print(f"reward service listening on http://{host}:{port} "
          f"(mode={mode}, profiles={sorted(profiles)})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, llm: bool = False):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--profile", default="uav", help="robot profile name")
    p.add_argument("--profile-dir", help="directory of extra robot profile JSON files")
    if llm:
        p.add_argument("--llm", help="live or mock:<transcript-dir> (default mock)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roboforge",
        description="Robot-control mini-language, simulator, metrics, "
                    "dataset synthesis, and reward service.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-instructions", help="generate task instructions")
    _add_common(p, llm=True)
    p.add_argument("--profiles", help="JSON file of prompt profiles")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth_instructions)

    p = sub.add_parser("ground", help="ground instructions into code")
    _add_common(p, llm=True)
    p.add_argument("--instructions", required=True)
    p.add_argument("--max-rounds", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ground)

    p = sub.add_parser("review-export", help="export the human-review queue")
    _add_common(p)
    p.add_argument("--groundings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_review_export)

    p = sub.add_parser("review-import", help="apply reviewed resolutions")
    _add_common(p)
    p.add_argument("--groundings", required=True)
    p.add_argument("--queue", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_review_import)

    p = sub.add_parser("augment", help="rephrase instructions as scenarios")
    _add_common(p, llm=True)
    p.add_argument("--groundings", required=True)
    p.add_argument("--profiles", help="JSON file of prompt profiles")
    p.add_argument("--per-task", type=int, help="override augmentations per task")
    p.add_argument("--validate", action="store_true",
                   help="re-ground augmentations and flag mismatches")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("build-dataset", help="assemble train/eval JSONL files")
    _add_common(p)
    p.add_argument("--groundings", required=True)
    p.add_argument("--augmented")
    p.add_argument("--profiles", help="JSON file of prompt profiles")
    p.add_argument("--split", default="by_profile",
                   help="'by_profile' or explicit sizes 'TRAIN/EVAL'")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_dataset)

    p = sub.add_parser("simulate", help="run one code file and print transitions")
    _add_common(p)
    p.add_argument("--code", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("score", help="score predictions against ground truth")
    _add_common(p)
    p.add_argument("--predictions", required=True,
                   help="JSONL file, or directory of per-run JSONL files")
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--grouping", help="JSON object mapping task_id -> group")
    p.add_argument("--position-tolerance", type=float, default=0.1)
    p.add_argument("--yaw-tolerance", type=float, default=1.0)
    p.add_argument("--match-mode", choices=("per_index", "prefix"),
                   default="per_index")
    p.add_argument("--no-strict-length", action="store_true")
    p.add_argument("--coalesce-rotations", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("serve-reward", help="run the reward HTTP service")
    _add_common(p, llm=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--secret-env",
                   help="environment variable holding a shared secret")
    p.set_defaults(fn=cmd_serve_reward)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
