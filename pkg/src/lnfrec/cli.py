"""Command-line front end: ``lnfrec {recommend,evaluate,synth,ingest}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
Every command writes a ``manifest.json`` next to its outputs with the config
hash, input hashes and output hashes.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

import yaml

from . import __version__, formats, ingest
from .config import PipelineConfig, parse_sweep
from .evaluation import predicted_attendance, run_experiment, threshold_grid
from .pipeline import Bundle, Recommender, method_for_mode, split_bundle
from .records import CleansingReport, ConfigError, DataError
from .synth import SyntheticSpec, generate_synthetic

log = logging.getLogger("lnfrec")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


@contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, cfg_digest: str | None, inputs: dict, outputs: list) -> None:
    manifest = {
        "tool": "lnfrec",
        "version": __version__,
        "command": command,
        "config_sha256": cfg_digest,
        "inputs": {k: _sha256(v) for k, v in sorted(inputs.items()) if v is not None},
        "outputs": {Path(p).name: _sha256(p) for p in sorted(outputs)},
    }
    formats.write_json(out / "manifest.json", manifest)


def load_bundle(cfg: PipelineConfig, report: CleansingReport) -> tuple[Bundle, dict]:
    """Records from pre-extracted CSVs, or extracted from a raw presence log."""
    schedule_path = cfg.input_path("schedule")
    inputs = {"schedule": schedule_path}
    with stage("ingest"):
        schedule = formats.read_schedule(schedule_path)
        raw = cfg.input_path("raw_log", required=False)
        if raw is not None:
            inputs["raw_log"] = raw
            parts, encs = _extract(cfg, schedule, raw, report)
        else:
            part_path = cfg.input_path("participation")
            inputs["participation"] = part_path
            parts = formats.read_participation(part_path)
            enc_path = cfg.input_path("encounters", required=False)
            inputs["encounters"] = enc_path
            encs = formats.read_encounters(enc_path) if enc_path is not None else []
    return Bundle(schedule, parts, encs), inputs


def _extract(cfg, schedule, raw_path, report):
    opts = cfg.data["ingest"]
    if not opts.get("common_zones"):
        raise ConfigError("config field ingest.common_zones is required with a raw log")
    rows = formats.read_raw_log(raw_path)
    intervals = ingest.sessionize(rows, float(opts["gap"]), report)
    rooms = set(opts["room_zones"]) if opts.get("room_zones") else None
    parts = ingest.extract_participation(intervals, schedule, cfg.cleansing, rooms, report)
    encs = ingest.extract_encounters(intervals, opts["common_zones"], cfg.cleansing, report)
    return parts, encs


def _out_dir(cfg, args) -> Path:
    out = Path(args.out) if args.out else cfg.path("output")
    return formats.ensure_dir(out)


def _num(x) -> str:
    return repr(float(x))


def cmd_recommend(args) -> int:
    cfg = PipelineConfig.load(args.config, args.set)
    out = _out_dir(cfg, args)
    report = CleansingReport()
    bundle, inputs = load_bundle(cfg, report)
    with stage("networks"):
        split = split_bundle(bundle, cfg.train_sessions, cfg.cleansing, report)
        model = cfg.model
        rec = Recommender(split, cfg.lbp, float(model["beta"]), float(model["neighbor_fraction"]))
        method = method_for_mode(model["encounter_mode"])
    with stage("inference"):
        result = rec.run(method, cfg.thresholds)
    with stage("output"):
        rec_path, marg_path = out / "recommendations.csv", out / "marginals.csv"
        with open(rec_path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["user_id", "session_id", "rank", "event_id", "score"])
            for r in sorted(result.recommendations, key=lambda r: (r.user_id, r.session_id)):
                for rank, (e, s) in enumerate(r.items, start=1):
                    w.writerow([r.user_id, r.session_id, rank, e, _num(s)])
        marg = result.marginals
        with open(marg_path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["user_id", "context", "probability", "converged"])
            for i, u in enumerate(marg.users):
                for j, c in enumerate(marg.contexts):
                    w.writerow([u, c, _num(marg.prob[i, j]), str(marg.converged[c]).lower()])
        att_path, rep_path = out / "attendance.json", out / "cleansing_report.json"
        formats.write_json(att_path, {s: predicted_attendance(result.recommendations, s) for s in split.test_sessions})
        formats.write_json(rep_path, report.to_dict())
        write_manifest(out, "recommend", cfg.digest(), inputs, [rec_path, marg_path, att_path, rep_path])
    print(f"{len(result.recommendations)} ranked lists for {len(split.users)} users -> {rec_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = PipelineConfig.load(args.config, args.set)
    out = _out_dir(cfg, args)
    sweep = dict(cfg.data["evaluate"].get("sweep") or {})
    for s in args.sweep or ():
        sweep.update(parse_sweep(s))
    grid = threshold_grid(sweep, cfg.thresholds)
    methods = cfg.methods
    report = CleansingReport()
    bundle, inputs = load_bundle(cfg, report)
    with stage("networks"):
        split = split_bundle(bundle, cfg.train_sessions, cfg.cleansing, report)
        model = cfg.model
        rec = Recommender(split, cfg.lbp, float(model["beta"]), float(model["neighbor_fraction"]))
    with stage("evaluation"):
        metrics = run_experiment(split, methods, grid, rec, threads=args.threads)
    with stage("output"):
        json_path, csv_path = out / "report.json", out / "report.csv"
        formats.write_json(json_path, metrics.to_json())
        rows = metrics.rows()
        with open(csv_path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        write_manifest(out, "evaluate", cfg.digest(), inputs, [json_path, csv_path])
    for c in metrics.cells:
        th = c["thresholds"]
        print(f"{c['method']:<11} K={th['k']:<3} phi={th['phi']:<5} delta={th['delta']:<3} theta={th['theta']:<7} "
              f"precision={c['precision']:.4f} ndcg={c['ndcg']:.4f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    data = {}
    if args.spec:
        try:
            data = yaml.safe_load(Path(args.spec).read_text()) or {}
        except FileNotFoundError:
            raise ConfigError(f"spec file {args.spec} not found") from None
    spec = SyntheticSpec.from_dict(data)
    seed = args.seed if args.seed is not None else 0
    out = formats.ensure_dir(args.out or "synth")
    with stage("synth"):
        sb = generate_synthetic(seed, spec)
    b = sb.bundle
    files = {
        "schedule": out / "schedule.json",
        "participation": out / "participation.csv",
        "encounters": out / "encounters.csv",
        "truth": out / "truth.csv",
        "planted": out / "planted.json",
        "config": out / "config.yaml",
    }
    formats.write_schedule(files["schedule"], b.schedule)
    formats.write_participation(files["participation"], b.participation)
    formats.write_encounters(files["encounters"], b.encounters)
    formats.write_participation(files["truth"], sb.truth)
    formats.write_json(files["planted"], sb.planted())
    config = {
        "paths": {"schedule": "schedule.json", "participation": "participation.csv",
                  "encounters": "encounters.csv", "output": "out"},
        "split": {"train_sessions": spec.train_sessions},
    }
    files["config"].write_text(yaml.safe_dump(config, sort_keys=True))
    write_manifest(out, "synth", None, {}, list(files.values()))
    print(f"synthetic bundle (seed {seed}, {len(sb.groups)} users, {len(b.schedule)} events) -> {out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = PipelineConfig.load(args.config, args.set)
    out = _out_dir(cfg, args)
    report = CleansingReport()
    bundle, inputs = load_bundle(cfg, report)
    cc = cfg.cleansing
    with stage("cleansing"):
        parts = ingest.drop_short_participation(bundle.participation, cc, report)
        encs = ingest.drop_short_encounters(bundle.encounters, cc, report)
        t = cfg.data["split"]["train_sessions"]
        if t is not None:
            # sparse-attendee rule counts training participations only
            split = split_bundle(Bundle(bundle.schedule, parts, encs), int(t), cc, CleansingReport())
            keep = set(split.users)
            report.users_dropped_sparse = len({r.user_id for r in parts} - keep)
        else:
            keep = {r.user_id for r in ingest.cleanse_attendees(parts, cc, report)}
        parts = [r for r in parts if r.user_id in keep]
        encs = ingest.filter_encounters(encs, keep)
    paths = [out / "participation.csv", out / "encounters.csv", out / "cleansing_report.json"]
    formats.write_participation(paths[0], parts)
    formats.write_encounters(paths[1], encs)
    formats.write_json(paths[2], report.to_dict())
    write_manifest(out, "ingest", cfg.digest(), inputs, paths)
    print(f"{len(parts)} participation and {len(encs)} encounter records kept -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML pipeline configuration")
    common.add_argument("--out", help="output directory (overrides paths.output)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for experiment cells")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="lnfrec", description="Event recommendation by latent network fusion.")
    p.add_argument("--version", action="version", version=f"lnfrec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("recommend", parents=[common], help="rank the test sessions' events for every user")
    ev = sub.add_parser("evaluate", parents=[common], help="precision / nDCG over methods and thresholds")
    ev.add_argument("--sweep", action="append", metavar="NAME=VALUES",
                    help="sweep one threshold, e.g. K=2..10 or phi=0.2,0.4; repeatable")
    sy = sub.add_parser("synth", parents=[common], help="write a synthetic input bundle")
    sy.add_argument("--spec", help="YAML synthetic scenario")
    sub.add_parser("ingest", parents=[common], help="cleanse raw logs or pre-extracted records")
    return p


COMMANDS = {"recommend": cmd_recommend, "evaluate": cmd_evaluate, "synth": cmd_synth, "ingest": cmd_ingest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as err:
        code = _code(err.exc)
        print(f"lnfrec {args.command}: stage {err.stage} failed: {err.exc}", file=sys.stderr)
        return code
    except Exception as exc:
        code = _code(exc)
        print(f"lnfrec {args.command}: {exc}", file=sys.stderr)
        return code


def _code(exc) -> int:
    while exc is not None:
        if isinstance(exc, ConfigError):
            return EXIT_CONFIG
        if isinstance(exc, DataError):
            return EXIT_DATA
        exc = exc.__cause__
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
