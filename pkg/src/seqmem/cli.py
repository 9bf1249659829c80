"""Command-line surface.

Subcommands: gen (emit a dataset artifact), run (execute a configured
experiment), baseline (reference predictors on the same series), save /
load (model snapshots), perturb (rewrite a demand CSV), report (figures
and CSV curves from recorded runs).

Exit codes: 0 success, 2 configuration error, 3 data error. When
--out-dir is omitted, the SEQMEM_OUT environment variable names the
output directory, falling back to the current directory. Every output
file embeds the fully resolved config and seed of the run that made it,
and JSONL records are flushed line by line as the run progresses.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import TextIO

from . import __version__
from .baselines import baseline_summary
from .config import RunConfig, load_config, parse_config
from .datasets import gen_dataset, stream
from .errors import ConfigError, DataError
from .harness import DiscreteBundle, DiscreteRunner, TaxiBundle, run_taxi
from .snapshot import load_bundle, save_bundle
from .temporal_memory import TmParams
from .timeseries import (PerturbWindow, ingest_csv, perturb, synthetic_series,
                         require_contiguous, write_csv)

OUT_DIR_ENV = "SEQMEM_OUT"


def _out_dir(args: argparse.Namespace) -> Path:
    raw = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


class _RecordsWriter:
    """Append-only JSONL sink, flushed after every line."""

    def __init__(self, path: Path, header: dict):
        self._handle: TextIO = path.open("w", encoding="utf-8")
        self.path = path
        self.write({"kind": "header", **header})

    def write(self, row: dict) -> None:
        self._handle.write(json.dumps(row, sort_keys=True) + "\n")
        self._handle.flush()

    def close(self) -> None:
        self._handle.close()


def _tm_params(cfg: RunConfig, replica: int) -> TmParams:
    if replica == 0:
        return cfg.tm
    return dataclasses.replace(cfg.tm, seed=cfg.tm.seed + replica)


def _build_datasets(cfg: RunConfig) -> list:
    return [gen_dataset(s.order, s.endings, s.groups, seed=s.seed)
            for s in cfg.datasets]


def _run_discrete(cfg: RunConfig, replica: int, records_path: Path | None,
                  save_model: Path | None = None) -> dict:
    bundle = DiscreteBundle.create(_tm_params(cfg, replica),
                                   encoder_seed=cfg.encoder_seed,
                                   encoder_bits=cfg.encoder_bits)
    runner = DiscreteRunner(bundle, k=cfg.k)
    stream_seed = cfg.seed + replica
    writer = None
    if records_path is not None:
        writer = _RecordsWriter(records_path, {
            "config": cfg.resolved(), "replica": replica,
            "stream_seed": stream_seed, "format": f"seqmem-records/{__version__}",
        })
    kill = cfg.kill
    elements = 0
    scored = 0
    correct = 0
    last_ma: float | None = None
    try:
        for item in stream(_build_datasets(cfg), cfg.num_elements,
                           seed=stream_seed, swap_at=cfg.swap_at,
                           corrupt_from=cfg.corrupt_from):
            if kill is not None and item.element_index == kill.at:
                bundle.tm.kill_cells(kill.fraction, seed=kill.seed)
                if kill.freeze:
                    runner.learn = False
            record = runner.feed(item)
            elements += 1
            if record.correct is not None:
                scored += 1
                correct += int(record.correct)
                last_ma = record.accuracy_ma100
            if writer is not None:
                writer.write({"kind": "step", **record.to_dict()})
    finally:
        if writer is not None:
            writer.close()
    if save_model is not None:
        save_bundle(save_model, bundle, runner=runner, meta={
            "config": cfg.resolved(), "elements_consumed": elements,
            "replica": replica,
        })
    return {
        "task": "discrete",
        "elements": elements,
        "sequences_scored": scored,
        "accuracy_overall": (correct / scored) if scored else None,
        "accuracy_ma100": last_ma,
        "num_segments": bundle.tm.num_segments,
    }


def _load_series(cfg: RunConfig) -> tuple[list, dict]:
    taxi = cfg.taxi
    assert taxi is not None
    info: dict = {}
    if taxi.data is not None:
        result = ingest_csv(taxi.data)
        info["source"] = taxi.data
        info["skipped_rows"] = result.skipped_rows
        info["gaps"] = [[ts.isoformat(), n] for ts, n in result.gaps]
        rows = result.rows
    else:
        assert taxi.synthetic_weeks is not None
        rows = synthetic_series(taxi.synthetic_weeks, seed=taxi.synthetic_seed)
        info["source"] = f"synthetic:{taxi.synthetic_weeks}w"
    require_contiguous(rows)
    if taxi.perturbations:
        rows = perturb(rows, taxi.perturbations)
    return rows, info


def _split_mape(forecasts, split_index: int, eval_after: int) -> dict:
    pre_err = pre_mass = post_err = post_mass = 0.0
    for f in forecasts:
        if f.target_index < eval_after:
            continue
        if f.target_index < split_index:
            pre_err += abs(f.actual - f.predicted)
            pre_mass += abs(f.actual)
        else:
            post_err += abs(f.actual - f.predicted)
            post_mass += abs(f.actual)
    return {
        "mape_pre": pre_err / pre_mass if pre_mass > 0 else None,
        "mape_post": post_err / post_mass if post_mass > 0 else None,
        "split_index": split_index,
    }


def _run_taxi(cfg: RunConfig, replica: int, records_path: Path | None) -> dict:
    taxi = cfg.taxi
    assert taxi is not None
    rows, info = _load_series(cfg)
    bundle = TaxiBundle.create(
        params=_tm_params(cfg, replica),
        value_range=(0.0, taxi.value_max),
        num_buckets=taxi.num_buckets,
        lookahead=taxi.lookahead,
        learning_rate=taxi.learning_rate,
        pooler_seed=taxi.pooler_seed,
    )
    writer = None
    if records_path is not None:
        writer = _RecordsWriter(records_path, {
            "config": cfg.resolved(), "replica": replica,
            "series": info, "format": f"seqmem-records/{__version__}",
        })
    on_record = None
    if writer is not None:
        on_record = lambda r: writer.write({"kind": "step", **r.to_dict()})  # noqa: E731
    try:
        result = run_taxi(bundle, rows, eval_after=taxi.eval_after,
                          mode=taxi.mode, on_record=on_record)
    finally:
        if writer is not None:
            writer.close()
    summary = {
        "task": "taxi",
        "bins": len(rows),
        "forecasts": len(result.forecasts),
        "eval_after": taxi.eval_after,
        "mape": result.mape,
        "nll": result.nll,
        **info,
    }
    if taxi.perturbations:
        start = min(w.start_date for w in taxi.perturbations)
        split = next((i for i, row in enumerate(rows)
                      if row.timestamp.date() >= start), len(rows))
        summary.update(_split_mape(result.forecasts, split, taxi.eval_after))
    return summary


def _execute(cfg: RunConfig, replica: int, records_path: Path | None,
             save_model: Path | None = None) -> dict:
    if cfg.task == "discrete":
        return _run_discrete(cfg, replica, records_path, save_model)
    return _run_taxi(cfg, replica, records_path)


def _replica_worker(config_data: dict, replica: int, records_path: str) -> dict:
    return _execute(parse_config(config_data), replica, Path(records_path))


def _aggregate(per_replica: list[dict]) -> dict:
    keys = [k for k, v in per_replica[0].items() if isinstance(v, (int, float))
            and not isinstance(v, bool)]
    out: dict = {}
    for key in keys:
        values = [r[key] for r in per_replica]
        if any(v is None or not isinstance(v, (int, float)) for v in values):
            continue
        out[key] = {
            "mean": statistics.fmean(values),
            "sd": statistics.stdev(values) if len(values) > 1 else 0.0,
        }
    return out


def cmd_run(args: argparse.Namespace) -> None:
    cfg = load_config(args.config)
    out = _out_dir(args)
    name = args.name
    save_model = Path(args.save_model) if args.save_model else None
    if args.replicas < 1:
        raise ConfigError(f"--replicas: must be >= 1, got {args.replicas}")
    if save_model is not None and args.replicas != 1:
        raise ConfigError("--save-model requires --replicas 1")
    if save_model is not None and cfg.task != "discrete":
        raise ConfigError("--save-model applies to discrete runs only")
    summary_path = out / f"{name}.summary.json"
    if args.replicas == 1:
        records_path = out / f"{name}.jsonl"
        summary = _execute(cfg, 0, records_path, save_model)
        payload = {"config": cfg.resolved(), "replicas": 1, **summary}
        print(f"wrote {records_path}")
    else:
        paths = [out / f"{name}.r{i}.jsonl" for i in range(args.replicas)]
        resolved = cfg.resolved()
        with ProcessPoolExecutor(max_workers=min(args.replicas,
                                                 os.cpu_count() or 1)) as pool:
            futures = [pool.submit(_replica_worker, resolved, i, str(paths[i]))
                       for i in range(args.replicas)]
            per_replica = [f.result() for f in futures]
        payload = {
            "config": cfg.resolved(),
            "replicas": args.replicas,
            "per_replica": per_replica,
            "aggregate": _aggregate(per_replica),
        }
        for path in paths:
            print(f"wrote {path}")
    summary_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    print(f"wrote {summary_path}")


def cmd_baseline(args: argparse.Namespace) -> None:
    cfg = load_config(args.config)
    if cfg.task != "taxi":
        raise ConfigError("baseline: config must have task 'taxi'")
    assert cfg.taxi is not None
    rows, info = _load_series(cfg)
    summary = baseline_summary(rows, lookahead=cfg.taxi.lookahead,
                               eval_after=cfg.taxi.eval_after)
    out = _out_dir(args)
    path = out / f"{args.name}.baseline.json"
    payload = {"config": cfg.resolved(), "series": info, **summary}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    for kind in ("naive", "seasonal"):
        value = summary[kind]["mape"]
        print(f"{kind}: mape={value:.4f}" if value is not None else f"{kind}: mape=n/a")
    print(f"wrote {path}")


def cmd_save(args: argparse.Namespace) -> None:
    cfg = load_config(args.config)
    if cfg.task != "discrete":
        raise ConfigError("save: only discrete runs can be snapshotted")
    _run_discrete(cfg, 0, None, save_model=Path(args.model))
    print(f"wrote {args.model}")


_IDENTITY_FIELDS = ("tm", "encoder", "seed")


def _check_resume(saved: dict, current: RunConfig) -> None:
    resolved = current.resolved()
    if saved.get("task") != "discrete" or current.task != "discrete":
        raise ConfigError("load: both snapshot and config must be discrete runs")
    for field in _IDENTITY_FIELDS:
        if saved.get(field) != resolved.get(field):
            raise ConfigError(
                f"load: config field {field!r} does not match the snapshot "
                f"({saved.get(field)} != {resolved.get(field)})")
    for field in ("datasets", "k"):
        if saved.get("discrete", {}).get(field) != resolved["discrete"].get(field):
            raise ConfigError(
                f"load: config field discrete.{field!r} does not match the "
                f"snapshot")


def cmd_load(args: argparse.Namespace) -> None:
    bundle, meta, runner = load_bundle(args.model)
    cfg = load_config(args.config)
    saved_cfg = meta.get("config", {})
    consumed = int(meta.get("elements_consumed", 0))
    _check_resume(saved_cfg, cfg)
    if cfg.num_elements < consumed:
        raise ConfigError(
            f"load: config num_elements {cfg.num_elements} is before the "
            f"snapshot position {consumed}")
    if runner is None:
        runner = DiscreteRunner(bundle)
    runner.k = cfg.k
    saved_kill = saved_cfg.get("discrete", {}).get("kill")
    kill = cfg.kill
    if kill is not None and kill.at < consumed:
        if saved_kill != kill.to_dict():
            raise ConfigError("load: kill schedule earlier than the snapshot "
                              "must match the snapshot's own")
        if kill.freeze:
            runner.learn = False
    elif saved_kill is not None and saved_kill["at"] < consumed:
        if saved_kill["freeze"]:
            runner.learn = False
    out = _out_dir(args)
    records_path = out / f"{args.name}.jsonl"
    writer = _RecordsWriter(records_path, {
        "config": cfg.resolved(), "replica": int(meta.get("replica", 0)),
        "stream_seed": cfg.seed, "resumed_from": str(args.model),
        "resumed_at": consumed, "format": f"seqmem-records/{__version__}",
    })
    elements = consumed
    scored = 0
    correct = 0
    last_ma = None
    try:
        for item in stream(_build_datasets(cfg), cfg.num_elements,
                           seed=cfg.seed, swap_at=cfg.swap_at,
                           corrupt_from=cfg.corrupt_from):
            if item.element_index < consumed:
                continue
            if kill is not None and item.element_index == kill.at:
                bundle.tm.kill_cells(kill.fraction, seed=kill.seed)
                if kill.freeze:
                    runner.learn = False
            record = runner.feed(item)
            elements += 1
            if record.correct is not None:
                scored += 1
                correct += int(record.correct)
                last_ma = record.accuracy_ma100
            writer.write({"kind": "step", **record.to_dict()})
    finally:
        writer.close()
    summary = {
        "task": "discrete",
        "resumed_from": str(args.model),
        "resumed_at": consumed,
        "elements": elements,
        "sequences_scored": scored,
        "accuracy_overall": (correct / scored) if scored else None,
        "accuracy_ma100": last_ma,
        "config": cfg.resolved(),
    }
    summary_path = out / f"{args.name}.summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    print(f"wrote {records_path}")
    print(f"wrote {summary_path}")


def cmd_gen(args: argparse.Namespace) -> None:
    out = _out_dir(args)
    if args.kind == "discrete":
        orders = args.order or [6, 7]
        datasets = [gen_dataset(order, args.endings, args.groups,
                                seed=args.seed + i)
                    for i, order in enumerate(orders)]
        path = Path(args.out) if args.out else out / "dataset.json"
        payload = {"datasets": [ds.to_dict() for ds in datasets]}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    else:
        rows = synthetic_series(args.weeks, seed=args.seed)
        path = Path(args.out) if args.out else out / "taxi.csv"
        write_csv(rows, path)
    print(f"wrote {path}")


def cmd_perturb(args: argparse.Namespace) -> None:
    result = ingest_csv(args.data)
    try:
        spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read spec {args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.spec}: invalid JSON: {exc}") from exc
    if not isinstance(spec, list):
        raise ConfigError(f"{args.spec}: expected a JSON list of windows")
    windows = [PerturbWindow.from_dict(entry) for entry in spec]
    rows = perturb(result.rows, windows)
    out = _out_dir(args)
    path = Path(args.out) if args.out else out / "perturbed.csv"
    write_csv(rows, path)
    if result.skipped_rows:
        print(f"skipped {result.skipped_rows} unparseable rows")
    if result.gaps:
        print(f"found {len(result.gaps)} gaps in the binned grid")
    print(f"wrote {path}")


def cmd_report(args: argparse.Namespace) -> None:
    from .plots import render_report

    out = _out_dir(args)
    for records in args.records:
        for path in render_report(records, out):
            print(f"wrote {path}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqmem",
        description="Sequence-memory experiments: datasets, runs, baselines, "
                    "snapshots, reports.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_out(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out-dir", default=None,
                       help=f"output directory (default: ${OUT_DIR_ENV} or .)")

    p_gen = sub.add_parser("gen", help="emit a dataset artifact")
    gen_sub = p_gen.add_subparsers(dest="kind", metavar="kind", required=True)
    g_disc = gen_sub.add_parser("discrete", help="high-order sequence dataset JSON")
    g_disc.add_argument("--order", type=int, action="append",
                        help="sequence order; repeat for a mixed corpus "
                             "(default: 6 and 7)")
    g_disc.add_argument("--endings", type=int, default=1,
                        help="endings per context (1, 2 or 4)")
    g_disc.add_argument("--groups", type=int, default=2,
                        help="shared-middle groups per order")
    g_disc.add_argument("--seed", type=int, default=0)
    g_disc.add_argument("--out", default=None, help="output JSON path")
    add_out(g_disc)
    g_disc.set_defaults(func=cmd_gen, kind="discrete")
    g_taxi = gen_sub.add_parser("taxi", help="synthetic demand CSV")
    g_taxi.add_argument("--weeks", type=float, required=True)
    g_taxi.add_argument("--seed", type=int, default=0)
    g_taxi.add_argument("--out", default=None, help="output CSV path")
    add_out(g_taxi)
    g_taxi.set_defaults(func=cmd_gen, kind="taxi")

    p_run = sub.add_parser("run", help="execute a configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--name", default="run",
                       help="stem for output files (default: run)")
    p_run.add_argument("--replicas", type=int, default=1,
                       help="seeded replicas run concurrently; summary "
                            "aggregates mean and standard deviation")
    p_run.add_argument("--save-model", default=None,
                       help="write a model snapshot at the end of the run")
    add_out(p_run)
    p_run.set_defaults(func=cmd_run)

    p_base = sub.add_parser("baseline",
                            help="naive + seasonal predictors on a demand series")
    p_base.add_argument("--config", required=True)
    p_base.add_argument("--name", default="run")
    add_out(p_base)
    p_base.set_defaults(func=cmd_baseline)

    p_save = sub.add_parser("save", help="train per config and snapshot the model")
    p_save.add_argument("--config", required=True)
    p_save.add_argument("--model", required=True, help="snapshot path (.npz)")
    add_out(p_save)
    p_save.set_defaults(func=cmd_save)

    p_load = sub.add_parser("load", help="resume a snapshotted run")
    p_load.add_argument("--config", required=True)
    p_load.add_argument("--model", required=True)
    p_load.add_argument("--name", default="resumed")
    add_out(p_load)
    p_load.set_defaults(func=cmd_load)

    p_pert = sub.add_parser("perturb", help="apply demand perturbations to a CSV")
    p_pert.add_argument("--data", required=True, help="input CSV")
    p_pert.add_argument("--spec", required=True,
                        help="JSON list of perturbation windows")
    p_pert.add_argument("--out", default=None, help="output CSV path")
    add_out(p_pert)
    p_pert.set_defaults(func=cmd_perturb)

    p_rep = sub.add_parser("report", help="render figures + CSV from run records")
    p_rep.add_argument("--records", required=True, nargs="+",
                       help="one or more run JSONL files")
    add_out(p_rep)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
