"""Whole-run persistence for discrete sequence experiments.

One .npz file holds the temporal memory image (segments, permanence
ticks, generator state, transient step state), the decoder's symbol
table in insertion order, the harness state, and a metadata block with
the resolved run config. Loading rebuilds the exact process: resuming a
saved run produces the same records as the run that never stopped.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .classifiers import SymbolTable
from .encoders import CategoryEncoder
from .errors import DataError
from .harness import DiscreteBundle, DiscreteRunner
from .temporal_memory import TemporalMemory, TmParams

__all__ = ["SNAPSHOT_VERSION", "save_bundle", "load_bundle"]

SNAPSHOT_VERSION = 1

_STATE_KEYS = ("active_columns", "active_cells", "winner_cells",
               "predictive_cells", "burst_columns", "active_segments",
               "matching_segments", "matching_potential")


def save_bundle(path: str | Path, bundle: DiscreteBundle, *,
                meta: dict | None = None,
                runner: DiscreteRunner | None = None) -> None:
    """Write bundle (+ optional harness state) to an .npz snapshot."""
    snap = bundle.tm.to_snapshot()
    harness_state: dict = {}
    if runner is not None:
        harness_state = {
            "window": list(runner.window),
            "pending": ([[s, int(o)] for s, o in runner.pending]
                        if runner.pending is not None else None),
        }
    arrays: dict[str, np.ndarray] = {
        "version": np.asarray(SNAPSHOT_VERSION, dtype=np.int64),
        "step": np.asarray(snap["step"], dtype=np.int64),
        "params_json": np.asarray(json.dumps(asdict(snap["params"]), sort_keys=True)),
        "rng_json": np.asarray(json.dumps(snap["rng_state"])),
        "dead_cells": snap["dead_cells"],
        "seg_owner": snap["seg_owner"],
        "seg_last_use": snap["seg_last_use"],
        "syn_indptr": snap["syn_indptr"],
        "syn_cell": snap["syn_cell"],
        "syn_perm": snap["syn_perm"],
        "state_step": np.asarray(snap["state"]["step"], dtype=np.int64),
        "symbols": np.asarray(bundle.table.symbols, dtype=np.str_),
        "encoder_json": np.asarray(json.dumps({
            "width": bundle.encoder.width,
            "num_active": bundle.encoder.num_active,
            "seed": bundle.encoder.seed,
        }, sort_keys=True)),
        "meta_json": np.asarray(json.dumps(meta or {}, sort_keys=True)),
        "harness_json": np.asarray(json.dumps(harness_state, sort_keys=True)),
    }
    for key in _STATE_KEYS:
        arrays[f"state_{key}"] = snap["state"][key]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.BytesIO()
    np.savez_compressed(buffer, **arrays)
    path.write_bytes(buffer.getvalue())


def load_bundle(path: str | Path) -> tuple[DiscreteBundle, dict, DiscreteRunner | None]:
    """Rebuild (bundle, meta, harness runner or None) from a snapshot.

    Version mismatch and structural damage both raise DataError before
    any state is constructed.
    """
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            files = set(data.files)
            if "version" not in files:
                raise DataError(f"{path}: not a model snapshot")
            version = int(data["version"])
            if version != SNAPSHOT_VERSION:
                raise DataError(
                    f"{path}: snapshot version {version} unsupported "
                    f"(expected {SNAPSHOT_VERSION})")
            loaded = {key: data[key] for key in files}
    except DataError:
        raise
    except (OSError, ValueError, KeyError, EOFError, zipfile.BadZipFile) as exc:
        raise DataError(f"{path}: cannot read snapshot: {exc}") from exc
    try:
        params = TmParams(**json.loads(str(loaded["params_json"])))
        snap = {
            "params": params,
            "step": int(loaded["step"]),
            "dead_cells": loaded["dead_cells"],
            "seg_owner": loaded["seg_owner"],
            "seg_last_use": loaded["seg_last_use"],
            "syn_indptr": loaded["syn_indptr"],
            "syn_cell": loaded["syn_cell"],
            "syn_perm": loaded["syn_perm"],
            "rng_state": json.loads(str(loaded["rng_json"])),
            "state": {"step": int(loaded["state_step"]),
                      **{key: loaded[f"state_{key}"] for key in _STATE_KEYS}},
        }
        tm = TemporalMemory.from_snapshot(snap)
        enc_cfg = json.loads(str(loaded["encoder_json"]))
        encoder = CategoryEncoder(width=int(enc_cfg["width"]),
                                  num_active=int(enc_cfg["num_active"]),
                                  seed=int(enc_cfg["seed"]))
        table = SymbolTable(encoder.width)
        for symbol in loaded["symbols"].tolist():
            table.observe(symbol, encoder.encode(symbol))
        meta = json.loads(str(loaded["meta_json"]))
        harness_state = json.loads(str(loaded["harness_json"]))
    except (KeyError, IndexError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: corrupted snapshot: {exc}") from exc
    bundle = DiscreteBundle(encoder, tm, table)
    runner = None
    if harness_state:
        runner = DiscreteRunner(
            bundle,
            window=harness_state.get("window") or (),
            pending=harness_state.get("pending"))
    return bundle, meta, runner
