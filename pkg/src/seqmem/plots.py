"""Figure and table rendering for recorded runs.

Reads the JSONL a run wrote (header line + per-step records) and emits
PNG figures plus the same curves as plain CSV, so results can be
inspected without re-running anything.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from pathlib import Path

from .errors import DataError

__all__ = ["read_records", "render_report"]


def read_records(path: str | Path) -> tuple[dict, list[dict]]:
    """Parse one run file into (header, records)."""
    path = Path(path)
    header: dict | None = None
    records: list[dict] = []
    try:
        with path.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
                kind = row.get("kind")
                if kind == "header":
                    header = row
                elif kind == "step":
                    records.append(row)
                else:
                    raise DataError(f"{path}:{line_no}: unknown record kind {kind!r}")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise DataError(f"{path}: missing header line")
    return header, records


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def _render_discrete(stem: str, records: list[dict], out_dir: Path,
                     plt) -> list[Path]:
    points = [(r["element_index"], r["accuracy_ma100"]) for r in records
              if r.get("is_sequence_end") and r.get("accuracy_ma100") is not None]
    if not points:
        raise DataError("no scored sequence ends in records")
    rows = [{"element_index": e, "accuracy_ma100": a} for e, a in points]
    csv_path = out_dir / f"{stem}_accuracy.csv"
    _write_csv(csv_path, ["element_index", "accuracy_ma100"], rows)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot([e for e, _ in points], [a for _, a in points], lw=1.2)
    ax.set_xlabel("elements seen")
    ax.set_ylabel("accuracy (moving average, 100 sequences)")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    png_path = out_dir / f"{stem}_accuracy.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def _render_taxi(stem: str, records: list[dict], out_dir: Path,
                 plt, mape_window: int = 336) -> list[Path]:
    prediction_by_target = {r["target_index"]: r["prediction"] for r in records}
    joined = []
    for r in records:
        # the forecast targeting this bin was issued `lookahead` steps back
        predicted = prediction_by_target.get(r["index"])
        if predicted is not None:
            joined.append({"target_index": r["index"],
                           "timestamp": r["timestamp"],
                           "actual": r["value"],
                           "predicted": predicted})
    if not joined:
        raise DataError("no resolvable forecasts in records")

    err = 0.0
    mass = 0.0
    buf: deque[tuple[float, float]] = deque()
    for row in joined:
        buf.append((abs(row["actual"] - row["predicted"]), abs(row["actual"])))
        err += buf[-1][0]
        mass += buf[-1][1]
        if len(buf) > mape_window:
            e, a = buf.popleft()
            err -= e
            mass -= a
        row["trailing_mape"] = err / mass if mass > 0 else ""

    csv_path = out_dir / f"{stem}_forecasts.csv"
    _write_csv(csv_path, ["target_index", "timestamp", "actual", "predicted",
                          "trailing_mape"], joined)

    fig, axes = plt.subplots(2, 1, figsize=(10, 7), sharex=True)
    xs = [row["target_index"] for row in joined]
    axes[0].plot(xs, [row["actual"] for row in joined], lw=0.8, label="actual")
    axes[0].plot(xs, [row["predicted"] for row in joined], lw=0.8,
                 alpha=0.8, label="predicted")
    axes[0].set_ylabel("passengers per 30 min")
    axes[0].legend(loc="upper right")
    axes[0].grid(True, alpha=0.3)
    mape_rows = [(row["target_index"], row["trailing_mape"])
                 for row in joined if row["trailing_mape"] != ""]
    axes[1].plot([x for x, _ in mape_rows], [m for _, m in mape_rows], lw=1.0)
    axes[1].set_xlabel("bin index")
    axes[1].set_ylabel(f"MAPE (trailing {mape_window} bins)")
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    png_path = out_dir / f"{stem}_forecast.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def render_report(records_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render one run file to figures + CSV; returns the written paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    records_path = Path(records_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header, records = read_records(records_path)
    if not records:
        raise DataError(f"{records_path}: no step records")
    task = header.get("config", {}).get("task")
    stem = records_path.stem
    if task == "discrete":
        return _render_discrete(stem, records, out_dir, plt)
    if task == "taxi":
        return _render_taxi(stem, records, out_dir, plt)
    raise DataError(f"{records_path}: unknown task {task!r} in header")
