"""Declarative run configuration.

A config file is a JSON object that fully determines a run. Validation
reports the exact field path of the first problem (e.g.
"taxi.perturbations[1].factor"), and the resolved config (every default
filled in) is echoed into run outputs so any result file is
self-describing.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .temporal_memory import TmParams
from .timeseries import PerturbWindow

__all__ = ["DatasetSpec", "KillSpec", "TaxiSpec", "RunConfig", "load_config"]

_MISSING = object()


class _Reader:
    """Mapping walker that tracks the dotted path for error messages."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or '<root>'}: expected an object, "
                              f"got {type(data).__name__}")
        self.data = data
        self.path = path
        self.seen: set[str] = set()

    def _at(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def get(self, key: str, kind: type | tuple[type, ...], default: Any = _MISSING,
            allow_none: bool = False) -> Any:
        self.seen.add(key)
        if key not in self.data:
            if default is _MISSING:
                raise ConfigError(f"{self._at(key)}: required field missing")
            return default
        value = self.data[key]
        if value is None and allow_none:
            return None
        # bool is an int subclass; keep the two apart in configs
        if isinstance(value, bool) and kind is not bool and bool not in (
                kind if isinstance(kind, tuple) else (kind,)):
            raise ConfigError(f"{self._at(key)}: expected {_kind_name(kind)}, got bool")
        if not isinstance(value, kind):
            raise ConfigError(f"{self._at(key)}: expected {_kind_name(kind)}, "
                              f"got {type(value).__name__}")
        return value

    def child(self, key: str, default: Any = _MISSING) -> "_Reader | None":
        self.seen.add(key)
        if key not in self.data or self.data[key] is None:
            if default is _MISSING:
                raise ConfigError(f"{self._at(key)}: required section missing")
            return None
        return _Reader(self.data[key], self._at(key))

    def finish(self) -> None:
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ConfigError(f"{self._at(unknown[0])}: unknown field")


def _kind_name(kind: type | tuple[type, ...]) -> str:
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


@dataclass(frozen=True)
class DatasetSpec:
    order: int
    endings: int = 1
    groups: int = 2
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class KillSpec:
    """Mid-run cell death: kill at one element, optionally freeze learning."""

    at: int
    fraction: float
    seed: int = 0
    freeze: bool = True

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class TaxiSpec:
    data: str | None = None
    synthetic_weeks: float | None = None
    synthetic_seed: int = 0
    eval_after: int = 0
    lookahead: int = 5
    num_buckets: int = 22
    value_max: float = 40_000.0
    learning_rate: float = 0.001
    mode: str = "argmax"
    pooler_seed: int = 0
    perturbations: tuple[PerturbWindow, ...] = ()

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["perturbations"] = [w.to_dict() for w in self.perturbations]
        return out


@dataclass(frozen=True)
class RunConfig:
    task: str
    seed: int
    tm: TmParams
    encoder_bits: int
    encoder_seed: int
    num_elements: int = 0
    datasets: tuple[DatasetSpec, ...] = ()
    k: int | None = None
    swap_at: int | None = None
    corrupt_from: int | None = None
    kill: KillSpec | None = None
    taxi: TaxiSpec | None = None

    def resolved(self) -> dict:
        """Full config with every default made explicit, ready to echo."""
        out: dict = {
            "task": self.task,
            "seed": self.seed,
            "tm": dataclasses.asdict(self.tm),
            "encoder": {"bits": self.encoder_bits, "seed": self.encoder_seed},
        }
        if self.task == "discrete":
            out["discrete"] = {
                "num_elements": self.num_elements,
                "datasets": [d.to_dict() for d in self.datasets],
                "k": self.k,
                "swap_at": self.swap_at,
                "corrupt_from": self.corrupt_from,
                "kill": self.kill.to_dict() if self.kill else None,
            }
        else:
            assert self.taxi is not None
            out["taxi"] = self.taxi.to_dict()
        return out


def _parse_tm(reader: _Reader | None, seed: int) -> TmParams:
    overrides: dict[str, Any] = {}
    if reader is not None:
        valid = {f.name for f in dataclasses.fields(TmParams)}
        for key, value in reader.data.items():
            if key not in valid:
                raise ConfigError(f"{reader._at(key)}: unknown field")
            overrides[key] = value
    overrides.setdefault("seed", seed)
    try:
        return TmParams(**overrides)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"tm: {exc}") from exc


def _parse_dataset(reader: _Reader, default_seed: int) -> DatasetSpec:
    spec = DatasetSpec(
        order=reader.get("order", int),
        endings=reader.get("endings", int, 1),
        groups=reader.get("groups", int, 2),
        seed=reader.get("seed", int, default_seed),
    )
    reader.finish()
    if spec.order < 2:
        raise ConfigError(f"{reader.path}.order: must be >= 2, got {spec.order}")
    if spec.endings not in (1, 2, 4):
        raise ConfigError(f"{reader.path}.endings: must be 1, 2 or 4, got {spec.endings}")
    if spec.groups < 1:
        raise ConfigError(f"{reader.path}.groups: must be >= 1, got {spec.groups}")
    return spec


def _parse_discrete(config: _Reader, seed: int) -> dict:
    section = config.child("discrete")
    assert section is not None
    raw_datasets = section.get("datasets", list)
    if not raw_datasets:
        raise ConfigError("discrete.datasets: must not be empty")
    datasets = []
    for i, entry in enumerate(raw_datasets):
        datasets.append(_parse_dataset(
            _Reader(entry, f"discrete.datasets[{i}]"), default_seed=seed + i))
    num_elements = section.get("num_elements", int)
    if num_elements <= 0:
        raise ConfigError(f"discrete.num_elements: must be positive, got {num_elements}")
    k = section.get("k", int, None, allow_none=True)
    if k is not None and k < 1:
        raise ConfigError(f"discrete.k: must be >= 1, got {k}")
    swap_at = section.get("swap_at", int, None, allow_none=True)
    corrupt_from = section.get("corrupt_from", int, None, allow_none=True)
    kill = None
    kill_reader = section.child("kill", None)
    if kill_reader is not None:
        kill = KillSpec(
            at=kill_reader.get("at", int),
            fraction=kill_reader.get("fraction", (int, float)),
            seed=kill_reader.get("seed", int, 0),
            freeze=kill_reader.get("freeze", bool, True),
        )
        kill_reader.finish()
        if not 0.0 <= kill.fraction <= 1.0:
            raise ConfigError(f"discrete.kill.fraction: must lie in [0, 1], "
                              f"got {kill.fraction}")
    section.finish()
    return {"num_elements": num_elements, "datasets": tuple(datasets), "k": k,
            "swap_at": swap_at, "corrupt_from": corrupt_from, "kill": kill}


def _parse_taxi(config: _Reader) -> TaxiSpec:
    section = config.child("taxi")
    assert section is not None
    data = section.get("data", str, None, allow_none=True)
    weeks = section.get("synthetic_weeks", (int, float), None, allow_none=True)
    if (data is None) == (weeks is None):
        raise ConfigError("taxi: exactly one of 'data' and 'synthetic_weeks' "
                          "must be set")
    mode = section.get("mode", str, "argmax")
    if mode not in ("argmax", "expectation"):
        raise ConfigError(f"taxi.mode: must be 'argmax' or 'expectation', got {mode!r}")
    perturbations: list[PerturbWindow] = []
    raw = section.get("perturbations", list, [])
    for i, entry in enumerate(raw):
        reader = _Reader(entry, f"taxi.perturbations[{i}]")
        try:
            perturbations.append(PerturbWindow.from_dict(reader.data))
        except Exception as exc:
            raise ConfigError(f"taxi.perturbations[{i}]: {exc}") from exc
    spec = TaxiSpec(
        data=data,
        synthetic_weeks=float(weeks) if weeks is not None else None,
        synthetic_seed=section.get("synthetic_seed", int, 0),
        eval_after=section.get("eval_after", int, 0),
        lookahead=section.get("lookahead", int, 5),
        num_buckets=section.get("num_buckets", int, 22),
        value_max=float(section.get("value_max", (int, float), 40_000.0)),
        learning_rate=float(section.get("learning_rate", (int, float), 0.001)),
        mode=mode,
        pooler_seed=section.get("pooler_seed", int, 0),
        perturbations=tuple(perturbations),
    )
    section.finish()
    if spec.synthetic_weeks is not None and spec.synthetic_weeks <= 0:
        raise ConfigError("taxi.synthetic_weeks: must be positive")
    if spec.lookahead < 1:
        raise ConfigError(f"taxi.lookahead: must be >= 1, got {spec.lookahead}")
    if spec.num_buckets < 2:
        raise ConfigError(f"taxi.num_buckets: must be >= 2, got {spec.num_buckets}")
    if spec.eval_after < 0:
        raise ConfigError(f"taxi.eval_after: must be >= 0, got {spec.eval_after}")
    return spec


def parse_config(data: Any) -> RunConfig:
    config = _Reader(data, "")
    task = config.get("task", str)
    if task not in ("discrete", "taxi"):
        raise ConfigError(f"task: must be 'discrete' or 'taxi', got {task!r}")
    seed = config.get("seed", int, 0)
    tm = _parse_tm(config.child("tm", None), seed)
    encoder = config.child("encoder", None)
    encoder_bits = 40
    encoder_seed = 0
    if encoder is not None:
        encoder_bits = encoder.get("bits", int, 40)
        encoder_seed = encoder.get("seed", int, 0)
        encoder.finish()
        if not 0 < encoder_bits <= tm.num_columns:
            raise ConfigError(f"encoder.bits: out of range for "
                              f"{tm.num_columns} columns, got {encoder_bits}")
    if task == "discrete":
        fields = _parse_discrete(config, seed)
        config.finish()
        return RunConfig(task=task, seed=seed, tm=tm,
                         encoder_bits=encoder_bits, encoder_seed=encoder_seed,
                         **fields)
    taxi = _parse_taxi(config)
    config.finish()
    return RunConfig(task=task, seed=seed, tm=tm, encoder_bits=encoder_bits,
                     encoder_seed=encoder_seed, taxi=taxi)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(data)
