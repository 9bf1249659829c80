"""Experiment orchestration: discrete sequence runs and the demand task.

Every run is a single-threaded deterministic loop that emits one record
per stream element. Prediction is strictly online: the top-K guess for a
sequence ending is captured right after the penultimate element is
stepped, before the model ever sees the ending itself, and the demand
task scores each forecast only when its target step arrives.
"""

from __future__ import annotations

import copy
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .classifiers import Bucketizer, SoftmaxClassifier, SymbolTable, point_prediction
from .datasets import SequenceSet, StreamItem, gen_dataset, stream
from .encoders import CategoryEncoder, DatetimeEncoder, ScalarEncoder, SpatialPooler
from .sdr import Sdr, concatenate
from .temporal_memory import TemporalMemory, TmParams

__all__ = [
    "StepRecord",
    "DiscreteBundle",
    "DiscreteRunner",
    "mixed_corpus",
    "run_discrete",
    "run_temporal_noise",
    "FaultResult",
    "run_fault_injection",
    "TaxiRecord",
    "TaxiResult",
    "TaxiBundle",
    "run_taxi",
    "end_accuracy",
    "final_ma100",
    "trailing_mape",
]

ACCURACY_WINDOW = 100


@dataclass(frozen=True)
class StepRecord:
    """One stream element as the model saw it.

    `predictions` and `correct` are populated only on sequence-end
    records and reflect the top-K query made at the penultimate element.
    """

    element_index: int
    symbol: str
    is_noise: bool
    is_sequence_end: bool
    predictions: tuple[tuple[str, int], ...] = ()
    correct: bool | None = None
    accuracy_ma100: float | None = None

    def to_dict(self) -> dict:
        return {
            "element_index": self.element_index,
            "symbol": self.symbol,
            "is_noise": self.is_noise,
            "is_sequence_end": self.is_sequence_end,
            "predictions": [[s, int(o)] for s, o in self.predictions],
            "correct": self.correct,
            "accuracy_ma100": self.accuracy_ma100,
        }


@dataclass
class DiscreteBundle:
    """Symbol encoder + temporal memory + overlap decoder for one run."""

    encoder: CategoryEncoder
    tm: TemporalMemory
    table: SymbolTable

    @classmethod
    def create(cls, params: TmParams | None = None,
               encoder_seed: int = 0, encoder_bits: int = 40) -> "DiscreteBundle":
        params = params if params is not None else TmParams()
        encoder = CategoryEncoder(width=params.num_columns,
                                  num_active=encoder_bits, seed=encoder_seed)
        return cls(encoder, TemporalMemory(params), SymbolTable(params.num_columns))

    def clone(self) -> "DiscreteBundle":
        return copy.deepcopy(self)


def mixed_corpus(num_endings: int = 1, seed: int = 0) -> list[SequenceSet]:
    """Benchmark corpus: four order-6 plus four order-7 contexts."""
    return [gen_dataset(6, num_endings, 2, seed=seed),
            gen_dataset(7, num_endings, 2, seed=seed + 1)]


class DiscreteRunner:
    """Feeds stream items to a bundle one at a time.

    Holds the between-element harness state (trailing accuracy window,
    the not-yet-scored top-K guess) so a run can stop after any element,
    be persisted, and continue exactly where it left off.
    """

    def __init__(self, bundle: DiscreteBundle, *, k: int | None = None,
                 learn: bool = True,
                 window: Sequence[int] | None = None,
                 pending: Sequence[tuple[str, int]] | None = None) -> None:
        self.bundle = bundle
        self.k = k
        self.learn = learn
        self.window: deque[int] = deque(window or ())
        if len(self.window) > ACCURACY_WINDOW:
            raise ValueError("accuracy window longer than its capacity")
        self._window_sum = sum(self.window)
        self.pending: tuple[tuple[str, int], ...] | None = (
            tuple((s, int(o)) for s, o in pending) if pending is not None else None)

    def feed(self, item: StreamItem) -> StepRecord:
        bundle = self.bundle
        code = bundle.encoder.encode(item.symbol)
        bundle.table.observe(item.symbol, code)
        bundle.tm.step(code, learn=self.learn)
        predictions: tuple[tuple[str, int], ...] = ()
        correct: bool | None = None
        ma: float | None = None
        if item.is_last and self.pending is not None:
            predictions = self.pending
            correct = item.symbol in [s for s, _ in predictions]
            self.window.append(1 if correct else 0)
            self._window_sum += self.window[-1]
            if len(self.window) > ACCURACY_WINDOW:
                self._window_sum -= self.window.popleft()
            ma = self._window_sum / len(self.window)
        self.pending = None
        if item.is_penultimate:
            want = self.k if self.k is not None else max(1, len(item.possible_endings))
            self.pending = tuple(
                bundle.table.classify_topk(bundle.tm.predicted_columns(), want))
        return StepRecord(item.element_index, item.symbol, item.is_noise,
                          item.is_last, predictions, correct, ma)


def _run_items(bundle: DiscreteBundle, items, *, k: int | None,
               learn: bool, on_record: Callable[[StepRecord], None] | None,
               runner: DiscreteRunner | None = None) -> list[StepRecord]:
    if runner is None:
        runner = DiscreteRunner(bundle, k=k, learn=learn)
    records: list[StepRecord] = []
    for item in items:
        record = runner.feed(item)
        records.append(record)
        if on_record is not None:
            on_record(record)
    return records


def run_discrete(bundle: DiscreteBundle,
                 datasets: SequenceSet | Sequence[SequenceSet],
                 num_elements: int, *, seed: int = 0, k: int | None = None,
                 swap_at: int | None = None, corrupt_from: int | None = None,
                 learn: bool = True,
                 on_record: Callable[[StepRecord], None] | None = None,
                 skip_elements: int = 0,
                 runner: DiscreteRunner | None = None) -> list[StepRecord]:
    """Continuous online run over a noisy sequence stream.

    k=None queries as many predictions as the context has endings.
    Learning never pauses and sequence boundaries are not signalled to
    the model. skip_elements fast-forwards the deterministic stream
    without feeding the model, for resuming a persisted run.
    """
    items = stream(datasets, num_elements, seed=seed,
                   swap_at=swap_at, corrupt_from=corrupt_from)
    if skip_elements:
        items = (item for item in items if item.element_index >= skip_elements)
    return _run_items(bundle, items, k=k, learn=learn, on_record=on_record,
                      runner=runner)


def run_temporal_noise(bundle: DiscreteBundle,
                       datasets: SequenceSet | Sequence[SequenceSet],
                       num_elements: int, *, seed: int = 0, k: int | None = None,
                       corrupt_from: int = 0,
                       on_record: Callable[[StepRecord], None] | None = None) -> list[StepRecord]:
    """Run with one mid-sequence element replaced by fresh noise.

    corrupt_from=0 corrupts every sequence from the start; a positive
    value leaves sequences clean until that element index.
    """
    return run_discrete(bundle, datasets, num_elements, seed=seed, k=k,
                        corrupt_from=corrupt_from, on_record=on_record)


@dataclass(frozen=True)
class FaultResult:
    """Eval accuracy of an intact model and of damaged copies of it."""

    baseline_accuracy: float
    accuracy_by_fraction: dict[float, float]
    killed_by_fraction: dict[float, int]

    def drop(self, fraction: float) -> float:
        return self.baseline_accuracy - self.accuracy_by_fraction[fraction]


def _scored_accuracy(records: Sequence[StepRecord]) -> float:
    flags = [r.correct for r in records if r.correct is not None]
    if not flags:
        raise ValueError("no scored sequence ends in run")
    return sum(flags) / len(flags)


def run_fault_injection(datasets: SequenceSet | Sequence[SequenceSet],
                        fractions: Sequence[float], *,
                        params: TmParams | None = None,
                        train_elements: int = 10_000, eval_elements: int = 5_000,
                        seed: int = 0, kill_seed: int = 0,
                        bundle: DiscreteBundle | None = None) -> FaultResult:
    """Train once, then measure frozen-model accuracy after cell death.

    Each fraction gets an independent deep copy of the trained model;
    all copies (and the intact baseline) replay the identical held-out
    segment with learning off, so the only varying factor is damage.
    """
    if bundle is None:
        bundle = DiscreteBundle.create(params)
    items = list(stream(datasets, train_elements + eval_elements, seed=seed))
    _run_items(bundle, items[:train_elements], k=None, learn=True, on_record=None)
    eval_items = items[train_elements:]

    baseline = bundle.clone()
    base_records = _run_items(baseline, eval_items, k=None, learn=False, on_record=None)
    base_acc = _scored_accuracy(base_records)

    by_fraction: dict[float, float] = {}
    killed: dict[float, int] = {}
    for i, fraction in enumerate(fractions):
        damaged = bundle.clone()
        killed[fraction] = damaged.tm.kill_cells(fraction, seed=kill_seed + i)
        records = _run_items(damaged, eval_items, k=None, learn=False, on_record=None)
        by_fraction[fraction] = _scored_accuracy(records)
    return FaultResult(base_acc, by_fraction, killed)


def end_accuracy(records: Sequence[StepRecord]) -> list[tuple[int, float]]:
    """(element_index, moving accuracy) at each scored sequence end."""
    return [(r.element_index, r.accuracy_ma100) for r in records
            if r.is_sequence_end and r.accuracy_ma100 is not None]


def final_ma100(records: Sequence[StepRecord]) -> float | None:
    for r in reversed(records):
        if r.accuracy_ma100 is not None:
            return r.accuracy_ma100
    return None


# --- continuous demand task -------------------------------------------------


@dataclass(frozen=True)
class TaxiRecord:
    """One observed step plus the forecast issued from it."""

    index: int
    timestamp: datetime
    value: float
    target_index: int
    prediction: float
    probabilities: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "timestamp": self.timestamp.isoformat(),
            "value": self.value,
            "target_index": self.target_index,
            "prediction": self.prediction,
            "probabilities": list(self.probabilities),
        }


@dataclass(frozen=True)
class ScoredForecast:
    """A forecast joined with its realized target."""

    target_index: int
    actual: float
    predicted: float
    probability: float


@dataclass
class TaxiResult:
    records: list[TaxiRecord]
    forecasts: list[ScoredForecast]
    mape: float | None
    nll: float | None


@dataclass
class TaxiBundle:
    """Encoders, pooler, memory and decoder for the demand stream."""

    value_encoder: ScalarEncoder
    time_encoder: DatetimeEncoder
    pooler: SpatialPooler
    tm: TemporalMemory
    bucketizer: Bucketizer
    classifier: SoftmaxClassifier
    lookahead: int

    @classmethod
    def create(cls, *, params: TmParams | None = None,
               value_range: tuple[float, float] = (0.0, 40_000.0),
               value_width: int = 400, value_bits: int = 21,
               num_buckets: int = 22, lookahead: int = 5,
               learning_rate: float = 0.001, pooler_seed: int = 0) -> "TaxiBundle":
        params = params if params is not None else TmParams()
        if lookahead < 1:
            raise ValueError(f"lookahead must be >= 1, got {lookahead}")
        value_encoder = ScalarEncoder(value_range[0], value_range[1],
                                      value_width, value_bits)
        time_encoder = DatetimeEncoder()
        input_width = (value_width + time_encoder.time_of_day.width
                       + time_encoder.day_of_week.width)
        pooler = SpatialPooler(input_width, num_columns=params.num_columns,
                               num_active_columns=40, seed=pooler_seed)
        bucketizer = Bucketizer(value_range[0], value_range[1], num_buckets)
        classifier = SoftmaxClassifier(params.num_cells, num_buckets,
                                       learning_rate=learning_rate,
                                       lookahead=lookahead)
        return cls(value_encoder, time_encoder, pooler, TemporalMemory(params),
                   bucketizer, classifier, lookahead)

    def encode(self, when: datetime, value: float) -> Sdr:
        tod, dow = self.time_encoder.encode(when)
        return self.pooler.pool(concatenate([self.value_encoder.encode(value), tod, dow]))

    def clone(self) -> "TaxiBundle":
        return copy.deepcopy(self)


def run_taxi(bundle: TaxiBundle,
             series: Sequence[tuple[datetime, float]], *,
             eval_after: int = 0, mode: str = "argmax", learn: bool = True,
             on_record: Callable[[TaxiRecord], None] | None = None) -> TaxiResult:
    """One-pass online forecasting `lookahead` steps ahead.

    Each step encodes the observation, advances the memory, reads a
    bucket distribution off the active cells, and trains the classifier
    on the truth that just arrived for the forecast issued `lookahead`
    steps ago. Forecasts whose target lands at index >= eval_after feed
    the summary MAPE and NLL.
    """
    centers = bundle.bucketizer.centers
    num_cells = bundle.tm.params.num_cells
    records: list[TaxiRecord] = []
    forecasts: list[ScoredForecast] = []
    pending: deque[tuple[int, float, np.ndarray]] = deque()
    abs_err = 0.0
    abs_y = 0.0
    log_p = 0.0
    scored_eval = 0
    for index, (when, value) in enumerate(series):
        value = float(value)
        columns = bundle.encode(when, value)
        bundle.tm.step(columns, learn=learn)
        active = Sdr(num_cells, bundle.tm.state.active_cells)
        probs = bundle.classifier.infer(active)
        prediction = point_prediction(probs, centers, mode=mode)
        if learn:
            bundle.classifier.train(active, bundle.bucketizer.bucket(value))
        while pending and pending[0][0] <= index:
            target, predicted, dist = pending.popleft()
            p_true = float(dist[bundle.bucketizer.bucket(value)])
            forecasts.append(ScoredForecast(target, value, predicted, p_true))
            if target >= eval_after:
                abs_err += abs(value - predicted)
                abs_y += abs(value)
                log_p += np.log(max(p_true, 1e-10))
                scored_eval += 1
        pending.append((index + bundle.lookahead, prediction, probs))
        record = TaxiRecord(index, when, value, index + bundle.lookahead,
                            float(prediction), tuple(float(p) for p in probs))
        records.append(record)
        if on_record is not None:
            on_record(record)
    mape_val = abs_err / abs_y if scored_eval and abs_y > 0 else None
    nll_val = -log_p / scored_eval if scored_eval else None
    return TaxiResult(records, forecasts, mape_val, nll_val)


def trailing_mape(forecasts: Sequence[ScoredForecast],
                  window: int = 336) -> list[tuple[int, float]]:
    """MAPE over the trailing `window` scored forecasts at each target."""
    out: list[tuple[int, float]] = []
    buf: deque[tuple[float, float]] = deque()
    err = 0.0
    mass = 0.0
    for f in forecasts:
        buf.append((abs(f.actual - f.predicted), abs(f.actual)))
        err += buf[-1][0]
        mass += buf[-1][1]
        if len(buf) > window:
            e, a = buf.popleft()
            err -= e
            mass -= a
        if mass > 0:
            out.append((f.target_index, err / mass))
    return out
