"""Sparse-distributed sequence memory with an experiment lab.

The core engine is a columnar temporal memory over sparse distributed
representations: symbols or sensor readings become sparse codes, a
fixed spatial pooler maps them onto columns, and per-cell dendritic
segments learn transitions through Hebbian permanence updates. On top
sit two decoders (overlap voting for symbols, a softmax readout for
scalar buckets), stream generators for high-order sequence tasks, and a
CLI that runs, persists, and reports whole experiments.
"""

from .sdr import Sdr, SdrError, concatenate, overlap, random_sdr, union
from .seeding import derive_seed, rng_from
from .errors import ConfigError, DataError
from .encoders import (CategoryEncoder, DatetimeEncoder, EncoderError,
                       ScalarEncoder, SpatialPooler)
from .temporal_memory import (PERMANENCE_SCALE, TemporalMemory, TmError,
                              TmParams, TmState)
from .classifiers import (Bucketizer, ClassifierError, SoftmaxClassifier,
                          SymbolTable, point_prediction)
from .datasets import (Context, SequenceSet, StreamItem, corruption_positions,
                       gen_dataset, stream, swap_endings)
from .metrics import MetricAccumulator, MetricError, mape, moving_accuracy, nll
from .harness import (DiscreteBundle, DiscreteRunner, FaultResult,
                      ScoredForecast, StepRecord, TaxiBundle, TaxiRecord,
                      TaxiResult, end_accuracy, final_ma100, mixed_corpus,
                      run_discrete, run_fault_injection, run_taxi,
                      run_temporal_noise, trailing_mape)
from .timeseries import (PerturbWindow, TaxiRow, ingest_csv, perturb,
                         synthetic_series)
from .baselines import BaselineResult, baseline_summary, run_baseline
from .snapshot import SNAPSHOT_VERSION, load_bundle, save_bundle
from .config import RunConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "Sdr", "SdrError", "concatenate", "overlap", "random_sdr", "union",
    "derive_seed", "rng_from",
    "ConfigError", "DataError",
    "CategoryEncoder", "DatetimeEncoder", "EncoderError", "ScalarEncoder",
    "SpatialPooler",
    "PERMANENCE_SCALE", "TemporalMemory", "TmError", "TmParams", "TmState",
    "Bucketizer", "ClassifierError", "SoftmaxClassifier", "SymbolTable",
    "point_prediction",
    "Context", "SequenceSet", "StreamItem", "gen_dataset", "stream",
    "swap_endings",
    "corruption_positions",
    "MetricAccumulator", "MetricError", "mape", "moving_accuracy", "nll",
    "DiscreteBundle", "DiscreteRunner", "FaultResult", "ScoredForecast",
    "StepRecord", "TaxiBundle", "TaxiRecord", "TaxiResult", "end_accuracy",
    "final_ma100", "mixed_corpus", "run_discrete", "run_fault_injection",
    "run_taxi", "run_temporal_noise", "trailing_mape",
    "PerturbWindow", "TaxiRow", "ingest_csv", "perturb", "synthetic_series",
    "BaselineResult", "baseline_summary", "run_baseline",
    "SNAPSHOT_VERSION", "load_bundle", "save_bundle",
    "RunConfig", "load_config", "parse_config",
    "__version__",
]
