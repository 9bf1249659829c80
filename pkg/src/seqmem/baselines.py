"""Reference predictors for the demand task.

Both answer the same question as the learned model: what will demand be
`lookahead` bins from now? The naive predictor repeats the current
value; the seasonal predictor repeats the value from exactly one week
before the target bin.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from datetime import datetime

from .errors import DataError
from .harness import ScoredForecast

__all__ = ["SEASONAL_LAG", "BaselineResult", "run_baseline", "baseline_summary"]

# one week of 30-minute bins
SEASONAL_LAG = 336


@dataclass(frozen=True)
class BaselineResult:
    kind: str
    forecasts: list[ScoredForecast]
    mape: float | None


def run_baseline(series: Sequence[tuple[datetime, float]], kind: str, *,
                 lookahead: int = 5, season: int = SEASONAL_LAG,
                 eval_after: int = 0) -> BaselineResult:
    """Score one baseline over the series.

    naive: the forecast for target t (issued at t - lookahead) is the
    value at t - lookahead. seasonal: the forecast for target t is the
    value at t - season; needs at least one season of history.
    """
    if kind not in ("naive", "seasonal"):
        raise DataError(f"unknown baseline kind {kind!r}")
    lag = lookahead if kind == "naive" else season
    if kind == "seasonal" and len(series) <= season:
        raise DataError(
            f"series of {len(series)} bins is shorter than the seasonal "
            f"lag of {season}")
    forecasts: list[ScoredForecast] = []
    abs_err = 0.0
    abs_y = 0.0
    for target in range(lag, len(series)):
        actual = float(series[target][1])
        predicted = float(series[target - lag][1])
        forecasts.append(ScoredForecast(target, actual, predicted, float("nan")))
        if target >= eval_after:
            abs_err += abs(actual - predicted)
            abs_y += abs(actual)
    mape = abs_err / abs_y if abs_y > 0 else None
    return BaselineResult(kind, forecasts, mape)


def baseline_summary(series: Sequence[tuple[datetime, float]], *,
                     lookahead: int = 5, season: int = SEASONAL_LAG,
                     eval_after: int = 0) -> dict:
    """MAPE of both baselines in one summary-ready mapping."""
    out: dict = {}
    for kind in ("naive", "seasonal"):
        result = run_baseline(series, kind, lookahead=lookahead,
                              season=season, eval_after=eval_after)
        out[kind] = {"mape": result.mape, "forecasts": len(result.forecasts)}
    return out
