"""Error metrics and accuracy aggregation.

MAPE here is the ratio form sum|y - yhat| / sum|y|, not the usual
per-point percentage average. NLL uses the natural log and floors
probabilities at 1e-10 so a confident miss stays finite.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
import math

__all__ = [
    "MetricError",
    "PROB_FLOOR",
    "mape",
    "nll",
    "moving_accuracy",
    "MetricAccumulator",
]

PROB_FLOOR = 1e-10


class MetricError(ValueError):
    """Raised when a metric is fed values outside its domain."""


def mape(y: Sequence[float], yhat: Sequence[float]) -> float:
    """Ratio-form mean absolute percentage error: sum|y-yhat| / sum|y|."""
    if len(y) != len(yhat):
        raise MetricError(f"length mismatch: {len(y)} vs {len(yhat)}")
    if len(y) == 0:
        raise MetricError("empty series")
    num = 0.0
    den = 0.0
    for a, b in zip(y, yhat):
        num += abs(float(a) - float(b))
        den += abs(float(a))
    if den == 0.0:
        raise MetricError("all-zero reference series")
    return num / den


def nll(probs: Iterable[float]) -> float:
    """Mean negative log-likelihood of the realized outcomes.

    Each p is the probability the model assigned to what actually
    happened. Zeros are floored at PROB_FLOOR; p outside [0, 1] is an
    error.
    """
    total = 0.0
    count = 0
    for p in probs:
        p = float(p)
        if p < 0.0 or p > 1.0:
            raise MetricError(f"probability out of range: {p}")
        total += math.log(max(p, PROB_FLOOR))
        count += 1
    if count == 0:
        raise MetricError("empty probability series")
    return -total / count


def moving_accuracy(
    correct: Sequence[bool | int], window: int = 100
) -> list[float]:
    """Trailing-window mean of a correctness series.

    Before the window fills, the mean over the available prefix is
    reported rather than nothing.
    """
    if window <= 0:
        raise MetricError(f"window must be positive, got {window}")
    out: list[float] = []
    acc = 0
    buf: deque[int] = deque()
    for c in correct:
        v = 1 if c else 0
        buf.append(v)
        acc += v
        if len(buf) > window:
            acc -= buf.popleft()
        out.append(acc / len(buf))
    return out


class MetricAccumulator:
    """Streaming MAPE/NLL/accuracy with optional trailing windows.

    The full-history values and every requested trailing window are
    maintained in one pass; snapshots are plain value copies.
    """

    def __init__(self, window: int | None = None) -> None:
        if window is not None and window <= 0:
            raise MetricError(f"window must be positive, got {window}")
        self._window = window
        self._abs_err = 0.0
        self._abs_y = 0.0
        self._log_p = 0.0
        self._nll_count = 0
        self._correct = 0
        self._count = 0
        # ring buffers for the windowed variants
        self._err_buf: deque[tuple[float, float]] = deque()
        self._p_buf: deque[float] = deque()
        self._acc_buf: deque[int] = deque()
        self._w_abs_err = 0.0
        self._w_abs_y = 0.0
        self._w_log_p = 0.0
        self._w_correct = 0

    @property
    def count(self) -> int:
        return self._count

    def add_point(self, y: float, yhat: float, p: float | None = None) -> None:
        """Ingest one forecast record; p is the probability assigned to y."""
        y = float(y)
        yhat = float(yhat)
        self._abs_err += abs(y - yhat)
        self._abs_y += abs(y)
        self._count += 1
        if p is not None:
            p = float(p)
            if p < 0.0 or p > 1.0:
                raise MetricError(f"probability out of range: {p}")
            self._log_p += math.log(max(p, PROB_FLOOR))
            self._nll_count += 1
        if self._window is not None:
            self._err_buf.append((abs(y - yhat), abs(y)))
            self._w_abs_err += abs(y - yhat)
            self._w_abs_y += abs(y)
            if len(self._err_buf) > self._window:
                e, a = self._err_buf.popleft()
                self._w_abs_err -= e
                self._w_abs_y -= a
            if p is not None:
                self._p_buf.append(math.log(max(p, PROB_FLOOR)))
                self._w_log_p += self._p_buf[-1]
                if len(self._p_buf) > self._window:
                    self._w_log_p -= self._p_buf.popleft()

    def add_flag(self, correct: bool) -> None:
        """Ingest one classification-correctness flag."""
        v = 1 if correct else 0
        self._correct += v
        self._count += 1
        if self._window is not None:
            self._acc_buf.append(v)
            self._w_correct += v
            if len(self._acc_buf) > self._window:
                self._w_correct -= self._acc_buf.popleft()

    def mape(self) -> float:
        if self._abs_y == 0.0:
            raise MetricError("no mass in reference series")
        return self._abs_err / self._abs_y

    def nll(self) -> float:
        if self._nll_count == 0:
            raise MetricError("no probabilities ingested")
        return -self._log_p / self._nll_count

    def accuracy(self) -> float:
        if self._count == 0:
            raise MetricError("no flags ingested")
        return self._correct / self._count

    def window_mape(self) -> float:
        if self._window is None or self._w_abs_y == 0.0:
            raise MetricError("windowed MAPE unavailable")
        return self._w_abs_err / self._w_abs_y

    def window_nll(self) -> float:
        if self._window is None or not self._p_buf:
            raise MetricError("windowed NLL unavailable")
        return -self._w_log_p / len(self._p_buf)

    def window_accuracy(self) -> float:
        if self._window is None or not self._acc_buf:
            raise MetricError("windowed accuracy unavailable")
        return self._w_correct / len(self._acc_buf)
