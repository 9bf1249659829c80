"""Read-outs that turn sparse network activity back into answers.

Two decoding routes with different contracts:

* `SymbolTable` -- nonparametric.  Remembers the exact column code of every
  symbol it has seen and ranks symbols by overlap with a query SDR.  Used to
  grade discrete-sequence predictions.
* `SoftmaxClassifier` -- parametric.  A single linear layer over cell
  activity trained online with a fixed lookahead, producing a probability
  for each value bucket.  Used for the streaming regression task.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .sdr import Sdr

__all__ = ["SymbolTable", "Bucketizer", "SoftmaxClassifier", "point_prediction",
           "ClassifierError"]


class ClassifierError(ValueError):
    pass


class SymbolTable:
    """Maps symbols to their column codes and classifies by overlap.

    Ties rank by insertion order, so classification is reproducible
    regardless of overlap collisions.
    """

    def __init__(self, width: int):
        if width < 1:
            raise ClassifierError("width must be positive")
        self.width = int(width)
        self._symbols: list[str] = []
        self._codes: dict[str, Sdr] = {}
        self._receivers: list[list[int]] = [[] for _ in range(self.width)]

    def __len__(self) -> int:
        return len(self._symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._codes

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self._symbols)

    def code(self, symbol: str) -> Sdr:
        try:
            return self._codes[symbol]
        except KeyError:
            raise ClassifierError(f"unknown symbol {symbol!r}") from None

    def observe(self, symbol: str, code: Sdr) -> None:
        """Record a symbol's code; re-observing must agree with the original."""
        if code.width != self.width:
            raise ClassifierError(f"code width {code.width} != table width {self.width}")
        known = self._codes.get(symbol)
        if known is not None:
            if known != code:
                raise ClassifierError(f"symbol {symbol!r} re-observed with a different code")
            return
        index = len(self._symbols)
        self._symbols.append(symbol)
        self._codes[symbol] = code
        for bit in code.active:
            self._receivers[int(bit)].append(index)

    def overlaps(self, query: Sdr) -> np.ndarray:
        if query.width != self.width:
            raise ClassifierError(f"query width {query.width} != table width {self.width}")
        scores = np.zeros(len(self._symbols), dtype=np.int64)
        for bit in query.active:
            for index in self._receivers[int(bit)]:
                scores[index] += 1
        return scores

    def classify_topk(self, query: Sdr, k: int) -> list[tuple[str, int]]:
        """The k (symbol, overlap) pairs with the largest overlap, descending.

        Ties keep insertion order (stable sort on the insertion index).
        """
        if k < 1:
            raise ClassifierError("k must be positive")
        if not self._symbols:
            return []
        scores = self.overlaps(query)
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self._symbols[int(i)], int(scores[i])) for i in order]

    def classify(self, query: Sdr) -> str | None:
        best = self.classify_topk(query, 1)
        return best[0][0] if best else None


class Bucketizer:
    """Uniform value buckets over [minimum, maximum]; out-of-range clamps."""

    def __init__(self, minimum: float, maximum: float, num_buckets: int):
        if not maximum > minimum:
            raise ClassifierError("maximum must exceed minimum")
        if num_buckets < 1:
            raise ClassifierError("num_buckets must be positive")
        self.minimum = float(minimum)
        self.maximum = float(maximum)
        self.num_buckets = int(num_buckets)
        self._width = (self.maximum - self.minimum) / self.num_buckets

    def bucket(self, value: float) -> int:
        i = int((float(value) - self.minimum) / self._width)
        return min(max(i, 0), self.num_buckets - 1)

    def center(self, bucket: int) -> float:
        if not 0 <= bucket < self.num_buckets:
            raise ClassifierError(f"bucket {bucket} out of range")
        return self.minimum + (bucket + 0.5) * self._width

    @property
    def centers(self) -> np.ndarray:
        return self.minimum + (np.arange(self.num_buckets) + 0.5) * self._width


class SoftmaxClassifier:
    """Online linear softmax from sparse activity to bucket probabilities.

    Weights start at zero, giving the uniform distribution.  `train` feeds
    the internal lookahead buffer: the activity observed `lookahead` steps
    ago is paired with the bucket observed now, so the layer learns the
    value the network's state foretells rather than the current one.
    `update` applies one supervised step directly and is the primitive
    `train` reduces to at lookahead 0.
    """

    def __init__(self, input_width: int, num_classes: int,
                 learning_rate: float = 0.001, lookahead: int = 0):
        if input_width < 1 or num_classes < 1:
            raise ClassifierError("input_width and num_classes must be positive")
        if not learning_rate > 0:
            raise ClassifierError("learning_rate must be positive")
        if lookahead < 0:
            raise ClassifierError("lookahead must be non-negative")
        self.input_width = int(input_width)
        self.num_classes = int(num_classes)
        self.learning_rate = float(learning_rate)
        self.lookahead = int(lookahead)
        self.weights = np.zeros((self.num_classes, self.input_width), dtype=np.float64)
        self._pending: deque[np.ndarray] = deque()

    def _check(self, x: Sdr) -> None:
        if x.width != self.input_width:
            raise ClassifierError(f"input width {x.width} != {self.input_width}")

    def infer(self, x: Sdr) -> np.ndarray:
        """Class probabilities for one activity pattern."""
        self._check(x)
        logits = self.weights[:, x.active].sum(axis=1)
        logits -= logits.max()
        e = np.exp(logits)
        return e / e.sum()

    def update(self, x: Sdr, bucket: int) -> None:
        """One gradient step of the log loss on (x, bucket)."""
        self._check(x)
        if not 0 <= bucket < self.num_classes:
            raise ClassifierError(f"bucket {bucket} out of range")
        probs = self.infer(x)
        grad = probs.copy()
        grad[bucket] -= 1.0
        self.weights[:, x.active] -= self.learning_rate * grad[:, np.newaxis]

    def train(self, x: Sdr, bucket: int) -> None:
        """Observe the current activity and the current true bucket."""
        self._check(x)
        self._pending.append(x.active)
        if len(self._pending) > self.lookahead:
            past = self._pending.popleft()
            self.update(Sdr(self.input_width, past), bucket)

    def reset(self) -> None:
        """Drop buffered activity (stream restart); weights persist."""
        self._pending.clear()


def point_prediction(probs: np.ndarray, centers: np.ndarray,
                     mode: str = "argmax") -> float:
    """Collapse a bucket distribution to one value.

    `argmax` returns the most likely bucket's center (ties take the lower
    bucket); `expectation` returns the probability-weighted mean of centers.
    """
    probs = np.asarray(probs, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if probs.shape != centers.shape:
        raise ClassifierError("probs and centers must have matching shape")
    if mode == "argmax":
        return float(centers[int(np.argmax(probs))])
    if mode == "expectation":
        return float(np.dot(probs, centers))
    raise ClassifierError(f"unknown mode {mode!r}")
