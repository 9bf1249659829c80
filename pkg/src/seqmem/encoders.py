"""Encoders from raw inputs to SDRs, and the fixed spatial pooler.

Categories get memoized random codes.  Scalars get a contiguous window whose
position moves linearly with the value, so nearby values share bits and far
values share none.  Datetimes decompose into periodic time-of-day and
day-of-week components.  The pooler maps an arbitrary-width input SDR onto a
fixed number of columns with a fixed sparsity by overlap competition over
frozen random potential pools; it gives composite (concatenated) encodings a
single stable column code.
"""

from __future__ import annotations

import hashlib
import math
from datetime import datetime

import numpy as np

from .sdr import Sdr
from .seeding import rng_from

_MASK64 = (1 << 64) - 1


class EncoderError(ValueError):
    """Invalid encoder configuration or unencodable input."""


class CategoryEncoder:
    """Random fixed-sparsity SDR per symbol, memoized.

    Codes depend only on (seed, symbol), not on encounter order, so any two
    runs with the same seed agree on every symbol, including ones the other
    run never saw.
    """

    def __init__(self, width: int = 2048, num_active: int = 40, seed: int = 0):
        if num_active <= 0 or num_active > width:
            raise EncoderError(f"num_active {num_active} out of range for width {width}")
        self.width = int(width)
        self.num_active = int(num_active)
        self.seed = int(seed)
        self._memo: dict[str, Sdr] = {}
        self._key = (self.seed & _MASK64).to_bytes(8, "little")

    def encode(self, symbol: str) -> Sdr:
        if not isinstance(symbol, str):
            raise EncoderError(f"symbol must be a string, got {type(symbol).__name__}")
        cached = self._memo.get(symbol)
        if cached is not None:
            return cached
        digest = hashlib.blake2b(symbol.encode("utf-8"), key=self._key, digest_size=8)
        rng = np.random.default_rng(int.from_bytes(digest.digest(), "little"))
        active = np.sort(rng.choice(self.width, size=self.num_active, replace=False))
        sdr = Sdr(self.width, active)
        self._memo[symbol] = sdr
        return sdr


class ScalarEncoder:
    """Contiguous run of `active_bits` whose start position tracks the value.

    Non-periodic: start = round((v - min) / (max - min) * (width - active_bits)),
    so min maps to the leftmost window and max to the rightmost.  Periodic:
    the window wraps modulo width, for circular quantities like hours.
    Values outside [min, max] clamp when `clip` is set and are errors otherwise.
    """

    def __init__(self, minimum: float, maximum: float, width: int, active_bits: int,
                 clip: bool = True, periodic: bool = False):
        if not (math.isfinite(minimum) and math.isfinite(maximum)) or maximum <= minimum:
            raise EncoderError(f"invalid range [{minimum}, {maximum}]")
        if active_bits <= 0 or active_bits >= width:
            raise EncoderError(f"active_bits {active_bits} out of range for width {width}")
        self.minimum = float(minimum)
        self.maximum = float(maximum)
        self.width = int(width)
        self.active_bits = int(active_bits)
        self.clip = bool(clip)
        self.periodic = bool(periodic)

    @property
    def zero_overlap_distance(self) -> float:
        """Smallest value distance that can yield disjoint encodings."""
        return (self.maximum - self.minimum) * self.active_bits / (self.width - self.active_bits)

    def encode(self, value: float) -> Sdr:
        v = float(value)
        if not math.isfinite(v):
            raise EncoderError(f"cannot encode non-finite value {value!r}")
        if self.periodic:
            span = self.maximum - self.minimum
            v = (v - self.minimum) % span + self.minimum
            start = int(math.floor((v - self.minimum) / span * self.width)) % self.width
            active = np.sort((start + np.arange(self.active_bits)) % self.width)
            return Sdr(self.width, active)
        if v < self.minimum or v > self.maximum:
            if not self.clip:
                raise EncoderError(f"value {v} outside [{self.minimum}, {self.maximum}]")
            v = min(max(v, self.minimum), self.maximum)
        frac = (v - self.minimum) / (self.maximum - self.minimum)
        start = round(frac * (self.width - self.active_bits))
        return Sdr(self.width, np.arange(start, start + self.active_bits))


class DatetimeEncoder:
    """Periodic time-of-day and day-of-week encodings of a timestamp.

    Day-of-week is continuous (day index plus day fraction) so late Monday and
    early Tuesday sit close on the weekly circle, while identical clock times
    on different days share the full time-of-day code.
    """

    def __init__(self, tod_width: int = 240, tod_active: int = 21,
                 dow_width: int = 98, dow_active: int = 14):
        self.time_of_day = ScalarEncoder(0.0, 24.0, tod_width, tod_active, periodic=True)
        self.day_of_week = ScalarEncoder(0.0, 7.0, dow_width, dow_active, periodic=True)

    def encode(self, when: datetime) -> tuple[Sdr, Sdr]:
        if not isinstance(when, datetime):
            raise EncoderError(f"expected datetime, got {type(when).__name__}")
        hours = when.hour + when.minute / 60.0 + when.second / 3600.0
        day = when.weekday() + hours / 24.0
        return self.time_of_day.encode(hours), self.day_of_week.encode(day)


class SpatialPooler:
    """Fixed random projection from an input SDR to a sparse column code.

    Each column owns a frozen random potential pool covering half the input
    bits; the `num_active_columns` columns with the largest pool/input overlap
    win, ties resolved toward the lower column index.  There is no learning,
    so equal inputs always map to equal codes.
    """

    def __init__(self, input_width: int, num_columns: int = 2048,
                 num_active_columns: int = 40, potential_fraction: float = 0.5,
                 seed: int = 0):
        if input_width <= 1:
            raise EncoderError(f"input_width must exceed 1, got {input_width}")
        if num_active_columns <= 0 or num_active_columns > num_columns:
            raise EncoderError("num_active_columns out of range")
        if not 0.0 < potential_fraction <= 1.0:
            raise EncoderError("potential_fraction must lie in (0, 1]")
        self.input_width = int(input_width)
        self.num_columns = int(num_columns)
        self.num_active_columns = int(num_active_columns)
        pool_size = max(1, int(round(potential_fraction * input_width)))
        rng = rng_from(seed, "pooler")
        # Inverted index: for each input bit, the columns whose pool holds it.
        receivers: list[list[int]] = [[] for _ in range(self.input_width)]
        for col in range(self.num_columns):
            for bit in rng.choice(self.input_width, size=pool_size, replace=False):
                receivers[int(bit)].append(col)
        self._receivers = [np.asarray(cols, dtype=np.int32) for cols in receivers]

    def potential_pool(self, column: int) -> np.ndarray:
        """Input bits in the column's pool (mainly for inspection and tests)."""
        bits = [b for b, cols in enumerate(self._receivers) if column in cols]
        return np.asarray(bits, dtype=np.int32)

    def pool(self, inputs: Sdr) -> Sdr:
        if inputs.width != self.input_width:
            raise EncoderError(f"input width {inputs.width} != pooler width {self.input_width}")
        if inputs.num_active == 0:
            raise EncoderError("cannot pool an all-zero input")
        hits = np.concatenate([self._receivers[b] for b in inputs.active])
        scores = np.bincount(hits, minlength=self.num_columns)
        # Stable sort on descending score keeps the lower index on ties.
        order = np.argsort(-scores, kind="stable")[: self.num_active_columns]
        return Sdr(self.num_columns, np.sort(order))
