"""Sparse distributed representations and their set kernels.

An `Sdr` is a fixed-width binary vector stored as the sorted indices of its
active bits.  All comparisons in the package reduce to the overlap kernel
defined here; unions model simultaneous predictions.  Instances are immutable
so encoders may memoize and share them freely.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .seeding import rng_from


class SdrError(ValueError):
    """Structurally invalid SDR or incompatible operands."""


class Sdr:
    """Fixed-width set of active bit indices, canonically sorted and unique."""

    __slots__ = ("width", "active")

    def __init__(self, width: int, active: Iterable[int]):
        if not isinstance(width, (int, np.integer)) or width <= 0:
            raise SdrError(f"width must be a positive integer, got {width!r}")
        arr = np.asarray(list(active) if not isinstance(active, np.ndarray) else active,
                         dtype=np.int64)
        if arr.ndim != 1:
            raise SdrError("active indices must be one-dimensional")
        arr = arr.astype(np.int32)
        if arr.size:
            if arr.min() < 0 or arr.max() >= width:
                raise SdrError(f"active index out of range for width {width}")
            if np.any(np.diff(arr) <= 0):
                raise SdrError("active indices must be strictly increasing (sorted, unique)")
        arr.setflags(write=False)
        object.__setattr__(self, "width", int(width))
        object.__setattr__(self, "active", arr)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Sdr is immutable")

    # immutable, so copies can share the instance and pickling can rebuild
    # through __init__ instead of attribute assignment
    def __copy__(self) -> "Sdr":
        return self

    def __deepcopy__(self, memo: dict) -> "Sdr":
        return self

    def __reduce__(self):
        return (self.__class__, (self.width, self.active))

    @property
    def num_active(self) -> int:
        return int(self.active.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.width, dtype=bool)
        dense[self.active] = True
        return dense

    def to_text(self) -> str:
        """Render as ``width|i1,i2,...`` (empty index list allowed)."""
        return f"{self.width}|{','.join(str(i) for i in self.active)}"

    @classmethod
    def from_text(cls, text: str) -> "Sdr":
        head, _, tail = text.partition("|")
        if not _ or not head.strip():
            raise SdrError(f"malformed SDR text: {text!r}")
        try:
            width = int(head)
            active = [int(tok) for tok in tail.split(",") if tok.strip() != ""]
        except ValueError as exc:
            raise SdrError(f"malformed SDR text: {text!r}") from exc
        return cls(width, active)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sdr):
            return NotImplemented
        return self.width == other.width and np.array_equal(self.active, other.active)

    def __hash__(self) -> int:
        return hash((self.width, self.active.tobytes()))

    def __repr__(self) -> str:
        shown = ",".join(str(i) for i in self.active[:8])
        if self.num_active > 8:
            shown += ",..."
        return f"Sdr(width={self.width}, n={self.num_active}, [{shown}])"


def overlap(a: Sdr, b: Sdr) -> int:
    """Number of bits active in both operands.  Widths must match."""
    if a.width != b.width:
        raise SdrError(f"width mismatch: {a.width} != {b.width}")
    return int(np.intersect1d(a.active, b.active, assume_unique=True).size)


def union(sdrs: Sequence[Sdr]) -> Sdr:
    """Bitwise OR of same-width SDRs.  Empty input is an error."""
    sdrs = list(sdrs)
    if not sdrs:
        raise SdrError("union of an empty collection is undefined")
    width = sdrs[0].width
    for s in sdrs[1:]:
        if s.width != width:
            raise SdrError(f"width mismatch in union: {s.width} != {width}")
    merged = np.unique(np.concatenate([s.active for s in sdrs]))
    return Sdr(width, merged)


def concatenate(sdrs: Sequence[Sdr]) -> Sdr:
    """Concatenate SDRs into one wider SDR, offsetting indices left to right."""
    sdrs = list(sdrs)
    if not sdrs:
        raise SdrError("concatenation of an empty collection is undefined")
    parts = []
    offset = 0
    for s in sdrs:
        parts.append(s.active.astype(np.int64) + offset)
        offset += s.width
    return Sdr(offset, np.concatenate(parts))


def random_sdr(width: int, num_active: int, seed: int) -> Sdr:
    """Uniform random SDR with exactly `num_active` bits, deterministic per seed."""
    if num_active < 0 or num_active > width:
        raise SdrError(f"num_active {num_active} out of range for width {width}")
    rng = rng_from(seed, "random_sdr")
    active = np.sort(rng.choice(width, size=num_active, replace=False))
    return Sdr(width, active)
