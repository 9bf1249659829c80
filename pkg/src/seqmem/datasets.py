"""Synthetic discrete-sequence corpora and the streams that present them.

A dataset is a small set of sequences engineered so that the last element is
predictable only from the sequence's first element, `order` steps in the
past.  Groups of sequences share their middle section; within a group two
starts lead through the identical middle to different endings, so any
learner relying on fewer than `order` steps of context cannot beat chance
between the group's endings.

A stream presents sequences in uniformly random order, separated by single
never-repeated noise symbols, with optional mid-run ending swaps and
optional corruption of early sequence elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ConfigError, DataError
from .seeding import rng_from

NOISE_POOL_SIZE = 50_000
STARTS_PER_GROUP = 2
CORRUPTIBLE_POSITIONS = (2, 3, 4)  # 1-based; the start and the ending are never corrupted


@dataclass(frozen=True)
class Context:
    """One start symbol, the group's shared middle, and its legal endings."""

    start: str
    middle: tuple[str, ...]
    endings: tuple[str, ...]

    def sequence(self, ending: str) -> tuple[str, ...]:
        if ending not in self.endings:
            raise DataError(f"{ending!r} is not an ending of this context")
        return (self.start, *self.middle, ending)


@dataclass(frozen=True)
class SequenceSet:
    """A generated corpus: `num_groups` groups of two contexts each.

    Sequence length is `order + 1`: predicting the ending requires carrying
    the start symbol across `order` transitions.  With `num_endings` > 1
    each context draws its ending uniformly per presentation, so a perfect
    learner must predict all of them at once.
    """

    order: int
    num_endings: int
    num_groups: int
    seed: int
    contexts: tuple[Context, ...]

    @property
    def sequence_length(self) -> int:
        return self.order + 1

    @property
    def symbols(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for ctx in self.contexts:
            for sym in (ctx.start, *ctx.middle, *ctx.endings):
                seen.setdefault(sym, None)
        return tuple(seen)

    def sequences(self) -> list[tuple[str, ...]]:
        return [ctx.sequence(e) for ctx in self.contexts for e in ctx.endings]

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "num_endings": self.num_endings,
            "num_groups": self.num_groups,
            "seed": self.seed,
            "contexts": [
                {"start": c.start, "middle": list(c.middle), "endings": list(c.endings)}
                for c in self.contexts
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SequenceSet":
        try:
            contexts = tuple(
                Context(c["start"], tuple(c["middle"]), tuple(c["endings"]))
                for c in data["contexts"]
            )
            ds = cls(int(data["order"]), int(data["num_endings"]),
                     int(data["num_groups"]), int(data["seed"]), contexts)
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed dataset: {exc}") from exc
        _validate(ds)
        return ds


def _validate(ds: SequenceSet) -> None:
    if ds.order < 2:
        raise ConfigError("order must be at least 2")
    if not ds.contexts:
        raise DataError("dataset has no contexts")
    for ctx in ds.contexts:
        if len(ctx.middle) != ds.order - 1:
            raise DataError("context middle length must equal order - 1")
        if len(ctx.endings) != ds.num_endings:
            raise DataError("context ending count must equal num_endings")
    flat: list[str] = []
    for ctx in ds.contexts:
        flat.append(ctx.start)
        flat.extend(ctx.endings)
    if len(set(flat)) != len(flat):
        raise DataError("starts and endings must be globally distinct symbols")


def gen_dataset(order: int, num_endings: int = 1, num_groups: int = 2,
                seed: int = 0) -> SequenceSet:
    """Build the standard corpus for a given order.

    Each group owns a fresh shared middle and two contexts; context symbols
    are disjoint across groups and across orders, so the only ambiguity a
    low-order learner faces is between the two contexts of a group.
    """
    if order < 2:
        raise ConfigError("order must be at least 2")
    if num_endings not in (1, 2, 4):
        raise ConfigError("num_endings must be 1, 2, or 4")
    if num_groups < 1:
        raise ConfigError("num_groups must be positive")
    contexts: list[Context] = []
    for g in range(num_groups):
        middle = tuple(f"m{order}.{g}.{i}" for i in range(order - 1))
        for c in range(STARTS_PER_GROUP):
            endings = tuple(
                f"e{order}.{g}.{c}" if num_endings == 1 else f"e{order}.{g}.{c}.{j}"
                for j in range(num_endings)
            )
            contexts.append(Context(f"s{order}.{g}.{c}", middle, endings))
    return SequenceSet(order, num_endings, num_groups, seed, tuple(contexts))


def swap_endings(ds: SequenceSet) -> SequenceSet:
    """Exchange the ending sets of each group's two contexts.

    The starts keep their middles, but every learned start-to-ending
    association becomes wrong.  Applying the swap twice restores the
    original dataset.
    """
    contexts = list(ds.contexts)
    if len(contexts) % 2:
        raise DataError("ending swap needs an even number of contexts")
    for i in range(0, len(contexts) - 1, STARTS_PER_GROUP):
        a, b = contexts[i], contexts[i + 1]
        contexts[i] = Context(a.start, a.middle, b.endings)
        contexts[i + 1] = Context(b.start, b.middle, a.endings)
    return SequenceSet(ds.order, ds.num_endings, ds.num_groups, ds.seed,
                       tuple(contexts))


@dataclass(frozen=True)
class StreamItem:
    """One stream element with the bookkeeping the harness grades against.

    `possible_endings` and `true_ending` ride on every element of a
    sequence; `corrupted` marks elements replaced by noise in place.  For
    noise separators only `element_index` and `symbol` are meaningful.
    """

    element_index: int
    symbol: str
    is_noise: bool
    sequence_ordinal: int = -1
    position: int = -1
    sequence_length: int = 0
    context_id: int = -1
    true_ending: str = ""
    possible_endings: tuple[str, ...] = ()
    corrupted: bool = False

    @property
    def is_penultimate(self) -> bool:
        return not self.is_noise and self.position == self.sequence_length - 2

    @property
    def is_last(self) -> bool:
        return not self.is_noise and self.position == self.sequence_length - 1


def corruption_positions(length: int) -> tuple[int, ...]:
    """0-based element positions eligible for corruption at a length."""
    return tuple(p - 1 for p in CORRUPTIBLE_POSITIONS if 2 <= p <= length - 1)


def stream(datasets: SequenceSet | Sequence[SequenceSet], num_elements: int,
           seed: int = 0, swap_at: int | None = None,
           corrupt_from: int | None = None) -> Iterator[StreamItem]:
    """Present one or more datasets as a single continuous symbol stream.

    Sequences are drawn uniformly over the union of all contexts (so a
    mixed-order corpus is a list of per-order datasets), with one noise
    symbol between consecutive sequences.  Noise comes from a pool of
    `NOISE_POOL_SIZE` symbols consumed without replacement; once exhausted
    the pool is drawn with replacement.  There are no boundary markers: the
    separator is the only cue.

    `swap_at`: from the first sequence starting at or after this element
    index, present the ending-swapped datasets instead.
    `corrupt_from`: sequences starting at or after this element index have
    one early element (1-based position drawn uniformly from {2, 3, 4},
    never the start or the ending) replaced by a fresh noise symbol; 0
    corrupts from the beginning.
    """
    sets = [datasets] if isinstance(datasets, SequenceSet) else list(datasets)
    if not sets:
        raise ConfigError("at least one dataset is required")
    for ds in sets:
        _validate(ds)
    seen: set[str] = set()
    for ds in sets:
        for sym in ds.symbols:
            if sym in seen:
                raise DataError(f"symbol {sym!r} appears in more than one dataset")
            seen.add(sym)
    if num_elements < 0:
        raise ConfigError("num_elements must be non-negative")
    rng = rng_from(seed, "stream")
    pool: list[str] = []
    exhausted = False

    def next_noise() -> str:
        nonlocal pool, exhausted
        if exhausted:
            return f"n{int(rng.integers(NOISE_POOL_SIZE)):05d}"
        if not pool:
            pool = [f"n{int(i):05d}" for i in rng.permutation(NOISE_POOL_SIZE)[::-1]]
        sym = pool.pop()
        if not pool:
            exhausted = True
        return sym

    current = sets
    swapped = [swap_endings(ds) for ds in sets]
    contexts_of = lambda ss: [(i, ctx) for i, ds in enumerate(ss)  # noqa: E731
                              for ctx in ds.contexts]
    flat = contexts_of(current)
    emitted = 0
    ordinal = 0
    while emitted < num_elements:
        if swap_at is not None and current is sets and emitted >= swap_at:
            current = swapped
            flat = contexts_of(current)
        ctx_id = int(rng.integers(len(flat)))
        ctx = flat[ctx_id][1]
        endings = ctx.endings
        ending = endings[int(rng.integers(len(endings)))] if len(endings) > 1 else endings[0]
        seq = ctx.sequence(ending)
        bad = -1
        if corrupt_from is not None and emitted >= corrupt_from:
            spots = corruption_positions(len(seq))
            bad = spots[int(rng.integers(len(spots)))] if spots else -1
        for pos, sym in enumerate(seq):
            if emitted >= num_elements:
                return
            corrupted = pos == bad
            yield StreamItem(
                element_index=emitted,
                symbol=next_noise() if corrupted else sym,
                is_noise=False,
                sequence_ordinal=ordinal,
                position=pos,
                sequence_length=len(seq),
                context_id=ctx_id,
                true_ending=seq[-1],
                possible_endings=endings,
                corrupted=corrupted,
            )
            emitted += 1
        ordinal += 1
        if emitted >= num_elements:
            return
        yield StreamItem(element_index=emitted, symbol=next_noise(), is_noise=True)
        emitted += 1
