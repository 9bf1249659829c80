"""High-order sequence memory over a column/cell lattice.

The network holds `cells_per_column` cells in each of `num_columns` columns.
Cells carry distal dendritic segments; a segment's synapses target other
cells and have scalar permanences.  A segment with at least
`activation_threshold` connected synapses onto currently active cells
depolarizes its owner, which then activates alone when its column fires next
step; columns that fire unpredicted burst all their live cells.  Learning is
one-pass and Hebbian: segments that predicted correctly are reinforced,
segments that predicted in vain decay slightly, and bursting columns grow new
synapses sampled from the previous winner cells.

Permanences are kept as integer ticks of 1e-4 so arithmetic, thresholds and
snapshots are exact; the public API speaks floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .sdr import Sdr
from .seeding import rng_from

PERMANENCE_SCALE = 10_000


class TmError(ValueError):
    """Invalid parameters, inputs, or segment surgery."""


def _ticks(value: float) -> int:
    return int(round(float(value) * PERMANENCE_SCALE))


@dataclass(frozen=True)
class TmParams:
    """Network geometry, thresholds and learning rates.

    Defaults are the reference operating point: 2048 columns of 32 cells,
    prediction threshold 15 connected synapses, permanences starting at 0.21
    against a 0.5 connection threshold, +/-0.1 learning steps, and a 0.01
    decay for predictions that did not come true.
    """

    num_columns: int = 2048
    cells_per_column: int = 32
    activation_threshold: int = 15
    matching_threshold: int = 6
    initial_permanence: float = 0.21
    connected_threshold: float = 0.5
    permanence_increment: float = 0.1
    permanence_decrement: float = 0.1
    predicted_decrement: float = 0.01
    max_segments_per_cell: int = 128
    max_synapses_per_segment: int = 128
    max_new_synapses_per_step: int = 32
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_columns < 1 or self.cells_per_column < 1:
            raise TmError("network must have at least one column and one cell per column")
        if not 0 < self.activation_threshold <= self.max_synapses_per_segment:
            raise TmError("activation_threshold must lie in [1, max_synapses_per_segment]")
        if not 0 < self.matching_threshold <= self.activation_threshold:
            raise TmError("matching_threshold must lie in [1, activation_threshold]")
        for name in ("initial_permanence", "connected_threshold"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise TmError(f"{name} must lie in (0, 1]")
        if self.initial_permanence >= self.connected_threshold:
            raise TmError("new synapses must start below the connected threshold")
        for name in ("permanence_increment", "permanence_decrement", "predicted_decrement"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise TmError(f"{name} must lie in [0, 1]")
        if self.max_segments_per_cell < 1 or self.max_synapses_per_segment < 1:
            raise TmError("segment and synapse caps must be positive")
        if not 0 < self.max_new_synapses_per_step <= self.max_synapses_per_segment:
            raise TmError("max_new_synapses_per_step must lie in [1, max_synapses_per_segment]")

    @property
    def num_cells(self) -> int:
        return self.num_columns * self.cells_per_column


@dataclass(frozen=True)
class TmState:
    """Snapshot of one timestep: who fired, who won, who is predicted next.

    `matching_segments` / `matching_potential` carry the potential-synapse
    overlap counts the next step needs for winner selection and synapse
    growth on bursting columns.
    """

    step: int
    active_columns: np.ndarray
    active_cells: np.ndarray
    winner_cells: np.ndarray
    predictive_cells: np.ndarray
    burst_columns: np.ndarray
    active_segments: np.ndarray
    matching_segments: np.ndarray
    matching_potential: np.ndarray


def _empty_state(step: int = 0) -> TmState:
    z = lambda: np.empty(0, dtype=np.int32)  # noqa: E731
    return TmState(step, z(), z(), z(), z(), z(), z(), z(), z())


class PredictiveView(NamedTuple):
    predictive_cells: np.ndarray
    active_segments: np.ndarray
    matching_segments: np.ndarray
    matching_potential: np.ndarray


class _IntVec:
    """Append-only int array with amortized growth and a cheap view."""

    __slots__ = ("data", "n")

    def __init__(self, dtype=np.int32, capacity: int = 8):
        self.data = np.empty(capacity, dtype=dtype)
        self.n = 0

    def append(self, value: int) -> None:
        if self.n == self.data.size:
            self.data = np.resize(self.data, max(8, self.data.size * 2))
        self.data[self.n] = value
        self.n += 1

    def view(self) -> np.ndarray:
        return self.data[: self.n]


class TemporalMemory:
    """One-pass sequence learner over sparse column activations.

    `step` consumes one column SDR and returns the new `TmState`.  The
    previous state is kept internally; `reset` clears it without touching
    learned segments.  All randomness (winner tie-breaks, growth sampling)
    comes from a single generator seeded from `params.seed`.
    """

    def __init__(self, params: TmParams | None = None):
        self.params = params or TmParams()
        p = self.params
        self._m = p.cells_per_column
        self._theta = p.activation_threshold
        self._theta_match = p.matching_threshold
        self._connected = _ticks(p.connected_threshold)
        self._initial = _ticks(p.initial_permanence)
        self._inc = _ticks(p.permanence_increment)
        self._dec = _ticks(p.permanence_decrement)
        self._pdec = _ticks(p.predicted_decrement)
        self._rng = rng_from(p.seed, "tm")

        # Flat synapse store: per synapse its segment, presynaptic cell and
        # permanence ticks.  Permanence 0 marks a destroyed synapse; such
        # entries drop out of every count and are pruned lazily on touch.
        self._syn_seg = _IntVec(np.int32, 1024)
        self._syn_cell = _IntVec(np.int32, 1024)
        self._syn_perm = _IntVec(np.int32, 1024)

        self._seg_owner = _IntVec(np.int32, 256)  # -1 marks a destroyed segment
        self._seg_last_use = _IntVec(np.int64, 256)
        self._seg_synapses: list[list[int]] = []

        self._cell_segments: list[list[int]] = [[] for _ in range(p.num_cells)]
        self._cell_segment_count = np.zeros(p.num_cells, dtype=np.int32)
        self._cell_outgoing: dict[int, _IntVec] = {}
        self._dead = np.zeros(p.num_cells, dtype=bool)

        self._step_count = 0
        self._state = _empty_state()

    # ------------------------------------------------------------------ views

    @property
    def state(self) -> TmState:
        return self._state

    @property
    def num_segments(self) -> int:
        """Live segment count."""
        return int((self._seg_owner.view() >= 0).sum())

    @property
    def num_dead_cells(self) -> int:
        return int(self._dead.sum())

    def column_of(self, cell: int) -> int:
        return cell // self._m

    def cells_of_column(self, column: int) -> range:
        return range(column * self._m, (column + 1) * self._m)

    def is_dead(self, cell: int) -> bool:
        return bool(self._dead[cell])

    def segments_of(self, cell: int) -> tuple[int, ...]:
        return tuple(self._cell_segments[cell])

    def segment_owner(self, segment: int) -> int:
        owner = int(self._seg_owner.view()[segment])
        if owner < 0:
            raise TmError(f"segment {segment} is destroyed")
        return owner

    def segment_synapses(self, segment: int) -> dict[int, float]:
        """Live synapses of a segment as {presynaptic cell: permanence}."""
        self.segment_owner(segment)
        perms = self._syn_perm.view()
        cells = self._syn_cell.view()
        return {
            int(cells[sid]): perms[sid] / PERMANENCE_SCALE
            for sid in self._seg_synapses[segment]
            if perms[sid] > 0
        }

    def predicted_columns(self, state: TmState | None = None) -> Sdr:
        """Columns containing at least one currently predictive cell."""
        st = state if state is not None else self._state
        cols = np.unique(st.predictive_cells // self._m).astype(np.int32)
        return Sdr(self.params.num_columns, cols)

    # ------------------------------------------------------- segment surgery

    def add_segment(self, cell: int, synapses: Mapping[int, float]) -> int:
        """Create a segment with explicit synapses (deserialization, fixtures).

        Enforces the structural invariants: live owner, no autapse, positive
        permanences within [0, 1], synapse count within the per-segment cap.
        """
        if not 0 <= cell < self.params.num_cells:
            raise TmError(f"cell {cell} out of range")
        if self._dead[cell]:
            raise TmError(f"cell {cell} is dead")
        if len(synapses) > self.params.max_synapses_per_segment:
            raise TmError("synapse count exceeds the per-segment cap")
        for presyn, perm in synapses.items():
            if not 0 <= presyn < self.params.num_cells:
                raise TmError(f"presynaptic cell {presyn} out of range")
            if presyn == cell:
                raise TmError("a segment may not synapse onto its own cell")
            if not 0.0 < perm <= 1.0:
                raise TmError(f"permanence {perm} must lie in (0, 1]")
        seg = self._create_segment(cell)
        for presyn in sorted(synapses):
            self._add_synapse(seg, presyn, _ticks(synapses[presyn]))
        return seg

    def _create_segment(self, cell: int) -> int:
        if self._cell_segment_count[cell] >= self.params.max_segments_per_cell:
            owned = self._cell_segments[cell]
            last_use = self._seg_last_use.view()
            victim = min(owned, key=lambda s: (last_use[s], s))
            self._destroy_segment(victim)
        seg = len(self._seg_synapses)
        self._seg_owner.append(cell)
        self._seg_last_use.append(self._step_count)
        self._seg_synapses.append([])
        self._cell_segments[cell].append(seg)
        self._cell_segment_count[cell] += 1
        return seg

    def _destroy_segment(self, seg: int) -> None:
        perms = self._syn_perm.view()
        for sid in self._seg_synapses[seg]:
            perms[sid] = 0
        self._seg_synapses[seg] = []
        owner = int(self._seg_owner.view()[seg])
        self._seg_owner.view()[seg] = -1
        self._cell_segments[owner].remove(seg)
        self._cell_segment_count[owner] -= 1

    def _add_synapse(self, seg: int, presyn: int, perm_ticks: int) -> None:
        sid = self._syn_seg.n
        self._syn_seg.append(seg)
        self._syn_cell.append(presyn)
        self._syn_perm.append(perm_ticks)
        self._seg_synapses[seg].append(sid)
        out = self._cell_outgoing.get(presyn)
        if out is None:
            out = self._cell_outgoing[presyn] = _IntVec(np.int32)
        out.append(sid)

    # --------------------------------------------------------------- queries

    def compute_predictive(self, active_cells: Iterable[int]) -> PredictiveView:
        """Segment activity and the resulting predictive cells for a cell set.

        Active segments: at least `activation_threshold` connected synapses
        (permanence >= connected_threshold) onto active cells.  Matching
        segments: at least `matching_threshold` live synapses of any positive
        permanence.  A cell is predictive iff it owns an active segment.
        """
        active = np.asarray(list(active_cells) if not isinstance(active_cells, np.ndarray)
                            else active_cells, dtype=np.int64)
        n_segs = len(self._seg_synapses)
        parts = []
        for c in active:
            out = self._cell_outgoing.get(int(c))
            if out is not None and out.n:
                parts.append(out.view())
        if not parts or n_segs == 0:
            z = np.empty(0, dtype=np.int32)
            return PredictiveView(z, z.copy(), z.copy(), z.copy())
        ids = np.concatenate(parts)
        perms = self._syn_perm.view()[ids]
        live = perms > 0
        segs = self._syn_seg.view()[ids[live]]
        perms = perms[live]
        pot_counts = np.bincount(segs, minlength=n_segs)
        act_counts = np.bincount(segs[perms >= self._connected], minlength=n_segs)
        active_segments = np.flatnonzero(act_counts >= self._theta).astype(np.int32)
        matching = np.flatnonzero(pot_counts >= self._theta_match).astype(np.int32)
        owners = self._seg_owner.view()
        predictive = np.unique(owners[active_segments]).astype(np.int32)
        return PredictiveView(predictive, active_segments, matching,
                              pot_counts[matching].astype(np.int32))

    def activate_cells(self, active_columns: Iterable[int],
                       prev: TmState) -> tuple[np.ndarray, np.ndarray]:
        """Active and winner cells for a column set given the previous state.

        Pure query form of the per-step activation rule; `step` uses the same
        logic internally and additionally learns.
        """
        cols = np.asarray(list(active_columns) if not isinstance(active_columns, np.ndarray)
                          else active_columns, dtype=np.int64)
        active, winners, _, _, _ = self._activate(cols, prev)
        return active, winners

    # ------------------------------------------------------------- main loop

    def step(self, column_sdr: Sdr, learn: bool = True) -> TmState:
        """Consume one input: activate, optionally learn, then predict."""
        if column_sdr.width != self.params.num_columns:
            raise TmError(
                f"input width {column_sdr.width} != {self.params.num_columns} columns")
        if column_sdr.num_active == 0:
            raise TmError("input SDR has no active columns")
        prev = self._state
        cols = column_sdr.active
        active, winners, burst, grow_pairs, create_cells = self._activate(cols, prev)
        if learn:
            self._learn(prev, active, grow_pairs, create_cells)
        self._step_count += 1
        view = self.compute_predictive(active)
        if view.active_segments.size:
            self._seg_last_use.view()[view.active_segments] = self._step_count
        state = TmState(
            step=self._step_count,
            active_columns=cols.astype(np.int32),
            active_cells=active,
            winner_cells=winners,
            predictive_cells=view.predictive_cells,
            burst_columns=burst,
            active_segments=view.active_segments,
            matching_segments=view.matching_segments,
            matching_potential=view.matching_potential,
        )
        self._state = state
        return state

    def reset(self) -> None:
        """Forget transient activity (sequence boundary); keep all learning."""
        self._state = _empty_state(self._step_count)

    def _activate(self, cols: np.ndarray, prev: TmState):
        m = self._m
        pred_by_col: dict[int, list[int]] = {}
        for cell in prev.predictive_cells:
            pred_by_col.setdefault(int(cell) // m, []).append(int(cell))
        # Best matching segment per column, ties toward the lower segment id
        # (ascending iteration keeps the first maximum).
        best_by_col: dict[int, tuple[int, int]] = {}
        if prev.matching_segments.size:
            owners = self._seg_owner.view()
            for seg, pot in zip(prev.matching_segments, prev.matching_potential):
                owner = owners[seg]
                if owner < 0:
                    continue
                col = int(owner) // m
                cur = best_by_col.get(col)
                if cur is None or pot > cur[1]:
                    best_by_col[col] = (int(seg), int(pot))
        active: list[int] = []
        winners: list[int] = []
        burst_cols: list[int] = []
        grow_pairs: list[tuple[int, int, int]] = []  # (segment, winner, potential)
        create_cells: list[int] = []
        dead = self._dead
        counts = self._cell_segment_count
        owners = self._seg_owner.view()
        for col in cols:
            col = int(col)
            predicted = pred_by_col.get(col)
            if predicted:
                active.extend(predicted)
                winners.extend(predicted)
                continue
            burst_cols.append(col)
            live = [c for c in range(col * m, (col + 1) * m) if not dead[c]]
            if not live:
                continue
            active.extend(live)
            best = best_by_col.get(col)
            if best is not None:
                seg, pot = best
                winner = int(owners[seg])
                grow_pairs.append((seg, winner, pot))
            else:
                cell_counts = counts[live]
                least = cell_counts.min()
                pool = [c for c, n in zip(live, cell_counts) if n == least]
                winner = pool[0] if len(pool) == 1 else int(self._rng.choice(pool))
                create_cells.append(winner)
            winners.append(winner)
        return (np.asarray(active, dtype=np.int32),
                np.asarray(winners, dtype=np.int32),
                np.asarray(burst_cols, dtype=np.int32),
                grow_pairs, create_cells)

    # -------------------------------------------------------------- learning

    def _learn(self, prev: TmState, active: np.ndarray,
               grow_pairs: list[tuple[int, int, int]],
               create_cells: list[int]) -> None:
        prev_active = set(int(c) for c in prev.active_cells)
        prev_winners = prev.winner_cells
        active_set = set(int(c) for c in active)
        owners = self._seg_owner.view()
        # Segments that fired last step: reinforce the ones whose prediction
        # came true, decay the ones whose prediction did not.
        for seg in prev.active_segments:
            seg = int(seg)
            owner = int(owners[seg])
            if owner < 0:
                continue
            if owner in active_set:
                self._reinforce(seg, prev_active)
            else:
                self._punish(seg, prev_active)
        max_new = self.params.max_new_synapses_per_step
        for seg, winner, pot in grow_pairs:
            if owners[seg] < 0:
                continue
            self._reinforce(seg, prev_active)
            if owners[seg] >= 0 and prev_winners.size:
                # Top up toward max_new counting the synapses that were
                # already live onto last step's activity; without this cap a
                # segment serving one context would keep absorbing the other
                # context's winners and the two histories would merge.
                self._grow(seg, prev_winners, max_new - pot)
            self._seg_last_use.view()[seg] = self._step_count + 1
        if prev_winners.size:
            for cell in create_cells:
                seg = self._create_segment(cell)
                self._grow(seg, prev_winners, max_new)

    def _reinforce(self, seg: int, prev_active: set[int]) -> None:
        """Correct prediction: raise synapses onto last step's active cells,
        lower every other live synapse; clamp to [0, 1] and drop at 0."""
        perms = self._syn_perm.view()
        cells = self._syn_cell.view()
        kept: list[int] = []
        for sid in self._seg_synapses[seg]:
            p = int(perms[sid])
            if p <= 0:
                continue
            if int(cells[sid]) in prev_active:
                p = min(p + self._inc, PERMANENCE_SCALE)
            else:
                p -= self._dec
                if p <= 0:
                    perms[sid] = 0
                    continue
            perms[sid] = p
            kept.append(sid)
        self._seg_synapses[seg] = kept
        if not kept:
            self._destroy_segment(seg)

    def _punish(self, seg: int, prev_active: set[int]) -> None:
        """Failed prediction: decay only the synapses that caused it."""
        if self._pdec == 0:
            return
        perms = self._syn_perm.view()
        cells = self._syn_cell.view()
        kept: list[int] = []
        for sid in self._seg_synapses[seg]:
            p = int(perms[sid])
            if p <= 0:
                continue
            if int(cells[sid]) in prev_active:
                p -= self._pdec
                if p <= 0:
                    perms[sid] = 0
                    continue
                perms[sid] = p
            kept.append(sid)
        self._seg_synapses[seg] = kept
        if not kept:
            self._destroy_segment(seg)

    def _grow(self, seg: int, prev_winners: np.ndarray, desired: int) -> None:
        if desired <= 0:
            return
        perms = self._syn_perm.view()
        cells = self._syn_cell.view()
        existing = {int(cells[sid]) for sid in self._seg_synapses[seg] if perms[sid] > 0}
        owner = int(self._seg_owner.view()[seg])
        dead = self._dead
        candidates = [int(c) for c in prev_winners
                      if int(c) != owner and int(c) not in existing and not dead[c]]
        room = self.params.max_synapses_per_segment - len(self._seg_synapses[seg])
        n = min(desired, room, len(candidates))
        if n <= 0:
            return
        if n < len(candidates):
            picked = self._rng.choice(len(candidates), size=n, replace=False)
            chosen = [candidates[i] for i in sorted(picked)]
        else:
            chosen = candidates
        for presyn in chosen:
            self._add_synapse(seg, presyn, self._initial)

    # ------------------------------------------------------------ fault model

    def kill_cells(self, fraction: float, seed: int = 0) -> int:
        """Permanently disable floor(fraction * num_cells) live cells.

        Dead cells never activate, never win, are never sampled for growth,
        and lose both their segments and every synapse pointing at them.
        Returns the number of cells removed.
        """
        if not 0.0 <= fraction <= 1.0:
            raise TmError(f"fraction {fraction} must lie in [0, 1]")
        count = int(fraction * self.params.num_cells)
        alive = np.flatnonzero(~self._dead)
        count = min(count, alive.size)
        if count == 0:
            return 0
        rng = rng_from(seed, "kill_cells")
        victims = np.sort(rng.choice(alive, size=count, replace=False))
        perms = self._syn_perm.view()
        for cell in victims:
            cell = int(cell)
            self._dead[cell] = True
            for seg in list(self._cell_segments[cell]):
                self._destroy_segment(seg)
            out = self._cell_outgoing.pop(cell, None)
            if out is not None and out.n:
                perms[out.view()] = 0
        self._state = self._filter_state(self._state)
        return count

    def _filter_state(self, st: TmState) -> TmState:
        """Drop dead cells and destroyed segments from a stored state."""
        dead = self._dead
        owners = self._seg_owner.view()
        keep_cells = lambda a: a[~dead[a]] if a.size else a  # noqa: E731
        seg_live = st.matching_segments.size or st.active_segments.size
        if seg_live:
            act = st.active_segments[owners[st.active_segments] >= 0]
            match_mask = owners[st.matching_segments] >= 0
            match = st.matching_segments[match_mask]
            pot = st.matching_potential[match_mask]
        else:
            act, match, pot = st.active_segments, st.matching_segments, st.matching_potential
        return TmState(
            step=st.step,
            active_columns=st.active_columns,
            active_cells=keep_cells(st.active_cells),
            winner_cells=keep_cells(st.winner_cells),
            predictive_cells=keep_cells(st.predictive_cells),
            burst_columns=st.burst_columns,
            active_segments=act,
            matching_segments=match,
            matching_potential=pot,
        )

    # ------------------------------------------------------------ snapshots

    def to_snapshot(self) -> dict:
        """Portable exact image: params, clock, dead cells, segments with
        tick permanences, generator state, and the transient step state."""
        owners = self._seg_owner.view()
        live = np.flatnonzero(owners >= 0)
        remap = {int(old): new for new, old in enumerate(live)}
        perms = self._syn_perm.view()
        cells = self._syn_cell.view()
        indptr = [0]
        syn_cells: list[int] = []
        syn_perms: list[int] = []
        for seg in live:
            for sid in self._seg_synapses[int(seg)]:
                if perms[sid] > 0:
                    syn_cells.append(int(cells[sid]))
                    syn_perms.append(int(perms[sid]))
            indptr.append(len(syn_cells))
        st = self._state
        remap_segs = lambda a: np.asarray(  # noqa: E731
            [remap[int(s)] for s in a if int(s) in remap], dtype=np.int64)
        match_keep = [i for i, s in enumerate(st.matching_segments) if int(s) in remap]
        return {
            "params": self.params,
            "step": self._step_count,
            "dead_cells": np.flatnonzero(self._dead).astype(np.int64),
            "seg_owner": owners[live].astype(np.int64),
            "seg_last_use": self._seg_last_use.view()[live].astype(np.int64),
            "syn_indptr": np.asarray(indptr, dtype=np.int64),
            "syn_cell": np.asarray(syn_cells, dtype=np.int64),
            "syn_perm": np.asarray(syn_perms, dtype=np.int64),
            "rng_state": self._rng.bit_generator.state,
            "state": {
                "step": st.step,
                "active_columns": st.active_columns.astype(np.int64),
                "active_cells": st.active_cells.astype(np.int64),
                "winner_cells": st.winner_cells.astype(np.int64),
                "predictive_cells": st.predictive_cells.astype(np.int64),
                "burst_columns": st.burst_columns.astype(np.int64),
                "active_segments": remap_segs(st.active_segments),
                "matching_segments": remap_segs(st.matching_segments),
                "matching_potential": st.matching_potential[match_keep].astype(np.int64),
            },
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "TemporalMemory":
        tm = cls(snap["params"])
        tm._step_count = int(snap["step"])
        dead = np.asarray(snap["dead_cells"], dtype=np.int64)
        tm._dead[dead] = True
        indptr = snap["syn_indptr"]
        syn_cell = snap["syn_cell"]
        syn_perm = snap["syn_perm"]
        for i, owner in enumerate(snap["seg_owner"]):
            seg = len(tm._seg_synapses)
            tm._seg_owner.append(int(owner))
            tm._seg_last_use.append(int(snap["seg_last_use"][i]))
            tm._seg_synapses.append([])
            tm._cell_segments[int(owner)].append(seg)
            tm._cell_segment_count[int(owner)] += 1
            for j in range(int(indptr[i]), int(indptr[i + 1])):
                tm._add_synapse(seg, int(syn_cell[j]), int(syn_perm[j]))
        tm._rng.bit_generator.state = snap["rng_state"]
        s = snap["state"]
        arr32 = lambda key: np.asarray(s[key], dtype=np.int32)  # noqa: E731
        tm._state = TmState(
            step=int(s["step"]),
            active_columns=arr32("active_columns"),
            active_cells=arr32("active_cells"),
            winner_cells=arr32("winner_cells"),
            predictive_cells=arr32("predictive_cells"),
            burst_columns=arr32("burst_columns"),
            active_segments=arr32("active_segments"),
            matching_segments=arr32("matching_segments"),
            matching_potential=arr32("matching_potential"),
        )
        return tm
