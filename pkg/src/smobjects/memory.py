"""The agent's transition memory and its reduction to matrices C and T.

Memory is a catalog of unique salient sensory states discovered in the
first scene, plus one transition record per ordered state pair (i, j) with
i != j. A record carries the motor delta between the two states'
first-scene positions and two integer counters: the number of scenes in
which the transition was verified valid and the number of scenes explored.
Probabilities are always derived as valid / explored, never stored, so the
bookkeeping stays exact.

Records live in flat arrays rather than per-record objects; catalogs of a
thousand states produce around a million records and per-scene updates must
stay vectorized. The flat layout is i-major: records of start state i
occupy the slice [i * (I - 1), (i + 1) * (I - 1)) with j ascending and i
itself skipped.
"""

from dataclasses import dataclass, field

import numpy as np


class NothingToLearnError(RuntimeError):
    """Raised when the first scene yields no usable salient state."""


@dataclass(frozen=True, eq=False)
class StateCatalog:
    """Unique first-scene salient states, frozen after construction.

    Origins are the states' first-scene motor positions. They are kept for
    motor deltas and ground-truth labeling; the agent's inference never
    reads them as world coordinates.
    """

    states: tuple[tuple[int, ...], ...]
    origins: tuple[tuple[int, int], ...]
    dropped_occurrences: int
    index: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def dm(self, i: int, j: int) -> tuple[int, int]:
        """Motor delta from state i to state j."""
        oi, oj = self.origins[i], self.origins[j]
        return (oj[0] - oi[0], oj[1] - oi[1])

    def origin_array(self) -> np.ndarray:
        return np.array(self.origins, dtype=np.int64).reshape(len(self.states), 2)


@dataclass(frozen=True)
class TransitionRecord:
    """One ordered transition (s_i, dm, s_j) with its scene counters."""

    i: int
    j: int
    dm: tuple[int, int]
    valid_scenes: int
    explored_scenes: int

    @property
    def probability(self) -> float:
        return self.valid_scenes / self.explored_scenes


def pair_indices(n_states: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-record (i, j) catalog indices in flat record order."""
    i_idx = np.repeat(np.arange(n_states, dtype=np.int64), n_states - 1)
    r = np.tile(np.arange(n_states - 1, dtype=np.int64), n_states)
    j_idx = np.where(r < i_idx, r, r + 1)
    return i_idx, j_idx


def flat_index(i: int, j: int, n_states: int) -> int:
    """Flat record index of the ordered pair (i, j)."""
    if i == j:
        raise ValueError("records never pair a state with itself")
    return i * (n_states - 1) + (j if j < i else j - 1)


class TransitionStore:
    """All transition records as flat counter arrays."""

    def __init__(self, n_states: int):
        self.n_states = n_states
        n_records = n_states * (n_states - 1)
        self.valid = np.ones(n_records, dtype=np.int64)
        self.explored = np.ones(n_records, dtype=np.int64)
        self.i_idx, self.j_idx = pair_indices(n_states)

    def __len__(self) -> int:
        return len(self.valid)

    def probabilities(self) -> np.ndarray:
        return self.valid / self.explored

    def records(self, catalog: StateCatalog):
        """Iterate records as TransitionRecord views (reading convenience)."""
        for r in range(len(self.valid)):
            i, j = int(self.i_idx[r]), int(self.j_idx[r])
            yield TransitionRecord(
                i=i,
                j=j,
                dm=catalog.dm(i, j),
                valid_scenes=int(self.valid[r]),
                explored_scenes=int(self.explored[r]),
            )


def build_catalog(salient) -> tuple[StateCatalog, TransitionStore]:
    """Freeze the first scene's salient states into memory.

    ``salient`` is the (position, state) list of the first-scene scan. Any
    state value tuple that occurs at more than one position is dropped
    entirely (every occurrence), because a duplicated tuple has no single
    well-defined motor position; the number of dropped occurrences is kept
    on the catalog for diagnostics. One record per ordered pair of the
    surviving states is created, counted valid and explored once.
    """
    if not salient:
        raise NothingToLearnError("first scene produced no salient state")
    counts: dict[tuple[int, ...], int] = {}
    for _, state in salient:
        counts[state] = counts.get(state, 0) + 1
    states = []
    origins = []
    dropped = 0
    for pos, state in salient:
        if counts[state] == 1:
            states.append(state)
            origins.append(pos)
        else:
            dropped += 1
    if not states:
        raise NothingToLearnError(
            f"all {dropped} first-scene salient states were duplicated tuples"
        )
    catalog = StateCatalog(
        states=tuple(states),
        origins=tuple(origins),
        dropped_occurrences=dropped,
        index={s: k for k, s in enumerate(states)},
    )
    return catalog, TransitionStore(len(states))


def reinforce(store: TransitionStore, verdicts: np.ndarray) -> None:
    """Fold one explored scene's verdicts into the counters."""
    verdicts = np.asarray(verdicts)
    if verdicts.shape != store.valid.shape:
        raise ValueError(
            f"expected {store.valid.shape[0]} verdicts, got {verdicts.shape}"
        )
    store.valid += verdicts.astype(np.int64)
    store.explored += 1


def reduce(store: TransitionStore, catalog: StateCatalog) -> tuple[np.ndarray, np.ndarray]:
    """Collapse the record store into matrices C and T.

    C(i, j) holds the probability of the (i, j) record with the diagonal
    fixed at 1 (a zero-delta self-transition is trivially valid). T(i, j)
    holds the motor delta, an antisymmetric (I, I, 2) array.
    """
    n = store.n_states
    c = np.ones((n, n), dtype=np.float64)
    if len(store) > 0:
        c[store.i_idx, store.j_idx] = store.probabilities()
    origins = catalog.origin_array()
    t = origins[None, :, :] - origins[:, None, :]
    return c, t


def serialize_records(store: TransitionStore, catalog: StateCatalog) -> list[str]:
    """One text line per record: i, j, delta row, delta col, valid, explored."""
    lines = []
    origins = catalog.origin_array()
    dm = origins[store.j_idx] - origins[store.i_idx]
    for r in range(len(store)):
        lines.append(
            f"{store.i_idx[r]} {store.j_idx[r]} {dm[r, 0]} {dm[r, 1]} "
            f"{store.valid[r]} {store.explored[r]}"
        )
    return lines


def parse_records(lines, n_states: int) -> TransitionStore:
    """Rebuild a store from its serialized lines; inverse of serialize_records."""
    store = TransitionStore(n_states)
    expected = len(store)
    rows = [line for line in lines if line.strip()]
    if len(rows) != expected:
        raise ValueError(f"expected {expected} record lines, got {len(rows)}")
    for r, line in enumerate(rows):
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"record line {r + 1}: expected 6 fields, got {len(parts)}")
        i, j, _, _, valid, explored = (int(p) for p in parts)
        if i != store.i_idx[r] or j != store.j_idx[r]:
            raise ValueError(
                f"record line {r + 1}: pair ({i}, {j}) out of order for flat layout"
            )
        store.valid[r] = valid
        store.explored[r] = explored
    return store


def matrix_to_csv(matrix: np.ndarray, path) -> None:
    """Write a real matrix as CSV with fixed 9-decimal formatting."""
    np.savetxt(path, matrix, fmt="%.9f", delimiter=",")


def motor_matrix_to_csv(t: np.ndarray, path) -> None:
    """Write the motor delta matrix as CSV with 'dr;dc' cells."""
    n = t.shape[0]
    with open(path, "w") as fh:
        for i in range(n):
            fh.write(",".join(f"{t[i, j, 0]};{t[i, j, 1]}" for j in range(n)))
            fh.write("\n")
