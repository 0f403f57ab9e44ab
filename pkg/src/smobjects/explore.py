"""The exploration protocol: learn from the first scene, verify on every later one.

The first scene is scanned exhaustively and its salient states frozen into
memory. After each scene change the agent re-scans, and every stored
transition (i, j) is checked optimistically: the record is valid when any
salient occurrence of state i, translated by the record's motor delta,
lands in the motor range and reads state j. Verdicts feed the counters via
``reinforce``.

Optimistic matching makes verdicts symmetric and reduces verification to a
shared-translation test. A salient occurrence of catalog state k at scene
position p witnesses the translation p - origin(k); records (i, j) and
(j, i) are valid exactly when states i and j share a witnessed translation.
That view lets one scene scan settle all records at once instead of probing
pairs one by one.
"""

from dataclasses import dataclass

import numpy as np

from .agent import SensorSpec, salient_positions, salient_scan
from .memory import (
    StateCatalog,
    TransitionStore,
    build_catalog,
    pair_indices,
    reduce,
    reinforce,
)
from .worldsim import Scene, WorldSpec, generate_initial_scene, mutate_scene


@dataclass(frozen=True, eq=False)
class SceneEvent:
    """What happened at one scene: geometry summary plus packed verdicts."""

    index: int
    env_changed: bool
    objects: tuple[tuple[int, int, int], ...]
    verdict_bits: bytes | None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Everything a finished run produced."""

    catalog: StateCatalog
    store: TransitionStore
    c: np.ndarray
    t: np.ndarray
    first_scene: Scene
    final_scene: Scene
    events: tuple[SceneEvent, ...]
    snapshots: dict


class ReplayError(ValueError):
    """Raised when an event log cannot be replayed."""


def explore_first_scene(
    scene: Scene, sensor: SensorSpec
) -> tuple[StateCatalog, TransitionStore]:
    """Scan the first scene and freeze its salient states into memory."""
    return build_catalog(salient_positions(scene, sensor))


def verify_scene(
    scene: Scene,
    sensor: SensorSpec,
    catalog: StateCatalog,
    store: TransitionStore,
) -> np.ndarray:
    """One boolean verdict per record for a newly explored scene.

    Record (i, j) is valid when some salient position p reads state i, the
    position p + dm lies in the motor range, and reading there gives state
    j. Because saliency depends only on cell values, the j-side reading is
    itself salient, so both sides can be matched against the scene's
    salient scan and the test becomes a shared-translation check.
    """
    positions, readings = salient_scan(scene, sensor)
    origins = catalog.origin_array()
    groups: dict[tuple[int, int], list[int]] = {}
    for pos, values in zip(positions, readings):
        k = catalog.index.get(tuple(int(v) for v in values))
        if k is None:
            continue
        shift = (int(pos[0]) - int(origins[k, 0]), int(pos[1]) - int(origins[k, 1]))
        groups.setdefault(shift, []).append(k)
    n = store.n_states
    witnessed = np.zeros((n, n), dtype=bool)
    for members in groups.values():
        m = np.asarray(members, dtype=np.int64)
        witnessed[np.ix_(m, m)] = True
    return witnessed[store.i_idx, store.j_idx]


def _object_summary(scene: Scene) -> tuple[tuple[int, int, int], ...]:
    return tuple((o.position[0], o.position[1], o.z) for o in scene.objects)


def run_experiment(
    spec: WorldSpec,
    sensor: SensorSpec,
    n_changes: int,
    rng: np.random.Generator,
    snapshots=(),
) -> ExperimentResult:
    """Run one full experiment: initial scene, then n_changes mutate/verify rounds.

    ``snapshots`` lists scene indices at which a copy of the probability
    matrix C is stored (index 0 is the initial scene).
    """
    if n_changes < 0:
        raise ValueError(f"n_changes must be >= 0, got {n_changes}")
    snapshot_at = set(int(s) for s in snapshots)
    scene = generate_initial_scene(spec, rng)
    first_scene = scene
    catalog, store = explore_first_scene(scene, sensor)
    events = [SceneEvent(0, True, _object_summary(scene), None)]
    stored: dict[int, np.ndarray] = {}
    if 0 in snapshot_at:
        stored[0] = reduce(store, catalog)[0]
    for step in range(1, n_changes + 1):
        prev_env = scene.env
        scene = mutate_scene(scene, spec, rng)
        verdicts = verify_scene(scene, sensor, catalog, store)
        reinforce(store, verdicts)
        events.append(
            SceneEvent(
                step,
                scene.env is not prev_env,
                _object_summary(scene),
                np.packbits(verdicts).tobytes(),
            )
        )
        if step in snapshot_at:
            stored[step] = reduce(store, catalog)[0]
    c, t = reduce(store, catalog)
    return ExperimentResult(
        catalog=catalog,
        store=store,
        c=c,
        t=t,
        first_scene=first_scene,
        final_scene=scene,
        events=tuple(events),
        snapshots=stored,
    )


def events_to_log(result: ExperimentResult) -> list[str]:
    """Serialize a run's events as a line-oriented log."""
    lines = [
        "# scene event log",
        f"states={len(result.catalog)} records={len(result.store)} "
        f"scenes={len(result.events)}",
    ]
    for ev in result.events:
        objs = ";".join(f"{r}:{c}:{z}" for r, c, z in ev.objects) or "-"
        bits = ev.verdict_bits.hex() if ev.verdict_bits else "-"
        lines.append(
            f"scene={ev.index} env={int(ev.env_changed)} objects={objs} verdicts={bits}"
        )
    return lines


def _parse_kv(field: str, key: str, line_no: int) -> str:
    if not field.startswith(key + "="):
        raise ReplayError(f"line {line_no}: expected '{key}=', got {field!r}")
    return field[len(key) + 1 :]


def replay(lines) -> np.ndarray:
    """Recompute the final C from an event log; exact by construction.

    Counters start from the first scene (all records valid and explored
    once) and accumulate each later scene's verdict bitmap. Malformed input
    raises ReplayError naming the offending line.
    """
    rows = [line.rstrip("\n") for line in lines]
    rows = [(n + 1, line) for n, line in enumerate(rows) if line.strip()]
    rows = [(n, line) for n, line in rows if not line.lstrip().startswith("#")]
    if not rows:
        raise ReplayError("line 1: empty log")
    line_no, header = rows[0]
    parts = header.split()
    if len(parts) != 3:
        raise ReplayError(f"line {line_no}: malformed header {header!r}")
    n_states = int(_parse_kv(parts[0], "states", line_no))
    n_records = int(_parse_kv(parts[1], "records", line_no))
    n_scenes = int(_parse_kv(parts[2], "scenes", line_no))
    if n_records != n_states * (n_states - 1):
        raise ReplayError(
            f"line {line_no}: {n_records} records inconsistent with {n_states} states"
        )
    valid = np.ones(n_records, dtype=np.int64)
    explored = np.ones(n_records, dtype=np.int64)
    seen = 0
    for line_no, line in rows[1:]:
        parts = line.split()
        if len(parts) != 4:
            raise ReplayError(f"line {line_no}: malformed scene line {line!r}")
        index = int(_parse_kv(parts[0], "scene", line_no))
        _parse_kv(parts[1], "env", line_no)
        _parse_kv(parts[2], "objects", line_no)
        bits = _parse_kv(parts[3], "verdicts", line_no)
        if index != seen:
            raise ReplayError(f"line {line_no}: expected scene {seen}, got {index}")
        if index == 0:
            if bits != "-":
                raise ReplayError(f"line {line_no}: first scene carries no verdicts")
        else:
            if bits == "-":
                if n_records > 0:
                    raise ReplayError(f"line {line_no}: missing verdict bitmap")
                verdicts = np.zeros(0, dtype=bool)
            else:
                try:
                    packed = bytes.fromhex(bits)
                except ValueError as exc:
                    raise ReplayError(f"line {line_no}: bad verdict hex: {exc}") from exc
                if len(packed) * 8 < n_records:
                    raise ReplayError(
                        f"line {line_no}: bitmap holds {len(packed) * 8} bits, "
                        f"need {n_records}"
                    )
                unpacked = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))
                verdicts = unpacked[:n_records].astype(bool)
            valid += verdicts
            explored += 1
        seen += 1
    if seen != n_scenes:
        raise ReplayError(
            f"line {line_no}: log holds {seen} scene lines, "
            f"header promised {n_scenes}"
        )
    c = np.ones((n_states, n_states), dtype=np.float64)
    if n_records > 0:
        i_idx, j_idx = pair_indices(n_states)
        c[i_idx, j_idx] = valid / explored
    return c
