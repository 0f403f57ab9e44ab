"""Grid worlds: a random integer-valued environment field plus movable rigid patches.

A world is always handled as a 2D grid; one-dimensional worlds are the
degenerate case with a single row. Cell values are integers in
``[1, alphabet]``. Each scene composes the environment field with a set of
object patches painted in stacking order (higher ``z`` occludes lower).

All randomness flows through one caller-supplied ``numpy`` generator. The
draw order is fixed and documented on each operation so that equal seeds
give bit-identical scene sequences.
"""

from dataclasses import dataclass

import numpy as np

from .ppm import gray_pixels, write_p3

PLACEMENT_ATTEMPTS = 10_000


class PlacementError(RuntimeError):
    """Raised when no non-overlapping initial placement is found."""


def _as_extents(value) -> tuple[int, int]:
    """Normalize an extent spec (int, 1-tuple or 2-tuple) to (rows, cols)."""
    if isinstance(value, (int, np.integer)):
        return (1, int(value))
    ext = tuple(int(v) for v in value)
    if len(ext) == 1:
        return (1, ext[0])
    if len(ext) == 2:
        return ext
    raise ValueError(f"extents must have 1 or 2 components, got {value!r}")


@dataclass(frozen=True)
class ObjectSpec:
    """Extents of a rigid object patch."""

    extents: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "extents", _as_extents(self.extents))
        if any(e < 1 for e in self.extents):
            raise ValueError(f"object extents must be >= 1, got {self.extents}")


@dataclass(frozen=True)
class WorldSpec:
    """World geometry, value alphabet, objects and mutation parameters."""

    extents: tuple[int, int]
    alphabet: int
    objects: tuple[ObjectSpec, ...] = ()
    env_change_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "extents", _as_extents(self.extents))
        object.__setattr__(
            self,
            "objects",
            tuple(o if isinstance(o, ObjectSpec) else ObjectSpec(o) for o in self.objects),
        )
        if self.alphabet < 2:
            raise ValueError(f"alphabet must be >= 2, got {self.alphabet}")
        if any(e < 1 for e in self.extents):
            raise ValueError(f"world extents must be >= 1, got {self.extents}")
        for obj in self.objects:
            if obj.extents[0] > self.extents[0] or obj.extents[1] > self.extents[1]:
                raise ValueError(
                    f"object {obj.extents} does not fit inside world {self.extents}"
                )
        if not 0.0 <= self.env_change_prob <= 1.0:
            raise ValueError(
                f"env_change_prob must be in [0, 1], got {self.env_change_prob}"
            )


@dataclass(frozen=True, eq=False)
class GridObject:
    """A placed object: immutable patch values, world position, stacking rank."""

    patch: np.ndarray
    position: tuple[int, int]
    z: int

    def __post_init__(self):
        self.patch.setflags(write=False)

    @property
    def extents(self) -> tuple[int, int]:
        return self.patch.shape


@dataclass(frozen=True, eq=False)
class Scene:
    """One world configuration: environment field, objects, composed cache."""

    env: np.ndarray
    objects: tuple[GridObject, ...]
    composed: np.ndarray

    @property
    def extents(self) -> tuple[int, int]:
        return self.env.shape


def compose(env: np.ndarray, objects: tuple[GridObject, ...]) -> Scene:
    """Build a Scene by painting objects over the environment in ascending z."""
    h, w = env.shape
    for obj in objects:
        r, c = obj.position
        ph, pw = obj.extents
        if r < 0 or c < 0 or r + ph > h or c + pw > w:
            raise ValueError(
                f"object at {obj.position} with extents {obj.extents} "
                f"leaves the {env.shape} world"
            )
    composed = env.copy()
    for obj in sorted(objects, key=lambda o: o.z):
        r, c = obj.position
        ph, pw = obj.extents
        composed[r : r + ph, c : c + pw] = obj.patch
    env.setflags(write=False)
    composed.setflags(write=False)
    return Scene(env=env, objects=tuple(objects), composed=composed)


def cell(scene: Scene, pos: tuple[int, int]) -> int:
    """Composed value at a world coordinate; raises on out-of-range coordinates."""
    r, c = pos
    h, w = scene.extents
    if not (0 <= r < h and 0 <= c < w):
        raise ValueError(f"coordinate {pos} outside world extents {scene.extents}")
    return int(scene.composed[r, c])


def origin_counts(world: tuple[int, int], patch: tuple[int, int]) -> tuple[int, int]:
    """Number of legal patch origins per dimension."""
    return (world[0] - patch[0] + 1, world[1] - patch[1] + 1)


def _rects_overlap(a_pos, a_ext, b_pos, b_ext) -> bool:
    return (
        a_pos[0] < b_pos[0] + b_ext[0]
        and b_pos[0] < a_pos[0] + a_ext[0]
        and a_pos[1] < b_pos[1] + b_ext[1]
        and b_pos[1] < a_pos[1] + a_ext[1]
    )


def _draw_env(spec: WorldSpec, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(1, spec.alphabet + 1, size=spec.extents, dtype=np.int64)


def generate_initial_scene(spec: WorldSpec, rng: np.random.Generator) -> Scene:
    """Draw the first scene: random environment, random patches, disjoint placement.

    Draw order: environment field, then each object's patch values in
    ``WorldSpec.objects`` order, then joint rejection sampling of all object
    positions (each attempt draws row then column per object) until no two
    objects overlap. Initial stacking order follows ``WorldSpec.objects``.
    """
    env = _draw_env(spec, rng)
    patches = [
        rng.integers(1, spec.alphabet + 1, size=obj.extents, dtype=np.int64)
        for obj in spec.objects
    ]
    counts = [origin_counts(spec.extents, obj.extents) for obj in spec.objects]
    positions = None
    for _ in range(PLACEMENT_ATTEMPTS):
        candidate = [
            (int(rng.integers(0, nr)), int(rng.integers(0, nc))) for nr, nc in counts
        ]
        ok = True
        for a in range(len(candidate)):
            for b in range(a + 1, len(candidate)):
                if _rects_overlap(
                    candidate[a],
                    spec.objects[a].extents,
                    candidate[b],
                    spec.objects[b].extents,
                ):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            positions = candidate
            break
    if positions is None:
        raise PlacementError(
            f"cannot place {len(spec.objects)} objects without overlap "
            f"in a {spec.extents} world after {PLACEMENT_ATTEMPTS} attempts"
        )
    objects = tuple(
        GridObject(patch=patches[i], position=positions[i], z=i)
        for i in range(len(spec.objects))
    )
    return compose(env, objects)


def mutate_scene(scene: Scene, spec: WorldSpec, rng: np.random.Generator) -> Scene:
    """Move every object and possibly redraw the environment; returns a new Scene.

    Draw order: for each object in index order, one integer selecting a
    uniformly random legal position other than its current one (objects may
    now overlap); then, if the scene holds more than one object, a fresh
    random stacking order; then, if ``env_change_prob > 0``, one uniform
    draw deciding whether the entire environment field is resampled.

    The returned Scene shares the env array with the input when the
    environment did not change.
    """
    new_objects = []
    for obj in scene.objects:
        nr, nc = origin_counts(spec.extents, obj.extents)
        n_pl = nr * nc
        if n_pl == 1:
            new_objects.append(obj)
            continue
        cur = obj.position[0] * nc + obj.position[1]
        u = int(rng.integers(0, n_pl - 1))
        if u >= cur:
            u += 1
        new_objects.append(
            GridObject(patch=obj.patch, position=(u // nc, u % nc), z=obj.z)
        )
    if len(new_objects) > 1:
        ranks = rng.permutation(len(new_objects))
        new_objects = [
            GridObject(patch=o.patch, position=o.position, z=int(ranks[i]))
            for i, o in enumerate(new_objects)
        ]
    env = scene.env
    if spec.env_change_prob > 0 and rng.random() < spec.env_change_prob:
        env = _draw_env(spec, rng)
    return compose(env, tuple(new_objects))


def scene_to_csv(scene: Scene, path) -> None:
    """Write the composed grid as row-major integer CSV."""
    np.savetxt(path, scene.composed, fmt="%d", delimiter=",")


def scene_to_ppm(scene: Scene, path, alphabet: int) -> None:
    """Write the composed grid as a grayscale P3 pixmap."""
    write_p3(path, gray_pixels(scene.composed, alphabet))
