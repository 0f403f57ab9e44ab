"""Sensor readout over the motor space and saliency filtering.

The agent's motor configuration is the position of a rectangular sensor
aperture on the world grid; the legal motor range contains every position
where the aperture lies fully inside. A sensory state is the flattened
tuple of cell values under the aperture (row-major scan order), and a state
is salient when its dot product with a fixed contrast kernel strictly
exceeds a threshold. Salient states are the only ones the agent memorizes.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .worldsim import Scene, _as_extents


@dataclass(frozen=True, eq=False)
class SensorSpec:
    """Aperture extents, contrast kernel and saliency threshold."""

    aperture: tuple[int, int]
    kernel: np.ndarray
    threshold: float

    def __post_init__(self):
        object.__setattr__(self, "aperture", _as_extents(self.aperture))
        kernel = np.array(self.kernel, dtype=np.float64)
        if kernel.ndim == 1:
            kernel = kernel[None, :]
        kernel.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)
        if kernel.shape != self.aperture:
            raise ValueError(
                f"kernel shape {kernel.shape} does not match aperture {self.aperture}"
            )

    @property
    def size(self) -> int:
        """Number of cells read per sensory state."""
        return self.aperture[0] * self.aperture[1]


def contrast_sensor_1d() -> SensorSpec:
    """Three-cell line sensor with a center-surround contrast kernel."""
    kernel = np.array([[-0.5, 1.0, -0.5]])
    assert kernel.sum() == 0.0
    return SensorSpec(aperture=(1, 3), kernel=kernel, threshold=0.4)


def contrast_sensor_2d() -> SensorSpec:
    """3x3 patch sensor with a center-surround contrast kernel."""
    kernel = np.array([
        [-1.0, -3.0, -1.0],
        [-3.0, 16.0, -3.0],
        [-1.0, -3.0, -1.0],
    ]) / 16.0
    assert kernel.sum() == 0.0
    return SensorSpec(aperture=(3, 3), kernel=kernel, threshold=0.4)


def motor_range(extents: tuple[int, int], sensor: SensorSpec) -> list[tuple[int, int]]:
    """All aperture positions fully inside the world, in row-major order."""
    extents = _as_extents(extents)
    nr = extents[0] - sensor.aperture[0] + 1
    nc = extents[1] - sensor.aperture[1] + 1
    if nr < 1 or nc < 1:
        raise ValueError(
            f"aperture {sensor.aperture} does not fit in world extents {extents}"
        )
    return [(r, c) for r in range(nr) for c in range(nc)]


def read_sensor(scene: Scene, m: tuple[int, int], sensor: SensorSpec) -> tuple[int, ...]:
    """Sensory state at motor position m: aperture cell values, row-major."""
    r, c = m
    ah, aw = sensor.aperture
    h, w = scene.extents
    if not (0 <= r <= h - ah and 0 <= c <= w - aw):
        raise ValueError(
            f"motor position {m} puts the {sensor.aperture} aperture "
            f"outside the {scene.extents} world"
        )
    window = scene.composed[r : r + ah, c : c + aw]
    return tuple(int(v) for v in window.reshape(-1))


def filter_response(values, sensor: SensorSpec) -> float:
    """Dot product of a sensory state with the contrast kernel."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size != sensor.size:
        raise ValueError(f"state length {v.size} does not match kernel size {sensor.size}")
    return float(v @ sensor.kernel.reshape(-1))


def is_salient(values, sensor: SensorSpec) -> bool:
    """True when the filter response strictly exceeds the threshold."""
    return filter_response(values, sensor) > sensor.threshold


def response_map(scene: Scene, sensor: SensorSpec) -> np.ndarray:
    """Filter responses over the whole motor range as a 2D array."""
    windows = sliding_window_view(scene.composed, sensor.aperture)
    return np.tensordot(windows.astype(np.float64), sensor.kernel, axes=([2, 3], [0, 1]))


def salient_scan(scene: Scene, sensor: SensorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Positions and readings of all salient states, as arrays.

    Returns (positions, readings): an (S, 2) int array of aperture origins in
    row-major scan order and the matching (S, K) int array of cell values.
    """
    resp = response_map(scene, sensor)
    rows, cols = np.nonzero(resp > sensor.threshold)
    windows = sliding_window_view(scene.composed, sensor.aperture)
    readings = windows[rows, cols].reshape(len(rows), sensor.size)
    positions = np.stack([rows, cols], axis=1).astype(np.int64)
    return positions, np.ascontiguousarray(readings)


def salient_positions(
    scene: Scene, sensor: SensorSpec
) -> list[tuple[tuple[int, int], tuple[int, ...]]]:
    """Exhaustive scan of the motor range, keeping salient states only.

    Returns (position, state) pairs in row-major scan order.
    """
    positions, readings = salient_scan(scene, sensor)
    return [
        ((int(p[0]), int(p[1])), tuple(int(v) for v in s))
        for p, s in zip(positions, readings)
    ]


def saliency_to_csv(scene: Scene, sensor: SensorSpec, path) -> None:
    """Write one line per salient position: row, col, cell values, response."""
    resp = response_map(scene, sensor)
    with open(path, "w") as fh:
        for (r, c), state in salient_positions(scene, sensor):
            cells = ",".join(str(v) for v in state)
            fh.write(f"{r},{c},{cells},{resp[r, c]:.9f}\n")


def saliency_to_ppm(scene: Scene, sensor: SensorSpec, path, alphabet: int) -> None:
    """Write the scene in gray with salient aperture origins marked red."""
    from .ppm import gray_pixels, write_p3

    pixels = gray_pixels(scene.composed, alphabet).copy()
    positions, _ = salient_scan(scene, sensor)
    for r, c in positions:
        pixels[r, c] = (255, 0, 0)
    write_p3(path, pixels)
