"""Plain-text pixmap (P3) output and the fixed colormaps used by exporters."""

import numpy as np


def write_p3(path, pixels: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 RGB array as a plain-text P3 pixmap.

    One image row per text line; deterministic byte-for-byte output.
    """
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) pixel array, got shape {pixels.shape}")
    h, w = pixels.shape[:2]
    with open(path, "w") as fh:
        fh.write(f"P3\n{w} {h}\n255\n")
        for row in pixels:
            fh.write(" ".join(str(int(v)) for v in row.reshape(-1)))
            fh.write("\n")


def gray_pixels(values: np.ndarray, alphabet: int) -> np.ndarray:
    """Map integer cell values in [1, alphabet] to gray RGB levels in [0, 255]."""
    values = np.asarray(values)
    span = max(alphabet - 1, 1)
    level = np.rint((values - 1) * 255.0 / span).astype(np.int64)
    level = np.clip(level, 0, 255).astype(np.uint8)
    return np.repeat(level[..., None], 3, axis=-1)


def blue_red_pixels(values: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] linearly onto a 256-level blue-to-red colormap."""
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    r = np.rint(values * 255.0).astype(np.uint8)
    out = np.zeros(values.shape + (3,), dtype=np.uint8)
    out[..., 0] = r
    out[..., 2] = 255 - r
    return out
