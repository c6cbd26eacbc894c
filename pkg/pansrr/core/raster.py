"""
Raster data model: single-band planes and multiband volumes.

Planes are immutable float64 arrays laid out as (height, width); row index
is y, column index is x. Everything downstream relies on planes never being
mutated after construction, so the backing array is always a private,
read-only copy.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from PIL import Image

from pansrr.errors import RasterError

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]


def _first_bad_index(arr: np.ndarray) -> Optional[int]:
    bad = np.flatnonzero(~np.isfinite(arr))
    return int(bad[0]) if bad.size else None


@dataclass(frozen=True, eq=False)
class ImagePlane:
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise RasterError(f"a plane must be a non-empty 2D array, got shape {arr.shape}")
        bad = _first_bad_index(arr)
        if bad is not None:
            raise RasterError(f"non-finite sample at pixel index {bad}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_array(cls, array: ArrayLike) -> "ImagePlane":
        return cls(np.asarray(array))

    @classmethod
    def from_flat(cls, width: int, height: int, values: Iterable[float]) -> "ImagePlane":
        """Build a plane from row-major samples."""
        flat = np.asarray(list(values), dtype=np.float64)
        if width < 1 or height < 1 or flat.size != width * height:
            raise RasterError(
                f"expected {width}x{height}={width * height} samples, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @classmethod
    def zeros(cls, height: int, width: int) -> "ImagePlane":
        return cls(np.zeros((height, width)))

    @property
    def array(self) -> np.ndarray:
        return self.samples

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def __repr__(self) -> str:
        return f"ImagePlane({self.height}x{self.width})"


@dataclass(frozen=True, eq=False)
class MultibandVolume:
    bands: tuple[ImagePlane, ...]
    band_labels: tuple[str, ...] = ()

    def __post_init__(self):
        bands = tuple(self.bands)
        if not bands:
            raise RasterError("a volume needs at least one band")
        if any(not isinstance(b, ImagePlane) for b in bands):
            raise RasterError("volume bands must be ImagePlane instances")
        shape = bands[0].shape
        for index, band in enumerate(bands):
            if band.shape != shape:
                raise RasterError(f"band {index} is {band.shape}, expected {shape}")
        labels = tuple(self.band_labels) or tuple(f"b{i + 1}" for i in range(len(bands)))
        if len(labels) != len(bands):
            raise RasterError(f"{len(labels)} labels for {len(bands)} bands")
        if len(set(labels)) != len(labels):
            raise RasterError("band labels must be unique")
        object.__setattr__(self, "bands", bands)
        object.__setattr__(self, "band_labels", labels)

    @classmethod
    def from_arrays(
        cls, arrays: Iterable[ArrayLike], labels: Optional[Sequence[str]] = None
    ) -> "MultibandVolume":
        return cls(tuple(ImagePlane(np.asarray(a)) for a in arrays), tuple(labels or ()))

    def band(self, index: int) -> ImagePlane:
        return self.bands[index]

    def map_bands(self, fn: Callable[[ImagePlane], ImagePlane]) -> "MultibandVolume":
        return MultibandVolume(tuple(fn(b) for b in self.bands), self.band_labels)

    def stack(self) -> np.ndarray:
        """Bands as a (L, height, width) copy."""
        return np.stack([b.samples for b in self.bands])

    @property
    def band_count(self) -> int:
        return len(self.bands)

    @property
    def shape(self) -> tuple[int, int]:
        return self.bands[0].shape

    @property
    def width(self) -> int:
        return self.bands[0].width

    @property
    def height(self) -> int:
        return self.bands[0].height

    def __repr__(self) -> str:
        return f"MultibandVolume({self.band_count} bands, {self.height}x{self.width})"


# =============================================================================
# OPERATIONS
# =============================================================================


def normalize(plane: Union[ImagePlane, ArrayLike], source_max: float) -> ImagePlane:
    """Divide every sample by ``source_max`` (e.g. 255 for 8-bit imports).

    Args:
        plane: plane or raw 2D samples; raw samples may come straight from a
            decoder, so non-finite values are reported here by pixel index.
        source_max: positive scale of the source encoding.

    Returns:
        A new plane; the input is left untouched.

    Example:
        >>> normalize(ImagePlane.from_flat(4, 1, [0, 51, 102, 255]), 255).samples
        array([[0. , 0.2, 0.4, 1. ]])
    """
    if not source_max > 0:
        raise RasterError(f"source_max must be positive, got {source_max}")
    arr = plane.samples if isinstance(plane, ImagePlane) else np.asarray(plane, dtype=np.float64)
    bad = _first_bad_index(arr)
    if bad is not None:
        raise RasterError(f"non-finite sample at pixel index {bad}")
    return ImagePlane(arr / float(source_max))


def circular_shift_plane(plane: ImagePlane, dx: int, dy: int) -> ImagePlane:
    """Integer circular shift: ``out[y, x] = plane[y + dy, x + dx]`` (wrapped)."""
    return ImagePlane(np.roll(plane.samples, (-int(dy), -int(dx)), axis=(0, 1)))


# =============================================================================
# PNG INTERCHANGE
# =============================================================================

_MODE_MAX = {"L": 255.0, "I;16": 65535.0, "I;16B": 65535.0, "I;16L": 65535.0, "I": 65535.0}


def load_png(path: Union[str, Path]) -> ImagePlane:
    """Read a grayscale PNG into [0, 1]. Colour images are converted to luminance."""
    with Image.open(path) as img:
        if img.mode not in _MODE_MAX:
            img = img.convert("L")
        source_max = _MODE_MAX[img.mode]
        arr = np.asarray(img, dtype=np.float64)
    return normalize(arr, source_max)


def save_png(plane: ImagePlane, path: Union[str, Path], bit_depth: int = 8) -> Path:
    """Clip to [0, 1], quantise and write an 8- or 16-bit grayscale PNG."""
    if bit_depth not in (8, 16):
        raise RasterError(f"bit_depth must be 8 or 16, got {bit_depth}")
    path = Path(path)
    clipped = np.clip(plane.samples, 0.0, 1.0)
    if bit_depth == 8:
        quantised = np.round(clipped * 255.0).astype(np.uint8)
    else:
        quantised = np.round(clipped * 65535.0).astype(np.uint16)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(quantised).save(path, format="PNG")
    return path


def save_composite_png(
    volume: MultibandVolume, path: Union[str, Path], bands: Sequence[int] = (0, 1, 2)
) -> Path:
    """Write three bands as the R, G, B channels of an 8-bit PNG, clipped to [0, 1]."""
    if len(bands) != 3:
        raise RasterError(f"a composite needs exactly 3 bands, got {len(bands)}")
    for index in bands:
        if not 0 <= index < volume.band_count:
            raise RasterError(f"band index {index} outside a {volume.band_count}-band volume")
    path = Path(path)
    rgb = np.stack([np.clip(volume.band(i).samples, 0.0, 1.0) for i in bands], axis=-1)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.round(rgb * 255.0).astype(np.uint8)).save(path, format="PNG")
    return path
