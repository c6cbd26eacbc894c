"""
On-disk volume bundles: a directory holding ``manifest.json`` and one raw,
headerless, row-major sample file per band.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Union

import numpy as np
from pydantic import ValidationError

from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.errors import BundleError
from pansrr.logging_utils import log_event
from pansrr.models import BandEntry, VolumeBundleManifest

MANIFEST_NAME = "manifest.json"
DEFAULT_ENCODING = "f32le-planar"

_DTYPES = {
    "f32le-planar": np.dtype("<f4"),
    "f64le-planar": np.dtype("<f8"),
}


def read_manifest(path: Union[str, Path]) -> VolumeBundleManifest:
    manifest_path = Path(path) / MANIFEST_NAME
    if not manifest_path.is_file():
        raise BundleError("manifest not found", manifest_path)
    try:
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
        return VolumeBundleManifest.model_validate(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"unreadable manifest ({exc})", manifest_path) from exc
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise BundleError(f"invalid manifest: {where} {first.get('msg')}", manifest_path) from exc


def _read_band(path: Path, manifest: VolumeBundleManifest) -> np.ndarray:
    if not path.is_file():
        raise BundleError("missing band file", path)
    dtype = _DTYPES[manifest.encoding]
    expected = manifest.width * manifest.height * dtype.itemsize
    actual = path.stat().st_size
    if actual < expected:
        raise BundleError(f"truncated sample file ({actual} of {expected} bytes)", path)
    if actual > expected:
        raise BundleError(
            f"dimension mismatch: {actual} bytes for a {manifest.width}x{manifest.height} band",
            path,
        )
    samples = np.fromfile(path, dtype=dtype)
    return samples.astype(np.float64).reshape(manifest.height, manifest.width)


def load_bundle(path: Union[str, Path]) -> MultibandVolume:
    """Load a bundle written by :func:`save_bundle`; bands keep manifest order."""
    root = Path(path)
    manifest = read_manifest(root)
    bands = []
    for entry in manifest.bands:
        band_path = root / entry.file
        try:
            bands.append(ImagePlane(_read_band(band_path, manifest)))
        except ValueError as exc:
            raise BundleError(str(exc), band_path) from exc
    volume = MultibandVolume(tuple(bands), tuple(e.label for e in manifest.bands))
    log_event(
        "bundle_loaded",
        path=root,
        bands=volume.band_count,
        width=volume.width,
        height=volume.height,
    )
    return volume


def save_bundle(
    volume: MultibandVolume, path: Union[str, Path], encoding: str = DEFAULT_ENCODING
) -> Path:
    """Write ``volume`` so that :func:`load_bundle` reproduces it.

    With the default f32 encoding the round trip is bitwise for samples that
    are representable in float32; use ``f64le-planar`` for exact float64.
    """
    if encoding not in _DTYPES:
        raise BundleError(f"unsupported encoding {encoding!r}", path)
    root = Path(path)
    dtype = _DTYPES[encoding]
    entries: List[BandEntry] = []
    try:
        root.mkdir(parents=True, exist_ok=True)
        for label, band in zip(volume.band_labels, volume.bands):
            entry = BandEntry(label=label, file=f"{label}.raw")
            band.samples.astype(dtype).tofile(root / entry.file)
            entries.append(entry)
        manifest = VolumeBundleManifest(
            width=volume.width,
            height=volume.height,
            band_count=volume.band_count,
            encoding=encoding,
            bands=entries,
        )
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest.model_dump(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise BundleError(f"write failed ({exc.strerror or exc})", exc.filename or root) from exc
    except ValidationError as exc:
        raise BundleError(f"cannot describe volume: {exc.errors()[0].get('msg')}", root) from exc
    log_event("bundle_saved", path=root, bands=volume.band_count, encoding=encoding)
    return root


def validate_bundle(path: Union[str, Path]) -> List[str]:
    """Return a list of problems with the bundle at ``path`` (empty when valid)."""
    root = Path(path)
    try:
        manifest = read_manifest(root)
    except BundleError as exc:
        return [str(exc)]
    problems = []
    for entry in manifest.bands:
        try:
            arr = _read_band(root / entry.file, manifest)
        except BundleError as exc:
            problems.append(str(exc))
            continue
        if not np.all(np.isfinite(arr)):
            problems.append(f"{root / entry.file}: non-finite samples")
    return problems
