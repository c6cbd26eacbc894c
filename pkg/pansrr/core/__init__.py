from pansrr.core.bundle import load_bundle, save_bundle, validate_bundle
from pansrr.core.haar import (
    APPROXIMATION_GAIN,
    SubbandSet,
    analyze_levels,
    circular_shift_subbands,
    expand_to_grid,
    haar_analyze,
    haar_synthesize,
    synthesize_levels,
    upsample_via_zero_details,
)
from pansrr.core.raster import (
    ImagePlane,
    MultibandVolume,
    circular_shift_plane,
    load_png,
    normalize,
    save_composite_png,
    save_png,
)

__all__ = [
    "APPROXIMATION_GAIN",
    "ImagePlane",
    "MultibandVolume",
    "SubbandSet",
    "analyze_levels",
    "circular_shift_plane",
    "circular_shift_subbands",
    "expand_to_grid",
    "haar_analyze",
    "haar_synthesize",
    "load_bundle",
    "load_png",
    "normalize",
    "save_bundle",
    "save_composite_png",
    "save_png",
    "synthesize_levels",
    "upsample_via_zero_details",
    "validate_bundle",
]
