from pansrr.registration.service import (
    RegistrationResult,
    common_crop_margin,
    crop_volume,
    derotate,
    estimate_transform,
    propagate_params,
    register_volumes,
)

__all__ = [
    "RegistrationResult",
    "common_crop_margin",
    "crop_volume",
    "derotate",
    "estimate_transform",
    "propagate_params",
    "register_volumes",
]
