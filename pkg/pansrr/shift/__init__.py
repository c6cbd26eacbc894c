from pansrr.shift.inband import (
    DEFAULT_H_MAX,
    ShiftDecomposition,
    ShiftOperator,
    ShiftSpec,
    apply_inband_shift,
    build_operator,
    decompose_shift,
    hr_to_lr_shift,
    lr_to_hr_shift,
    shift_plane,
    shift_subbands,
)
from pansrr.shift.toeplitz import BidiagonalToeplitz

__all__ = [
    "DEFAULT_H_MAX",
    "BidiagonalToeplitz",
    "ShiftDecomposition",
    "ShiftOperator",
    "ShiftSpec",
    "apply_inband_shift",
    "build_operator",
    "decompose_shift",
    "hr_to_lr_shift",
    "lr_to_hr_shift",
    "shift_plane",
    "shift_subbands",
]
