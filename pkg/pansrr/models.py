import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# =============================================================================
# SOLVER CONFIGURATION
# =============================================================================

DEFAULT_BP_KERNEL: Tuple[Tuple[float, ...], ...] = (
    (1 / 16, 2 / 16, 1 / 16),
    (2 / 16, 4 / 16, 2 / 16),
    (1 / 16, 2 / 16, 1 / 16),
)


class IBPConfig(BaseModel):
    """Settings of the iterated back-projection loop."""

    model_config = ConfigDict(frozen=True)

    lam: float = Field(1.0, gt=0.0, le=2.0, description="step size lambda")
    bp_kernel: Tuple[Tuple[float, ...], ...] = Field(
        DEFAULT_BP_KERNEL, description="back-projection stencil, odd-sized"
    )
    tau: float = Field(1e-6, gt=0.0, description="mean-squared residual stop")
    max_iterations: int = Field(200, ge=1)

    @field_validator("bp_kernel")
    @classmethod
    def _check_kernel(cls, value):
        rows = {len(row) for row in value}
        if not value or len(rows) != 1:
            raise ValueError("bp_kernel must be a non-empty rectangular stencil")
        width = rows.pop()
        if len(value) % 2 == 0 or width % 2 == 0:
            raise ValueError("bp_kernel dimensions must be odd")
        if not all(math.isfinite(v) for row in value for v in row):
            raise ValueError("bp_kernel entries must be finite")
        return value

    @property
    def kernel(self) -> np.ndarray:
        return np.asarray(self.bp_kernel, dtype=np.float64)


class LSQConfig(BaseModel):
    """Settings of the structured least-squares solve."""

    model_config = ConfigDict(frozen=True)

    rtol: float = Field(1e-10, gt=0.0)
    max_iterations: int = Field(500, ge=1)
    periodic: bool = True


class BlurSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(0.8, ge=0.0)
    size: int = Field(5, ge=1)

    @field_validator("size")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("blur kernel size must be odd")
        return value


# =============================================================================
# REGISTRATION
# =============================================================================


def wrap_angle(angle: float) -> float:
    """Map an angle in radians into (-pi, pi]."""
    wrapped = math.remainder(angle, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


class RigidParams(BaseModel):
    """Rotation + translation relating a target frame to the reference.

    The target is modelled as ``rotate(translate(reference, t), rotation)``,
    with the translation in the sampling convention
    (``translated[y, x] = reference[y + ty, x + tx]``). Removing the rotation
    therefore leaves a pure translation by ``t``.
    """

    model_config = ConfigDict(frozen=True)

    rotation: float = 0.0
    translation_x: float = 0.0
    translation_y: float = 0.0
    valid: bool = True
    diagnostics: str = ""

    @field_validator("rotation")
    @classmethod
    def _rotation_range(cls, value: float) -> float:
        if not math.isfinite(value) or abs(value) >= math.pi:
            raise ValueError("rotation must satisfy |rotation| < pi")
        return value

    @classmethod
    def identity(cls) -> "RigidParams":
        return cls()

    def compose(self, other: "RigidParams") -> "RigidParams":
        """Parameters of applying ``self`` first and ``other`` second."""
        cos_t, sin_t = math.cos(self.rotation), math.sin(self.rotation)
        tx = self.translation_x + cos_t * other.translation_x - sin_t * other.translation_y
        ty = self.translation_y + sin_t * other.translation_x + cos_t * other.translation_y
        return RigidParams(
            rotation=wrap_angle(self.rotation + other.rotation),
            translation_x=tx,
            translation_y=ty,
            valid=self.valid and other.valid,
        )

    def inverse(self) -> "RigidParams":
        cos_t, sin_t = math.cos(self.rotation), math.sin(self.rotation)
        # t_inv = -R(-theta) t
        tx = -(cos_t * self.translation_x + sin_t * self.translation_y)
        ty = -(-sin_t * self.translation_x + cos_t * self.translation_y)
        return RigidParams(
            rotation=wrap_angle(-self.rotation), translation_x=tx, translation_y=ty, valid=self.valid
        )


# =============================================================================
# REPORTS
# =============================================================================


class ConvergenceReport(BaseModel):
    method: str = "ibp"
    residuals: List[float] = Field(default_factory=list)
    converged: bool = False
    tau: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else math.nan

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.residuals, self.residuals[1:]))

    def to_table(self) -> str:
        lines = [f"# method={self.method} converged={self.converged} tau={self.tau!r}"]
        lines.append("iteration\tresidual")
        lines.extend(f"{i}\t{r!r}" for i, r in enumerate(self.residuals, start=1))
        return "\n".join(lines) + "\n"


class ResidualReport(BaseModel):
    initial_residual: float
    final_residual: float
    iterations: int
    stop_reason: str = ""

    @property
    def relative_residual(self) -> float:
        if self.initial_residual == 0.0:
            return 0.0
        return self.final_residual / self.initial_residual

    def to_table(self) -> str:
        return (
            "# method=least_squares\n"
            "quantity\tvalue\n"
            f"initial_residual\t{self.initial_residual!r}\n"
            f"final_residual\t{self.final_residual!r}\n"
            f"iterations\t{self.iterations}\n"
            f"stop_reason\t{self.stop_reason}\n"
        )


class MetricsRow(BaseModel):
    band: str
    psnr: float
    mse: float = Field(..., ge=0.0)
    ssim: float = Field(..., ge=-1.0, le=1.0)


# =============================================================================
# BUNDLES AND EXPERIMENTS
# =============================================================================


class BandEntry(BaseModel):
    label: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$")
    file: str


class VolumeBundleManifest(BaseModel):
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    band_count: int = Field(..., ge=1)
    encoding: Literal["f32le-planar", "f64le-planar"] = "f32le-planar"
    bands: List[BandEntry]

    @model_validator(mode="after")
    def _count_matches(self) -> "VolumeBundleManifest":
        if self.band_count != len(self.bands):
            raise ValueError(
                f"band_count {self.band_count} does not match {len(self.bands)} listed bands"
            )
        return self


class GroundTruthRecord(BaseModel):
    """What the simulator did; read only by metrics and oracle code."""

    shifts: List[Tuple[float, float]] = Field(..., description="(x, y) in HR pixels per frame")
    blur_sigma: float
    blur_size: int
    noise_sigma: float
    seed: int


Shift = Tuple[float, float]
DEFAULT_SHIFTS: List[Shift] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
BaselineName = Literal["linear", "bicubic", "classic_ibp"]


class ExperimentConfig(BaseModel):
    """Everything one CLI run needs; defaults < config file < flags."""

    mode: Literal["simulated", "real"] = "simulated"
    truth: Optional[Path] = None
    synthetic_size: Optional[int] = Field(None, ge=8)
    synthetic_bands: int = Field(6, ge=1)
    ms: List[Path] = Field(default_factory=list)
    pan: List[Path] = Field(default_factory=list)

    solver: Literal["ibp", "lsq"] = "ibp"
    lam: float = Field(1.0, gt=0.0, le=2.0)
    tau: float = Field(1e-6, gt=0.0)
    max_iterations: int = Field(200, ge=1)
    h_max: int = Field(6, ge=0)
    lsq_periodic: bool = True
    lsq_max_iterations: int = Field(500, ge=1)
    lsq_rtol: float = Field(1e-10, gt=0.0)

    shifts: List[Shift] = Field(default_factory=lambda: list(DEFAULT_SHIFTS))
    blur_sigma: float = Field(0.8, ge=0.0)
    blur_size: int = Field(5, ge=1)
    noise_sigma: float = Field(0.0, ge=0.0)
    seed: int = 0

    baselines: List[BaselineName] = Field(
        default_factory=lambda: ["linear", "bicubic", "classic_ibp"]
    )
    out: Path = Path("runs/latest")
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _inputs_for_mode(self) -> "ExperimentConfig":
        if self.mode == "simulated" and self.truth is None and self.synthetic_size is None:
            raise ValueError("simulated mode needs a ground-truth bundle or synthetic_size")
        if self.mode == "real":
            if len(self.ms) != len(self.pan):
                raise ValueError("real mode needs one PAN bundle per MS bundle")
            if len(self.ms) < 4:
                raise ValueError("real mode needs at least 4 multitemporal MS+PAN pairs")
        return self

    def ibp_config(self) -> IBPConfig:
        return IBPConfig(lam=self.lam, tau=self.tau, max_iterations=self.max_iterations)

    def lsq_config(self) -> LSQConfig:
        return LSQConfig(
            rtol=self.lsq_rtol, max_iterations=self.lsq_max_iterations, periodic=self.lsq_periodic
        )

    def blur_settings(self) -> BlurSettings:
        return BlurSettings(sigma=self.blur_sigma, size=self.blur_size)
