"""Exception hierarchy shared by every pansrr module.

Library code raises these; only the CLI boundary turns them into exit codes.
"""


class PanSRRError(Exception):
    """Base class for all pansrr failures."""


class RasterError(PanSRRError, ValueError):
    """Invalid plane or volume (non-finite samples, inconsistent bands)."""


class BundleError(PanSRRError):
    """Problem reading or writing a volume bundle; the message names the file."""

    def __init__(self, message: str, path=None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


class TransformError(PanSRRError, ValueError):
    """Haar analysis/synthesis precondition failed."""


class ShiftError(PanSRRError, ValueError):
    """Invalid shift specification or operator/subband dimension mismatch."""


class PansharpenError(PanSRRError, ValueError):
    """MS/PAN inputs violate the fusion contract."""


class RegistrationError(PanSRRError, ValueError):
    """Registration inputs are unusable (constant planes, invalid parameters)."""


class MetricsError(PanSRRError, ValueError):
    """Quality metric preconditions failed."""


class ReconstructionError(PanSRRError):
    """Super-resolution reconstruction failed."""


class InsufficientFramesError(ReconstructionError, ValueError):
    pass


class RankDeficiencyError(ReconstructionError):
    """The stacked least-squares system cannot determine every detail subband."""


class DivergenceError(ReconstructionError):
    def __init__(self, iteration: int, message: str = "non-finite residual"):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


class PipelineError(PanSRRError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class ConfigError(PanSRRError, ValueError):
    """Configuration file or values are invalid."""
