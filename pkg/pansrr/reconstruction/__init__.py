from pansrr.reconstruction.frames import BlurSpec, NoiseModel, ObservationFrame
from pansrr.reconstruction.ibp import forward_project, initialize_estimate, reconstruct_ibp
from pansrr.reconstruction.least_squares import finalize, reconstruct_least_squares
from pansrr.reconstruction.volume import frames_for_band, reconstruct_band, reconstruct_volume

__all__ = [
    "BlurSpec",
    "NoiseModel",
    "ObservationFrame",
    "finalize",
    "forward_project",
    "frames_for_band",
    "initialize_estimate",
    "reconstruct_band",
    "reconstruct_ibp",
    "reconstruct_least_squares",
    "reconstruct_volume",
]
