"""Information capacity of an amplifying disordered waveguide."""

__version__ = "0.1.0"

from .capacity import (
    CapacityResult,
    c0_reference,
    c_heterodyne_avg,
    c_heterodyne_instance,
    c_holevo_avg,
    c_holevo_initial_decrease,
    c_holevo_instance,
    c_holevo_noamp,
    c_infinity,
)
from .medium import (
    DiffusionAverages,
    MediumParams,
    ScatteringMatrix,
    diffusion_averages,
    fd_noise_weight,
    r_eff,
    snr_instance,
)
from .specfun import EULER_GAMMA, exp_gamma0, g_entropy, gamma0

__all__ = [
    "CapacityResult",
    "DiffusionAverages",
    "EULER_GAMMA",
    "MediumParams",
    "ScatteringMatrix",
    "c0_reference",
    "c_heterodyne_avg",
    "c_heterodyne_instance",
    "c_holevo_avg",
    "c_holevo_initial_decrease",
    "c_holevo_instance",
    "c_holevo_noamp",
    "c_infinity",
    "diffusion_averages",
    "exp_gamma0",
    "fd_noise_weight",
    "g_entropy",
    "gamma0",
    "r_eff",
    "snr_instance",
]
