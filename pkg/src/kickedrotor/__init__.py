"""Noise-coarsened quantum kicked rotor and its Tsallis-entropy analysis."""

__version__ = "0.1.0"

from .rotor import (  # noqa: E402
    NoiseModel,
    RotorParams,
    basis_state,
    kick_step,
    kinetic_step,
    sample_noise,
    step,
    tail_mass,
)
from .spectrum import (  # noqa: E402
    AliasingError,
    SpectrumTrajectory,
    evolve_ensemble,
    gram_matrix,
    rho_spectrum,
)
from .entropy import EntropySeries, Functional, entropy_series, gibbs, renyi, tsallis  # noqa: E402
from .theory import TheoryParams, r_model, solve_tcg, t_quantum, theta  # noqa: E402
from .analysis import (  # noqa: E402
    classify_convexity,
    find_critical_q,
    fit_power_law,
    fit_theta,
    saturation_time,
)
