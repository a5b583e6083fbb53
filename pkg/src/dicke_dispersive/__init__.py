"""Exact propagation, effective Hamiltonians and dispersive chains for the Dicke model."""
__version__ = "0.1.0"

from .analysis import freq_analytic, g_crit, pmin_analytic, scan_resonance, validity_bounds
from .chains import build_chain_graph, chain_partition, decoupled_states, resonance_table
from .coefficients import omega_coeff, omega_table
from .errors import (
    ConfigError,
    CutoffTooSmall,
    DickeError,
    DimensionMismatch,
    FrameMismatch,
    IndexOutOfRange,
    NonHermitian,
    NotHalfInteger,
    NotInteger,
    OffResonance,
    StepTooLarge,
)
from .hamiltonians import (
    Frame,
    ModelConfig,
    build_dicke,
    build_displaced,
    build_effective_dsc,
    build_effective_half_integer,
    build_effective_lmg,
    build_h2,
    build_h3,
    required_cutoff,
)
from .hilbert import SpinBosonBasis, basis_state, displacement_operator, spin_operators
from .propagate import (
    TimeGrid,
    compose_lab_frame,
    evolve_static,
    evolve_timedep,
    photon_cdf,
    survival_probability,
)
