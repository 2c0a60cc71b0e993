"""Particle-counting statistics of the 1D pairing fermion chain.

qcount computes the probability p(m) of detecting m particles on an
N-site chain of paired fermions (equivalently the transverse-field
anisotropic XY spin chain) in the ground state, at thermal equilibrium,
and while relaxing toward a heat bath, together with the cumulants,
parity structure and transverse-field scans of that distribution, the
real-space kernels of the bath coupling, and brute-force oracles that
validate every closed form used along the way.
"""

from .counting import (
    CountingDistribution,
    Cumulants,
    InconsistentCoefficients,
    TwoModeProbs,
    analytic_cumulants,
    cumulants,
    default_g_grid,
    distribution,
    extend,
    g_scan,
    odd_mass,
    p_at,
    pair_probabilities,
    two_mode_probs,
)
from .equilibrium import (
    Occupation,
    PairCoefficients,
    Thermo,
    excitation_fraction,
    occupation_k,
    occupations,
    pair_coefficients,
    partition_k,
)
from .locality import LocalCoupling, LocalityKernels, invert_kernel, kernels, local_coupling
from .spectrum import (
    FULL_ZONE,
    HALF_ZONE,
    INTEGER_GRID,
    MIDPOINT_GRID,
    Mode,
    ModelParams,
    ModeSet,
    build_modes,
    momenta,
)
from .thermalization import (
    QuenchSpec,
    default_times,
    occupation_at,
    occupations_at,
    pair_coefficients_t,
    quench_g_scan,
    quench_scan,
    relaxed_nbar,
)

__version__ = "0.1.0"

__all__ = [
    "CountingDistribution",
    "Cumulants",
    "FULL_ZONE",
    "HALF_ZONE",
    "INTEGER_GRID",
    "InconsistentCoefficients",
    "LocalCoupling",
    "LocalityKernels",
    "MIDPOINT_GRID",
    "Mode",
    "ModeSet",
    "ModelParams",
    "Occupation",
    "PairCoefficients",
    "QuenchSpec",
    "Thermo",
    "TwoModeProbs",
    "analytic_cumulants",
    "build_modes",
    "cumulants",
    "default_g_grid",
    "default_times",
    "distribution",
    "excitation_fraction",
    "extend",
    "g_scan",
    "invert_kernel",
    "kernels",
    "local_coupling",
    "momenta",
    "occupation_at",
    "occupation_k",
    "occupations",
    "occupations_at",
    "odd_mass",
    "p_at",
    "pair_coefficients",
    "pair_coefficients_t",
    "pair_probabilities",
    "partition_k",
    "quench_g_scan",
    "quench_scan",
    "relaxed_nbar",
    "two_mode_probs",
]
