"""Counting statistics during relaxation toward a heat bath.

Coupling the chain to a bath of quasiparticle excitations at temperature
T relaxes every mode occupation exponentially toward its equilibrium
value,

    nbar_k(t) = exp(-gamma0 t) nbar_k(0) + nbar_k^eq (1 - exp(-gamma0 t)),

with a k-independent rate gamma0 (in units of J).  Counting snapshots are
taken instantaneously: the detector exposure is assumed much faster than
the bath coupling, so no detector/bath interleaving is simulated.  The
pair coefficients at time t are the equilibrium formulas evaluated at
nbar_k(t); for a vacuum start this relies on the occupations of modes k
and -k staying uncorrelated, which the brute-force two-mode integration
in the oracle module confirms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .counting import analytic_cumulants, cumulants, distribution
from .equilibrium import (
    Occupation,
    PairCoefficients,
    Thermo,
    occupation_k,
    occupations,
    pair_coefficients,
)
from .spectrum import HALF_ZONE, MIDPOINT_GRID, Mode, ModelParams, ModeSet, build_modes


def default_times() -> np.ndarray:
    """Geometric time grid J*t in {0, 0.1, ..., 10} (21 points past zero)."""
    return np.concatenate(([0.0], np.geomspace(0.1, 10.0, 21)))


@dataclass(frozen=True, eq=False)
class QuenchSpec:
    """Temperature-quench protocol: bath, coupling rate and sample times.

    ``initial`` is the per-mode nbar profile at t = 0 (length N/2); None
    means the ground state.  Times are J*t, non-decreasing and >= 0.
    """

    gamma0: float = 1.0
    bath_t_over_j: float = 0.0
    times: np.ndarray = field(default_factory=default_times)
    initial: np.ndarray | None = None

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if self.bath_t_over_j < 0:
            raise ValueError(f"bath_t_over_j must be >= 0, got {self.bath_t_over_j}")
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
            raise ValueError("times must be a non-decreasing 1D array of J*t >= 0")
        object.__setattr__(self, "times", times)
        if self.initial is not None:
            init = np.asarray(self.initial, dtype=float)
            if np.any(init < 0) or np.any(init > 1):
                raise ValueError("initial nbar profile must lie in [0, 1]")
            object.__setattr__(self, "initial", init)

    @property
    def bath(self) -> Thermo:
        return Thermo(self.bath_t_over_j)

    def is_vacuum_start(self) -> bool:
        return self.initial is None or not np.any(self.initial)


def relaxed_nbar(nbar0, nbar_bath, gamma0: float, t: float):
    """Exponential interpolation between nbar0 and the bath value."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    reached = -np.expm1(-gamma0 * t)  # 1 - e^{-gamma0 t} without cancellation
    return np.asarray(nbar0) * np.exp(-gamma0 * t) + np.asarray(nbar_bath) * reached


def occupations_at(modeset: ModeSet, spec: QuenchSpec, t: float) -> np.ndarray:
    """Per-mode nbar of the half-zone ``modeset`` at time J*t."""
    nbar_bath = occupations(modeset, spec.bath)
    if spec.initial is None:
        nbar0 = np.zeros(len(modeset))
    else:
        if spec.initial.shape != (len(modeset),):
            raise ValueError(
                f"initial profile has shape {spec.initial.shape}, expected ({len(modeset)},)"
            )
        nbar0 = spec.initial
    return relaxed_nbar(nbar0, nbar_bath, spec.gamma0, t)


def occupation_at(mode: Mode, spec: QuenchSpec, t: float) -> Occupation:
    """Occupation of one mode at time J*t (initial profile indexed by k)."""
    nbar_bath = occupation_k(mode, spec.bath).nbar
    nbar0 = 0.0 if spec.initial is None else float(spec.initial[mode.k - 1])
    nbar = float(relaxed_nbar(nbar0, nbar_bath, spec.gamma0, t))
    return Occupation(nbar=nbar, n_d=2.0 * nbar)


def pair_coefficients_t(mode: Mode, spec: QuenchSpec, t: float) -> PairCoefficients:
    """Time-dependent (a, b) of one pair during a vacuum-start quench.

    The closed form assumes the t = 0 state is the quasiparticle vacuum;
    non-vacuum initial profiles are rejected because the underlying
    factorization of the two-mode occupations is only established there.
    """
    if not spec.is_vacuum_start():
        raise ValueError("pair_coefficients_t requires a vacuum initial state")
    return pair_coefficients(mode, occupation_at(mode, spec, t))


def quench_scan(
    params: ModelParams,
    spec: QuenchSpec,
    *,
    kappa: float | None = None,
    grid: str = MIDPOINT_GRID,
    include_distributions: bool = False,
):
    """Mean/variance (and optionally full distributions) along the quench.

    Returns a dict with arrays t, mean, variance and, when requested, the
    list of CountingDistribution snapshots.  Time points are independent
    and may be evaluated in parallel by callers.
    """
    modeset = build_modes(params, HALF_ZONE, grid)
    means = np.empty(spec.times.size)
    variances = np.empty(spec.times.size)
    dists = [] if include_distributions else None
    for i, t in enumerate(spec.times):
        nbar = occupations_at(modeset, spec, float(t))
        if include_distributions:
            dist = distribution(modeset, nbar, kappa)
            c = cumulants(dist)
            means[i], variances[i] = c.mean, c.variance
            dists.append(dist)
        else:
            means[i], variances[i] = analytic_cumulants(modeset, nbar, kappa)
    out = {"t": spec.times.copy(), "mean": means, "variance": variances}
    if include_distributions:
        out["distributions"] = dists
    return out


def quench_g_scan(
    params: ModelParams,
    spec: QuenchSpec,
    t: float,
    g_values=None,
    *,
    delta_g: float = 1e-3,
    kappa: float | None = None,
    grid: str = MIDPOINT_GRID,
):
    """g-derivative table of mean/variance at a fixed quench time J*t.

    The t = 0 slice reproduces the ground-state ``g_scan`` bit for bit
    (zero occupation feeds the identical downstream pipeline).
    """
    if not spec.is_vacuum_start():
        raise ValueError("quench_g_scan requires a vacuum initial state")
    from .counting import _validate_grid, default_g_grid  # shared grid rules

    if g_values is None:
        g_values = default_g_grid(delta_g)
    g_values = _validate_grid(g_values)
    means = np.empty(g_values.size)
    variances = np.empty(g_values.size)
    for i, g in enumerate(g_values):
        modeset = build_modes(replace(params, g=float(g)), HALF_ZONE, grid)
        nbar = occupations_at(modeset, spec, t)
        means[i], variances[i] = analytic_cumulants(modeset, nbar, kappa)
    return {
        "g": g_values,
        "mean": means,
        "variance": variances,
        "dmean_dg": np.gradient(means, g_values),
        "dvariance_dg": np.gradient(variances, g_values),
    }
