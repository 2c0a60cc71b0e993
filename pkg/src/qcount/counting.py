"""Full counting distribution p(m) and its cumulants.

The generating function of the count distribution factorizes over
(k, -k) mode pairs.  In the variable mu = 1 - lambda each pair contributes
the quadratic factor P0 + P1 mu + P2 mu^2 with

    P0 = 1 - kappa a + kappa^2 b      (no particle detected)
    P1 = kappa a - 2 kappa^2 b        (exactly one detected)
    P2 = kappa^2 b                    (both detected)

so p(m) is the coefficient of mu^m in the product over all N/2 pairs: a
plain polynomial convolution, evaluated here as a forward fold.  All P_i
lie in [0, 1], which keeps the convolution forward-stable; no log-space
arithmetic is needed for N up to 10^4.

The pipeline evaluates the P_i in the algebraically identical positive
form

    P0 = u^2 (1 - kappa nbar)^2 + v^2 ((1-kappa) + kappa nbar)^2
    P1 = 2 kappa [u^2 nbar (1 - kappa nbar) + v^2 (1-nbar) ((1-kappa) + kappa nbar)]

because the textbook expression ``kappa a - 2 kappa^2 b`` cancels
catastrophically once nbar drops below ~1e-16: the tiny odd-count weight
(P1 ~ 2 nbar at kappa = 1) would be rounded to zero and the onset of
thermal pair breaking would be lost.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .equilibrium import PairCoefficients, Thermo, occupations, pair_coefficient_arrays
from .spectrum import HALF_ZONE, MIDPOINT_GRID, ModelParams, ModeSet, build_modes

# Probabilities in [-CLAMP_NEG, 0) are rounded to zero; anything more
# negative is treated as a caller bug, not noise.
CLAMP_NEG = 1e-15
# Tail truncation: weights this small are indistinguishable from zero and
# only risk subnormal slowdowns.
TAIL_TINY = 1e-300
_P_TOL = 1e-12


class InconsistentCoefficients(ValueError):
    """Pair coefficients produced a detection probability outside [0, 1]."""


@dataclass(frozen=True)
class TwoModeProbs:
    """Probabilities of detecting 0, 1 or 2 particles in one (k,-k) pair."""

    p0: float
    p1: float
    p2: float


@dataclass(frozen=True, eq=False)
class CountingDistribution:
    """Probability vector over total counts m = 0..n_sites."""

    probs: np.ndarray
    n_sites: int

    @classmethod
    def point_mass(cls) -> "CountingDistribution":
        """The zero-pair distribution delta(m = 0), the fold's seed."""
        return cls(probs=np.array([1.0]), n_sites=0)


@dataclass(frozen=True)
class Cumulants:
    """Mean, variance and (optional extras) third/fourth cumulants."""

    mean: float
    variance: float
    third: float
    fourth: float


def _check_probs(p0, p1, p2) -> None:
    stacked = np.stack([np.atleast_1d(p0), np.atleast_1d(p1), np.atleast_1d(p2)])
    if np.any(stacked < -_P_TOL) or np.any(stacked > 1.0 + _P_TOL):
        bad = np.argwhere((stacked < -_P_TOL) | (stacked > 1.0 + _P_TOL))
        i, k = bad[0]
        raise InconsistentCoefficients(
            f"two-mode probability p{i} = {stacked[i, k]} outside [0, 1] "
            f"at pair index {k}; inconsistent (a, b, kappa) input"
        )


def two_mode_probs(pc: PairCoefficients, kappa: float) -> TwoModeProbs:
    """Detection probabilities of one pair from its (a, b) coefficients.

    Literal form p0 = 1 - kappa a + kappa^2 b, p1 = kappa a - 2 kappa^2 b,
    p2 = 1 - p0 - p1 (= kappa^2 b).  Inputs that land outside [0, 1] raise
    InconsistentCoefficients rather than being clamped.
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    p0 = 1.0 - kappa * pc.a + kappa**2 * pc.b
    p1 = kappa * pc.a - 2.0 * kappa**2 * pc.b
    p2 = 1.0 - p0 - p1
    _check_probs(p0, p1, p2)
    return TwoModeProbs(p0=float(p0), p1=float(p1), p2=float(p2))


def pair_probabilities(u2, v2, nbar, kappa: float):
    """Vectorized (P0, P1, P2) in the cancellation-free positive form.

    Algebraically identical to ``two_mode_probs`` applied to
    a = 2[u^2 nbar + v^2(1-nbar)], b = u^2 nbar^2 + v^2 (1-nbar)^2, but
    every term is a product of non-negative factors, so odd-count weights
    of order nbar survive down to the underflow threshold.
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    nbar = np.asarray(nbar, dtype=float)
    if np.any(nbar < 0.0) or np.any(nbar > 1.0):
        raise ValueError("nbar must lie in [0, 1]")
    hole = 1.0 - nbar
    miss_n = 1.0 - kappa * nbar
    miss_h = (1.0 - kappa) + kappa * nbar  # = 1 - kappa*(1-nbar), no cancellation
    p0 = u2 * miss_n**2 + v2 * miss_h**2
    p1 = 2.0 * kappa * (u2 * nbar * miss_n + v2 * hole * miss_h)
    p2 = 1.0 - p0 - p1
    _check_probs(p0, p1, p2)
    return p0, p1, p2


def extend(dist: CountingDistribution, tm: TwoModeProbs) -> CountingDistribution:
    """Convolve one more pair into ``dist``; length grows by two."""
    probs = np.convolve(dist.probs, (tm.p0, tm.p1, tm.p2))
    return CountingDistribution(probs=probs, n_sites=dist.n_sites + 2)


def _as_nbar(occupations_in, n_pairs: int) -> np.ndarray:
    if occupations_in is None:
        return np.zeros(n_pairs)
    if np.isscalar(occupations_in):
        return np.full(n_pairs, float(occupations_in))
    arr = np.asarray(
        [occ.nbar if hasattr(occ, "nbar") else occ for occ in occupations_in],
        dtype=float,
    )
    if arr.shape != (n_pairs,):
        raise ValueError(f"expected {n_pairs} per-mode occupations, got {arr.shape}")
    return arr


def _finalize(probs: np.ndarray, n_sites: int) -> CountingDistribution:
    if np.any(probs < -CLAMP_NEG):
        raise InconsistentCoefficients(
            f"distribution weight {probs.min()} below -{CLAMP_NEG}"
        )
    probs = np.where(probs < TAIL_TINY, 0.0, probs)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise InconsistentCoefficients(f"distribution sum {total} deviates from 1")
    return CountingDistribution(probs=probs / total, n_sites=n_sites)


def distribution(
    modeset: ModeSet, occupations_in=None, kappa: float | None = None
) -> CountingDistribution:
    """Counting distribution p(0..N) of the whole chain.

    Parameters
    ----------
    modeset : ModeSet
        Half-zone mode table (one entry per (k, -k) pair).
    occupations_in : None, scalar, array, or sequence of Occupation
        Per-mode nbar; None means the ground state (all zero).
    kappa : float, optional
        Detector efficiency; defaults to ``modeset.params.kappa``.

    Returns
    -------
    CountingDistribution
        Normalized; tiny negative round-off is clamped and the vector is
        rescaled once at the end.
    """
    if modeset.zone != HALF_ZONE:
        raise ValueError("distribution needs a half-zone ModeSet")
    if kappa is None:
        kappa = modeset.params.kappa
    nbar = _as_nbar(occupations_in, len(modeset))
    p0, p1, p2 = pair_probabilities(modeset.u**2, modeset.v**2, nbar, kappa)
    probs = np.array([1.0])
    for i in range(p0.size):
        probs = np.convolve(probs, (p0[i], p1[i], p2[i]))
    return _finalize(probs, modeset.params.N)


def cumulants(dist: CountingDistribution) -> Cumulants:
    """Mean, variance, third and fourth cumulants of a count distribution."""
    m = np.arange(dist.probs.size, dtype=float)
    p = dist.probs
    mean = float(m @ p)
    d = m - mean
    variance = float((d * d) @ p)
    mu3 = float((d**3) @ p)
    mu4 = float((d**4) @ p)
    return Cumulants(mean=mean, variance=variance, third=mu3, fourth=mu4 - 3.0 * variance**2)


def analytic_cumulants(modeset: ModeSet, occupations_in=None, kappa: float | None = None):
    """Pair-additive mean and variance, bypassing the full distribution.

    mean = sum_k (P1_k + 2 P2_k) (= kappa sum_k a_k) and
    variance = sum_k [P1_k + 4 P2_k - (P1_k + 2 P2_k)^2]; identical to the
    moments of ``distribution`` up to round-off, at O(N) cost.
    """
    if modeset.zone != HALF_ZONE:
        raise ValueError("analytic_cumulants needs a half-zone ModeSet")
    if kappa is None:
        kappa = modeset.params.kappa
    nbar = _as_nbar(occupations_in, len(modeset))
    p0, p1, p2 = pair_probabilities(modeset.u**2, modeset.v**2, nbar, kappa)
    per_pair_mean = p1 + 2.0 * p2
    mean = float(per_pair_mean.sum())
    variance = float((p1 + 4.0 * p2 - per_pair_mean**2).sum())
    return mean, variance


def odd_mass(dist: CountingDistribution) -> float:
    """Total probability of counting an odd number of particles."""
    return float(dist.probs[1::2].sum())


def p_at(dist: CountingDistribution, m: int) -> float:
    """Probability of counting exactly m particles."""
    if not 0 <= m < dist.probs.size:
        raise ValueError(f"m = {m} outside the support [0, {dist.probs.size - 1}]")
    return float(dist.probs[m])


def default_g_grid(delta_g: float = 1e-3, g_min: float = 0.0, g_max: float = 2.0):
    """Uniform transverse-field grid with spacing delta_g."""
    if not delta_g > 0:
        raise ValueError(f"delta_g must be positive, got {delta_g}")
    return np.arange(g_min, g_max + delta_g / 2.0, delta_g)


def _validate_grid(g_values) -> np.ndarray:
    g_values = np.asarray(g_values, dtype=float)
    if g_values.ndim != 1 or g_values.size < 2 or np.any(np.diff(g_values) <= 0):
        raise ValueError("g grid must be strictly increasing with >= 2 points")
    return g_values


def g_scan(
    params: ModelParams,
    thermo: Thermo,
    g_values=None,
    *,
    delta_g: float = 1e-3,
    kappa: float | None = None,
    grid: str = MIDPOINT_GRID,
    method: str = "analytic",
):
    """Mean/variance and their finite-difference g-derivatives on a grid.

    Parameters
    ----------
    params, thermo
        Model parameters (g is overridden per grid point) and temperature.
    g_values : array, optional
        Strictly increasing grid; by default a uniform grid over [0, 2]
        with spacing ``delta_g``.
    delta_g : float
        Grid spacing when no explicit grid is given; derivatives use
        central differences at this step, one-sided at the two endpoints.
    method : {"analytic", "distribution"}
        Pair-additive sums (fast, default) or moments of the fully
        convolved distribution; the two agree to round-off.

    Returns
    -------
    dict of arrays
        Keys g, mean, variance, dmean_dg, dvariance_dg.

    Grid points are independent: they share no mutable state and may be
    evaluated in parallel by callers.
    """
    if g_values is None:
        g_values = default_g_grid(delta_g)
    g_values = _validate_grid(g_values)
    if method not in ("analytic", "distribution"):
        raise ValueError(f"unknown method {method!r}")
    means = np.empty(g_values.size)
    variances = np.empty(g_values.size)
    for i, g in enumerate(g_values):
        modeset = build_modes(replace(params, g=float(g)), HALF_ZONE, grid)
        nbar = occupations(modeset, thermo)
        if method == "analytic":
            means[i], variances[i] = analytic_cumulants(modeset, nbar, kappa)
        else:
            c = cumulants(distribution(modeset, nbar, kappa))
            means[i], variances[i] = c.mean, c.variance
    return {
        "g": g_values,
        "mean": means,
        "variance": variances,
        "dmean_dg": np.gradient(means, g_values),
        "dvariance_dg": np.gradient(variances, g_values),
    }
