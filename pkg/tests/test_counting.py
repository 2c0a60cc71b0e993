import numpy as np
import pytest

from qcount import (
    CountingDistribution,
    InconsistentCoefficients,
    ModelParams,
    PairCoefficients,
    Thermo,
    TwoModeProbs,
    analytic_cumulants,
    build_modes,
    cumulants,
    distribution,
    extend,
    g_scan,
    occupations,
    odd_mass,
    p_at,
    pair_probabilities,
    two_mode_probs,
)


def _equilibrium_dist(gamma, g, t_over_j, kappa=1.0, n_sites=1000):
    params = ModelParams(gamma=gamma, g=g, N=n_sites, kappa=kappa)
    modeset = build_modes(params)
    return distribution(modeset, occupations(modeset, Thermo(t_over_j)))


def test_two_mode_probs_examples():
    assert two_mode_probs(PairCoefficients(a=0.7, b=0.3), kappa=0.0) == TwoModeProbs(1.0, 0.0, 0.0)
    tm = two_mode_probs(PairCoefficients(a=1.0, b=0.5), kappa=1.0)
    assert (tm.p0, tm.p1, tm.p2) == (0.5, 0.0, 0.5)
    tm = two_mode_probs(PairCoefficients(a=1.0, b=0.25), kappa=0.5)
    assert tm.p0 == pytest.approx(0.5625, abs=1e-15)
    assert tm.p1 == pytest.approx(0.375, abs=1e-15)
    assert tm.p2 == pytest.approx(0.0625, abs=1e-15)


def test_two_mode_probs_rejects_inconsistent_input():
    # a = 2, b = 0 would mean "two particles always, never both": p0 = -1
    with pytest.raises(InconsistentCoefficients):
        two_mode_probs(PairCoefficients(a=2.0, b=0.0), kappa=1.0)
    with pytest.raises(ValueError):
        two_mode_probs(PairCoefficients(a=1.0, b=0.25), kappa=1.5)


def test_pair_probabilities_matches_literal_form(rng):
    for _ in range(500):
        u2 = rng.uniform(0.0, 1.0)
        nbar = rng.uniform(0.0, 1.0)
        kappa = rng.uniform(0.0, 1.0)
        a = 2.0 * (u2 * nbar + (1 - u2) * (1 - nbar))
        b = u2 * nbar**2 + (1 - u2) * (1 - nbar) ** 2
        tm = two_mode_probs(PairCoefficients(a=a, b=b), kappa)
        p0, p1, p2 = pair_probabilities(u2, 1 - u2, nbar, kappa)
        assert p0 == pytest.approx(tm.p0, abs=1e-12)
        assert p1 == pytest.approx(tm.p1, abs=1e-12)
        assert p2 == pytest.approx(tm.p2, abs=1e-12)
        assert p0 + p1 + p2 == pytest.approx(1.0, abs=1e-15)


def test_pair_probabilities_resolves_tiny_odd_weights():
    # at nbar ~ 1e-22 the a - 2b route rounds the odd weight to zero
    nbar = 1e-22
    p0, p1, p2 = pair_probabilities(0.3, 0.7, nbar, 1.0)
    assert p1 == pytest.approx(2.0 * nbar * (1.0 - nbar), rel=1e-12)


def test_extend_examples():
    seed = CountingDistribution.point_mass()
    same = extend(seed, TwoModeProbs(1.0, 0.0, 0.0))
    assert np.array_equal(same.probs, [1.0, 0.0, 0.0])
    pair = extend(seed, TwoModeProbs(0.5, 0.0, 0.5))
    assert np.array_equal(pair.probs, [0.5, 0.0, 0.5])
    # two balanced pairs give the binomial over four half-chances
    tm = TwoModeProbs(0.25, 0.5, 0.25)
    binom = extend(extend(seed, tm), tm)
    assert np.allclose(binom.probs, np.array([1, 4, 6, 4, 1]) / 16.0, atol=1e-15)
    assert binom.n_sites == 4
    c = cumulants(binom)
    assert c.mean == pytest.approx(2.0, abs=1e-15)
    assert c.variance == pytest.approx(1.0, abs=1e-15)


def test_ground_state_distribution():
    dist = _equilibrium_dist(gamma=1.0, g=0.0, t_over_j=0.0)
    c = cumulants(dist)
    assert c.mean == pytest.approx(500.0, abs=1e-9)
    assert c.variance == pytest.approx(250.0, abs=1e-9)
    assert odd_mass(dist) <= 1e-12
    assert abs(dist.probs.sum() - 1.0) <= 1e-12


def test_strong_field_distribution():
    # v_k^2 -> 1 makes every pair emit exactly two particles
    dist = _equilibrium_dist(gamma=1.0, g=100.0, t_over_j=0.0)
    c = cumulants(dist)
    assert c.mean >= 0.9999 * 1000
    assert c.variance <= 1e-2 * 1000


def test_cumulants_trivia():
    c = cumulants(CountingDistribution.point_mass())
    assert (c.mean, c.variance, c.third, c.fourth) == (0.0, 0.0, 0.0, 0.0)


def test_high_temperature_cumulants():
    for g in (0.0, 0.7):
        dist = _equilibrium_dist(gamma=1.0, g=g, t_over_j=100.0)
        c = cumulants(dist)
        assert c.mean == pytest.approx(500.0, rel=0.01)
        assert c.variance == pytest.approx(250.0, rel=0.01)


def test_odd_mass_behaviour():
    assert odd_mass(_equilibrium_dist(1.0, 0.7, 0.0)) <= 1e-12
    assert odd_mass(_equilibrium_dist(0.4, 1.3, 0.0)) <= 1e-12
    # imperfect detection splits pairs even in the ground state
    assert odd_mass(_equilibrium_dist(1.0, 0.0, 0.0, kappa=0.5)) > 0.0


def test_p_at_and_range():
    dist = _equilibrium_dist(1.0, 0.0, 0.1)
    assert p_at(dist, 500) > 0
    with pytest.raises(ValueError):
        p_at(dist, 1001)
    with pytest.raises(ValueError):
        p_at(dist, -1)


def test_pair_breaking_is_monotone_in_temperature():
    values = [p_at(_equilibrium_dist(1.0, 0.0, t), 499) for t in (0.0, 0.05, 0.1, 0.2)]
    assert values[0] <= 1e-12
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_distribution_requires_half_zone():
    modeset = build_modes(ModelParams(N=16), zone="full")
    with pytest.raises(ValueError):
        distribution(modeset)


def test_distribution_occupation_input_forms():
    modeset = build_modes(ModelParams(N=16))
    base = distribution(modeset, None)
    zeros = distribution(modeset, np.zeros(8))
    assert np.array_equal(base.probs, zeros.probs)
    with pytest.raises(ValueError):
        distribution(modeset, np.zeros(5))


def test_normalization_and_moment_consistency_grid():
    # raw (un-renormalized) fold stays normalized and non-negative, and the
    # distribution moments match the pair-additive sums, over a
    # (g, T, kappa) product grid at N = 1000
    params0 = ModelParams(N=1000)
    worst_sum = worst_neg = worst_mean = worst_var = 0.0
    for g in np.linspace(0.0, 2.0, 10):
        modeset = build_modes(ModelParams(gamma=1.0, g=float(g), N=1000))
        for t in np.linspace(0.0, 2.0, 10):
            nbar = occupations(modeset, Thermo(float(t)))
            for kappa in np.linspace(0.05, 1.0, 5):
                p0, p1, p2 = pair_probabilities(
                    modeset.u**2, modeset.v**2, nbar, float(kappa)
                )
                raw = np.array([1.0])
                for i in range(p0.size):
                    raw = np.convolve(raw, (p0[i], p1[i], p2[i]))
                worst_sum = max(worst_sum, abs(raw.sum() - 1.0))
                worst_neg = min(worst_neg, raw.min())
                dist = CountingDistribution(raw / raw.sum(), params0.N)
                c = cumulants(dist)
                mean, var = analytic_cumulants(modeset, nbar, float(kappa))
                worst_mean = max(worst_mean, abs(c.mean - mean))
                worst_var = max(worst_var, abs(c.variance - var))
    assert worst_sum <= 1e-9
    assert worst_neg >= -1e-15
    assert worst_mean <= 1e-9 * params0.N
    assert worst_var <= 1e-9 * params0.N


def test_mean_identity():
    # distribution mean equals kappa * sum_k a_k
    modeset = build_modes(ModelParams(gamma=0.8, g=0.9, N=1000, kappa=0.6))
    nbar = occupations(modeset, Thermo(0.4))
    dist = distribution(modeset, nbar)
    a = 2.0 * (modeset.u**2 * nbar + modeset.v**2 * (1 - nbar))
    assert cumulants(dist).mean == pytest.approx(0.6 * a.sum(), abs=1e-9 * 1000)


def test_pair_order_invariance(rng):
    modeset = build_modes(ModelParams(gamma=1.0, g=0.8, N=1000))
    nbar = occupations(modeset, Thermo(0.3))
    p0, p1, p2 = pair_probabilities(modeset.u**2, modeset.v**2, nbar, 1.0)
    order = rng.permutation(p0.size)
    forward = np.array([1.0])
    shuffled = np.array([1.0])
    for i in range(p0.size):
        forward = np.convolve(forward, (p0[i], p1[i], p2[i]))
        j = order[i]
        shuffled = np.convolve(shuffled, (p0[j], p1[j], p2[j]))
    assert np.max(np.abs(forward - shuffled)) <= 1e-12


def test_g_scan_validation():
    params = ModelParams(N=100)
    with pytest.raises(ValueError):
        g_scan(params, Thermo(0.0), [0.5, 0.4])
    with pytest.raises(ValueError):
        g_scan(params, Thermo(0.0), [0.5])
    with pytest.raises(ValueError):
        g_scan(params, Thermo(0.0), None, delta_g=0.0)
    with pytest.raises(ValueError):
        g_scan(params, Thermo(0.0), [0.5, 0.6], method="magic")


def test_g_scan_peak_near_transition():
    scan = g_scan(ModelParams(N=1000), Thermo(0.0), np.arange(0.8, 1.2, 1e-3))
    peak = scan["g"][np.argmax(np.abs(scan["dmean_dg"]))]
    assert abs(peak - 1.0) <= 2e-3


def test_g_scan_methods_agree():
    grid = np.linspace(0.5, 1.5, 11)
    fast = g_scan(ModelParams(N=200), Thermo(0.3), grid)
    slow = g_scan(ModelParams(N=200), Thermo(0.3), grid, method="distribution")
    assert np.max(np.abs(fast["mean"] - slow["mean"])) <= 1e-9 * 200
    assert np.max(np.abs(fast["variance"] - slow["variance"])) <= 1e-9 * 200


def test_g_scan_flat_at_high_temperature():
    scan = g_scan(ModelParams(N=1000), Thermo(100.0), np.linspace(0.0, 2.0, 21))
    assert np.max(np.abs(scan["dmean_dg"])) <= 1e-2 * 1000
    assert np.max(np.abs(scan["dvariance_dg"])) <= 1e-2 * 1000
