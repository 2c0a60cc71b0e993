"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS line once its assertions succeed (run pytest
with ``-s`` to see them); a failing criterion shows up as an ordinary
pytest failure.  All quantitative targets are pinned here, nothing is
deferred to later calibration.
"""

import time

import numpy as np
import pytest

from qcount import (
    CountingDistribution,
    ModelParams,
    QuenchSpec,
    Thermo,
    build_modes,
    cumulants,
    distribution,
    excitation_fraction,
    g_scan,
    kernels,
    occupations,
    occupations_at,
    odd_mass,
    p_at,
    pair_probabilities,
)
from qcount.cli import run as cli_run
from qcount.oracle import (
    oracle_distribution,
    oracle_distribution_rational,
    oracle_pair_coefficients,
    oracle_quench_two_mode,
    quench_pair_occupation,
    rational_cumulants,
)

N = 1000


def _report(number, text):
    print(f"criterion {number:2d} PASS: {text}")


def _equilibrium_dist(gamma, g, t_over_j, kappa=1.0, n_sites=N):
    modeset = build_modes(ModelParams(gamma=gamma, g=g, N=n_sites, kappa=kappa))
    return distribution(modeset, occupations(modeset, Thermo(t_over_j)))


def test_criterion_01_zero_temperature_baseline():
    start = time.perf_counter()
    modeset = build_modes(ModelParams(gamma=1.0, g=0.0, N=N, kappa=1.0))
    nbar = occupations(modeset, Thermo(0.0))
    # raw fold, before the final renormalization
    p0, p1, p2 = pair_probabilities(modeset.u**2, modeset.v**2, nbar, 1.0)
    raw = np.array([1.0])
    for i in range(p0.size):
        raw = np.convolve(raw, (p0[i], p1[i], p2[i]))
    elapsed = time.perf_counter() - start
    dist = CountingDistribution(raw, N)
    c = cumulants(dist)
    assert abs(c.mean - 500.0) <= 1e-6
    assert odd_mass(dist) <= 1e-12
    assert abs(raw.sum() - 1.0) <= 1e-9
    assert elapsed < 1.0
    _report(1, f"mean {c.mean:.9f}, odd mass {odd_mass(dist):.1e}, "
               f"sum deviation {abs(raw.sum() - 1.0):.1e}, {elapsed * 1e3:.0f} ms")


def test_criterion_02_variance_plateau():
    scan = g_scan(ModelParams(N=N), Thermo(0.0), np.linspace(0.0, 0.9, 19))
    plateau_dev = np.max(np.abs(scan["variance"] / N - 0.25))
    assert plateau_dev <= 1e-6
    wide = g_scan(ModelParams(N=N), Thermo(0.0), np.linspace(0.0, 2.0, 41))
    assert np.all(np.diff(wide["mean"]) > 0)
    above = wide["variance"][wide["g"] > 1.0]
    assert np.all(np.diff(above) < 0)
    # the exact-rational oracle settles sigma^2 = N/4 independently
    poly = oracle_distribution_rational(ModelParams(gamma=1.0, g=0.0, N=8), Thermo(0.0))
    _, var8 = rational_cumulants(poly)
    assert abs(float(var8) - 2.0) <= 1e-12
    _report(2, f"max |var/N - 0.25| = {plateau_dev:.2e} on g in [0, 0.9]; "
               f"N=8 exact variance {float(var8)} = N/4")


def test_criterion_03_criticality_blurring():
    start = time.perf_counter()
    temps = (0.0, 0.05, 0.3, 1.0)
    delta_g = 1e-3
    grid = np.arange(0.5, 1.5 + delta_g / 2, delta_g)
    peaks = {}
    for t in temps:
        scan = g_scan(ModelParams(N=N), Thermo(t), grid, delta_g=delta_g)
        idx = int(np.argmax(np.abs(scan["dmean_dg"])))
        peaks[t] = (scan["g"][idx], float(np.abs(scan["dmean_dg"][idx])))
    elapsed = time.perf_counter() - start
    assert abs(peaks[0.0][0] - 1.0) <= 2 * delta_g
    heights = [peaks[t][1] for t in temps]
    assert all(b < a for a, b in zip(heights, heights[1:]))
    assert peaks[1.0][1] < 0.5 * peaks[0.0][1]
    assert elapsed < 30.0
    _report(3, f"T=0 peak at g = {peaks[0.0][0]:.4f}; heights "
               + " > ".join(f"{h:.0f}" for h in heights)
               + f"; ratio {peaks[1.0][1] / peaks[0.0][1]:.2f} < 0.5; {elapsed:.1f} s")


def test_criterion_04_excitation_fraction_captions():
    modeset = build_modes(ModelParams(gamma=1.0, g=0.0, N=N))
    frac_03 = excitation_fraction(modeset, Thermo(0.3))
    frac_1 = excitation_fraction(modeset, Thermo(1.0))
    assert abs(frac_03 - 0.03) <= 0.005
    assert abs(frac_1 - 0.27) <= 0.01
    _report(4, f"N_d/N = {frac_03:.4f} at T = 0.3 (0.03 +- 0.005), "
               f"{frac_1:.4f} at T = 1 (0.27 +- 0.01)")


def test_criterion_05_pair_breaking():
    temps = (0.0, 0.02, 0.05, 0.1, 0.2)
    values = [p_at(_equilibrium_dist(1.0, 0.0, t), 499) for t in temps]
    assert values[0] <= 1e-12
    assert all(b > a for a, b in zip(values, values[1:]))

    def crossing(gamma):
        lo, hi = 1e-6, 2.0
        f = lambda t: p_at(_equilibrium_dist(gamma, 0.0, t), 499) - 1e-4
        assert f(lo) < 0 < f(hi)
        for _ in range(50):
            mid = np.sqrt(lo * hi)
            lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
        return np.sqrt(lo * hi)

    t_strong = crossing(1.0)
    t_weak = crossing(0.01)
    ratio = t_strong / t_weak
    assert 10.0 <= ratio <= 1000.0
    _report(5, "p(499) strictly increasing "
               + " < ".join(f"{v:.1e}" for v in values)
               + f"; 1e-4 crossings at T = {t_strong:.4f} (gamma=1) vs "
               f"{t_weak:.6f} (gamma=0.01), ratio {ratio:.0f} in [10, 1000]")


def test_criterion_06_high_temperature_fixed_point():
    times = np.array([0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0])
    spec = QuenchSpec(gamma0=1.0, bath_t_over_j=100.0, times=times)
    finals = {}
    for g in (0.0, 1.0, 2.0):
        modeset = build_modes(ModelParams(gamma=1.0, g=g, N=N))
        series_m, series_v = [], []
        for t in times:
            c = cumulants(distribution(modeset, occupations_at(modeset, spec, float(t))))
            series_m.append(c.mean)
            series_v.append(c.variance)
        finals[g] = (series_m[-1], series_v[-1])
        assert abs(series_m[-1] - 0.5 * N) <= 0.01 * 0.5 * N
        assert abs(series_v[-1] - 0.25 * N) <= 0.01 * 0.25 * N
        if g == 0.0:
            assert np.max(np.abs(np.array(series_m) - series_m[0])) <= 1e-9 * N
            assert np.max(np.abs(np.array(series_v) - series_v[0])) <= 1e-9 * N
        if g == 2.0:
            assert all(b < a for a, b in zip(series_m, series_m[1:]))
            assert all(b > a for a, b in zip(series_v, series_v[1:]))
    _report(6, "; ".join(
        f"g={g}: mean/N {m / N:.4f}, var/N {v / N:.4f}" for g, (m, v) in finals.items()
    ) + " at gamma0*t = 40 (targets 0.5, 0.25 +- 1%)")


def test_criterion_07_thermalization_consistency():
    worst = 0.0
    for g in (0.0, 0.5, 1.0, 1.5, 2.0):
        modeset = build_modes(ModelParams(gamma=1.0, g=g, N=N))
        for bath_t in (0.1, 0.3, 1.0):
            spec = QuenchSpec(gamma0=1.0, bath_t_over_j=bath_t)
            late = distribution(modeset, occupations_at(modeset, spec, 40.0))
            eq = distribution(modeset, occupations(modeset, Thermo(bath_t)))
            worst = max(worst, float(np.max(np.abs(late.probs - eq.probs))))
    assert worst <= 1e-8
    _report(7, f"sup-norm quench(gamma0 t = 40) vs equilibrium = {worst:.1e} "
               "over the 5x3 (g, T) grid (tol 1e-8)")


def test_criterion_08_locality_kernels():
    ising = kernels(ModelParams(gamma=1.0, g=0.0, N=N), max_distance=10)
    assert abs(ising.f_u[0] - 0.5) <= 1e-10
    assert abs(ising.f_v[0] - 0.5) <= 1e-10
    assert abs(abs(ising.f_u[1]) - 0.25) <= 1e-10
    assert abs(abs(ising.f_v[1]) - 0.25) <= 1e-10
    assert abs(abs(ising.f_uv[1]) - 0.25) <= 1e-10
    free = kernels(ModelParams(gamma=0.01, g=10.0, N=N), max_distance=10)
    assert free.f_v[0].real >= 0.999
    others = np.concatenate([np.abs(free.f_u), np.abs(free.f_v[1:]), np.abs(free.f_uv)])
    assert np.max(others) <= 1e-2
    worst_rule = 0.0
    for gamma in (0.01, 0.5, 1.0):
        for g in (0.0, 1.0, 10.0):
            table = kernels(ModelParams(gamma=gamma, g=g, N=N), max_distance=0)
            worst_rule = max(worst_rule, abs(table.f_u[0] + table.f_v[0] - 1.0))
    assert worst_rule <= 1e-12
    _report(8, f"Ising point f_u(0) = {ising.f_u[0].real:.10f}, "
               f"|f_uv(1)| = {abs(ising.f_uv[1]):.10f}; free-fermion f_v(0) = "
               f"{free.f_v[0].real:.6f}; sum rule deviation {worst_rule:.1e}")


def test_criterion_09_oracle_equivalence(rng):
    from qcount import occupation_k, pair_coefficients, pair_coefficients_t
    from conftest import random_point
    from qcount.thermalization import relaxed_nbar

    worst_ab = 0.0
    for _ in range(1000):
        mode, thermo = random_point(rng)
        want = oracle_pair_coefficients(mode, thermo)
        got = pair_coefficients(mode, occupation_k(mode, thermo))
        worst_ab = max(worst_ab, abs(want.a - got.a), abs(want.b - got.b))
    assert worst_ab <= 1e-12

    worst_dist = 0.0
    for params, t in (
        (ModelParams(gamma=1.0, g=0.0, N=8), 0.0),
        (ModelParams(gamma=1.0, g=1.0, N=16), 0.3),
    ):
        modeset = build_modes(params)
        fast = distribution(modeset, occupations(modeset, Thermo(t)))
        exact = oracle_distribution(params, Thermo(t))
        worst_dist = max(worst_dist, float(np.max(np.abs(fast.probs - exact.probs))))
    assert worst_dist <= 1e-12

    # two-mode bath integration vs the closed-form occupation, and the
    # measured factorization gap at the quench-figure parameter set
    spec = QuenchSpec(gamma0=1.0, bath_t_over_j=0.1)
    modeset = build_modes(ModelParams(gamma=1.0, g=0.5, N=16))
    mode = modeset[3]
    bath_nbar = occupation_k(mode, spec.bath).nbar
    worst_occ = 0.0
    gap_b = 0.0
    for t in (0.5, 1.0, 2.0, 5.0):
        occ = quench_pair_occupation(mode, spec, t)
        closed = 2.0 * relaxed_nbar(0.0, bath_nbar, spec.gamma0, t)
        worst_occ = max(worst_occ, abs(occ - closed))
        exact = oracle_quench_two_mode(mode, spec, t)
        assumed = pair_coefficients_t(mode, spec, t)
        gap_b = max(gap_b, abs(exact.b - assumed.b))
    assert worst_occ <= 1e-8
    assert gap_b < 1e-2
    _report(9, f"coefficients {worst_ab:.1e} (1000 points, tol 1e-12); "
               f"rational distribution {worst_dist:.1e} (tol 1e-12); occupation "
               f"{worst_occ:.1e} (tol 1e-8); measured b factorization gap {gap_b:.1e}")


def test_criterion_10_determinism(tmp_path):
    digests = []
    for tag in ("one", "two"):
        base = tmp_path / tag
        assert cli_run(["fig", "1", "--out", str(base / "fig1.csv"),
                        "--n-sites", "128"]) == 0
        assert cli_run(["fig", "3", "--out", str(base / "fig3.csv"),
                        "--n-sites", "128", "--T", "0,0.3",
                        "--g-min", "0.8", "--g-max", "1.2", "--delta-g", "0.01"]) == 0
        assert cli_run(["oracle", "--n", "4", "--check", "distribution",
                        "--out", str(base / "oracle.csv")]) == 0
        digests.append(tuple(
            (base / name).read_bytes()
            for name in ("fig1_a.csv", "fig1_b.csv", "fig3.csv", "oracle.csv")
        ))
    assert digests[0] == digests[1]
    _report(10, "repeated fig1/fig3/oracle runs byte-identical "
                f"({sum(len(b) for b in digests[0])} bytes compared)")
