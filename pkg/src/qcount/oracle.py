"""Independent brute-force checks of the counting pipeline.

Nothing in this module reuses the closed-form thermal coefficients: mode
pairs are represented as explicit 4x4 operators in the local-fermion
occupation basis {|00>, |01>, |10>, |11>}, thermal states are built by
spectral decomposition, the generating-function product is expanded in
exact rational arithmetic, and the detector and bath master equations are
integrated with a fixed-step 4th-order scheme.  Agreement with the fast
pipeline validates, in particular, the convention that the detector
efficiency enters the two-mode probabilities exactly once, and that
dropping the excitation-non-conserving terms of the counting product is
harmless.  The oracles may be orders of magnitude slower than the
pipeline; that is the point, not a defect.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .counting import CountingDistribution
from .equilibrium import PairCoefficients, Thermo, occupation_k
from .spectrum import HALF_ZONE, MIDPOINT_GRID, Mode, ModelParams, build_modes
from .thermalization import QuenchSpec

_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|
_SIGN = np.diag([1.0, -1.0]).astype(complex)
_ID2 = np.eye(2, dtype=complex)


class IntegratorError(RuntimeError):
    """Fixed-step integration failed to converge under step halving."""


@dataclass(frozen=True, eq=False)
class TwoModeAlgebra:
    """Matrices of the fermion pair (k, -k) and its quasiparticle modes.

    c_k = lower x id and c_{-k} = sign x lower carry the Jordan-Wigner
    sign so the canonical anticommutation relations hold as matrix
    identities; the quasiparticle modes are d_k = u c_k - i v c_{-k}^dag
    and d_{-k} = u c_{-k} + i v c_k^dag (v is odd under k -> -k).
    """

    u: float
    v: float
    c: np.ndarray
    c_m: np.ndarray
    d: np.ndarray
    d_m: np.ndarray

    @classmethod
    def build(cls, u: float, v: float) -> "TwoModeAlgebra":
        c = np.kron(_LOWER, _ID2)
        c_m = np.kron(_SIGN, _LOWER)
        d = u * c - 1j * v * c_m.conj().T
        d_m = u * c_m + 1j * v * c.conj().T
        return cls(u=u, v=v, c=c, c_m=c_m, d=d, d_m=d_m)

    def number_local(self) -> tuple[np.ndarray, np.ndarray]:
        return self.c.conj().T @ self.c, self.c_m.conj().T @ self.c_m

    def number_quasi(self) -> np.ndarray:
        return self.d.conj().T @ self.d + self.d_m.conj().T @ self.d_m

    def car_residual(self) -> float:
        """Largest violation of the anticommutation identities."""
        eye = np.eye(4)
        worst = 0.0
        for ops in ((self.c, self.c_m), (self.d, self.d_m)):
            for i, x in enumerate(ops):
                for j, y in enumerate(ops):
                    anti = x @ y + y @ x
                    worst = max(worst, np.abs(anti).max())
                    cross = x @ y.conj().T + y.conj().T @ x
                    want = eye if i == j else 0.0
                    worst = max(worst, np.abs(cross - want).max())
        return worst


def _thermal_state(h: np.ndarray, t_over_j: float) -> np.ndarray:
    """exp(-beta H)/Z by spectral decomposition; T = 0 is the ground space."""
    evals, evecs = np.linalg.eigh(h)
    if t_over_j == 0.0:
        weights = (evals <= evals.min() + 1e-12).astype(float)
    else:
        weights = np.exp(-(evals - evals.min()) / t_over_j)
    weights /= weights.sum()
    return (evecs * weights) @ evecs.conj().T


def oracle_pair_coefficients(mode: Mode, thermo: Thermo) -> PairCoefficients:
    """(a, b) of one pair from explicit 4x4 traces in the local basis.

    Builds H_k = E_k (d^dag d + d_-^dag d_-) as a matrix, forms the thermal
    state exactly, and evaluates a = Tr[rho (n_k + n_-k)] and
    b = Tr[rho n_k n_-k] with the full local number operators; no
    excitation-number-conserving truncation is made anywhere.
    """
    alg = TwoModeAlgebra.build(mode.u, mode.v)
    rho = _thermal_state(mode.energy * alg.number_quasi(), thermo.t_over_j)
    n1, n2 = alg.number_local()
    a = np.trace(rho @ (n1 + n2))
    b = np.trace(rho @ n1 @ n2)
    return PairCoefficients(a=float(a.real), b=float(b.real))


def _poly_mul(p: list[Fraction], q: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi:
            for j, qj in enumerate(q):
                out[i + j] += pi * qj
    return out


def oracle_distribution_rational(
    params: ModelParams, thermo: Thermo, kappa: float | None = None, grid: str = MIDPOINT_GRID
) -> list[Fraction]:
    """Exact-rational coefficients of the counting generating product.

    Each (a_k, b_k) comes from the 4x4 traces and is converted to an exact
    rational (Fraction of a float is lossless), so the polynomial
    expansion has no arithmetic error at all; only the float rounding of
    the inputs remains.  Limited to N <= 16.
    """
    if params.N > 16:
        raise ValueError(f"exact-rational expansion is limited to N <= 16, got N = {params.N}")
    kap = Fraction(params.kappa if kappa is None else kappa)
    poly = [Fraction(1)]
    for mode in build_modes(params, HALF_ZONE, grid).modes:
        pc = oracle_pair_coefficients(mode, thermo)
        a, b = Fraction(pc.a), Fraction(pc.b)
        p0 = 1 - kap * a + kap * kap * b
        p1 = kap * a - 2 * kap * kap * b
        p2 = kap * kap * b
        poly = _poly_mul(poly, [p0, p1, p2])
    return poly


def oracle_distribution(
    params: ModelParams, thermo: Thermo, kappa: float | None = None, grid: str = MIDPOINT_GRID
) -> CountingDistribution:
    """Float view of the exact-rational counting distribution (N <= 16)."""
    poly = oracle_distribution_rational(params, thermo, kappa, grid)
    return CountingDistribution(
        probs=np.array([float(c) for c in poly]), n_sites=params.N
    )


def rational_cumulants(poly: list[Fraction]) -> tuple[Fraction, Fraction]:
    """Mean and variance of a rational probability vector, exactly."""
    mean = sum(Fraction(m) * p for m, p in enumerate(poly))
    second = sum(Fraction(m * m) * p for m, p in enumerate(poly))
    return mean, second - mean * mean


def detector_kappa(epsilon: float, tau: float) -> float:
    """Efficiency kappa = 1 - exp(-epsilon tau) of an absorbing detector."""
    if epsilon < 0 or tau < 0:
        raise ValueError("epsilon and tau must be non-negative")
    return float(-np.expm1(-epsilon * tau))


def _rk4(deriv, state: np.ndarray, t_total: float, steps: int) -> np.ndarray:
    h = t_total / steps
    y = state
    for _ in range(steps):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _converged_rk4(deriv, state, t_total, extract, tol=1e-10, start_steps=64, max_doublings=16):
    """Fixed-step RK4, doubling the step count until ``extract`` settles."""
    if t_total == 0.0:
        return extract(state)
    steps = start_steps
    prev = extract(_rk4(deriv, state, t_total, steps))
    for _ in range(max_doublings):
        steps *= 2
        cur = extract(_rk4(deriv, state, t_total, steps))
        if np.max(np.abs(np.asarray(cur) - np.asarray(prev))) < tol:
            return cur
        prev = cur
    raise IntegratorError(f"no convergence to {tol} after {steps} steps")


def oracle_detector_single_mode(epsilon: float, t: float, n0: int):
    """Count probabilities of one absorbed fermion mode by time t.

    Integrates the detector master equation with the evolution resolved by
    the number of emitted counts: the 0-count block only loses norm
    through absorption, the 1-count block gains it.  Returns (p0, p1);
    for an initially occupied mode p1 = 1 - exp(-epsilon t).
    """
    if epsilon < 0 or t < 0:
        raise ValueError("epsilon and t must be non-negative")
    if n0 not in (0, 1):
        raise ValueError(f"n0 must be 0 or 1, got {n0}")
    num = np.diag([0.0, 1.0]).astype(complex)
    low = _LOWER

    def deriv(stack):
        rho0, rho1 = stack
        d0 = -0.5 * epsilon * (num @ rho0 + rho0 @ num)
        d1 = epsilon * (low @ rho0 @ low.conj().T) - 0.5 * epsilon * (
            num @ rho1 + rho1 @ num
        )
        return np.stack([d0, d1])

    start = np.zeros((2, 2, 2), dtype=complex)
    start[0, n0, n0] = 1.0

    def extract(stack):
        return np.array([np.trace(stack[0]).real, np.trace(stack[1]).real])

    p0, p1 = _converged_rk4(deriv, start, t, extract)
    return float(p0), float(p1)


def _liouvillian(h: np.ndarray, jumps) -> np.ndarray:
    """Matrix of rho -> -i[H, rho] + sum_r r (L rho L^dag - {L^dag L, rho}/2)
    acting on row-major-vectorized rho."""
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, op in jumps:
        op_dag = op.conj().T
        op_dag_op = op_dag @ op
        liou += rate * (
            np.kron(op, op_dag.T)
            - 0.5 * np.kron(op_dag_op, eye)
            - 0.5 * np.kron(eye, op_dag_op.T)
        )
    return liou


def oracle_quench_two_mode(mode: Mode, spec: QuenchSpec, t: float) -> PairCoefficients:
    """(a(t), b(t)) of one pair from the 16-dimensional bath master equation.

    The pair density matrix starts in the quasiparticle vacuum and evolves
    under loss channels d_k, d_{-k} at rate gamma0 (1 - nbar) and gain
    channels d_k^dag, d_{-k}^dag at rate gamma0 nbar, the detailed-balance
    pair whose stationary occupation is the bath value nbar and whose
    relaxation rate is gamma0, matching the closed-form interpolation.
    No factorization of the two-mode occupations is assumed: b(t) is the
    exact trace of n_k n_{-k}.
    """
    if not spec.is_vacuum_start():
        raise ValueError("oracle_quench_two_mode requires a vacuum initial state")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    alg = TwoModeAlgebra.build(mode.u, mode.v)
    nbar = occupation_k(mode, spec.bath).nbar
    h = mode.energy * alg.number_quasi()
    jumps = [
        (spec.gamma0 * (1.0 - nbar), alg.d),
        (spec.gamma0 * (1.0 - nbar), alg.d_m),
        (spec.gamma0 * nbar, alg.d.conj().T),
        (spec.gamma0 * nbar, alg.d_m.conj().T),
    ]
    liou = _liouvillian(h, jumps)
    rho0 = _thermal_state(h, 0.0)  # quasiparticle vacuum projector
    n1, n2 = alg.number_local()

    def deriv(vec):
        return liou @ vec

    def extract(vec):
        rho = vec.reshape(4, 4)
        a = np.trace(rho @ (n1 + n2)).real
        b = np.trace(rho @ n1 @ n2).real
        trace = np.trace(rho).real
        return np.array([a, b, trace])

    steps0 = max(64, int(8 * spec.gamma0 * t))
    a, b, trace = _converged_rk4(deriv, rho0.reshape(16), t, extract, start_steps=steps0)
    if abs(trace - 1.0) > 1e-10:
        raise IntegratorError(f"trace drifted to {trace}")
    return PairCoefficients(a=float(a), b=float(b))


def quench_pair_occupation(mode: Mode, spec: QuenchSpec, t: float) -> float:
    """<n_k^d + n_-k^d>(t) from the same integration, for relaxation checks."""
    if not spec.is_vacuum_start():
        raise ValueError("quench_pair_occupation requires a vacuum initial state")
    alg = TwoModeAlgebra.build(mode.u, mode.v)
    nbar = occupation_k(mode, spec.bath).nbar
    h = mode.energy * alg.number_quasi()
    jumps = [
        (spec.gamma0 * (1.0 - nbar), alg.d),
        (spec.gamma0 * (1.0 - nbar), alg.d_m),
        (spec.gamma0 * nbar, alg.d.conj().T),
        (spec.gamma0 * nbar, alg.d_m.conj().T),
    ]
    liou = _liouvillian(h, jumps)
    rho0 = _thermal_state(h, 0.0).reshape(16)
    nq = alg.number_quasi()

    def extract(vec):
        return np.array([np.trace(vec.reshape(4, 4) @ nq).real])

    (val,) = _converged_rk4(lambda v: liou @ v, rho0, t, extract, start_steps=max(64, int(8 * spec.gamma0 * t)))
    return float(val)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one oracle-vs-pipeline comparison."""

    name: str
    passed: bool
    detail: str


CHECK_NAMES = ("algebra", "coefficients", "distribution", "detector", "quench")


def _check_algebra(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for theta in rng.uniform(-np.pi, np.pi, size=50):
        alg = TwoModeAlgebra.build(np.cos(theta / 2), np.sin(theta / 2))
        worst = max(worst, alg.car_residual())
    return CheckResult(
        "algebra", worst <= 1e-14, f"max anticommutator residual {worst:.2e} (tol 1e-14)"
    )


def _check_coefficients(rng: np.random.Generator, n_points: int = 1000) -> CheckResult:
    from .equilibrium import pair_coefficients as closed_form

    worst = 0.0
    for _ in range(n_points):
        params = ModelParams(
            gamma=rng.uniform(0.05, 1.5), g=rng.uniform(0.0, 2.5), N=1000
        )
        modeset = build_modes(params)
        mode = modeset[int(rng.integers(0, len(modeset)))]
        thermo = Thermo(float(rng.uniform(0.02, 5.0)))
        want = oracle_pair_coefficients(mode, thermo)
        got = closed_form(mode, occupation_k(mode, thermo))
        worst = max(worst, abs(want.a - got.a), abs(want.b - got.b))
    return CheckResult(
        "coefficients",
        worst <= 1e-12,
        f"max |closed form - 4x4 trace| {worst:.2e} over {n_points} points (tol 1e-12)",
    )


def _check_distribution(n_sites: int) -> CheckResult:
    from .counting import distribution
    from .equilibrium import occupations

    details = []
    passed = True
    for t_over_j in (0.0, 0.3):
        params = ModelParams(gamma=1.0, g=1.0 if t_over_j else 0.0, N=n_sites)
        thermo = Thermo(t_over_j)
        modeset = build_modes(params)
        fast = distribution(modeset, occupations(modeset, thermo))
        exact = oracle_distribution(params, thermo)
        gap = np.abs(fast.probs - exact.probs).max()
        passed &= gap <= 1e-12
        details.append(f"T={t_over_j}: max coeff gap {gap:.2e}")
    mean, var = rational_cumulants(
        oracle_distribution_rational(ModelParams(gamma=1.0, g=0.0, N=n_sites), Thermo(0.0))
    )
    var_gap = abs(float(var) - n_sites / 4)
    passed &= var_gap <= 1e-12
    details.append(f"T=0 exact variance {float(var)} vs N/4 (gap {var_gap:.2e})")
    return CheckResult("distribution", bool(passed), "; ".join(details) + " (tol 1e-12)")


def _check_detector() -> CheckResult:
    cases = [(0.7, 1.3, 1), (0.7, 1.3, 0), (2.0, 0.4, 1)]
    worst = 0.0
    for eps, t, n0 in cases:
        _, p1 = oracle_detector_single_mode(eps, t, n0)
        worst = max(worst, abs(p1 - n0 * detector_kappa(eps, t)))
    return CheckResult(
        "detector", worst <= 1e-10, f"max |integrated - closed form| {worst:.2e} (tol 1e-10)"
    )


def _check_quench() -> CheckResult:
    from .equilibrium import pair_coefficients as closed_form
    from .thermalization import occupation_at, pair_coefficients_t

    spec = QuenchSpec(gamma0=1.0, bath_t_over_j=0.1)
    params = ModelParams(gamma=1.0, g=0.5, N=16)
    mode = build_modes(params)[2]
    occ_worst = 0.0
    gap_b = 0.0
    for t in (0.3, 1.0, 3.0):
        pair_occ = quench_pair_occupation(mode, spec, t)
        occ_worst = max(occ_worst, abs(pair_occ - occupation_at(mode, spec, t).n_d))
        exact = oracle_quench_two_mode(mode, spec, t)
        assumed = pair_coefficients_t(mode, spec, t)
        gap_b = max(gap_b, abs(exact.b - assumed.b))
    eq = closed_form(mode, occupation_k(mode, spec.bath))
    late = oracle_quench_two_mode(mode, spec, 40.0)
    eq_gap = max(abs(late.a - eq.a), abs(late.b - eq.b))
    passed = occ_worst <= 1e-8 and eq_gap <= 1e-8 and gap_b < 1e-2
    return CheckResult(
        "quench",
        bool(passed),
        f"occupation gap {occ_worst:.2e} (tol 1e-8); stationary gap {eq_gap:.2e} "
        f"(tol 1e-8); measured b-factorization gap {gap_b:.2e} (bound 1e-2)",
    )


def run_checks(n_sites: int = 8, checks=("all",), seed: int = 20240601) -> list[CheckResult]:
    """Run the requested oracle comparisons and report pass/fail per check."""
    wanted = set(checks)
    if "all" in wanted:
        wanted = set(CHECK_NAMES)
    unknown = wanted - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; choose from {CHECK_NAMES}")
    rng = np.random.default_rng(seed)
    results = []
    for name in CHECK_NAMES:
        if name not in wanted:
            continue
        if name == "algebra":
            results.append(_check_algebra(rng))
        elif name == "coefficients":
            results.append(_check_coefficients(rng))
        elif name == "distribution":
            results.append(_check_distribution(n_sites))
        elif name == "detector":
            results.append(_check_detector())
        elif name == "quench":
            results.append(_check_quench())
    return results
