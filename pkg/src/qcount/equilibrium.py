"""Thermal-equilibrium occupations and per-pair counting coefficients.

At temperature T the chain is in the canonical state rho = exp(-H/kT)/Z,
which factorizes over (k, -k) mode pairs.  Each pair is characterized by
the quasiparticle occupation

    nbar_k = exp(-E_k/kT) / (1 + exp(-E_k/kT))       (Fermi function)

and by the detector-independent pair coefficients

    a_k = 2 [u_k^2 nbar + v_k^2 (1 - nbar)]          (mean particles/pair)
    b_k = u_k^2 nbar^2 + v_k^2 (1 - nbar)^2          (both-detected weight)

which the counting module combines with the efficiency kappa.  The same
(a, b) formulas hold out of equilibrium for any per-mode nbar in [0, 1],
so the relaxation module reuses them; kappa is applied exactly once, in
the two-mode detection probabilities, never here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectrum import Mode, ModeSet


@dataclass(frozen=True)
class Thermo:
    """Dimensionless temperature k_B T / J; 0 means the ground state."""

    t_over_j: float = 0.0

    def __post_init__(self):
        if self.t_over_j < 0:
            raise ValueError(f"t_over_j must be non-negative, got {self.t_over_j}")

    def beta_energy(self, energy_over_j) -> np.ndarray:
        """beta * E for energies in units of J (inf at T = 0, E > 0)."""
        e = np.asarray(energy_over_j, dtype=float)
        if self.t_over_j == 0.0:
            return np.where(e > 0, np.inf, 0.0)
        return e / self.t_over_j


@dataclass(frozen=True)
class Occupation:
    """Single-mode occupation nbar and pair occupation n_d = 2 nbar."""

    nbar: float
    n_d: float

    def __post_init__(self):
        if not 0.0 <= self.nbar <= 1.0:
            raise ValueError(f"nbar must lie in [0, 1], got {self.nbar}")


@dataclass(frozen=True)
class PairCoefficients:
    """Detector-independent counting coefficients (a, b) of one mode pair."""

    a: float
    b: float


def _nbar_array(energy_over_j, t_over_j: float) -> np.ndarray:
    """Fermi occupation; E = 0 at T = 0 is the maximally mixed limit 1/2."""
    e = np.asarray(energy_over_j, dtype=float)
    if t_over_j == 0.0:
        return np.where(e > 0, 0.0, 0.5)
    q = np.exp(-e / t_over_j)  # q <= 1, no overflow for E >= 0
    return q / (1.0 + q)


def partition_k(mode: Mode, thermo: Thermo) -> float:
    """Two-mode partition function (1 + exp(-beta E_k))^2.

    Expanding the square gives the trace 1 + 2 exp(-beta E) + exp(-2 beta E)
    over the four pair states; T = 0 returns 1.
    """
    if thermo.t_over_j == 0.0:
        return 1.0
    q = np.exp(-mode.energy / thermo.t_over_j)
    return float((1.0 + q) ** 2)


def occupation_k(mode: Mode, thermo: Thermo) -> Occupation:
    """Equilibrium occupation of mode k: nbar in [0, 1/2], n_d = 2 nbar."""
    nbar = float(_nbar_array(mode.energy, thermo.t_over_j))
    return Occupation(nbar=nbar, n_d=2.0 * nbar)


def occupations(modeset: ModeSet, thermo: Thermo) -> np.ndarray:
    """Per-mode equilibrium nbar for all modes of ``modeset``."""
    return _nbar_array(modeset.energy, thermo.t_over_j)


def excitation_fraction(modeset: ModeSet, thermo: Thermo) -> float:
    """Total quasiparticle number over sites, N_d / N = (2/N) sum_k nbar_k.

    Only defined for the half zone, where each of the N/2 entries counts a
    (k, -k) pair.
    """
    if modeset.zone != "half":
        raise ValueError("excitation_fraction needs a half-zone ModeSet")
    return float(2.0 * occupations(modeset, thermo).sum() / modeset.params.N)


def pair_coefficients(mode: Mode, occ: Occupation | float) -> PairCoefficients:
    """Counting coefficients of one (k, -k) pair at occupation nbar.

    a = 2 [u^2 nbar + v^2 (1 - nbar)] and b = u^2 nbar^2 + v^2 (1 - nbar)^2.
    nbar = 0 reduces to the ground-state values (2 v^2, v^2); nbar may
    exceed 1/2 for non-equilibrium callers but must stay in [0, 1].
    """
    nbar = occ.nbar if isinstance(occ, Occupation) else float(occ)
    if not 0.0 <= nbar <= 1.0:
        raise ValueError(f"nbar must lie in [0, 1], got {nbar}")
    a, b = pair_coefficient_arrays(mode.u**2, mode.v**2, nbar)
    return PairCoefficients(a=float(a), b=float(b))


def pair_coefficient_arrays(u2, v2, nbar):
    """Vectorized (a, b); inputs are u^2, v^2 and nbar arrays or scalars."""
    nbar = np.asarray(nbar, dtype=float)
    if np.any(nbar < 0.0) or np.any(nbar > 1.0):
        raise ValueError("nbar must lie in [0, 1]")
    hole = 1.0 - nbar
    a = 2.0 * (u2 * nbar + v2 * hole)
    b = u2 * nbar**2 + v2 * hole**2
    return a, b
