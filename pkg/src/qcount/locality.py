"""Real-space kernels of the bath coupling and their locality.

Rewriting the quasiparticle bath coupling in terms of the local fermions
c_l produces coupling kernels that depend only on the site separation
d = l - m:

    f_u(d)  = (1/N) sum_k u_k^2 exp(i phi_k d)
    f_v(d)  = (1/N) sum_k v_k^2 exp(i phi_k d)
    f_uv(d) = (i/N) sum_k u_k v_k exp(i phi_k d)

with the sums over the full Brillouin zone k = 1..N (required for the
sum rule f_u(0) + f_v(0) = 1 and for the exact on-site/nearest-neighbor
values at the Ising point).  v_k is odd across the zone center, so u_k v_k
is odd and f_uv comes out real; f_u and f_v are real by the even symmetry
of u_k^2, v_k^2.  The kernels measure the quasiparticle (f_u, f_v) and
pair (f_uv) correlation lengths: they peak at d = 0 (d = 1 for f_uv) and
decay with distance, collapsing to a pure on-site particle exchange
f_v(0) = 1 in the free-fermion regime gamma -> 0, g >> 1.

The rewrite is exact only when the bath pair occupation is the same for
every k (g = 0, or T -> 0 or infinity); ``local_coupling`` warns when the
spread exceeds 1e-3.  The rewritten master equation is assembled here as
coefficient data only, never time-evolved.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .equilibrium import Thermo, occupations
from .spectrum import FULL_ZONE, MIDPOINT_GRID, ModelParams, build_modes


@dataclass(frozen=True, eq=False)
class LocalityKernels:
    """Kernel table f_u, f_v, f_uv over distances d = 0..max_distance."""

    params: ModelParams
    grid: str
    distances: np.ndarray
    f_u: np.ndarray
    f_v: np.ndarray
    f_uv: np.ndarray

    @property
    def f_uv_over_i(self) -> np.ndarray:
        """The combination f_uv / i that plots as a real curve."""
        return self.f_uv / 1j


def kernels(
    params: ModelParams, max_distance: int, grid: str = MIDPOINT_GRID
) -> LocalityKernels:
    """Tabulate the coupling kernels for separations 0..max_distance."""
    if max_distance < 0 or max_distance >= params.N:
        raise ValueError(f"max_distance must lie in [0, N-1], got {max_distance}")
    modeset = build_modes(params, FULL_ZONE, grid)
    d = np.arange(max_distance + 1)
    phase = np.exp(1j * np.outer(d, modeset.phi))
    n = params.N
    return LocalityKernels(
        params=params,
        grid=grid,
        distances=d,
        f_u=phase @ (modeset.u**2) / n,
        f_v=phase @ (modeset.v**2) / n,
        f_uv=1j * (phase @ (modeset.u * modeset.v)) / n,
    )


def invert_kernel(kern_values: np.ndarray, params: ModelParams, grid: str = MIDPOINT_GRID):
    """Inverse transform of a full-period kernel table back to k-space.

    Needs the complete distance table d = 0..N-1; recovers e.g. u_k^2 from
    f_u to round-off, a consistency check on the forward sums.
    """
    n = params.N
    if kern_values.shape != (n,):
        raise ValueError(f"need the full d = 0..N-1 table, got shape {kern_values.shape}")
    modeset = build_modes(params, FULL_ZONE, grid)
    d = np.arange(n)
    phase = np.exp(-1j * np.outer(modeset.phi, d))
    return phase @ kern_values


@dataclass(frozen=True, eq=False)
class LocalCoupling:
    """Coefficient data of the bath coupling rewritten on lattice sites.

    The rewritten generator consists of two dissipator families whose
    site-pair coefficients are the kernel values scaled by the rates

        rate_down = gamma0 (N_d/N + 1)     (quasiparticle loss channels)
        rate_up   = gamma0  N_d/N          (quasiparticle gain channels)

    where N_d/N is the per-site excitation number of the bath state.  The
    tensors are held as distance tables; ``matrix`` expands any of the
    three channels into an N x N site-pair array.
    """

    params: ModelParams
    gamma0: float
    n_d_per_site: float
    n_d_spread: float
    rate_down: float
    rate_up: float
    kernels: LocalityKernels

    def matrix(self, channel: str) -> np.ndarray:
        """Site-pair coefficient matrix F(l - m) for one kernel channel.

        Negative separations follow from the kernel symmetries,
        F_u(-d) = conj(F_u(d)) (same for F_v) and F_uv(-d) = -conj(F_uv(d)).
        Requires the kernel table to cover d = 0..N-1.
        """
        table = {"u": self.kernels.f_u, "v": self.kernels.f_v, "uv": self.kernels.f_uv}
        if channel not in table:
            raise ValueError(f"channel must be one of ('u', 'v', 'uv'), got {channel!r}")
        values = table[channel]
        n = self.params.N
        if values.shape != (n,):
            raise ValueError("matrix() needs a full d = 0..N-1 kernel table")
        sites = np.arange(n)
        sep = sites[:, None] - sites[None, :]
        mirrored = values.conj() if channel != "uv" else -values.conj()
        return np.where(sep >= 0, values[np.abs(sep)], mirrored[np.abs(sep)])


def local_coupling(
    params: ModelParams,
    bath: Thermo,
    gamma0: float,
    max_distance: int,
    grid: str = MIDPOINT_GRID,
) -> LocalCoupling:
    """Assemble the local-representation coefficients of the bath coupling.

    Warns when the bath occupation varies with k by more than 1e-3: the
    site rewrite is only a faithful transcription of the quasiparticle
    coupling when N_k^d is k-independent.
    """
    if not gamma0 > 0:
        raise ValueError(f"gamma0 must be positive, got {gamma0}")
    half = build_modes(params, zone="half", grid=grid)
    n_d_k = 2.0 * occupations(half, bath)
    spread = float(np.ptp(n_d_k)) if n_d_k.size else 0.0
    if spread > 1e-3:
        warnings.warn(
            f"bath occupation varies with k (spread {spread:.2e} > 1e-3); "
            "the local rewrite of the coupling is only approximate",
            stacklevel=2,
        )
    n_d_per_site = float(n_d_k.sum() / params.N)
    return LocalCoupling(
        params=params,
        gamma0=gamma0,
        n_d_per_site=n_d_per_site,
        n_d_spread=spread,
        rate_down=gamma0 * (n_d_per_site + 1.0),
        rate_up=gamma0 * n_d_per_site,
        kernels=kernels(params, max_distance, grid),
    )
