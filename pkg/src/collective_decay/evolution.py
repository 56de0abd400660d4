"""Closed-form time evolution, reduced density matrices and the channel picture.

The superradiant overlap decays as ``Phi(t)`` while the decoherence-free part of
the amplitudes is frozen::

    a(t) = Phi(t) * eta_+ * r + (I - |psi_+><psi_+|) a(0)

Population that leaves the excitation sector sits in ``|g...g>`` tensored with
a one-photon bath state, so the reduced state carries no coherence between the
sector and the ground state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import propagator
from .dfs import (
    CouplingProfile,
    DfsDecomposition,
    SectorState,
    dfs_projection,
    excitation_index,
    ground_index,
    subradiant_basis,
    superradiant_state,
)
from .errors import NumericalError
from .propagator import PropagatorParams

_NORM_TOL = 1e-8
_Q_FLOOR = 1e-12


@dataclass(frozen=True)
class InitialFamily:
    """``c = (sqrt((1+2p)/3), sqrt((1-p)/3) e^{i theta}, sqrt((1-p)/3) e^{i phi})``."""

    p: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"separability parameter p={self.p} outside [0, 1]")


def initial_coefficients(family: InitialFamily) -> SectorState:
    p = family.p
    side = math.sqrt((1.0 - p) / 3.0)
    a = [
        math.sqrt((1.0 + 2.0 * p) / 3.0),
        side * np.exp(1j * family.theta),
        side * np.exp(1j * family.phi),
    ]
    return SectorState(a)


def _check_start(state0: SectorState, profile: CouplingProfile):
    if state0.n != profile.n:
        raise ValueError("state and profile disagree on the qubit count")
    if not state0.is_normalized(_NORM_TOL):
        raise ValueError("initial state is not normalized")
    if abs(state0.g0.imag) > 0 or state0.g0.real < 0:
        raise ValueError("initial ground amplitude must be real and non-negative")


def _from_amplitudes(a: np.ndarray) -> SectorState:
    q = float(np.sum(np.abs(a) ** 2))
    return SectorState(a, math.sqrt(max(0.0, 1.0 - q)))


def evolve(state0: SectorState, profile: CouplingProfile, params: PropagatorParams, t: float) -> SectorState:
    """Sector state at time ``t``; ``g0`` absorbs the leaked weight."""
    return evolve_to_phi(state0, profile, propagator.phi(t, params))


def evolve_to_phi(state0: SectorState, profile: CouplingProfile, phi_value: float) -> SectorState:
    """Sector state at the instant the superradiant amplitude equals ``phi_value``.

    Amplitudes are written as ``eta_+ r_j (Phi - Phi*_j)`` with
    ``Phi*_j = -d_j / (eta_+ r_j)``, so ``a_j`` is exactly zero at its root.
    """
    _check_start(state0, profile)
    r = profile.weights
    eta_plus = complex(np.dot(r, state0.a))
    d = dfs_projection(state0, profile)
    coeff = eta_plus * r
    a = d.copy()
    live = coeff != 0
    a[live] = coeff[live] * (phi_value + d[live] / coeff[live])
    return _from_amplitudes(a)


def three_qubit_amplitudes(decomposition: DfsDecomposition, profile: CouplingProfile, phi_value: float) -> np.ndarray:
    """Explicit three-qubit amplitudes in terms of ``eta_+``, ``eta_-^1``, ``eta_-^2``.

    Requires ``kappa = r_1**2 + r_2**2 > 0``.
    """
    if profile.n != 3:
        raise ValueError("three-qubit formula")
    r1, r2, r3 = profile.weights
    kappa = r1**2 + r2**2
    if kappa == 0:
        raise ValueError("kappa = r_1^2 + r_2^2 vanishes")
    sk = math.sqrt(kappa)
    ep = decomposition.eta_plus
    e1, e2 = decomposition.eta_minus
    return np.array(
        [
            r1 * phi_value * ep + r1 * r3 / sk * e2 + r2 / sk * e1,
            r2 * phi_value * ep + r2 * r3 / sk * e2 - r1 / sk * e1,
            r3 * phi_value * ep - sk * e2,
        ]
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Closed-form evolution sampled on a time grid (absolute time units)."""

    times: np.ndarray
    amplitudes: np.ndarray  # (len(times), n)
    phi: np.ndarray
    gamma_t: np.ndarray  # NaN at poles

    @property
    def q(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> SectorState:
        return _from_amplitudes(self.amplitudes[i])


def trajectory(state0: SectorState, profile: CouplingProfile, params: PropagatorParams, times) -> Trajectory:
    _check_start(state0, profile)
    times = np.asarray(times, dtype=float)
    r = profile.weights
    eta_plus = np.dot(r, state0.a)
    phis = propagator.phi(times, params)
    amps = np.outer(phis * eta_plus, r) + dfs_projection(state0, profile)[None, :]
    return Trajectory(times, amps, phis, propagator.decay_rate(times, params))


def density_matrix(state: SectorState) -> np.ndarray:
    """Reduced ``2**n x 2**n`` state: ``a a^dagger`` on the sector, ``1 - Q`` on ``|g...g>``."""
    if abs(state.norm - 1.0) > _NORM_TOL:
        raise ValueError(f"state norm {state.norm:.12g} deviates from 1")
    n = state.n
    idx = [excitation_index(j, n) for j in range(n)]
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[np.ix_(idx, idx)] = np.outer(state.a, state.a.conj())
    rho[ground_index(n), ground_index(n)] = 1.0 - state.excited_weight
    return rho


def check_density_matrix(rho: np.ndarray, herm_tol=1e-12, trace_tol=1e-10, psd_tol=1e-10):
    """Raise :class:`NumericalError` unless ``rho`` is Hermitian, unit-trace and PSD."""
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise NumericalError(f"density matrix not Hermitian ({herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise NumericalError(f"density matrix trace {tr.real:.12g}")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -psd_tol:
        raise NumericalError(f"density matrix eigenvalue {lo:.3e} < 0")


@dataclass(frozen=True, eq=False)
class CanonicalDecomposition:
    """``rho = Q |psi~><psi~| + (1 - Q) |g...g><g...g|``; ``pure`` is None when ``Q`` vanishes."""

    q: float
    pure: SectorState | None
    ground_weight: float

    @property
    def ground_only(self) -> bool:
        return self.pure is None


def canonical_decomposition(state: SectorState) -> CanonicalDecomposition:
    q = state.excited_weight
    if q < _Q_FLOOR:
        return CanonicalDecomposition(q, None, 1.0 - q)
    return CanonicalDecomposition(q, SectorState(state.a / math.sqrt(q)), 1.0 - q)


def kraus_operators(phi_value: float) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude-damping pair on ``span{|psi_+>, |g...g>}`` (that order)."""
    if abs(phi_value) > 1.0 + 1e-12:
        raise ValueError("|Phi| exceeds 1")
    e0 = np.array([[phi_value, 0.0], [0.0, 1.0]])
    e1 = np.array([[0.0, 0.0], [math.sqrt(max(0.0, 1.0 - phi_value**2)), 0.0]])
    return e0, e1


def kraus_apply(rho2: np.ndarray, params: PropagatorParams, t: float) -> np.ndarray:
    e0, e1 = kraus_operators(propagator.phi(t, params))
    return e0 @ rho2 @ e0.conj().T + e1 @ rho2 @ e1.conj().T


def channel_basis(profile: CouplingProfile) -> np.ndarray:
    """Columns ``psi_+, psi_-^1 .. psi_-^{n-1}, |g...g>`` as ``2**n`` kets."""
    cols = [superradiant_state(profile).ket()]
    cols += [v.ket() for v in subradiant_basis(profile)]
    ground = np.zeros(2**profile.n, dtype=complex)
    ground[ground_index(profile.n)] = 1.0
    cols.append(ground)
    return np.array(cols).T


def block_channel(rho: np.ndarray, profile: CouplingProfile, phi_value: float) -> np.ndarray:
    """Amplitude damping on ``{psi_+, ground}`` direct-summed with the identity on the DFS."""
    u = channel_basis(profile)
    small = u.conj().T @ rho @ u
    m = small.shape[0]
    e0_2, e1_2 = kraus_operators(phi_value)
    e0 = np.eye(m, dtype=complex)
    e1 = np.zeros((m, m), dtype=complex)
    # index 0 is psi_+, index m - 1 is the ground state
    e0[0, 0] = e0_2[0, 0]
    e1[m - 1, 0] = e1_2[1, 0]
    out = e0 @ small @ e0.conj().T + e1 @ small @ e1.conj().T
    return u @ out @ u.conj().T


def full_channel_consistency(state0: SectorState, profile: CouplingProfile, params: PropagatorParams, t: float) -> float:
    """Largest entry gap between the closed-form and block-channel ``rho(t)``."""
    direct = density_matrix(evolve(state0, profile, params, t))
    block = block_channel(density_matrix(state0), profile, propagator.phi(t, params))
    return float(np.max(np.abs(direct - block)))

