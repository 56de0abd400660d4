"""Single-excitation sector, superradiant/subradiant states and the DFS.

Qubits are indexed from 0.  ``|[j]>`` is the state with qubit ``j`` excited and
every other qubit in ``|g>``.  On the full ``2**n`` space the single-qubit basis
is ordered ``(|e>, |g>)`` with qubit 0 most significant, so for three qubits
``|egg>, |geg>, |gge>, |ggg>`` sit at indices 3, 5, 6 and 7.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

_RANK_RTOL = 1e-9


def ground_index(n: int) -> int:
    return 2**n - 1


def excitation_index(j: int, n: int) -> int:
    """Position of ``|[j]>`` in the ``2**n`` computational basis."""
    if not 0 <= j < n:
        raise IndexError(f"qubit {j} out of range for n={n}")
    return ground_index(n) - 2 ** (n - 1 - j)


@dataclass(frozen=True, eq=False)
class CouplingProfile:
    """Real, non-negative per-qubit couplings ``alpha_j``."""

    alphas: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float).reshape(-1)
        if alphas.size < 2:
            raise ValueError("need at least two qubits")
        if not np.all(np.isfinite(alphas)) or np.any(alphas < 0):
            raise ValueError("couplings must be finite and non-negative")
        if not np.any(alphas > 0):
            raise ValueError("at least one coupling must be positive")
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def uniform(cls, n: int) -> "CouplingProfile":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return self.alphas.size

    @property
    def alpha_total(self) -> float:
        return float(np.sqrt(np.sum(self.alphas**2)))

    @property
    def weights(self) -> np.ndarray:
        """Normalized couplings ``r_j = alpha_j / alpha_T``."""
        return self.alphas / self.alpha_total


@dataclass(frozen=True, eq=False)
class SectorState:
    """Amplitudes ``a`` over ``|[j]>`` plus the ``|g...g>`` amplitude ``g0``.

    ``g0`` is a weight carrier: :func:`collective_decay.evolution.density_matrix`
    places ``|g0|**2`` on the ground state without coherence to the sector.
    """

    a: np.ndarray
    g0: complex = 0.0

    def __post_init__(self):
        a = np.array(self.a, dtype=complex).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "g0", complex(self.g0))

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def excited_weight(self) -> float:
        """``Q = sum_j |a_j|**2``."""
        return float(np.sum(np.abs(self.a) ** 2))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.excited_weight + abs(self.g0) ** 2))

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.excited_weight + abs(self.g0) ** 2 - 1.0) <= tol

    def ket(self) -> np.ndarray:
        """The excitation-sector part as a ``2**n`` vector (``g0`` excluded)."""
        psi = np.zeros(2**self.n, dtype=complex)
        for j, amp in enumerate(self.a):
            psi[excitation_index(j, self.n)] = amp
        return psi


@dataclass(frozen=True, eq=False)
class DfsDecomposition:
    """Overlaps with the superradiant state and with the subradiant basis."""

    eta_plus: complex
    eta_minus: np.ndarray

    @property
    def weight(self) -> float:
        return abs(self.eta_plus) ** 2 + float(np.sum(np.abs(self.eta_minus) ** 2))


def superradiant_state(profile: CouplingProfile) -> SectorState:
    return SectorState(profile.weights)


def subradiant_pair(profile: CouplingProfile, j: int, k: int) -> SectorState:
    """``(r_k |[j]> - r_j |[k]>) / sqrt(r_j**2 + r_k**2)``."""
    if j == k:
        raise ValueError("subradiant pair needs two distinct qubits")
    r = profile.weights
    norm = np.hypot(r[j], r[k])
    if norm == 0:
        raise ValueError(f"qubits {j} and {k} are both uncoupled")
    a = np.zeros(profile.n)
    a[j] = r[k] / norm
    a[k] = -r[j] / norm
    return SectorState(a)


def _three_qubit_basis(r):
    kappa = r[0] ** 2 + r[1] ** 2
    s = np.sqrt(kappa)
    first = np.array([r[1], -r[0], 0.0]) / s
    second = np.array([r[0] * r[2], r[1] * r[2], -kappa]) / s
    return [first, second]


def subradiant_basis(profile: CouplingProfile) -> list[SectorState]:
    """Orthonormal basis of the ``n - 1`` dimensional decoherence-free subspace.

    For three qubits with ``r_1**2 + r_2**2 > 0`` the two closed-form vectors are
    returned as is.  Otherwise the pair states ``(p, k)`` anchored on the most
    strongly coupled qubit ``p`` are orthonormalized by two passes of modified
    Gram-Schmidt in increasing ``k``, and each uncoupled qubit contributes its
    own ``|[j]>``.  Anchoring on ``p`` keeps the pair set well conditioned when
    some couplings are tiny.
    """
    r = profile.weights
    n = profile.n
    if n == 3 and r[0] ** 2 + r[1] ** 2 > 0:
        return [SectorState(v) for v in _three_qubit_basis(r)]

    coupled = [j for j in range(n) if r[j] > 0]
    pivot = max(coupled, key=lambda j: (r[j], -j))
    basis: list[np.ndarray] = []
    for k in coupled:
        if k == pivot:
            continue
        v = subradiant_pair(profile, min(pivot, k), max(pivot, k)).a.real.copy()
        for _ in range(2):
            for u in basis:
                v -= np.dot(u, v) * u
            v /= np.linalg.norm(v)
        basis.append(v)
    for j in range(n):
        if r[j] == 0:
            e = np.zeros(n)
            e[j] = 1.0
            basis.append(e)
    return [SectorState(v) for v in basis]


def _basis_matrix(profile: CouplingProfile) -> np.ndarray:
    return np.array([v.a.real for v in subradiant_basis(profile)]).reshape(-1, profile.n)


def decompose(state: SectorState, profile: CouplingProfile) -> DfsDecomposition:
    if state.n != profile.n:
        raise ValueError("state and profile disagree on the qubit count")
    eta_plus = complex(np.dot(profile.weights, state.a))
    eta_minus = _basis_matrix(profile) @ state.a
    return DfsDecomposition(eta_plus, eta_minus)


def reconstruct(decomposition: DfsDecomposition, profile: CouplingProfile, g0: complex = 0.0) -> SectorState:
    a = decomposition.eta_plus * profile.weights + decomposition.eta_minus @ _basis_matrix(profile)
    return SectorState(a, g0)


def dfs_projection(state: SectorState, profile: CouplingProfile) -> np.ndarray:
    """``(I - |psi_+><psi_+|) a``: the part of the amplitudes that never decays."""
    r = profile.weights
    return state.a - np.dot(r, state.a) * r


def verify_dark(state: SectorState, profile: CouplingProfile) -> float:
    """Amplitude ``|sum_j alpha_j a_j|`` handed to the bath by the collective coupling."""
    if state.n != profile.n:
        raise ValueError("state and profile disagree on the qubit count")
    return float(abs(np.dot(profile.alphas, state.a)))


def pair_family(profile: CouplingProfile) -> np.ndarray:
    """All defined pair states stacked as rows."""
    rows = []
    for j, k in combinations(range(profile.n), 2):
        try:
            rows.append(subradiant_pair(profile, j, k).a.real)
        except ValueError:
            continue
    return np.array(rows)


def dfs_dimension(profile: CouplingProfile) -> int:
    """Numerical rank of the pair family."""
    s = np.linalg.svd(pair_family(profile), compute_uv=False)
    return int(np.sum(s > _RANK_RTOL * s[0]))
