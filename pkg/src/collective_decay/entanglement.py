"""Negativity, the tripartite-negativity upper bound and biseparability detection.

Every reduced state produced by the closed-form dynamics is a mixture of one
pure sector state with the ground projector.  The genuine-tripartite quantity
reported here is the computable upper bound ``Q * N_(3)(psi~)`` on the convex
roof of tripartite negativity; no convex-roof minimization is attempted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from . import propagator
from .dfs import CouplingProfile, SectorState, dfs_projection
from .errors import NumericalError
from .evolution import canonical_decomposition, density_matrix, evolve_to_phi
from .propagator import PropagatorParams

#: ``n_star`` at or below this value may be declared biseparable.
EPS_BISEP = 1e-9
#: Reduced linear-entropy threshold confirming that a qubit factorizes.
EPS_PURITY = 1e-8
_Q_FLOOR = 1e-12


def _check_subset(subset, n):
    subset = sorted(set(int(q) for q in subset))
    if not subset or len(subset) >= n or subset[0] < 0 or subset[-1] >= n:
        raise ValueError(f"subset {subset} must be a nonempty proper subset of range({n})")
    return subset


def _num_qubits(rho):
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2**n != dim:
        raise ValueError("density matrix dimension must be a power of two")
    return n


def partial_transpose(rho: np.ndarray, subset) -> np.ndarray:
    """Transpose the qubits in ``subset`` (0-based)."""
    n = _num_qubits(rho)
    subset = _check_subset(subset, n)
    t = rho.reshape([2] * (2 * n))
    for q in subset:
        t = np.swapaxes(t, q, n + q)
    return t.reshape(rho.shape)


def negativity(rho: np.ndarray, subset) -> float:
    """``(||rho^T||_1 - 1) / 2`` across the cut ``subset : rest``.

    Also evaluates the sum of the negative eigenvalues of the partial transpose
    and raises :class:`NumericalError` if the two disagree beyond ``1e-10``.
    """
    evals = np.linalg.eigvalsh(partial_transpose(rho, subset))
    trace = float(np.real(np.trace(rho)))
    from_norm = (np.sum(np.abs(evals)) - trace) / 2.0
    from_neg = -np.sum(evals[evals < 0])
    if abs(from_norm - from_neg) > 1e-10:
        raise NumericalError(f"negativity formulas disagree: {from_norm} vs {from_neg}")
    return float(max(0.0, from_neg))


def _require_pure(state: SectorState):
    if abs(state.excited_weight - 1.0) > 1e-8:
        raise ValueError("expected a normalized pure sector state")


def pure_sector_negativity(state: SectorState, j: int) -> float:
    """Negativity of qubit ``j`` against the rest for a pure sector state.

    The reduced state of qubit ``j`` has eigenvalues ``mu_j = |a_j|**2`` and
    ``1 - mu_j``, so the Schmidt form gives ``sqrt(mu_j (1 - mu_j))``.
    """
    _require_pure(state)
    weights = np.abs(state.a) ** 2
    mu = weights[j]
    # 1 - mu summed directly; subtracting from 1 leaves a sqrt(eps) residue
    rest = float(np.sum(np.delete(weights, j)))
    return math.sqrt(mu * rest) / (mu + rest)


def single_cut_negativities(state: SectorState) -> np.ndarray:
    return np.array([pure_sector_negativity(state, j) for j in range(state.n)])


def tripartite_negativity(state: SectorState) -> float:
    """Geometric mean of the three one-versus-rest negativities of a pure state."""
    if state.n != 3:
        raise ValueError("tripartite negativity is defined for three qubits only")
    return float(np.cbrt(np.prod(single_cut_negativities(state))))


def ncr_star(state: SectorState) -> float:
    """Upper bound ``Q * N_(3)(psi~)`` on the convex-roof tripartite negativity."""
    if state.n != 3:
        raise ValueError("ncr_star is defined for three qubits only")
    canon = canonical_decomposition(state)
    if canon.ground_only:
        return 0.0
    return canon.q * tripartite_negativity(canon.pure)


def reduced_linear_entropy(state: SectorState, j: int) -> float:
    """``1 - Tr(rho_j**2)`` of the normalized excitation-sector part."""
    psi = state.ket()
    norm = np.linalg.norm(psi)
    if norm == 0:
        return 0.0
    m = np.moveaxis((psi / norm).reshape([2] * state.n), j, 0).reshape(2, -1)
    rho_j = m @ m.conj().T
    return float(max(0.0, 1.0 - np.real(np.trace(rho_j @ rho_j))))


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence of a general two-qubit density matrix.

    Uses ``rho = W W^dagger`` and the singular values of ``W^T (Y x Y) W``,
    which equal the square roots of the eigenvalues of ``rho rho~``.
    """
    if rho.shape != (4, 4):
        raise ValueError("two-qubit density matrix expected")
    w, v = np.linalg.eigh(rho)
    keep = w > 1e-13 * max(w[-1], 1e-300)
    factor = v[:, keep] * np.sqrt(w[keep])
    sy = np.array([[0, -1j], [1j, 0]])
    tau = factor.T @ np.kron(sy, sy) @ factor
    s = np.sort(np.linalg.svd(tau, compute_uv=False))[::-1]
    s = np.concatenate([s, np.zeros(max(0, 4 - s.size))])
    return float(max(0.0, s[0] - s[1:].sum()))


def concurrence_two_qubit(state: SectorState) -> float:
    """``2 |a_1| |a_2|``, cross-checked against the Wootters formula."""
    if state.n != 2:
        raise ValueError("two-qubit state expected")
    closed = 2.0 * abs(state.a[0]) * abs(state.a[1])
    general = wootters_concurrence(density_matrix(state))
    if abs(closed - general) > 1e-10:
        raise NumericalError(f"concurrence mismatch: {closed} vs {general}")
    return closed


@dataclass(frozen=True, eq=False)
class EntanglementReport:
    """One-versus-rest negativities of the pure part, and the derived bound.

    ``n3`` and ``n_star`` are None for ``n != 3``.
    """

    negativities: np.ndarray
    n3: float | None
    q: float
    n_star: float | None
    biseparable: bool
    t_star: float | None = None


def entanglement_report(state: SectorState, t_star: float | None = None) -> EntanglementReport:
    n = state.n
    canon = canonical_decomposition(state)
    if canon.ground_only:
        zero = 0.0 if n == 3 else None
        return EntanglementReport(np.zeros(n), zero, canon.q, zero, True, t_star)
    negs = single_cut_negativities(canon.pure)
    factorizes = any(reduced_linear_entropy(canon.pure, j) <= EPS_PURITY for j in range(n))
    if n == 3:
        n3 = float(np.cbrt(np.prod(negs)))
        n_star = canon.q * n3
        biseparable = n_star <= EPS_BISEP and factorizes
    else:
        n3 = n_star = None
        biseparable = factorizes
    return EntanglementReport(negs, n3, canon.q, n_star, biseparable, t_star)


@dataclass(frozen=True, eq=False)
class TStar:
    """First factorization time: ``qubit`` decouples when ``Phi = phi_value``.

    ``state`` is evaluated at ``phi_value`` itself rather than at the rounded
    ``time``, so the vanishing amplitude is an exact zero.
    """

    time: float
    qubit: int
    phi_value: float
    purity_defect: float
    state: SectorState


def _root_targets(state0: SectorState, profile: CouplingProfile):
    """``Phi`` values at which each amplitude ``a_j(t)`` vanishes."""
    r = profile.weights
    eta_plus = complex(np.dot(r, state0.a))
    d = dfs_projection(state0, profile)
    targets = []
    for j in range(profile.n):
        coeff = eta_plus * r[j]
        if abs(coeff) < 1e-14:
            continue
        ratio = -d[j] / coeff
        if abs(ratio.imag) > 1e-10 * max(1.0, abs(ratio)):
            continue
        targets.append((j, ratio.real))
    return targets


def _default_horizon(params: PropagatorParams) -> float:
    if params.gamma > 0:
        return 40.0 / params.gamma
    return 20.0 * math.pi / params.r


def find_tstar(
    state0: SectorState,
    profile: CouplingProfile,
    params: PropagatorParams,
    t_max: float | None = None,
) -> TStar | None:
    """Earliest time at which one qubit factors out of the sector state.

    In the bad cavity ``Phi`` falls monotonically from 1 to 0, so each target
    ``Phi* in (0, 1)`` has exactly one root, bracketed by doubling and found by
    bisection.  In the good cavity roots are located by a grid scan up to
    ``t_max`` and refined by bisection.
    """
    if params.r == 0:
        return None
    candidates = []
    for j, target in _root_targets(state0, profile):
        if params.overdamped:
            if not 0.0 < target < 1.0:
                continue
            hi = 1.0 / max(params.r, params.gamma)
            while propagator.phi(hi, params) > target:
                hi *= 2.0
            lo = 0.0
        else:
            if not -1.0 < target < 1.0:
                continue
            horizon = t_max if t_max is not None else _default_horizon(params)
            step = propagator.first_phi_zero(params) / 64.0
            grid = np.arange(0.0, horizon + step, step)
            vals = propagator.phi(grid, params) - target
            hits = np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]
            if hits.size == 0:
                continue
            lo, hi = grid[hits[0]], grid[hits[0] + 1]
        root = bisect(lambda s: propagator.phi(s, params) - target, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        candidates.append((root, j, target))

    for root, j, target in sorted(candidates):
        if t_max is not None and root > t_max:
            break
        state = evolve_to_phi(state0, profile, target)
        canon = canonical_decomposition(state)
        if canon.ground_only:
            continue
        defect = reduced_linear_entropy(canon.pure, j)
        if defect <= EPS_PURITY:
            return TStar(float(root), j, float(target), defect, state)
    return None


def asymptotic_state(state0: SectorState, profile: CouplingProfile) -> SectorState:
    """``t -> infinity`` limit when ``Phi -> 0``: only the DFS part survives."""
    if state0.n != profile.n:
        raise ValueError("state and profile disagree on the qubit count")
    d = dfs_projection(state0, profile)
    q = float(np.sum(np.abs(d) ** 2))
    return SectorState(d, math.sqrt(max(0.0, 1.0 - q)))
