"""Independent numerical checks of the closed-form dynamics.

Two routes that share no code with :mod:`collective_decay.propagator` beyond
the parameter containers:

* the local second-order form of the memory-kernel equation, integrated by
  classical fixed-step RK4;
* an explicit finite bath (``K`` modes on a uniform grid sampling the Lorentzian)
  propagated in the single-excitation sector, also by RK4, in the frame rotating
  at the qubit frequency so only the detunings enter.

Plus a loop-based partial transpose and SVD trace norm for negativity.
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np

from .dfs import CouplingProfile, SectorState
from .propagator import BathSpec, PropagatorParams

log = logging.getLogger(__name__)


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def recommended_dt(params: PropagatorParams) -> float:
    scales = [1.0 / s for s in (params.gamma, params.r) if s > 0]
    return 1e-3 * min(scales)


def solve_cplus_ode(params: PropagatorParams, t_max: float, dt: float):
    """Integrate ``c'' + gamma c' + r**2 c = 0``, ``c(0) = 1``, ``c'(0) = 0``.

    Returns ``(times, c)`` sampled at every step (the last step is shortened to
    land on ``t_max``).
    """
    if dt > recommended_dt(params) * (1 + 1e-12):
        warnings.warn(f"dt={dt:g} exceeds the recommended {recommended_dt(params):g}", stacklevel=2)
    gamma, r2 = params.gamma, params.r**2
    steps = int(math.ceil(t_max / dt - 1e-9))
    times = np.empty(steps + 1)
    out = np.empty(steps + 1)
    c, v, t = 1.0, 0.0, 0.0
    times[0], out[0] = t, c
    # scalar RK4 on (c, v = c')
    for i in range(1, steps + 1):
        h = min(dt, t_max - t)
        k1c, k1v = v, -gamma * v - r2 * c
        c2, v2 = c + 0.5 * h * k1c, v + 0.5 * h * k1v
        k2c, k2v = v2, -gamma * v2 - r2 * c2
        c3, v3 = c + 0.5 * h * k2c, v + 0.5 * h * k2v
        k3c, k3v = v3, -gamma * v3 - r2 * c3
        c4, v4 = c + h * k3c, v + h * k3v
        k4c, k4v = v4, -gamma * v4 - r2 * c4
        c += h / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c)
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        t = i * dt if i < steps else t_max
        times[i], out[i] = t, c
    return times, out


@dataclass(frozen=True, eq=False)
class DiscretizedBath:
    """``K`` modes at detunings ``omegas - omega0`` with ``g_k**2 = J(omega_k) d_omega``."""

    omegas: np.ndarray
    gs: np.ndarray
    omega0: float = 0.0

    @classmethod
    def lorentzian(cls, bath: BathSpec, modes: int, half_width: float) -> "DiscretizedBath":
        """Midpoint grid on ``[omega0 - W, omega0 + W]``."""
        if modes < 1 or half_width <= 0:
            raise ValueError("need at least one mode and a positive window")
        d_omega = 2.0 * half_width / modes
        detunings = -half_width + (np.arange(modes) + 0.5) * d_omega
        omegas = bath.omega0 + detunings
        gs = np.sqrt(bath.spectral_density(omegas) * d_omega)
        return cls(omegas, gs, bath.omega0)

    @property
    def K(self) -> int:
        return self.omegas.size

    @property
    def spacing(self) -> float:
        return float(self.omegas[1] - self.omegas[0]) if self.K > 1 else math.inf

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.gs**2))


@dataclass(frozen=True, eq=False)
class BathRun:
    times: np.ndarray
    amplitudes: np.ndarray  # (len(times), n) qubit amplitudes
    bath_population: np.ndarray
    norm_drift: float


def solve_discretized_bath(
    state0: SectorState,
    profile: CouplingProfile,
    bath: DiscretizedBath,
    t_max: float,
    dt: float,
    sample_every: int = 1,
) -> BathRun:
    """Propagate qubits plus ``K`` bath modes in the single-excitation sector.

    Couplings are the absolute ``profile.alphas``; with ``lam`` the bath's
    strength the matching closed form uses ``r = sqrt(lam) * alpha_T``.
    """
    if bath.recurrence_time < t_max:
        warnings.warn(
            f"bath recurrence time {bath.recurrence_time:.4g} is shorter than t_max={t_max:g}",
            stacklevel=2,
        )
    alphas = profile.alphas.astype(complex)
    g = bath.gs
    detuning = bath.omegas - bath.omega0
    n = profile.n

    def rhs(_t, y):
        c, b = y[:n], y[n:]
        out = np.empty_like(y)
        out[:n] = -1j * alphas * np.dot(g, b)
        out[n:] = -1j * (detuning * b + g * np.dot(alphas, c))
        return out

    y = np.concatenate([state0.a, np.zeros(bath.K, dtype=complex)])
    norm0 = float(np.vdot(y, y).real)
    steps = int(round(t_max / dt))
    if not math.isclose(steps * dt, t_max, rel_tol=1e-9):
        raise ValueError("t_max must be an integer multiple of dt")
    times, amps, pops = [0.0], [y[:n].copy()], [0.0]
    drift = 0.0
    for i in range(1, steps + 1):
        y = rk4_step(rhs, (i - 1) * dt, y, dt)
        if i % sample_every == 0 or i == steps:
            times.append(i * dt)
            amps.append(y[:n].copy())
            pops.append(float(np.sum(np.abs(y[n:]) ** 2)))
            drift = max(drift, abs(float(np.vdot(y, y).real) - norm0))
    log.debug("discretized bath: K=%d, steps=%d, norm drift %.3e", bath.K, steps, drift)
    return BathRun(np.array(times), np.array(amps), np.array(pops), drift)


def brute_partial_transpose(rho: np.ndarray, subset) -> np.ndarray:
    """Element-by-element partial transpose over the qubits in ``subset``."""
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    subset = set(subset)
    out = np.empty_like(rho)
    for row, col in product(range(dim), repeat=2):
        bits_r = [(row >> (n - 1 - q)) & 1 for q in range(n)]
        bits_c = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        for q in subset:
            bits_r[q], bits_c[q] = bits_c[q], bits_r[q]
        r2 = sum(b << (n - 1 - q) for q, b in enumerate(bits_r))
        c2 = sum(b << (n - 1 - q) for q, b in enumerate(bits_c))
        out[row, col] = rho[r2, c2]
    return out


def brute_negativity(rho: np.ndarray, subset) -> float:
    """``(||rho^T||_1 - Tr rho) / 2`` with the trace norm from singular values."""
    subset = list(subset)
    n = rho.shape[0].bit_length() - 1
    if not subset or len(set(subset)) >= n:
        raise ValueError("subset must be a nonempty proper subset")
    s = np.linalg.svd(brute_partial_transpose(rho, subset), compute_uv=False)
    return float(max(0.0, (s.sum() - np.trace(rho).real) / 2.0))


def write_comparison_csv(path_or_file, times, closed_form, oracle_values, abs_err=None):
    """Columns ``t, closed_form, oracle, abs_err`` with 12 significant digits."""
    closed_form = np.asarray(closed_form)
    oracle_values = np.asarray(oracle_values)
    if abs_err is None:
        abs_err = np.abs(closed_form - oracle_values)
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "closed_form", "oracle", "abs_err"])
        for row in zip(times, closed_form, oracle_values, abs_err):
            writer.writerow([f"{float(np.real(x)):.12g}" for x in row])
    finally:
        if own:
            fh.close()
