"""Closed-form survival amplitude of the collective (superradiant) mode.

For a Lorentzian bath the memory kernel is ``lam * exp(-gamma * tau)`` and the
superradiant amplitude obeys ``c'' + gamma c' + r**2 c = 0`` with ``c(0) = 1``,
``c'(0) = 0`` where ``r = sqrt(lam) * alpha_T``.  Its solution is

    Phi(t) = exp(-gamma t / 2) [cosh(Omega t / 2) + (gamma / Omega) sinh(Omega t / 2)]

with ``Omega = sqrt(gamma**2 - 4 r**2)`` (imaginary in the good cavity).

Two rate conventions appear in the literature and both are exposed here:

* ``decay_rate``: the Lindblad rate ``-2 Phi'/Phi`` of the collective amplitude
  damping master equation.  In the bad cavity it tends to ``gamma - Omega``,
  i.e. ``2 r**2 / gamma`` to leading order.
* ``amplitude_rate``: ``-Phi'/Phi``, whose bad-cavity asymptote is the
  Markovian amplitude rate ``r**2 / gamma`` used by :func:`phi_markov`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

#: |Phi| below which the time-local rate is reported as a pole (NaN).
POLE_EPS = 1e-9

# |Omega t / 2| below which the cosh/sinhc series is used.
_SERIES_X = 1e-3
# Re(Omega t / 2) above which the two-exponential form avoids overflow.
_EXP_X = 20.0


@dataclass(frozen=True)
class BathSpec:
    """Lorentzian bath ``J(w) = lam * gamma / (pi * ((w - omega0)**2 + gamma**2))``."""

    lam: float
    gamma: float
    omega0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.gamma)):
            raise ValueError("lam and gamma must be finite")
        if self.lam < 0 or self.gamma < 0:
            raise ValueError("lam and gamma must be non-negative")
        if self.lam == 0 and self.gamma == 0:
            raise ValueError("lam and gamma cannot both be zero")

    def spectral_density(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.gamma == 0:
            raise ValueError("spectral density is a delta function for gamma = 0")
        return self.lam * self.gamma / (np.pi * ((omega - self.omega0) ** 2 + self.gamma**2))

    def effective_rate(self, alpha_total: float) -> float:
        """``r = sqrt(lam) * alpha_T``."""
        return math.sqrt(self.lam) * alpha_total


@dataclass(frozen=True)
class PropagatorParams:
    """Spectral width ``gamma`` and effective collective rate ``r`` (inverse time)."""

    gamma: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.r)):
            raise ValueError("gamma and r must be finite")
        if self.gamma < 0 or self.r < 0:
            raise ValueError("gamma and r must be non-negative")
        if self.gamma == 0 and self.r == 0:
            raise ValueError("gamma and r cannot both be zero")

    @classmethod
    def from_bath(cls, bath: BathSpec, alpha_total: float) -> "PropagatorParams":
        return cls(gamma=bath.gamma, r=bath.effective_rate(alpha_total))

    @classmethod
    def from_ratio(cls, R: float, gamma: float = 1.0) -> "PropagatorParams":
        """Dimensionless parameterization ``R = r / gamma``."""
        return cls(gamma=gamma, r=R * gamma)

    @property
    def omega(self) -> complex:
        return complex(np.sqrt(complex(self.gamma**2 - 4.0 * self.r**2)))

    @property
    def R(self) -> float:
        if self.gamma == 0:
            raise ValueError("R = r / gamma is undefined for gamma = 0")
        return self.r / self.gamma

    @property
    def markov_rate(self) -> float:
        """Amplitude rate ``r**2 / gamma`` of the Markovian limit."""
        if self.gamma == 0:
            raise ValueError("no Markovian limit for gamma = 0")
        return self.r**2 / self.gamma

    @property
    def slow_rate(self) -> float:
        """Asymptotic Lindblad rate ``gamma - Omega`` (bad cavity only)."""
        if not self.overdamped:
            raise ValueError("no real slow pole when 2 r > gamma")
        return self.gamma - self.omega.real

    @property
    def overdamped(self) -> bool:
        return 2.0 * self.r <= self.gamma


def _cosh_sinhc(x):
    """``cosh(x)`` and ``sinh(x)/x`` for complex ``x``, series-safe near 0."""
    x2 = x * x
    small = np.abs(x) < _SERIES_X
    safe = np.where(small, 1.0, x)
    ch = np.where(small, 1.0 + x2 / 2.0 + x2 * x2 / 24.0, np.cosh(safe))
    shc = np.where(small, 1.0 + x2 / 6.0 + x2 * x2 / 120.0, np.sinh(safe) / safe)
    return ch, shc


def _real_part(z, scale):
    imag = np.max(np.abs(np.imag(z)), initial=0.0)
    if imag > 1e-10 * max(scale, 1.0):
        raise NumericalError(f"imaginary residue {imag:.3e} in closed-form amplitude")
    return np.real(z)


def _evaluate(t, params: PropagatorParams):
    """Return ``(Phi(t), Phi'(t))`` as float arrays."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    shape = t.shape
    t = t.reshape(-1)
    gamma, r = params.gamma, params.r
    omega = params.omega
    x = omega * t / 2.0
    big = x.real > _EXP_X

    with np.errstate(over="ignore", invalid="ignore"):
        ch, shc = _cosh_sinhc(np.where(big, 0.0, x))
        damp = np.exp(-gamma * t / 2.0)
        phi = damp * (ch + (gamma * t / 2.0) * shc)
        # Phi' = -r^2 t exp(-gamma t/2) sinh(x)/x
        dphi = -(r**2) * t * damp * shc

    if np.any(big):
        # Overdamped and late: Omega is real, use the decaying exponentials.
        w = omega.real
        tb = t[big]
        slow = np.exp((w - gamma) * tb / 2.0)
        fast = np.exp(-(w + gamma) * tb / 2.0)
        phi = np.array(phi, dtype=complex)
        dphi = np.array(dphi, dtype=complex)
        phi[big] = 0.5 * (1.0 + gamma / w) * slow + 0.5 * (1.0 - gamma / w) * fast
        dphi[big] = -(r**2) * (slow - fast) / w

    phi = _real_part(phi, 1.0).reshape(shape)
    dphi = _real_part(dphi, r**2 * max(float(np.max(t, initial=0.0)), 1.0)).reshape(shape)
    return phi, dphi


def phi(t, params: PropagatorParams):
    """Survival amplitude of the superradiant component at time(s) ``t``."""
    value, _ = _evaluate(t, params)
    return value if np.ndim(value) else float(value)


def phi_dot(t, params: PropagatorParams):
    """Analytic time derivative of :func:`phi`."""
    _, value = _evaluate(t, params)
    return value if np.ndim(value) else float(value)


def phi_markov(t, params: PropagatorParams):
    """Markovian amplitude ``exp(-r**2 t / gamma)``; requires ``gamma > 0``."""
    if params.gamma <= 0:
        raise ValueError("the Markovian limit needs gamma > 0")
    value = np.exp(-params.markov_rate * np.asarray(t, dtype=float))
    return value if np.ndim(value) else float(value)


def correlation(tau, bath: BathSpec):
    """Bath correlation function ``lam * exp(-gamma * tau)``."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    value = bath.lam * np.exp(-bath.gamma * tau)
    return value if np.ndim(value) else float(value)


def decay_rate(t, params: PropagatorParams):
    """Time-local Lindblad rate ``-2 Phi'(t) / Phi(t)``.

    The common factor ``exp(-gamma t / 2)`` is cancelled analytically so the
    bad-cavity rate stays finite after ``Phi`` underflows.  Returns NaN (the
    pole marker) wherever ``|Phi| < POLE_EPS``, which only happens for
    ``2 r > gamma``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    shape = t.shape
    t = t.reshape(-1)
    gamma, r = params.gamma, params.r
    x = params.omega * t / 2.0
    big = x.real > _EXP_X
    ch, shc = _cosh_sinhc(np.where(big, 0.0, x))
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = 2.0 * r**2 * t * shc / (ch + (gamma * t / 2.0) * shc)
    rate = np.array(rate, dtype=complex)
    if np.any(big):
        w = params.omega.real
        e = np.exp(-w * t[big])
        a = 0.5 * (1.0 + gamma / w)
        b = 0.5 * (1.0 - gamma / w)
        rate[big] = 2.0 * r**2 / w * (1.0 - e) / (a + b * e)
    if not params.overdamped:
        with np.errstate(invalid="ignore"):
            rate[np.abs(phi(t, params)) < POLE_EPS] = np.nan
    rate = np.where(np.isnan(rate), np.nan, _real_part(np.nan_to_num(rate), 1.0)).reshape(shape)
    return rate if np.ndim(rate) else float(rate)


def amplitude_rate(t, params: PropagatorParams):
    """``-Phi'/Phi``; tends to ``r**2/gamma`` in the bad cavity."""
    return 0.5 * decay_rate(t, params)


def is_cp_divisible(params: PropagatorParams) -> bool:
    """True iff the rate ``-2 Phi'/Phi`` is non-negative for all ``t >= 0``.

    For ``2 r <= gamma``, ``Phi`` is a positive mixture of two decaying
    exponentials with ``Phi' <= 0``.  Otherwise ``Phi`` oscillates through
    zero and the rate has poles flanked by negative stretches.
    """
    return params.overdamped


def first_phi_zero(params: PropagatorParams) -> float | None:
    """Smallest ``t > 0`` with ``Phi(t) = 0``, or None in the bad cavity."""
    if params.overdamped:
        return None
    w = math.sqrt(4.0 * params.r**2 - params.gamma**2)
    # tan(w t / 2) = -w / gamma
    return 2.0 * (math.pi - math.atan2(w, params.gamma)) / w
