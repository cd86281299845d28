"""Quantum kicked rotor: one-period Floquet map in the momentum basis.

Units are T = I = 1.  A wavefunction is a complex vector of length ``M``
indexed by the momentum quantum number ``m`` in centred order, i.e. entry
``i`` holds ``m = i - M/2``.  Functions accept stacked arrays of shape
``(..., M)`` so a whole ensemble can be advanced in one call.

One period is a kick ``exp(-i k cos(theta))`` applied on the angle grid
``theta_j = 2*pi*j/M`` followed by the free (kinetic) phase
``exp(-i (hbar*m + F)**2 / (2*hbar))`` where ``F`` is the noise draw.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft


class RotorError(Exception):
    """Base class for rotor evolution errors."""


class InvalidStateError(RotorError):
    pass


class DimensionError(RotorError):
    pass


class ParameterError(RotorError, ValueError):
    pass


@dataclass(frozen=True)
class RotorParams:
    """Parameters of the kicked rotor.

    The kick strength is derived from the classical parameter as
    ``k = 2*K/hbar``.  Use :meth:`from_k` to set ``k`` directly.
    """

    hbar: float
    K: float
    basis_size: int
    tail_tolerance: float = 1e-6
    k: float = field(init=False)

    def __post_init__(self):
        if not self.hbar > 0:
            raise ParameterError(f"hbar must be positive, got {self.hbar}")
        if self.K < 0:
            raise ParameterError(f"K must be non-negative, got {self.K}")
        if self.basis_size < 2 or self.basis_size % 2:
            raise ParameterError(f"basis_size must be even and >= 2, got {self.basis_size}")
        if not 0 < self.tail_tolerance < 1:
            raise ParameterError("tail_tolerance must lie in (0, 1)")
        object.__setattr__(self, "k", 2.0 * self.K / self.hbar)

    @classmethod
    def from_k(cls, hbar: float, k: float, basis_size: int, tail_tolerance: float = 1e-6):
        return cls(hbar, 0.5 * hbar * k, basis_size, tail_tolerance)

    @property
    def momenta(self) -> np.ndarray:
        """Momentum quantum numbers ``m`` in storage order."""
        return momentum_indices(self.basis_size)


def momentum_indices(M: int) -> np.ndarray:
    return np.arange(-(M // 2), M // 2)


def default_basis_size(hbar: float) -> int:
    """Default grid size: 2**21 for hbar below 0.05, else 2**14."""
    return 2**21 if hbar < 0.05 - 1e-12 else 2**14


def basis_state(M: int, m: int = 0) -> np.ndarray:
    """Momentum eigenstate ``|m>``."""
    if not -(M // 2) <= m < M // 2:
        raise DimensionError(f"m={m} outside the grid of size {M}")
    psi = np.zeros(M, dtype=complex)
    psi[m + M // 2] = 1.0
    return psi


def _check(psi: np.ndarray, params: RotorParams) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.shape[-1] != params.basis_size:
        raise DimensionError(
            f"wavefunction has {psi.shape[-1]} components, params expect {params.basis_size}"
        )
    if not np.all(np.isfinite(psi)):
        raise InvalidStateError("wavefunction contains non-finite amplitudes")
    return psi


def kick_step(psi: np.ndarray, params: RotorParams, workers: int | None = None) -> np.ndarray:
    """Apply the kick operator ``exp(-i k cos(theta))``.

    The state is taken to the angle grid with a unitary inverse DFT,
    multiplied pointwise and transformed back.
    """
    psi = _check(psi, params)
    M = params.basis_size
    if params.k == 0:
        return psi.copy()
    theta = 2 * np.pi * np.arange(M) / M
    phase = np.exp(-1j * params.k * np.cos(theta))
    # centred order -> FFT order so that index i carries e^{i m theta}
    amp = np.fft.ifftshift(psi, axes=-1)
    angle = scipy.fft.ifft(amp, norm="ortho", workers=workers)
    angle *= phase
    amp = scipy.fft.fft(angle, norm="ortho", workers=workers, overwrite_x=True)
    return np.fft.fftshift(amp, axes=-1)


def kinetic_phase(params: RotorParams, F=0.0) -> np.ndarray:
    """Diagonal free-evolution factor ``exp(-i (hbar m + F)^2 / (2 hbar))``.

    ``F`` may be a scalar or an array of shape ``(n,)``, in which case the
    result has shape ``(n, M)``.
    """
    if params.hbar == 0:
        raise ParameterError("kinetic step is singular at hbar = 0")
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise ParameterError("noise value must be finite")
    p = params.hbar * params.momenta
    shifted = p + F[..., None] if F.ndim else p + F
    return np.exp(-1j * shifted**2 / (2 * params.hbar))


def kinetic_step(psi: np.ndarray, params: RotorParams, F=0.0) -> np.ndarray:
    """Multiply each momentum amplitude by the (noisy) kinetic phase."""
    psi = _check(psi, params)
    return psi * kinetic_phase(params, F)


def tail_mass(psi: np.ndarray, fraction: float = 0.1):
    """Probability held by the outermost ``fraction`` of the momentum grid.

    The band is split evenly between the two ends of the grid.  Works on
    stacked arrays, returning one value per state.
    """
    if not 0 < fraction < 1:
        raise ParameterError("fraction must lie in (0, 1)")
    psi = np.asarray(psi)
    M = psi.shape[-1]
    per_side = int(round(fraction * M / 2))
    if per_side == 0:
        return np.zeros(psi.shape[:-1]) if psi.ndim > 1 else 0.0
    prob = np.abs(psi) ** 2
    out = prob[..., :per_side].sum(axis=-1) + prob[..., M - per_side:].sum(axis=-1)
    return out if psi.ndim > 1 else float(out)


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian momentum-shift process with variance ``D``.

    Every draw is addressed by ``(master_seed, member, kick)`` through its
    own :class:`numpy.random.SeedSequence`, so values do not depend on the
    order in which they are requested.
    """

    D: float
    master_seed: int = 0

    def __post_init__(self):
        if not self.D >= 0:
            raise ParameterError(f"noise variance must be non-negative, got {self.D}")

    @classmethod
    def from_sqrt(cls, sqrt_D: float, master_seed: int = 0) -> "NoiseModel":
        return cls(sqrt_D**2, master_seed)


def sample_noise(noise: NoiseModel, member: int, kick_index: int) -> float:
    """Noise value ``F(n)`` for one ensemble member at one kick."""
    if noise.D < 0:
        raise ParameterError("noise variance must be non-negative")
    if noise.D == 0:
        return 0.0
    seq = np.random.SeedSequence(noise.master_seed, spawn_key=(member, kick_index))
    return float(np.sqrt(noise.D) * np.random.default_rng(seq).standard_normal())


def noise_block(noise: NoiseModel, members, kick_index: int) -> np.ndarray:
    """Draws for several members at one kick; equals repeated :func:`sample_noise`."""
    return np.array([sample_noise(noise, int(j), kick_index) for j in members])


def step(psi, params: RotorParams, noise: NoiseModel, member: int, kick_index: int, workers=None):
    """One full period for a single member: kick, then noisy free evolution."""
    F = sample_noise(noise, member, kick_index)
    return kinetic_step(kick_step(psi, params, workers), params, F)
