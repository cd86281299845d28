"""Ensemble evolution and the density-matrix spectrum.

The ensemble density matrix ``rho = (1/N) sum_i |phi_i><phi_i|`` has rank at
most ``N`` and its nonzero eigenvalues coincide with those of ``G/N`` where
``G_ij = <phi_i|phi_j>`` is the ``N x N`` Gram matrix.  Only the Gram
matrix is ever formed, so the cost per sample is ``O(N^2 M)``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .entropy import gibbs
from .rotor import (
    DimensionError,
    NoiseModel,
    RotorError,
    RotorParams,
    basis_state,
    kick_step,
    kinetic_phase,
    noise_block,
    tail_mass,
)

CLAMP_TOL = 1e-12
HERMITIAN_TOL = 1e-8
DENSE_SAMPLING_LIMIT = 512
GEOMETRIC_SAMPLES = 200
DEFAULT_KICK_CAP = 10_000


class SpectrumError(RotorError):
    pass


class AliasingError(RotorError):
    """Raised when probability reaches the edge of the momentum grid."""

    def __init__(self, kick: int, mass: float, tolerance: float):
        super().__init__(
            f"tail mass {mass:.3e} exceeds tolerance {tolerance:.1e} at kick {kick}"
        )
        self.kick = kick
        self.mass = mass


def gram_matrix(ens: np.ndarray) -> np.ndarray:
    """Overlap matrix ``G_ij = <phi_i|phi_j>`` of an ``(N, M)`` ensemble."""
    ens = np.asarray(ens)
    if ens.ndim != 2:
        raise DimensionError("ensemble must be a 2-d array of shape (N, M)")
    return ens.conj() @ ens.T


def rho_spectrum(G: np.ndarray, N: int | None = None) -> np.ndarray:
    """Eigenvalues of ``G/N`` in descending order, tiny negatives clamped to 0."""
    G = np.asarray(G)
    N = G.shape[0] if N is None else N
    if G.shape != (N, N):
        raise DimensionError(f"Gram matrix shape {G.shape} does not match N={N}")
    scale = max(1.0, float(np.abs(G).max()))
    if np.abs(G - G.conj().T).max() > HERMITIAN_TOL * scale:
        raise SpectrumError("Gram matrix is not Hermitian")
    lam = np.linalg.eigvalsh(G / N)[::-1]
    if lam[-1] < -1e-9:
        raise SpectrumError(f"Gram matrix is not positive semidefinite (min eigenvalue {lam[-1]:.3e})")
    return np.where(lam < CLAMP_TOL, 0.0, lam)


def sampling_times(n_kicks: int, n_samples: int = GEOMETRIC_SAMPLES) -> np.ndarray:
    """Kicks at which the spectrum is recorded.

    Every kick up to :data:`DENSE_SAMPLING_LIMIT`, otherwise roughly
    ``n_samples`` geometrically spaced kicks (always including the last).
    """
    if n_kicks < 1:
        raise ValueError("n_kicks must be >= 1")
    if n_kicks <= DENSE_SAMPLING_LIMIT:
        return np.arange(1, n_kicks + 1)
    t = np.unique(np.round(np.geomspace(1, n_kicks, n_samples)).astype(int))
    # geomspace duplicates at small t; top up until the count is reached
    extra = n_samples
    while len(t) < n_samples:
        extra += n_samples - len(t)
        t = np.unique(np.round(np.geomspace(1, n_kicks, extra)).astype(int))
    return t


@dataclass
class SpectrumTrajectory:
    """Density-matrix spectra recorded at a set of kicks.

    ``spectra[i]`` holds the ``N`` eigenvalues (descending) after kick
    ``times[i]``.  The spectra do not depend on any entropic index, so one
    trajectory serves every functional and every ``q``.
    """

    times: np.ndarray
    spectra: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=int)
        self.spectra = np.atleast_2d(np.asarray(self.spectra, dtype=float))
        if len(self.times) != len(self.spectra):
            raise ValueError("times and spectra differ in length")

    @property
    def N(self) -> int:
        return self.spectra.shape[1]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.times.tobytes())
        h.update(np.ascontiguousarray(self.spectra).tobytes())
        return h.hexdigest()[:16]

    def to_csv(self, path) -> None:
        """Write ``kick, lambda_1..lambda_N`` rows plus a ``.json`` metadata sidecar."""
        path = Path(path)
        header = ",".join(["kick"] + [f"lambda_{i + 1}" for i in range(self.N)])
        lines = [header]
        for t, row in zip(self.times, self.spectra):
            lines.append(",".join([str(int(t))] + [format(float(x), ".17g") for x in row]))
        path.write_text("\n".join(lines) + "\n")
        sidecar = dict(self.metadata, N=self.N, digest=self.digest())
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SpectrumTrajectory":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta_path = path.with_suffix(".json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        meta.pop("digest", None)
        meta.pop("N", None)
        return cls(data[:, 0].astype(int), data[:, 1:], meta)


def evolve_ensemble(
    params: RotorParams,
    noise: NoiseModel,
    N: int = 10,
    n_kicks: int | None = None,
    times=None,
    init: np.ndarray | None = None,
    shared_noise: bool = False,
    stop_fraction: float = 0.9,
    workers: int | None = None,
) -> SpectrumTrajectory:
    """Evolve ``N`` copies of ``init`` under independent noise and record spectra.

    Parameters
    ----------
    params, noise
        Rotor parameters and the noise process.  Member ``j`` draws its
        noise from substream ``j`` (or substream 0 for every member when
        ``shared_noise`` is set).
    N
        Ensemble size.
    n_kicks
        Number of periods.  When ``None`` the run stops at the first sample
        where the Gibbs entropy exceeds ``stop_fraction * ln N``, or at
        :data:`DEFAULT_KICK_CAP`.
    times
        Explicit sampling kicks; defaults to :func:`sampling_times`.
    init
        Initial wavefunction shared by all members, default ``|m=0>``.

    Raises
    ------
    AliasingError
        If the tail mass of any member exceeds ``params.tail_tolerance`` at a
        sampled kick.
    """
    if N < 1:
        raise ValueError("ensemble size must be >= 1")
    M = params.basis_size
    auto_stop = n_kicks is None
    horizon = DEFAULT_KICK_CAP if auto_stop else int(n_kicks)
    times = sampling_times(horizon) if times is None else np.asarray(times, dtype=int)
    if len(times) == 0 or times[0] < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("sampling kicks must be positive and strictly increasing")
    horizon = int(times[-1])

    psi0 = basis_state(M, 0) if init is None else np.asarray(init, dtype=complex)
    if psi0.shape != (M,):
        raise DimensionError("initial state does not match the basis size")
    ens = np.tile(psi0, (N, 1))
    streams = np.zeros(N, dtype=int) if shared_noise else np.arange(N)
    stop_level = stop_fraction * np.log(N)

    recorded_t, recorded = [], []
    sample = 0
    for kick in range(1, horizon + 1):
        if noise.D > 0:
            F = noise_block(noise, streams, kick - 1)
            ens = kick_step(ens, params, workers) * kinetic_phase(params, F)
        else:
            ens = kick_step(ens, params, workers) * kinetic_phase(params, 0.0)
        if kick != times[sample]:
            continue
        mass = float(np.max(tail_mass(ens, 0.1)))
        if mass >= params.tail_tolerance:
            raise AliasingError(kick, mass, params.tail_tolerance)
        lam = rho_spectrum(gram_matrix(ens), N)
        recorded_t.append(kick)
        recorded.append(lam)
        sample += 1
        if auto_stop and N > 1 and gibbs(lam) > stop_level:
            break

    meta = {
        "hbar": params.hbar,
        "K": params.K,
        "k": params.k,
        "basis_size": M,
        "tail_tolerance": params.tail_tolerance,
        "D": noise.D,
        "master_seed": noise.master_seed,
        "N": N,
        "n_kicks": int(recorded_t[-1]),
        "shared_noise": shared_noise,
    }
    return SpectrumTrajectory(np.array(recorded_t), np.array(recorded), meta)
