"""Entropy functionals of a probability spectrum.

All functionals treat ``0**q`` as 0 for ``q > 0``, so rank-deficient
spectra (the usual case: rank <= N << M) are handled without warnings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CLAMP_TOL = 1e-12


class EntropyDomainError(ValueError):
    pass


def _probabilities(spectrum) -> np.ndarray:
    p = np.asarray(spectrum, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise EntropyDomainError("spectrum must be a non-empty 1-d vector")
    if np.any(p < -CLAMP_TOL) or not np.all(np.isfinite(p)):
        raise EntropyDomainError("spectrum has negative or non-finite entries")
    return np.clip(p, 0.0, None)


def gibbs(spectrum) -> float:
    """Von Neumann / Gibbs entropy ``-sum p ln p``."""
    p = _probabilities(spectrum)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def tsallis(spectrum, q: float) -> float:
    """Tsallis entropy ``(1 - sum p**q) / (q - 1)``; ``q == 1`` gives :func:`gibbs`."""
    if not q > 0:
        raise EntropyDomainError(f"entropic index must be positive, got {q}")
    if q == 1:
        return gibbs(spectrum)
    p = _probabilities(spectrum)
    p = p[p > 0]
    # expm1/log form keeps precision for q close to 1
    return float(-np.sum(p * np.expm1((q - 1) * np.log(p))) / (q - 1))


def renyi(spectrum, order: float = 2.0) -> float:
    """Renyi entropy ``ln(sum p**order) / (1 - order)``."""
    if not order > 0:
        raise EntropyDomainError(f"Renyi order must be positive, got {order}")
    p = _probabilities(spectrum)
    p = p[p > 0]
    if p.size == 0:
        raise EntropyDomainError("all-zero spectrum")
    if order == 1:
        return gibbs(p)
    # sum p**a = 1 + sum p*expm1((a-1) ln p); stays accurate for orders near 1
    delta = np.sum(p * np.expm1((order - 1) * np.log(p)))
    return float(np.log1p(delta) / (1 - order))


@dataclass(frozen=True)
class Functional:
    """An entropy functional tag: ``gibbs``, ``tsallis`` with ``q`` or ``renyi`` with an order."""

    kind: str
    index: float | None = None

    def __post_init__(self):
        if self.kind not in ("gibbs", "tsallis", "renyi"):
            raise ValueError(f"unknown functional {self.kind!r}")
        if self.kind != "gibbs" and self.index is None:
            raise ValueError(f"{self.kind} needs an index")

    def __call__(self, spectrum) -> float:
        if self.kind == "gibbs":
            return gibbs(spectrum)
        if self.kind == "tsallis":
            return tsallis(spectrum, self.index)
        return renyi(spectrum, self.index)

    @property
    def label(self) -> str:
        return self.kind if self.index is None else f"{self.kind}({self.index:g})"


GIBBS = Functional("gibbs")


def as_functional(functional) -> Functional:
    if isinstance(functional, Functional):
        return functional
    if isinstance(functional, str):
        return Functional(functional, 2.0 if functional == "renyi" else None)
    kind, index = functional
    return Functional(kind, index)


def tsallis_many(spectra: np.ndarray, q: float) -> np.ndarray:
    """Vectorized Tsallis entropy over rows of a ``(T, N)`` spectra array."""
    p = np.clip(np.asarray(spectra, dtype=float), 0.0, None)
    if q == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        return terms.sum(axis=1)
    with np.errstate(divide="ignore"):
        logp = np.log(np.where(p > 0, p, 1.0))
    terms = np.where(p > 0, -p * np.expm1((q - 1) * logp), 0.0)
    return terms.sum(axis=1) / (q - 1)


@dataclass
class EntropySeries:
    """Entropy values along a trajectory, tagged with the functional used."""

    functional: Functional
    kicks: np.ndarray
    values: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kicks = np.asarray(self.kicks)
        self.values = np.asarray(self.values, dtype=float)
        if self.kicks.shape != self.values.shape:
            raise ValueError("kicks and values must have the same length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("entropy values must be finite")

    def __len__(self):
        return len(self.kicks)


def entropy_series(traj, functional=GIBBS) -> EntropySeries:
    """Apply an entropy functional to every spectrum of a trajectory."""
    f = as_functional(functional)
    if f.kind == "tsallis" and f.index <= 0:
        raise EntropyDomainError("entropic index must be positive")
    if f.kind == "gibbs":
        values = tsallis_many(traj.spectra, 1.0)
    elif f.kind == "tsallis":
        values = tsallis_many(traj.spectra, f.index)
    else:
        values = np.array([f(s) for s in traj.spectra])
    return EntropySeries(f, np.array(traj.times), values, {"trajectory": traj.digest()})


def mean_series(series_list) -> tuple[EntropySeries, np.ndarray]:
    """Average series sharing one time grid; returns the mean and its standard error."""
    first = series_list[0]
    for s in series_list[1:]:
        if not np.array_equal(s.kicks, first.kicks) or s.functional != first.functional:
            raise ValueError("series must share functional and time grid")
    stack = np.vstack([s.values for s in series_list])
    n = len(series_list)
    err = stack.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(stack.shape[1])
    mean = EntropySeries(first.functional, first.kicks, stack.mean(axis=0),
                         {"realizations": [s.source.get("trajectory") for s in series_list]})
    return mean, err
