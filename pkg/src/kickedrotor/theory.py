"""Scaling theory for the coarse-graining time.

The unvisited part of phase space decays as a q-exponential,

    R(t) = R0 / [1 + lambda_q (1 - q) t]^(1/(1-q)),

and coarse graining is complete at the time ``t_CG`` where ``R(t) = D t``.
For ``q = 1`` this gives ``t_CG ~ (2/lambda) ln(1/sqrt(D))``; for ``q < 1``
it gives the power law ``t_CG ~ D**(-theta)`` with
``theta = (1 - q)/(2 - q)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class TheoryParams:
    lambda_q: float = 1.0
    q: float = 0.5
    R0: float = 1.0
    D: float = 1e-6
    hbar: float | None = None
    lambda_1: float | None = None

    def __post_init__(self):
        if not (self.lambda_q > 0 and self.R0 > 0 and self.D > 0):
            raise ValueError("lambda_q, R0 and D must be positive")
        if not 0 < self.q <= 1:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")

    @property
    def rate(self) -> float:
        """Decay rate: ``lambda_1`` in the exponential case when given, else ``lambda_q``."""
        if self.q == 1 and self.lambda_1 is not None:
            return self.lambda_1
        return self.lambda_q


def r_model(t, p: TheoryParams):
    """Measure of the region not yet visited at time ``t``."""
    t = np.asarray(t, dtype=float)
    if p.q == 1:
        out = p.R0 * np.exp(-p.rate * t)
    else:
        a = 1.0 - p.q
        out = p.R0 * np.exp(-np.log1p(p.rate * a * t) / a)
    return float(out) if out.ndim == 0 else out


def solve_tcg(p: TheoryParams, rtol: float = 1e-10) -> float:
    """Root of ``R(t) = D t``.

    ``R`` decreases and ``D t`` increases, so the root is unique; it is
    bracketed in ``[0, 1000 R0/D]``.
    """
    hi = 1e3 * p.R0 / p.D

    def f(t):
        return r_model(t, p) - p.D * t

    if not f(hi) < 0:
        raise SolverError("could not bracket the coarse-graining time")
    return brentq(f, 0.0, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)


def tcg_exponential_estimate(D, lambda_1: float):
    """Strong-chaos estimate ``(2/lambda_1) ln(1/sqrt(D))``."""
    return 2.0 / lambda_1 * np.log(1.0 / np.sqrt(D))


def tcg_power_estimate(D, q: float):
    """Leading power law ``D**(-theta(q))`` (unit prefactor)."""
    return np.asarray(D, dtype=float) ** (-theta(q))


def theta(q):
    """Scaling exponent ``(1 - q)/(2 - q)`` of the coarse-graining time."""
    q = np.asarray(q, dtype=float)
    out = (1.0 - q) / (2.0 - q)
    return float(out) if out.ndim == 0 else out


def t_quantum(hbar: float, lam: float) -> float:
    """Onset time of quantum correlations, ``ln(1/hbar)/lambda``."""
    if not 0 < hbar < 1:
        raise ValueError("hbar must lie in (0, 1)")
    if not lam > 0:
        raise ValueError("Lyapunov coefficient must be positive")
    return float(np.log(1.0 / hbar) / lam)
