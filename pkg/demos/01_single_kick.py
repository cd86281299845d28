"""A single kick spreads momentum into Bessel amplitudes.

Starting from the zero-momentum state, one kick of strength k gives
|c_m| = |J_m(k)|.  This is the cleanest check that the FFT kick is right.
"""
import numpy as np
from scipy.special import jv

from kickedrotor import NoiseModel, RotorParams, basis_state, kick_step, step

M = 1024
for k in (0.5, 5.0, 20.0):
    p = RotorParams.from_k(hbar=0.1, k=k, basis_size=M)
    out = kick_step(basis_state(M), p)
    m = np.arange(-40, 41)
    err = np.max(np.abs(np.abs(out[m + M // 2]) - np.abs(jv(m, k))))
    width = np.sqrt(np.sum(np.abs(out) ** 2 * p.momenta.astype(float) ** 2))
    print(f"k={k:5.1f}  max | |c_m| - |J_m(k)| | = {err:.1e}   rms momentum = {width:6.2f}  (k/sqrt2 = {k/np.sqrt(2):6.2f})")

# %% repeated kicks: classical diffusion, then the rms momentum stops growing
p = RotorParams(hbar=0.1, K=7.1, basis_size=2**14)
psi = basis_state(p.basis_size)
quiet = NoiseModel(0.0)
for n in range(1, 201):
    psi = step(psi, p, quiet, 0, n - 1)
    if n in (1, 5, 20, 50, 100, 200):
        rms = np.sqrt(np.sum(np.abs(psi) ** 2 * p.momenta.astype(float) ** 2))
        print(f"kick {n:4d}: rms m = {rms:8.1f}")
