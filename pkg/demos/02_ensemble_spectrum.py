"""Noise turns an ensemble of pure states into a mixed state.

Ten copies of the rotor start in the same state and feel independent
noise.  The density-matrix spectrum, computed from the 10 x 10 Gram
matrix, starts at (1, 0, ..., 0) and drifts toward the uniform 1/N.
"""
import numpy as np

from kickedrotor import NoiseModel, RotorParams, evolve_ensemble
from kickedrotor.entropy import gibbs

params = RotorParams(hbar=0.1, K=7.1, basis_size=2**14)
N = 10
traj = evolve_ensemble(params, NoiseModel.from_sqrt(0.002, master_seed=1), N=N, n_kicks=30)

np.set_printoptions(precision=3, suppress=True)
print(f"ln N = {np.log(N):.3f}")
for t, lam in zip(traj.times, traj.spectra):
    if t in (0, 1, 2, 4, 8, 15, 30):
        print(f"kick {t:3d}  S = {gibbs(lam):.3f}  lambda = {lam}")

# %% the same noise for every member keeps the ensemble pure
shared = evolve_ensemble(params, NoiseModel.from_sqrt(0.002, 1), N=N, n_kicks=10, shared_noise=True)
print("shared noise, largest eigenvalue at the end:", shared.spectra[-1, 0])
