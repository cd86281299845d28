"""Gibbs, Tsallis and Renyi entropies of the same spectra.

For a spectrum spread uniformly over W states, S_q = (W^(1-q) - 1)/(1-q).
If W grows like t^beta, S_q grows like t^(beta(1-q)); it is linear in t
exactly when q = 1 - 1/beta.
"""
import numpy as np

from kickedrotor.entropy import gibbs, renyi, tsallis

rng = np.random.default_rng(0)
p = rng.random(12) ** 3
p /= p.sum()
print("random spectrum:", np.round(p, 3))
for q in (0.3, 0.5, 0.9, 0.999, 1.0, 1.001, 2.0):
    print(f"  q={q:<6g} tsallis={tsallis(p, q):.6f}  renyi={renyi(p, q):.6f}")
print(f"  gibbs={gibbs(p):.6f}")

# %% uniform spectra: which q makes growth linear?
beta = 2.0
for q in (0.3, 1 - 1 / beta, 0.7):
    S = [tsallis(np.full(int(t**beta), 1.0 / int(t**beta)), q) for t in (4, 8, 16, 32)]
    ratios = np.diff(np.log(S)) / np.log(2)
    print(f"q={q:.2f}: local growth exponents {np.round(ratios, 3)}")
