"""Coarse-graining time from the q-exponential decay model.

The unvisited measure R(t) decays as a q-exponential; coarse graining is
complete when R(t) = D t.  For q < 1 the solution scales as D^(-theta)
with theta = (1-q)/(2-q); for q = 1 it grows only logarithmically.
"""
import numpy as np

from kickedrotor.theory import TheoryParams, solve_tcg, t_quantum, tcg_exponential_estimate, theta

D = np.geomspace(1e-10, 1e-4, 7)
for q in (0.33, 0.5, 0.8):
    t = np.array([solve_tcg(TheoryParams(lambda_q=1e6, q=q, D=d)) for d in D])
    slope = np.polyfit(np.log(D), np.log(t), 1)[0]
    print(f"q={q:.2f}: slope of ln t_CG vs ln D = {slope:.4f}, -theta = {-theta(q):.4f}")

print("\nq = 1, lambda = 1: solver vs (2/lambda) ln(1/sqrt D)")
for d in (1e-4, 1e-6, 1e-8, 1e-10, 1e-12):
    t = solve_tcg(TheoryParams(q=1.0, lambda_1=1.0, D=d))
    est = tcg_exponential_estimate(d, 1.0)
    print(f"  D={d:.0e}  t_CG={t:7.3f}  estimate={est:7.3f}  rel.err={abs(t - est) / est:.3f}")

print("\nquantum time ln(1/hbar)/lambda for lambda = 1:",
      {h: round(t_quantum(h, 1.0), 3) for h in (0.1, 0.05, 0.01)})
