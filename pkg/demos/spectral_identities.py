"""Spectral bookkeeping of a random potential.

The Lax operator of u is truncated to a Hermitian Toeplitz matrix. Its
eigenvalues give the actions gamma_n, and the generating function
H(mu) = sum kappa_n gamma_n/(lambda_n + mu) must equal the resolvent entry
<(L + mu)^{-1} 1 | 1>. Its large-mu expansion starts 1/mu + 0/mu^2 + (||u||^2/2)/mu^3.

Run: python3 demos/spectral_identities.py
"""

import numpy as np

from dampedbo import (
    birkhoff_forward,
    build_lax_matrix,
    generating_function,
    l2_norm_sq,
    trace_identities,
)
from dampedbo.core import random_smooth_potential

M, N, M_cut = 512, 16, 256
u = random_smooth_potential(M, np.random.default_rng(7))
state, spec = birkhoff_forward(u, N, M_cut)

print("first actions:", np.array2string(state.gamma[:6], precision=3))
s0, s1, s2 = trace_identities(spec)
print(f"sum kappa gamma           = {s0:.14f}")
print(f"sum lambda kappa gamma    = {s1:.2e}")
print(f"sum lambda^2 kappa gamma  = {s2:.14f}   ||u||^2/2 = {l2_norm_sq(u) / 2:.14f}")

A = build_lax_matrix(u, M_cut)
e0 = np.zeros(M_cut + 1)
e0[0] = 1
print(f"\n{'mu':>8} {'H(mu)':>20} {'resolvent':>20} {'mu^3 (H - 1/mu)':>18}")
for mu in (1.0, 10.0, 100.0, 1000.0):
    H = generating_function(spec, mu)
    direct = np.linalg.solve(A + mu * np.eye(M_cut + 1), e0)[0].real
    print(f"{mu:8.0f} {H:20.15f} {direct:20.15f} {mu**3 * (H - 1 / mu):18.10f}")
