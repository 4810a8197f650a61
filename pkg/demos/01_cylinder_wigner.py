"""
Wigner functions on the cylinder
================================

A particle on a ring has an angle and an integer angular momentum. This
walk-through builds a small density matrix, computes its Wigner function
with the symmetric kernel and checks the two marginals.
"""

import numpy as np

from cylwig.core import AngleGrid, DensityOperator, MomentumBand
from cylwig.kernels import kernel_symmetric
from cylwig.wigner import marginals, reconstruct_density, wigner_function

band = MomentumBand.symmetric(3)          # momenta -3..3
grid = AngleGrid(2 * band.dim + 1)        # enough nodes to resolve every offset
K = kernel_symmetric()

# a superposition of momenta -1, 0 and 2
v = np.zeros(band.dim, dtype=complex)
v[band.position(-1)] = 1
v[band.position(0)] = 1j
v[band.position(2)] = 0.5
rho = DensityOperator.pure(band, v / np.linalg.norm(v))

W = wigner_function(K, rho, grid)
print("W is real:", np.isrealobj(W.values), " total:", round(W.total, 12))
print("most negative value:", W.values.min())

# the momentum marginal is the diagonal of rho
m = marginals(W)
print("momentum marginal:", np.round(m.momentum_marginal, 12))
print("diag(rho):        ", np.round(np.real(np.diag(rho.matrix)), 12))

# and the grid carries enough information to rebuild rho
back = reconstruct_density(W)
print("reconstruction error:", back.max_abs_diff(rho))
