"""
Quantization and star products
==============================

Symbols on the cylinder are turned into operators with a kernel-dependent
quantizer. The symmetric kernel and the Weyl kernel agree on even angular
harmonics and differ on odd ones, where the Weyl kernel is only exact in
infinite dimension.
"""

import numpy as np

from cylwig.core import AngleGrid, CylinderFunction, MomentumBand
from cylwig.kernels import kernel_symmetric, kernel_weyl
from cylwig.quantizer import quantize, weyl_symbol
from cylwig.star import moyal_bracket, poisson_bracket, star_product

band = MomentumBand.symmetric(12)
grid = AngleGrid(2 * band.dim + 1)
K1, KS = kernel_weyl(), kernel_symmetric()

L = CylinderFunction.from_callable(lambda t, n: n + 0 * t, grid, band)
c2 = CylinderFunction.from_callable(lambda t, n: np.cos(2 * t) + 0 * n, grid, band)

# the momentum symbol quantizes to the diagonal momentum operator
print("Q(L) diagonal:", np.real(np.diag(quantize(KS, L).matrix))[:5], "...")

# an even harmonic survives a Weyl round trip up to the band edge
back = weyl_symbol(K1, quantize(K1, c2), grid)
print("even-harmonic round trip, interior error:", (back - c2).max_abs(guard=1))

# a Moyal bracket against its classical limit
f = CylinderFunction.from_callable(lambda t, n: np.cos(2 * t) * np.exp(-0.05 * n ** 2), grid, band)
mb = moyal_bracket(K1, f, L)
pb = poisson_bracket(f, L)
print("Moyal vs Poisson {f, L}, interior:", (mb - pb).max_abs(guard=3))

# the star product with the unit symbol is the identity
one = CylinderFunction.from_callable(lambda t, n: 1 + 0 * t, grid, band)
print("f * 1 - f:", (star_product(K1, f, one) - f).max_abs(guard=1))
