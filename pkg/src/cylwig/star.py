"""Moyal-type star products on the cylinder and related brackets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_CONFIG, TWO_PI, CylinderFunction, ValidationError
from .kernels import Kernel, KernelError, is_symmetric_kernel, is_weyl_kernel, kernel_weyl
from .quantizer import QuantizerSet, k_hat_apply, quantize, weyl_symbol

BACKENDS = ("operator", "trace")


@dataclass(frozen=True)
class StarBackend:
    """Which evaluation route a star product uses.

    ``operator`` maps both factors to operators, multiplies, and takes the
    symbol. ``trace`` evaluates the K = 1 triple-trace integral with explicit
    quantizer matrices at the grid nodes; it is kept as a cross-check.
    """

    variant: str = "operator"

    def __post_init__(self):
        if self.variant not in BACKENDS:
            raise ValidationError(f"unknown star backend {self.variant!r}; expected one of {BACKENDS}")


def _compatible(f: CylinderFunction, g: CylinderFunction):
    if f.grid.M != g.grid.M or f.band != g.band:
        raise ValidationError("star product factors live on different grids or bands")
    if f.hbar != g.hbar:
        raise ValidationError(f"factors carry different hbar ({f.hbar} vs {g.hbar})")


def _require_invertible(kernel: Kernel):
    if is_weyl_kernel(kernel):
        return
    if is_symmetric_kernel(kernel) or kernel.flags.get("nonvanishing") is False:
        raise KernelError(f"kernel {kernel.name!r} vanishes somewhere, so its star product "
                          "is not defined through the symbol map")


def star_product(kernel: Kernel, f: CylinderFunction, g: CylinderFunction,
                 backend: str = "operator",
                 quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> CylinderFunction:
    """``f * g`` for the given kernel, as the symbol of ``W(f) W(g)``."""
    _compatible(f, g)
    if StarBackend(backend).variant == "trace":
        if not is_weyl_kernel(kernel):
            raise ValidationError("the triple-trace backend is defined for K = 1 only")
        return star_product_trace(f, g, quad_nodes)
    _require_invertible(kernel)
    qs = QuantizerSet(kernel, f.grid, f.band, quad_nodes) if is_weyl_kernel(kernel) else None
    prod = quantize(kernel, f, qs, quad_nodes) @ quantize(kernel, g, qs, quad_nodes)
    return weyl_symbol(kernel, prod, f.grid, f.hbar, quad_nodes)


def star_product_trace(f: CylinderFunction, g: CylinderFunction,
                       quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> CylinderFunction:
    """K = 1 star product from the triple trace of quantizers.

    The double integral over the two source points is done by grid
    quadrature with the quantizer matrices sampled at every node, then
    paired with ``Omega(theta, n)`` at each output point.
    """
    _compatible(f, g)
    qs = QuantizerSet(kernel_weyl(), f.grid, f.band, quad_nodes)
    dim = f.band.dim
    w = f.grid.weight / TWO_PI
    Fm = np.zeros((dim, dim), dtype=complex)
    Gm = np.zeros((dim, dim), dtype=complex)
    for t, theta in enumerate(f.grid.points):
        for i, n in enumerate(f.band.indices):
            Om = qs.matrix_at(theta, n).matrix
            Fm += w * f.values[t, i] * Om
            Gm += w * g.values[t, i] * Om
    FG = Fm @ Gm
    out = np.empty((f.grid.M, dim), dtype=complex)
    for t, theta in enumerate(f.grid.points):
        for i, n in enumerate(f.band.indices):
            out[t, i] = np.sum(qs.matrix_at(theta, n).matrix * FG.T)
    return CylinderFunction(f.grid, f.band, out, f.hbar)


def moyal_bracket(kernel: Kernel, f: CylinderFunction, g: CylinderFunction,
                  hbar: float | None = None, backend: str = "operator") -> CylinderFunction:
    """``(f * g - g * f) / (i hbar)``."""
    hbar = f.hbar if hbar is None else hbar
    diff = star_product(kernel, f, g, backend) - star_product(kernel, g, f, backend)
    return diff / (1j * hbar)


def _d_theta(F: CylinderFunction) -> np.ndarray:
    M = F.grid.M
    freqs = np.fft.fftfreq(M, d=1.0 / M)
    if M % 2 == 0:
        freqs[M // 2] = 0.0          # Nyquist mode has no well-defined derivative
    coef = np.fft.fft(F.values, axis=0)
    return np.fft.ifft(1j * freqs[:, None] * coef, axis=0)


def _d_L(F: CylinderFunction) -> np.ndarray:
    return np.gradient(F.values, F.hbar, axis=1, edge_order=2)


def poisson_bracket(f: CylinderFunction, g: CylinderFunction) -> CylinderFunction:
    """``df/dtheta dg/dL - df/dL dg/dtheta``.

    The angle derivative is spectral; the momentum derivative uses second
    order differences on the ``n hbar`` lattice, exact for quadratics in L.
    """
    _compatible(f, g)
    if f.band.dim < 5:
        raise ValidationError(f"momentum band of size {f.band.dim} is too narrow for "
                              "central differences; need at least 5")
    vals = _d_theta(f) * _d_L(g) - _d_L(f) * _d_theta(g)
    return CylinderFunction(f.grid, f.band, vals, f.hbar)


def stargen_residual(kernel: Kernel, f_sym: CylinderFunction, rhoW: CylinderFunction,
                     eigenvalue: float, guard: int = 2) -> float:
    """Max norm on the band interior of the star-genvalue defect.

    For K = 1 this is ``f * rho_W - Lambda rho_W``. For other nonvanishing
    kernels both factors are first mapped to the K = 1 picture with the
    transposed and inverse kernel operators.
    """
    _compatible(f_sym, rhoW)
    if is_weyl_kernel(kernel):
        lhs = star_product(kernel, f_sym, rhoW)
        rho1 = rhoW
    else:
        _require_invertible(kernel)
        f1 = k_hat_apply(kernel, f_sym, "transpose")
        rho1 = k_hat_apply(kernel, rhoW, "inverse")
        lhs = star_product(kernel_weyl(), f1, rho1)
    return (lhs - rho1 * eigenvalue).max_abs(guard)
