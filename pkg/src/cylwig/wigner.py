"""Cylinder Wigner functions, expectations, marginals and density reconstruction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (DEFAULT_CONFIG, TWO_PI, AngleGrid, CylinderFunction, CylinderOperator,
                   DensityOperator, MomentumBand, ValidationError)
from .kernels import Kernel, is_symmetric_kernel
from .quantizer import QuantizerSet


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Sampled Wigner function ``W(theta_t, n)`` with kernel provenance.

    ``values`` is real whenever the kernel satisfies the symmetry condition;
    otherwise the complex samples are kept.
    """

    grid: AngleGrid
    band: MomentumBand
    values: np.ndarray
    hbar: float = 1.0
    kernel: str = "symmetric"
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (self.grid.M, self.band.dim):
            raise ValidationError(f"Wigner samples have shape {self.values.shape}, expected "
                                  f"{(self.grid.M, self.band.dim)}")

    @property
    def total(self) -> float:
        return float(np.real(np.sum(self.values)) * self.grid.weight)

    def row(self, n: int) -> np.ndarray:
        return self.values[:, self.band.position(n)]

    def as_function(self) -> CylinderFunction:
        return CylinderFunction(self.grid, self.band, self.values, self.hbar)


@dataclass(frozen=True)
class MarginalPair:
    angle_marginal: np.ndarray
    momentum_marginal: np.ndarray


def _symmetric_fast(rho: np.ndarray, band: MomentumBand, thetas: np.ndarray) -> np.ndarray:
    # W[t, n] = (1/2pi) Re sum_k exp(-i (n - k) theta_t) rho[k, n]
    n = band.indices
    out = np.empty((len(thetas), band.dim))
    for i, nn in enumerate(n):
        out[:, i] = np.real(np.exp(-1j * np.outer(thetas, nn - n)) @ rho[:, i])
    return out / TWO_PI


def wigner_function(kernel: Kernel, rho: CylinderOperator, grid: AngleGrid,
                    fast: bool = True, hbar: float = 1.0,
                    tol: float = DEFAULT_CONFIG.tol,
                    quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> WignerGrid:
    """``W(theta, n) = Tr{Omega[K](theta, n) rho} / 2pi`` on the grid.

    The symmetric kernel uses its closed-form row sum unless ``fast`` is off,
    in which case the generic moment route is taken.
    """
    if rho.matrix.shape != (rho.band.dim, rho.band.dim):
        raise ValidationError("density matrix does not match its band")
    flags = dict(kernel.flags)
    if is_symmetric_kernel(kernel) and fast:
        vals = _symmetric_fast(rho.matrix, rho.band, grid.points)
        return WignerGrid(grid, rho.band, vals, hbar, kernel.name, flags)
    T = QuantizerSet(kernel, grid, rho.band, quad_nodes).trace_pairing(rho.matrix) / TWO_PI
    if flags.get("cond_sym") is True and np.max(np.abs(T.imag), initial=0.0) <= max(tol, 1e-12):
        T = T.real.copy()
    return WignerGrid(grid, rho.band, T, hbar, kernel.name, flags)


def expectation(kernel: Kernel, f: CylinderFunction, rho: CylinderOperator,
                quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> complex:
    """``sum_n int f W dtheta`` for the kernel's Wigner function of ``rho``."""
    if f.band != rho.band:
        raise ValidationError("symbol and state live on different bands")
    if f.grid.M < 2 * f.band.dim - 1:
        raise ValidationError(f"angle grid with M={f.grid.M} is too coarse for exact "
                              f"pairing; need M >= {2 * f.band.dim - 1}")
    W = wigner_function(kernel, rho, f.grid, hbar=f.hbar, quad_nodes=quad_nodes)
    return complex(np.sum(f.values * W.values) * f.grid.weight)


def angle_density(rho: CylinderOperator, thetas) -> np.ndarray:
    """``<theta|rho|theta>`` with ``<k|theta> = exp(-i k theta) / sqrt(2 pi)``."""
    thetas = np.asarray(thetas, dtype=float)
    v = np.exp(-1j * np.outer(thetas, rho.band.indices)) / np.sqrt(TWO_PI)
    return np.real(np.einsum("tj,jk,tk->t", v.conj(), rho.matrix, v))


def marginals(W: WignerGrid) -> MarginalPair:
    """Angle marginal ``sum_n W`` and momentum marginal ``int W dtheta``."""
    missing = [c for c in ("cond_theta", "cond_L") if W.flags.get(c) is not True]
    if missing:
        raise ValidationError(f"Wigner grid from kernel {W.kernel!r} lacks verified "
                              f"{', '.join(missing)}; marginals are not meaningful")
    vals = np.real(W.values)
    return MarginalPair(vals.sum(axis=1), vals.sum(axis=0) * W.grid.weight)


def _offset_moments(W: WignerGrid, d: int) -> np.ndarray:
    # b_n = 2 int W(theta, n) exp(i d theta) dtheta
    phase = np.exp(1j * d * W.grid.points)
    return 2.0 * W.grid.weight * (phase @ W.values)


def reconstruct_density(W: WignerGrid, paper_literal: bool = False,
                        tail_mass: float = 0.0,
                        tol: float = DEFAULT_CONFIG.tol) -> DensityOperator | CylinderOperator:
    """Recover the density matrix from a symmetric-kernel Wigner grid.

    The offset-``d`` Fourier moment of row ``n`` equals
    ``<n-d|rho|n> + <n|rho|n+d>``; the second term is removed by an
    ascending chain solve from the bottom of the band. With
    ``paper_literal`` the moment is read directly as ``<n-d|rho|n>`` and the
    raw (possibly invalid) operator is returned without validation.
    """
    if W.kernel != "symmetric":
        raise ValidationError(f"reconstruction needs a symmetric-kernel Wigner grid, "
                              f"got kernel {W.kernel!r}")
    dim = W.band.dim
    if W.grid.M < 2 * dim - 1:
        raise ValidationError(f"angle grid with M={W.grid.M} cannot resolve offsets up to "
                              f"{dim - 1}; need M >= {2 * dim - 1}")
    vals = np.real(W.values)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[np.arange(dim), np.arange(dim)] = vals.sum(axis=0) * W.grid.weight
    for d in range(1, dim):
        b = _offset_moments(W, d)
        if paper_literal:
            for i in range(d, dim):
                rho[i - d, i] = b[i]
        else:
            c = np.zeros(dim, dtype=complex)    # c[i] = <i|rho|i+d>
            for i in range(dim - d):
                c[i] = b[i] - (c[i - d] if i >= d else 0.0)
            for i in range(dim - d):
                rho[i, i + d] = c[i]
        iu = np.arange(dim - d)
        rho[iu + d, iu] = np.conj(rho[iu, iu + d])
    if paper_literal:
        return CylinderOperator(W.band, rho)
    try:
        return DensityOperator(W.band, rho, 10 * tol, tail_mass)
    except ValidationError as exc:
        raise ValidationError(f"reconstructed matrix is not a valid state ({exc}); "
                              "input Wigner data is probably corrupted") from exc
