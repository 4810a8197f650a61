"""Angle grids, momentum bands, phase-space functions and operators.

Everything here is immutable after construction. Functions on the cylinder
are stored as an ``(M, dim)`` array indexed by (angle node, band index);
operators as a ``(dim, dim)`` matrix in the angular-momentum basis
``|n_min>, ..., |n_max>``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True)
class Config:
    hbar: float = 1.0
    tol: float = 1e-10
    quad_nodes: int = 257

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.quad_nodes < 3 or self.quad_nodes % 2 == 0:
            raise ValidationError(
                f"quad_nodes must be odd and >= 3, got {self.quad_nodes}")

    @classmethod
    def from_env(cls, **overrides) -> "Config":
        """Default config with ``CYLWIG_TOL`` applied, then explicit overrides."""
        kwargs = {}
        if "CYLWIG_TOL" in os.environ:
            kwargs["tol"] = float(os.environ["CYLWIG_TOL"])
        kwargs.update(overrides)
        return cls(**kwargs)


DEFAULT_CONFIG = Config()


@dataclass(frozen=True)
class AngleGrid:
    """Uniform grid ``theta_j = -pi + 2*pi*j/M`` on the circle [-pi, pi)."""

    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 3:
            raise ValidationError(f"angle grid needs M >= 3 points, got {self.M}")
        # exactness of the periodic rule for every nonzero |m| < M
        m = np.arange(1, self.M)
        sums = np.exp(1j * np.outer(m, self.points)).sum(axis=1) * self.weight
        if np.max(np.abs(sums)) > 1e-12 * self.M:
            raise AssertionError("uniform quadrature lost exactness")

    @property
    def weight(self) -> float:
        return TWO_PI / self.M

    @property
    def points(self) -> np.ndarray:
        return -np.pi + TWO_PI * np.arange(self.M) / self.M

    def fourier_matrix(self, freqs) -> np.ndarray:
        """``E[t, q] = exp(i * freqs[q] * theta_t)``."""
        return np.exp(1j * np.outer(self.points, np.asarray(freqs)))


def make_angle_grid(M: int) -> AngleGrid:
    return AngleGrid(int(M))


def integrate_angle(values, grid: AngleGrid) -> complex:
    """Periodic trapezoid rule; exact for trigonometric polynomials of degree < M."""
    values = np.asarray(values)
    if values.shape[0] != grid.M:
        raise ValidationError(
            f"expected {grid.M} samples on the angle grid, got {values.shape[0]}")
    return grid.weight * values.sum(axis=0)


def default_grid_size(bandwidth: int, dim: int) -> int:
    """Odd node count covering angular bandwidth ``bandwidth`` and a band of size ``dim``."""
    M = max(2 * int(bandwidth) + 1, 4 * int(dim) + 1)
    return M if M % 2 else M + 1


@dataclass(frozen=True)
class MomentumBand:
    n_min: int
    n_max: int

    def __post_init__(self):
        if self.n_min > self.n_max:
            raise ValidationError(
                f"empty band: n_min={self.n_min} > n_max={self.n_max}")

    @classmethod
    def symmetric(cls, N: int) -> "MomentumBand":
        return cls(-int(N), int(N))

    @classmethod
    def fock(cls, n_f: int) -> "MomentumBand":
        return cls(0, int(n_f))

    @property
    def dim(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def __contains__(self, n) -> bool:
        return self.n_min <= n <= self.n_max

    def position(self, n: int) -> int:
        if n not in self:
            raise ValidationError(f"n={n} lies outside band [{self.n_min}, {self.n_max}]")
        return int(n - self.n_min)

    def interior(self, guard: int) -> np.ndarray:
        """Boolean mask of band positions at distance >= guard from both edges."""
        n = self.indices
        return (n - self.n_min >= guard) & (self.n_max - n >= guard)


def _check_same_band(a: MomentumBand, b: MomentumBand):
    if a != b:
        raise ValidationError(f"band mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    """Samples ``f(theta_j, n*hbar)`` on ``grid x band``."""

    grid: AngleGrid
    band: MomentumBand
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.M, self.band.dim):
            raise ValidationError(
                f"values must have shape {(self.grid.M, self.band.dim)}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, func, grid: AngleGrid, band: MomentumBand,
                      hbar: float = 1.0) -> "CylinderFunction":
        """Sample ``func(theta, L)`` with broadcasting over ``theta`` (column) and ``L = n*hbar``."""
        theta = grid.points[:, None]
        L = hbar * band.indices[None, :].astype(float)
        vals = np.broadcast_to(func(theta, L), (grid.M, band.dim))
        return cls(grid, band, vals, hbar)

    @property
    def L(self) -> np.ndarray:
        return self.hbar * self.band.indices.astype(float)

    def is_real(self, tol: float = DEFAULT_CONFIG.tol) -> bool:
        return bool(np.max(np.abs(self.values.imag), initial=0.0) <= tol)

    def fourier_coefficients(self, max_freq: int) -> np.ndarray:
        """``F[n, l + max_freq] = (1/2pi) * integral f(theta, n) exp(-i l theta) dtheta``.

        Exact whenever the angular bandwidth of ``f`` plus ``max_freq`` is below ``M``.
        """
        freqs = np.arange(-max_freq, max_freq + 1)
        E = self.grid.fourier_matrix(-freqs)
        return (self.values.T @ E) / self.grid.M

    def _compatible(self, other: "CylinderFunction"):
        if self.grid != other.grid:
            raise ValidationError(f"grid mismatch: {self.grid} vs {other.grid}")
        _check_same_band(self.band, other.band)

    def _new(self, values) -> "CylinderFunction":
        return CylinderFunction(self.grid, self.band, values, self.hbar)

    def __add__(self, other):
        if isinstance(other, CylinderFunction):
            self._compatible(other)
            return self._new(self.values + other.values)
        return self._new(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, CylinderFunction):
            self._compatible(other)
            return self._new(self.values - other.values)
        return self._new(self.values - other)

    def __neg__(self):
        return self._new(-self.values)

    def __mul__(self, other):
        if isinstance(other, CylinderFunction):
            self._compatible(other)
            return self._new(self.values * other.values)
        return self._new(self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._new(self.values / scalar)

    def max_abs(self, guard: int = 0) -> float:
        mask = self.band.interior(guard)
        return float(np.max(np.abs(self.values[:, mask]), initial=0.0))


@dataclass(frozen=True, eq=False)
class CylinderOperator:
    """Dense matrix ``<j|A|k>`` for ``j, k`` running over ``band``."""

    band: MomentumBand
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (self.band.dim, self.band.dim):
            raise ValidationError(
                f"operator must be {self.band.dim}x{self.band.dim}, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, band: MomentumBand) -> "CylinderOperator":
        return cls(band, np.eye(band.dim))

    @classmethod
    def projector(cls, band: MomentumBand, n: int) -> "CylinderOperator":
        mat = np.zeros((band.dim, band.dim))
        i = band.position(n)
        mat[i, i] = 1.0
        return cls(band, mat)

    @classmethod
    def momentum(cls, band: MomentumBand, hbar: float = 1.0) -> "CylinderOperator":
        """Angular momentum ``L = diag(n * hbar)``."""
        return cls(band, np.diag(hbar * band.indices.astype(float)))

    @classmethod
    def shift(cls, band: MomentumBand, steps: int = 1) -> "CylinderOperator":
        """Truncated ``exp(i*steps*Theta)``: ``|k> -> |k+steps>``."""
        return cls(band, np.eye(band.dim, k=-steps))

    def __matmul__(self, other: "CylinderOperator") -> "CylinderOperator":
        _check_same_band(self.band, other.band)
        return CylinderOperator(self.band, self.matrix @ other.matrix)

    def __add__(self, other: "CylinderOperator") -> "CylinderOperator":
        _check_same_band(self.band, other.band)
        return CylinderOperator(self.band, self.matrix + other.matrix)

    def __sub__(self, other: "CylinderOperator") -> "CylinderOperator":
        _check_same_band(self.band, other.band)
        return CylinderOperator(self.band, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "CylinderOperator":
        return CylinderOperator(self.band, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return CylinderOperator(self.band, -self.matrix)

    @property
    def adjoint(self) -> "CylinderOperator":
        return CylinderOperator(self.band, self.matrix.conj().T)

    @property
    def dagger(self) -> "CylinderOperator":
        return self.adjoint

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def entry(self, j: int, k: int) -> complex:
        return complex(self.matrix[self.band.position(j), self.band.position(k)])

    def max_abs_diff(self, other: "CylinderOperator", guard: int = 0) -> float:
        _check_same_band(self.band, other.band)
        mask = self.band.interior(guard)
        d = (self.matrix - other.matrix)[np.ix_(mask, mask)]
        return float(np.max(np.abs(d), initial=0.0))


def commutator(a: CylinderOperator, b: CylinderOperator) -> CylinderOperator:
    return a @ b - b @ a


@dataclass(frozen=True, eq=False)
class DensityOperator(CylinderOperator):
    """Hermitian, positive semidefinite operator of trace ``1 - tail_mass``.

    ``tail_mass`` is nonzero only for states cut out of an infinite expansion
    on purpose (truncated analytic families).
    """

    tol: float = DEFAULT_CONFIG.tol
    tail_mass: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        m = self.matrix
        herm = float(np.max(np.abs(m - m.conj().T), initial=0.0))
        if herm > self.tol:
            raise ValidationError(f"density matrix not Hermitian (deviation {herm:.3e})")
        lam = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        if lam < -self.tol:
            raise ValidationError(f"density matrix not positive (min eigenvalue {lam:.3e})")
        tr = np.trace(m)
        expected = 1.0 - self.tail_mass
        if abs(tr - expected) > self.tol:
            raise ValidationError(
                f"density matrix trace {tr.real:.12g} differs from {expected:.12g}")

    @classmethod
    def from_matrix(cls, band: MomentumBand, matrix, tol: float = DEFAULT_CONFIG.tol,
                    tail_mass: float = 0.0) -> "DensityOperator":
        return cls(band, matrix, tol, tail_mass)

    @classmethod
    def pure(cls, band: MomentumBand, vector, tol: float = DEFAULT_CONFIG.tol) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex)
        return cls(band, np.outer(v, v.conj()), tol)

    @property
    def op(self) -> CylinderOperator:
        return CylinderOperator(self.band, self.matrix)


def random_density(band: MomentumBand, rank: int | None = None, rng=None,
                   support: tuple[int, int] | None = None) -> DensityOperator:
    """Random mixed state of the given rank, optionally supported on ``support``
    (inclusive momentum range) only."""
    rng = np.random.default_rng(rng)
    lo, hi = support if support is not None else (band.n_min, band.n_max)
    i0, i1 = band.position(lo), band.position(hi)
    d = i1 - i0 + 1
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    rho /= np.trace(rho)
    full = np.zeros((band.dim, band.dim), dtype=complex)
    full[i0:i1 + 1, i0:i1 + 1] = (rho + rho.conj().T) / 2
    return DensityOperator(band, full)
