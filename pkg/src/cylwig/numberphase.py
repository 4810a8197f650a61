"""Number-phase Wigner functions for a single bosonic mode.

Fock space is embedded into the circle Hilbert space as the nonnegative
momentum sector. The phase variable is the reflected angle, ``phi = -theta``;
that reflection is applied only in this module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (DEFAULT_CONFIG, TWO_PI, AngleGrid, CylinderOperator, DensityOperator,
                   MomentumBand, ValidationError)
from .kernels import (AdmissibilityError, Kernel, check_admissibility, is_symmetric_kernel,
                      kernel_symmetric)
from .quantizer import QuantizerSet


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes ``c_0 .. c_{N_F}``.

    For states cut out of an infinite expansion, ``tail_mass`` is the norm
    that lies beyond ``N_F``; the stored amplitudes are not renormalized.
    """

    amplitudes: np.ndarray
    tail_mass: float = 0.0
    normalized: bool = True
    tol: float = DEFAULT_CONFIG.tol

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).ravel()
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        if a.size == 0:
            raise ValidationError("Fock vector needs at least one amplitude")
        if self.normalized:
            norm = float(np.sum(np.abs(a) ** 2))
            if abs(norm - (1.0 - self.tail_mass)) > self.tol:
                raise ValidationError(f"Fock vector has squared norm {norm:.12g}, expected "
                                      f"{1.0 - self.tail_mass:.12g}")

    @property
    def n_f(self) -> int:
        return self.amplitudes.size - 1

    def density(self) -> "FockDensity":
        a = self.amplitudes
        return FockDensity(np.outer(a, a.conj()), self.tail_mass, self.tol)


@dataclass(frozen=True, eq=False)
class FockDensity:
    """Density matrix on the truncated Fock space, trace ``1 - tail_mass``."""

    matrix: np.ndarray
    tail_mass: float = 0.0
    tol: float = DEFAULT_CONFIG.tol

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"Fock density must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > self.tol:
            raise ValidationError(f"Fock density not Hermitian (deviation {herm:.3e})")
        lam = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        if lam < -self.tol:
            raise ValidationError(f"Fock density not positive (min eigenvalue {lam:.3e})")
        tr = float(np.real(np.trace(m)))
        if abs(tr - (1.0 - self.tail_mass)) > self.tol:
            raise ValidationError(f"Fock density trace {tr:.12g} differs from "
                                  f"{1.0 - self.tail_mass:.12g}")

    @property
    def n_f(self) -> int:
        return self.matrix.shape[0] - 1


def as_density(state: FockVector | FockDensity) -> FockDensity:
    return state.density() if isinstance(state, FockVector) else state


def random_fock_density(n_f: int, rank: int | None = None, rng=None) -> FockDensity:
    rng = np.random.default_rng(rng)
    d = n_f + 1
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return FockDensity(rho / np.trace(rho).real)


def embed(state: FockVector | FockDensity, band: MomentumBand | None = None) -> DensityOperator:
    """Place a Fock state on a momentum band covering ``0 .. N_F``."""
    rho = as_density(state)
    band = MomentumBand.fock(rho.n_f) if band is None else band
    if band.n_min > 0 or band.n_max < rho.n_f:
        raise ValidationError(f"band [{band.n_min}, {band.n_max}] does not cover Fock "
                              f"levels 0..{rho.n_f}")
    full = np.zeros((band.dim, band.dim), dtype=complex)
    i0 = band.position(0)
    full[i0:i0 + rho.n_f + 1, i0:i0 + rho.n_f + 1] = rho.matrix
    return DensityOperator(band, full, rho.tol, rho.tail_mass)


def project(op: CylinderOperator, n_f: int | None = None, tail_mass: float = 0.0) -> FockDensity:
    """Restrict a band operator to the Fock levels ``0 .. N_F``."""
    band = op.band
    n_f = band.n_max if n_f is None else n_f
    if n_f < 0 or 0 not in band or n_f not in band:
        raise ValidationError(f"band [{band.n_min}, {band.n_max}] does not contain 0..{n_f}")
    i0 = band.position(0)
    return FockDensity(op.matrix[i0:i0 + n_f + 1, i0:i0 + n_f + 1], tail_mass)


@dataclass(frozen=True, eq=False)
class NumberPhaseWigner:
    """``W(phi_t, n)`` for ``n = 0 .. N_F``."""

    grid: AngleGrid
    n_f: int
    values: np.ndarray

    def phase_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1)

    def number_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.grid.weight

    def row(self, n: int) -> np.ndarray:
        if not 0 <= n <= self.n_f:
            raise ValidationError(f"photon number {n} outside 0..{self.n_f}")
        return self.values[:, n]


def assert_admissible(kernel: Kernel, tol: float = DEFAULT_CONFIG.tol):
    """Raise :class:`AdmissibilityError` if ``kernel`` mixes Fock and negative levels."""
    verdict = check_admissibility(kernel, tol=tol)
    if not verdict.ok:
        j, k, n = verdict.witness
        raise AdmissibilityError(
            f"kernel {kernel.name!r} is not admissible for Fock embedding: quantizer "
            f"element <{j}|Omega({n})|{k}> with n < 0 has magnitude {verdict.violation:.3e}")


def number_phase_wigner(state: FockVector | FockDensity, grid: AngleGrid,
                        kernel: Kernel | None = None, route: str = "direct",
                        tol: float = DEFAULT_CONFIG.tol) -> NumberPhaseWigner:
    """Number-phase Wigner function on the phase grid.

    ``route="direct"`` sums ``(1/2pi) Re sum_k exp(i(n-k)phi) rho_kn``;
    ``route="cylinder"`` embeds the state and evaluates the cylinder
    quantizer pairing at ``theta = -phi``.
    """
    kernel = kernel_symmetric() if kernel is None else kernel
    assert_admissible(kernel, tol)
    rho = as_density(state)
    phis = grid.points
    if route == "direct":
        if not is_symmetric_kernel(kernel):
            raise ValidationError("the direct number-phase route is the symmetric-kernel "
                                  "closed form; use route='cylinder' for other kernels")
        n = np.arange(rho.n_f + 1)
        vals = np.empty((grid.M, rho.n_f + 1))
        for i in n:
            vals[:, i] = np.real(np.exp(1j * np.outer(phis, i - n)) @ rho.matrix[:, i])
        return NumberPhaseWigner(grid, rho.n_f, vals / TWO_PI)
    if route == "cylinder":
        op = embed(rho)
        T = QuantizerSet(kernel, grid, op.band).trace_pairing(op.matrix, thetas=-phis) / TWO_PI
        return NumberPhaseWigner(grid, rho.n_f, np.real(T))
    raise ValidationError(f"unknown route {route!r}; expected 'direct' or 'cylinder'")


def phase_state(phi: float, n_f: int) -> FockVector:
    """Unnormalized phase state with amplitudes ``exp(i n phi) / sqrt(2 pi)``."""
    n = np.arange(n_f + 1)
    return FockVector(np.exp(1j * n * phi) / np.sqrt(TWO_PI), normalized=False)


def phase_resolution_error(n_f: int, grid: AngleGrid) -> float:
    """Max deviation of the grid integral of ``|phi><phi|`` from the identity."""
    total = np.zeros((n_f + 1, n_f + 1), dtype=complex)
    for phi in grid.points:
        a = phase_state(phi, n_f).amplitudes
        total += grid.weight * np.outer(a, a.conj())
    return float(np.max(np.abs(total - np.eye(n_f + 1))))


def _phis(grid_or_phis) -> np.ndarray:
    if isinstance(grid_or_phis, AngleGrid):
        return grid_or_phis.points
    return np.atleast_1d(np.asarray(grid_or_phis, dtype=float))


def phase_distribution(state: FockVector | FockDensity, grid_or_phis) -> np.ndarray:
    """``P(phi) = <phi|rho|phi>``."""
    rho = as_density(state).matrix
    phis = _phis(grid_or_phis)
    out = np.full(phis.shape, np.real(np.trace(rho)))
    d = rho.shape[0]
    for off in range(1, d):
        diag = np.diagonal(rho, offset=off)          # rho[k, k + off]
        out += 2.0 * np.real(np.exp(1j * off * phis) * np.sum(diag))
    return out / TWO_PI


def number_distribution(state: FockVector | FockDensity) -> np.ndarray:
    return np.real(np.diagonal(as_density(state).matrix)).copy()


def phase_expectation(f, state: FockVector | FockDensity, grid: AngleGrid) -> float:
    """``int f(phi) P(phi) dphi`` by grid quadrature; ``f`` is sampled on the grid."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.M,):
        raise ValidationError(f"phase function has {f.size} samples, grid has {grid.M}")
    return float(np.sum(f * phase_distribution(state, grid)) * grid.weight)


def phase_expectation_pure(f, psi: FockVector, grid: AngleGrid) -> float:
    """Double-sum form ``sum_jk c_j c_k^* F_{j-k}`` with ``F_m = (1/2pi) int f e^{-i m phi}``."""
    f = np.asarray(f, dtype=float)
    c = psi.amplitudes
    n = np.arange(c.size)
    m = n[:, None] - n[None, :]
    F = (np.exp(-1j * np.outer(np.arange(-psi.n_f, psi.n_f + 1), grid.points)) @ f) / grid.M
    return float(np.real(np.sum(np.outer(c, c.conj()) * F[m + psi.n_f])))


def _interval_kernel(d: np.ndarray, a: float, b: float) -> np.ndarray:
    # int_a^b exp(i d phi) dphi for integer d
    out = np.empty(d.shape, dtype=complex)
    zero = d == 0
    out[zero] = b - a
    dd = d[~zero]
    out[~zero] = (np.exp(1j * dd * b) - np.exp(1j * dd * a)) / (1j * dd)
    return out


def _check_interval(a: float, b: float):
    if not (-np.pi <= a < b <= np.pi):
        raise ValidationError(f"phase interval [{a}, {b}] must satisfy -pi <= a < b <= pi")


def pov_element(a: float, b: float, n_f: int) -> np.ndarray:
    """Matrix of the phase POV measure on ``[a, b]``: ``(1/2pi) int_a^b e^{i(j-k)phi}``."""
    _check_interval(a, b)
    n = np.arange(n_f + 1)
    return _interval_kernel(n[:, None] - n[None, :], a, b) / TWO_PI


def pov_interval_probability(state: FockVector | FockDensity, a: float, b: float) -> float:
    """Probability that the phase lies in ``[a, b]``, integrated analytically."""
    _check_interval(a, b)
    rho = as_density(state).matrix
    d = rho.shape[0]
    total = np.real(np.trace(rho)) * (b - a)
    for off in range(1, d):
        s = np.sum(np.diagonal(rho, offset=off))
        total += 2.0 * np.real(s * _interval_kernel(np.array([off]), a, b)[0])
    return float(total / TWO_PI)
