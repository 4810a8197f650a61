"""Generalized Stratonovich-Weyl quantizers on the cylinder S^1 x Z.

Matrix elements of the quantizer for kernel K are

    <j| Omega[K](theta, n) |k> = exp(-i (j-k) theta) * I_K(j-k, (j+k)/2 - n) / (2 pi),

obtained by inserting the shift-operator family U(sigma, l) into the
sigma-integral that defines Omega. Every construction in this module goes
through that formula; no sigma quadrature happens on hot paths when the
kernel supplies an analytic moment.

Truncation: sums over momenta run over a finite :class:`MomentumBand`.
For the symmetric kernel the quantizer is local in momentum and results are
exact on the band. For the Weyl kernel (K = 1) odd angular harmonics couple
to every momentum through ``sin(pi mu)/mu`` tails, and truncation leaves an
error that decays only like one over the distance to the band edge.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import (DEFAULT_CONFIG, TWO_PI, AngleGrid, CylinderFunction, CylinderOperator,
                   MomentumBand, ValidationError, integrate_angle)
from .kernels import Kernel, KernelError, is_symmetric_kernel, is_weyl_kernel, quadrature_moment

KHAT_MODES = ("plain", "transpose", "inverse", "inverse_transpose")


def u_operator(sigma: float, l: int, band: MomentumBand) -> CylinderOperator:
    """Truncated ``U(sigma, l) = sum_k exp(i sigma (k + l/2)) |k+l><k|``."""
    if abs(l) > band.dim - 1:
        raise ValidationError(f"shift l={l} does not fit a band of size {band.dim}")
    mat = np.zeros((band.dim, band.dim), dtype=complex)
    k = band.indices
    ok = (k + l >= band.n_min) & (k + l <= band.n_max)
    cols = np.nonzero(ok)[0]
    mat[cols + l, cols] = np.exp(1j * sigma * (k[ok] + l / 2.0))
    return CylinderOperator(band, mat)


def dirichlet_pairing(band: MomentumBand, g_coeffs: dict, l: int = 0) -> complex:
    """Pair ``g`` with ``Tr U(., l)``-type traces by exact quadrature.

    For ``l = 0`` returns ``(1/2pi) int g(sigma) Tr U(sigma, 0) d sigma``. For
    ``l != 0`` returns the same pairing of ``Tr{U^+(tau, l) U(0, l)}`` against
    ``exp(i tau l/2) g(tau)``. Both equal ``g(0)`` whenever every frequency of
    ``g`` is represented in the band.
    """
    freqs = np.array(sorted(g_coeffs))
    coef = np.array([g_coeffs[p] for p in freqs], dtype=complex)
    span = int(np.max(np.abs(band.indices))) + int(np.max(np.abs(freqs))) + abs(l) + 1
    grid = AngleGrid(2 * span + 1)
    tau = grid.points
    g = np.exp(1j * np.outer(tau, freqs)) @ coef
    if l == 0:
        tr = np.array([u_operator(s, 0, band).trace() for s in tau])
        return complex(integrate_angle(g * tr, grid) / TWO_PI)
    U0 = u_operator(0.0, l, band).matrix
    tr = np.array([np.trace(u_operator(s, l, band).matrix.conj().T @ U0) for s in tau])
    return complex(integrate_angle(np.exp(1j * tau * l / 2) * g * tr, grid) / TWO_PI)


@dataclass
class TraceIdentityReport:
    offdiag_trace_max: float
    pairing_error_l0: float
    pairing_error_shifted: float
    cross_trace_max: float
    tol: float

    @property
    def ok(self) -> bool:
        return max(self.offdiag_trace_max, self.pairing_error_l0,
                   self.pairing_error_shifted, self.cross_trace_max) <= self.tol


def trace_identity_report(band: MomentumBand, g_coeffs: dict | None = None,
                          tol: float = DEFAULT_CONFIG.tol) -> TraceIdentityReport:
    """Check ``Tr U(sigma,l) = 2 pi delta_l0 delta(sigma)`` and the orthogonality
    ``Tr{U^+(sigma,l) U(sigma',l')} = 2 pi delta_ll' delta(sigma-sigma')`` in smeared form."""
    half = min(abs(band.n_min), abs(band.n_max))
    if g_coeffs is None:
        deg = max(1, half // 2)
        g_coeffs = {p: 1.0 / (1 + p * p) + 0.25j * np.sin(p) for p in range(-deg, deg + 1)}
    g0 = sum(g_coeffs.values())
    sigmas = np.linspace(-np.pi, np.pi, 7, endpoint=False)
    offdiag = max(abs(u_operator(s, l, band).trace())
                  for s in sigmas for l in range(1, band.dim))
    err0 = abs(dirichlet_pairing(band, g_coeffs, 0) - g0)
    # shifted pairing needs all frequencies of g inside {k : k, k+l in band}
    err_shift = 0.0
    for l in (1, 2):
        deg = max(abs(p) for p in g_coeffs)
        if band.n_max - l >= deg and band.n_min <= -deg:
            err_shift = max(err_shift, abs(dirichlet_pairing(band, g_coeffs, l) - g0))
    cross = 0.0
    for l, lp in ((0, 1), (1, 2), (-1, 2)):
        if max(abs(l), abs(lp)) < band.dim:
            for s in sigmas[:3]:
                a = u_operator(s, l, band)
                b = u_operator(0.3, lp, band)
                cross = max(cross, abs((a.adjoint @ b).trace()))
    return TraceIdentityReport(offdiag, err0, err_shift, cross, tol)


def _pair_index(band: MomentumBand):
    n = band.indices
    J, K = np.meshgrid(n, n, indexing="ij")
    return J, K


def moment_tensor(kernel: Kernel, band: MomentumBand,
                  quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> np.ndarray:
    """``A[n, j, k] = I_K(j-k, (j+k)/2 - n) / (2 pi)`` over the band."""
    J, K = _pair_index(band)
    n = band.indices[:, None, None]
    return kernel.moment(J - K, (J + K) / 2.0 - n, quad_nodes) / TWO_PI


def inverse_moment_tensor(kernel: Kernel, band: MomentumBand,
                          quad_nodes: int = DEFAULT_CONFIG.quad_nodes,
                          tol: float = DEFAULT_CONFIG.tol) -> np.ndarray:
    """``R[n, j, k] = (1/2pi) int K(s, j-k)^(-1) exp(i s (n - (j+k)/2)) ds``."""
    J, K = _pair_index(band)
    n = band.indices[:, None, None]
    return kernel.inverse_moment(J - K, n - (J + K) / 2.0, quad_nodes, tol) / TWO_PI


def _offset_onehot(dim: int) -> np.ndarray:
    """Maps flattened (j, k) to the diagonal offset slot ``j - k + dim - 1``."""
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    onehot = np.zeros((dim * dim, 2 * dim - 1))
    onehot[np.arange(dim * dim), (j - k).ravel() + dim - 1] = 1.0
    return onehot


def _collapse_offsets(P: np.ndarray) -> np.ndarray:
    """``G[n, l + dim - 1] = sum_{j - k = l} P[n, j, k]``."""
    dim = P.shape[-1]
    return P.reshape(P.shape[0], -1) @ _offset_onehot(dim)


@dataclass(eq=False)
class QuantizerSet:
    """Lazily materialised family ``Omega[K](theta_t, n)`` over a grid and band.

    Only the ``(dim, dim, dim)`` moment tensor is stored; matrices are formed
    on request. The cached tensor is computed before publication, so
    concurrent first access at worst computes it twice.
    """

    kernel: Kernel
    grid: AngleGrid
    band: MomentumBand
    quad_nodes: int = DEFAULT_CONFIG.quad_nodes

    @cached_property
    def moments(self) -> np.ndarray:
        return moment_tensor(self.kernel, self.band, self.quad_nodes)

    def matrix_at(self, theta: float, n: int) -> CylinderOperator:
        J, K = _pair_index(self.band)
        phase = np.exp(-1j * (J - K) * theta)
        return CylinderOperator(self.band, phase * self.moments[self.band.position(n)])

    def __getitem__(self, idx) -> CylinderOperator:
        t, n = idx
        return self.matrix_at(self.grid.points[t], n)

    def trace_pairing(self, X: np.ndarray, thetas=None) -> np.ndarray:
        """``T[t, n] = Tr{Omega(theta_t, n) X}`` for all band momenta."""
        thetas = self.grid.points if thetas is None else np.asarray(thetas, dtype=float)
        dim = self.band.dim
        G = _collapse_offsets(self.moments * np.asarray(X).T[None, :, :])
        offs = np.arange(-(dim - 1), dim)
        return np.exp(-1j * np.outer(thetas, offs)) @ G.T


def gsw_quantizer(kernel: Kernel, theta: float, n: int, band: MomentumBand,
                  quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> CylinderOperator:
    """``Omega[K](theta, n)`` on the band.

    The symmetric kernel uses its closed form
    ``<j|Omega_S|k> = exp(-i(j-k) theta) (delta_jn + delta_kn) / 2``.
    """
    i = band.position(n)
    J, K = _pair_index(band)
    phase = np.exp(-1j * (J - K) * theta)
    if is_symmetric_kernel(kernel):
        mask = (J == n).astype(float) + (K == n).astype(float)
        return CylinderOperator(band, 0.5 * phase * mask)
    mom = kernel.moment(J - K, (J + K) / 2.0 - n, quad_nodes) / TWO_PI
    return CylinderOperator(band, phase * mom)


def gsw_quantizer_moment(kernel: Kernel, theta: float, n: int, band: MomentumBand,
                         quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> CylinderOperator:
    """``Omega[K](theta, n)`` from the moment formula only, without closed-form shortcuts."""
    band.position(n)
    J, K = _pair_index(band)
    mom = kernel.moment(J - K, (J + K) / 2.0 - n, quad_nodes) / TWO_PI
    return CylinderOperator(band, np.exp(-1j * (J - K) * theta) * mom)


def _check_grid(f: CylinderFunction):
    if f.grid.M < 2 * f.band.dim - 1:
        raise ValidationError(
            f"angle grid with M={f.grid.M} aliases operator off-diagonals; "
            f"need M >= {2 * f.band.dim - 1} for a band of size {f.band.dim}")


def quantize(kernel: Kernel, f: CylinderFunction, quantizers: QuantizerSet | None = None,
             quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> CylinderOperator:
    """``W[K](f) = sum_n int f(theta, n hbar) Omega[K](theta, n) dtheta / 2pi`` over the band."""
    _check_grid(f)
    dim = f.band.dim
    A = quantizers.moments if quantizers is not None else moment_tensor(kernel, f.band, quad_nodes)
    F = f.fourier_coefficients(dim - 1)             # F[n, l + dim - 1]
    J, K = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    Fl = F[:, (J - K) + dim - 1]                    # (n, j, k)
    return CylinderOperator(f.band, np.einsum("njk,njk->jk", A, Fl))


def weyl_symbol(kernel: Kernel, A: CylinderOperator, grid: AngleGrid, hbar: float = 1.0,
                quad_nodes: int = DEFAULT_CONFIG.quad_nodes,
                tol: float = DEFAULT_CONFIG.tol) -> CylinderFunction:
    """Generalized Weyl symbol of ``A``.

    For K = 1 this is ``Tr{Omega[1](theta, n) A}``. For any other kernel the
    kernel must be nonvanishing; the symbol is computed directly from the
    inverse transform of ``K(sigma, l)^(-1) Tr{U^+(sigma, l) A}``, which at
    infinite band equals the K = 1 symbol acted on by the inverse transposed
    kernel operator.
    """
    band = A.band
    if is_weyl_kernel(kernel):
        T = QuantizerSet(kernel, grid, band, quad_nodes).trace_pairing(A.matrix)
        return CylinderFunction(grid, band, T, hbar)
    if kernel.flags.get("nonvanishing") is not True:
        if is_symmetric_kernel(kernel) or kernel.flags.get("nonvanishing") is False:
            raise KernelError(
                f"kernel {kernel.name!r} vanishes on part of the (sigma, l) plane, so the "
                "symbol map is not defined; for the symmetric kernel use "
                "cylwig.wigner.reconstruct_density to recover operators")
        from .kernels import check_kernel_conditions
        if not check_kernel_conditions(kernel, tol=tol).ok("nonvanishing"):
            raise KernelError(f"kernel {kernel.name!r} vanishes; no symbol map")
    R = inverse_moment_tensor(kernel, band, quad_nodes, tol)
    dim = band.dim
    G = _collapse_offsets(R * A.matrix[None, :, :])
    offs = np.arange(-(dim - 1), dim)
    T = np.exp(1j * np.outer(grid.points, offs)) @ G.T
    return CylinderFunction(grid, band, T, hbar)


def _khat_coefficients(kernel: Kernel, mode: str, p: np.ndarray, m: np.ndarray,
                       quad_nodes: int, tol: float) -> np.ndarray:
    if mode == "plain":
        return kernel.moment(-p, -m, quad_nodes) / TWO_PI
    if mode == "transpose":
        return kernel.moment(p, m, quad_nodes) / TWO_PI
    if mode == "inverse":
        return kernel.inverse_moment(-p, -m, quad_nodes, tol) / TWO_PI
    if mode == "inverse_transpose":
        return kernel.inverse_moment(p, m, quad_nodes, tol) / TWO_PI
    raise ValidationError(f"unknown K-hat mode {mode!r}; expected one of {KHAT_MODES}")


def k_hat_apply(kernel: Kernel, F: CylinderFunction, mode: str = "plain",
                quad_nodes: int = DEFAULT_CONFIG.quad_nodes,
                tol: float = DEFAULT_CONFIG.tol) -> CylinderFunction:
    """Apply the kernel operator ``K-hat`` (or its transpose / inverses) to ``F``.

    ``K-hat`` is a Fourier multiplier: angular harmonic ``p`` of ``F`` is
    convolved in ``n`` with the Fourier coefficients of ``K(sigma, -p)``
    (``K(-sigma, p)`` for the transpose, reciprocals for inverse modes).
    The convolution is evaluated exactly for ``F`` supported on the band and
    the result is returned on the same band.
    """
    if mode not in KHAT_MODES:
        raise ValidationError(f"unknown K-hat mode {mode!r}; expected one of {KHAT_MODES}")
    if is_weyl_kernel(kernel):
        return F
    if mode.startswith("inverse"):
        sig = np.linspace(-np.pi, np.pi, 513)
        lmax = F.grid.M
        S, Lg = np.meshgrid(sig, np.arange(-lmax, lmax + 1), indexing="ij")
        if np.min(np.abs(kernel(S, Lg))) < tol:
            raise KernelError(
                f"kernel {kernel.name!r} has multiplier magnitude below {tol:g}; "
                "K-hat is not invertible")
    M, dim = F.grid.M, F.band.dim
    P = (M - 1) // 2
    Fh = F.fourier_coefficients(P)                  # (n, p + P)
    p = np.arange(-P, P + 1)
    n = F.band.indices
    m = n[:, None] - n[None, :]                     # n - n'
    coef = _khat_coefficients(kernel, mode, p[:, None, None], m[None, :, :], quad_nodes, tol)
    out = np.einsum("pab,bp->ap", coef, Fh)         # (n, p)
    vals = np.exp(1j * np.outer(F.grid.points, p)) @ out.T
    return CylinderFunction(F.grid, F.band, vals, F.hbar)


@dataclass
class QuantizerPropertyReport:
    kernel: str
    errors: dict
    tolerances: dict = field(default_factory=dict)

    def ok(self, prop: str) -> bool:
        return self.errors[prop] <= self.tolerances[prop]

    @property
    def all_ok(self) -> bool:
        return all(self.ok(p) for p in self.errors)


def _smeared_overlap(kernel: Kernel, band: MomentumBand, guard: int, quad_nodes: int):
    """Both sides of the quantizer trace-orthogonality relation paired with test
    functions of ``(theta - theta', n - n')``."""
    n0 = (band.n_min + band.n_max) // 2
    deg = max(1, guard)
    ps = np.arange(-deg, deg + 1)
    g_coef = (1.0 / (1 + ps ** 2)) * np.exp(1j * 0.7 * ps)
    ms = np.arange(-guard, guard + 1)
    ms = ms[[(n0 + m) in band for m in ms]]
    h = 1.0 / (1 + ms ** 2)
    theta_p = 0.37
    grid = AngleGrid(2 * (band.dim + deg) + 1)
    Delta = grid.points
    g = np.exp(1j * np.outer(Delta, ps)) @ g_coef
    qs = QuantizerSet(kernel, grid, band, quad_nodes)
    Op = qs.matrix_at(theta_p, n0).matrix
    lhs = 0.0
    for m, hm in zip(ms, h):
        tr = qs.trace_pairing(Op, thetas=theta_p + Delta)[:, band.position(n0 + m)]
        lhs += hm * integrate_angle(g * tr, grid) / TWO_PI
    # right side: (1/2pi) sum_l g_{-l} c_l(m), c_l(m) = int K(s,l) K(-s,-l) e^{i s m} ds
    def kk(s, l):
        return kernel(s, l) * kernel(-s, -l)
    L, Mm = np.meshgrid(-ps, ms, indexing="ij")
    c = quadrature_moment(kk, L, Mm, quad_nodes)    # (len(ps), len(ms))
    rhs = np.sum(h[None, :] * g_coef[:, None] * c) / TWO_PI
    return complex(lhs), complex(rhs)


def quantizer_property_report(kernel: Kernel, grid: AngleGrid, band: MomentumBand,
                              guard: int = 2, tol: float = DEFAULT_CONFIG.tol,
                              smeared_tol: float = 1e-8,
                              quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> QuantizerPropertyReport:
    """Numerically check the basic quantizer identities on the band interior.

    Keys of ``errors``: ``unit_trace``, ``hermitian``, ``angle_resolution``
    (sum over n of Omega / 2pi against the angle projector),
    ``momentum_resolution`` (angle average against ``|n><n|``) and
    ``trace_orthogonality`` (smeared form of the two-quantizer trace).
    """
    qs = QuantizerSet(kernel, grid, band, quad_nodes)
    mask = band.interior(guard)
    interior = band.indices[mask]
    J, K = _pair_index(band)
    tr_err = herm_err = ang_err = mom_err = 0.0
    for t, theta in enumerate(grid.points):
        total = np.zeros((band.dim, band.dim), dtype=complex)
        for n in band.indices:
            Om = qs.matrix_at(theta, n).matrix
            total += Om
            if n in interior:
                tr_err = max(tr_err, abs(np.trace(Om) - 1.0))
                herm_err = max(herm_err, float(np.max(np.abs(Om - Om.conj().T))))
        proj = np.exp(-1j * (J - K) * theta) / TWO_PI
        ang_err = max(ang_err, float(np.max(np.abs((total / TWO_PI - proj)[np.ix_(mask, mask)]))))
    for n in interior:
        avg = qs.moments[band.position(n)] * 0.0
        for theta in grid.points:
            avg = avg + qs.matrix_at(theta, n).matrix
        avg = avg * grid.weight / TWO_PI
        target = np.zeros_like(avg)
        target[band.position(n), band.position(n)] = 1.0
        mom_err = max(mom_err, float(np.max(np.abs(avg - target))))
    lhs, rhs = _smeared_overlap(kernel, band, guard, quad_nodes)
    errors = {"unit_trace": tr_err, "hermitian": herm_err, "angle_resolution": ang_err,
              "momentum_resolution": mom_err, "trace_orthogonality": abs(lhs - rhs)}
    tols = {k: tol for k in errors}
    tols["trace_orthogonality"] = smeared_tol
    return QuantizerPropertyReport(kernel.name, errors, tols)
