import numpy as np
import pytest
from scipy.integrate import quad

from conftest import random_operator, random_symbol
from cylwig.core import AngleGrid, CylinderFunction, CylinderOperator, MomentumBand, ValidationError
from cylwig.kernels import Kernel, KernelError, kernel_symmetric, kernel_weyl
from cylwig.quantizer import (QuantizerSet, dirichlet_pairing, gsw_quantizer, k_hat_apply, quantize,
                              quantizer_property_report, trace_identity_report, u_operator,
                              weyl_symbol)

KS = kernel_symmetric()
K1 = kernel_weyl()


def wobble_kernel(c=0.1):
    """Nonvanishing kernel with a three-term Fourier series in sigma."""
    def ev(s, l):
        s, l = np.broadcast_arrays(np.asarray(s, float), np.asarray(l))
        return 1.0 + 1j * c * np.sin(s) * np.sin(0.5 * l)
    K = Kernel("wobble", ev)
    K.flags["nonvanishing"] = True
    return K


def test_u_operator_examples():
    band = MomentumBand.symmetric(3)
    assert u_operator(0.0, 0, band).max_abs_diff(CylinderOperator.identity(band)) == 0
    U = u_operator(np.pi / 2, 0, band)
    assert np.allclose(np.diag(U.matrix), np.exp(1j * np.pi * band.indices / 2))
    U = u_operator(np.pi, 1, band)
    for k in range(-3, 3):
        assert U.entry(k + 1, k) == pytest.approx(np.exp(1j * np.pi * (k + 0.5)))
    with pytest.raises(ValidationError):
        u_operator(0.0, 7, band)


def test_trace_identities():
    band = MomentumBand.symmetric(8)
    assert u_operator(0.4, 3, band).trace() == 0
    assert dirichlet_pairing(band, {0: 1.0, 1: 0.5, -1: 0.5}) == pytest.approx(2.0, abs=1e-13)
    assert dirichlet_pairing(MomentumBand.symmetric(1), {1: 1.0}) == pytest.approx(1.0, abs=1e-13)
    assert trace_identity_report(band).ok


def test_symmetric_quantizer_examples():
    band = MomentumBand.symmetric(4)
    for theta in (-2.0, 0.0, 1.3):
        Om = gsw_quantizer(KS, theta, 1, band)
        assert Om.entry(1, 1) == pytest.approx(1.0)
        assert Om.entry(0, 2) == 0 and Om.entry(-3, 3) == 0
    assert gsw_quantizer(K1, 0.7, 2, band).entry(2, 2) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        gsw_quantizer(K1, 0.0, 9, band)


@pytest.mark.parametrize("kernel", [K1, KS])
def test_quantizer_entries_match_direct_quadrature(kernel, rng):
    band = MomentumBand.symmetric(5)
    for _ in range(20):
        theta = rng.uniform(-np.pi, np.pi)
        n, j, k = (int(x) for x in rng.integers(-5, 6, size=3))
        f = lambda s: kernel(s, j - k) * np.exp(-1j * (j - k) * theta) * np.exp(1j * s * ((j + k) / 2 - n))
        ref = (quad(lambda s: f(s).real, -np.pi, np.pi, limit=200)[0]
               + 1j * quad(lambda s: f(s).imag, -np.pi, np.pi, limit=200)[0]) / (2 * np.pi)
        assert abs(gsw_quantizer(kernel, theta, n, band).entry(j, k) - ref) <= 1e-10


def test_quantizer_set_matches_single_quantizers():
    band = MomentumBand.symmetric(3)
    grid = AngleGrid(13)
    qs = QuantizerSet(K1, grid, band)
    assert qs[4, -2].max_abs_diff(gsw_quantizer(K1, grid.points[4], -2, band)) <= 1e-15


@pytest.mark.parametrize("kernel", [K1, KS])
def test_quantize_constant_and_momentum(kernel):
    band = MomentumBand.symmetric(5)
    grid = AngleGrid(23)
    one = CylinderFunction.from_callable(lambda t, L: 1 + 0 * t, grid, band)
    assert quantize(kernel, one).max_abs_diff(CylinderOperator.identity(band)) <= 1e-12
    L = CylinderFunction.from_callable(lambda t, L: L + 0 * t, grid, band, hbar=0.3)
    assert quantize(kernel, L).max_abs_diff(CylinderOperator.momentum(band, 0.3)) <= 1e-12


def test_quantize_exp_theta_symmetric_kernel_is_shift():
    band = MomentumBand.symmetric(5)
    grid = AngleGrid(23)
    e = CylinderFunction.from_callable(lambda t, L: np.exp(1j * t) + 0 * L, grid, band)
    assert quantize(KS, e).max_abs_diff(CylinderOperator.shift(band, 1)) <= 1e-12


@pytest.mark.xfail(strict=True, reason="odd angular harmonics of K = 1 quantizers have "
                   "1/n momentum tails; truncation leaves O(1/N) errors")
def test_quantize_exp_theta_weyl_kernel_is_shift():
    band = MomentumBand.symmetric(8)
    grid = AngleGrid(35)
    e = CylinderFunction.from_callable(lambda t, L: np.exp(1j * t) + 0 * L, grid, band)
    assert quantize(K1, e).max_abs_diff(CylinderOperator.shift(band, 1), guard=3) <= 1e-10


def test_quantize_aliasing_guard():
    band = MomentumBand.symmetric(5)
    f = CylinderFunction.from_callable(lambda t, L: 1 + 0 * t, AngleGrid(9), band)
    with pytest.raises(ValidationError):
        quantize(K1, f)


def test_weyl_symbol_examples():
    band = MomentumBand.symmetric(4)
    grid = AngleGrid(19)
    s = weyl_symbol(K1, CylinderOperator.identity(band), grid)
    assert s.max_abs() == pytest.approx(1.0) and (s - CylinderFunction.from_callable(
        lambda t, L: 1 + 0 * t, grid, band)).max_abs() <= 1e-12
    s = weyl_symbol(K1, CylinderOperator.projector(band, 2), grid)
    target = np.zeros((grid.M, band.dim))
    target[:, band.position(2)] = 1.0
    assert np.max(np.abs(s.values - target)) <= 1e-12
    with pytest.raises(KernelError, match="reconstruct_density"):
        weyl_symbol(KS, CylinderOperator.identity(band), grid)


def _even_only(A: CylinderOperator) -> CylinderOperator:
    J, K = np.meshgrid(A.band.indices, A.band.indices, indexing="ij")
    return CylinderOperator(A.band, np.where((J - K) % 2 == 0, A.matrix, 0))


def test_weyl_roundtrips_exact_on_even_harmonics(rng):
    band = MomentumBand.symmetric(10)
    grid = AngleGrid(2 * band.dim + 1)
    for _ in range(10):
        A = _even_only(random_operator(rng, band, 6, guard=3))
        assert quantize(K1, weyl_symbol(K1, A, grid)).max_abs_diff(A) <= 1e-12
        f = random_symbol(rng, grid, band, 4, guard=3)
        F = f.fourier_coefficients(grid.M // 2)
        p = np.arange(-(grid.M // 2), grid.M // 2 + 1)
        feven = CylinderFunction(grid, band, np.exp(1j * np.outer(grid.points, p[p % 2 == 0]))
                                 @ F[:, p % 2 == 0].T)
        assert (weyl_symbol(K1, quantize(K1, feven), grid) - feven).max_abs() <= 1e-12


def test_weyl_roundtrip_error_decays_with_guard(rng):
    errs = []
    for N in (8, 16, 32):
        band = MomentumBand.symmetric(N)
        grid = AngleGrid(2 * band.dim + 1)
        f = CylinderFunction.from_callable(
            lambda t, L: np.cos(t) * np.exp(-L ** 2 / 4) + 0 * t, grid, band)
        back = weyl_symbol(K1, quantize(K1, f), grid)
        errs.append(np.max(np.abs((back - f).values[:, band.interior(N - 2)])))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("kernel", [K1, KS])
def test_trace_pairing_formula(kernel, rng):
    band = MomentumBand.symmetric(6)
    grid = AngleGrid(2 * band.dim + 1)
    qs = QuantizerSet(kernel, grid, band)
    for _ in range(10):
        f = random_symbol(rng, grid, band, 6)
        G = random_operator(rng, band, band.dim)
        lhs = (quantize(kernel, f, qs) @ G).trace()
        T = qs.trace_pairing(G.matrix)
        rhs = np.sum(f.values * T) * grid.weight / (2 * np.pi)
        assert abs(lhs - rhs) <= 1e-10


def test_general_route_matches_weyl_trace_route(rng):
    generic = Kernel("weyl-generic", lambda s, l: np.ones(np.broadcast(s, l).shape))
    generic.flags["nonvanishing"] = True
    band = MomentumBand.symmetric(5)
    grid = AngleGrid(23)
    A = random_operator(rng, band, band.dim)
    assert (weyl_symbol(generic, A, grid) - weyl_symbol(K1, A, grid)).max_abs() <= 1e-10


def test_general_route_matches_inverse_transpose_of_weyl_symbol(rng):
    K = wobble_kernel()
    band = MomentumBand.symmetric(8)
    grid = AngleGrid(2 * band.dim + 1)
    A = _even_only(random_operator(rng, band, 4, guard=3))
    direct = weyl_symbol(K, A, grid)
    via_khat = k_hat_apply(K, weyl_symbol(K1, A, grid), "inverse_transpose")
    assert (direct - via_khat).max_abs() <= 1e-10


def test_general_kernel_symbol_roundtrip(rng):
    K = wobble_kernel()
    band = MomentumBand.symmetric(8)
    grid = AngleGrid(2 * band.dim + 1)
    A = _even_only(random_operator(rng, band, 4, guard=3))
    assert quantize(K, weyl_symbol(K, A, grid)).max_abs_diff(A, guard=3) <= 1e-8


def _khat_oracle(kernel, F, mode):
    """Double sum of the kernel operator with its two-point kernel built by quadrature."""
    x, w = np.polynomial.legendre.leggauss(200)
    s, w = np.pi * x, np.pi * w
    grid, band = F.grid, F.band
    P = (grid.M - 1) // 2
    th, n = grid.points, band.indices
    out = np.zeros((grid.M, band.dim), complex)
    for l in range(-P, P + 1):
        kv = kernel(s, l) if mode == "plain" else kernel(-s, -l)
        c = (np.exp(-1j * np.outer(n, s)[:, None, :] + 1j * np.outer(n, s)[None, :, :]) @ (w * kv)
             ) / (4 * np.pi ** 2)
        ph = np.exp(-1j * l * (th[:, None] - th[None, :])) * grid.weight
        out += np.einsum("ts,ab,sb->ta", ph, c, F.values)
    return out


@pytest.mark.parametrize("mode", ["plain", "transpose"])
def test_k_hat_matches_direct_convolution(mode):
    band = MomentumBand.symmetric(4)
    grid = AngleGrid(19)
    F = CylinderFunction.from_callable(lambda t, L: np.exp(1j * t) * (L == 0), grid, band)
    assert np.max(np.abs(k_hat_apply(KS, F, mode).values - _khat_oracle(KS, F, mode))) <= 1e-8
    G = CylinderFunction.from_callable(lambda t, L: np.cos(2 * t) * L + 1j * np.sin(t), grid, band)
    K = wobble_kernel(0.3)
    assert np.max(np.abs(k_hat_apply(K, G, mode).values - _khat_oracle(K, G, mode))) <= 1e-8


def test_k_hat_weyl_is_identity(rng):
    band = MomentumBand.symmetric(3)
    grid = AngleGrid(15)
    F = random_symbol(rng, grid, band, 3)
    for mode in ("plain", "transpose", "inverse", "inverse_transpose"):
        assert (k_hat_apply(K1, F, mode) - F).max_abs() == 0


def test_k_hat_inverse_undoes_plain(rng):
    K = wobble_kernel()
    band = MomentumBand.symmetric(12)
    grid = AngleGrid(27)
    F = random_symbol(rng, grid, band, 3, guard=10)
    back = k_hat_apply(K, k_hat_apply(K, F, "plain"), "inverse")
    assert (back - F).max_abs(guard=10) <= 1e-8


def test_k_hat_inverse_rejects_vanishing_kernel():
    band = MomentumBand.symmetric(3)
    F = CylinderFunction.from_callable(lambda t, L: 1 + 0 * t, AngleGrid(15), band)
    with pytest.raises(KernelError):
        k_hat_apply(KS, F, "inverse")
    with pytest.raises(ValidationError):
        k_hat_apply(KS, F, "sideways")


def test_k_hat_maps_weyl_quantizer_symbols_to_symmetric_quantizers():
    """Applying K-hat to the K = 1 symbol family of Omega[1] gives Omega[K_S].

    Checked on even off-diagonals, where the K = 1 family is local in n and
    the identity holds exactly at truncation."""
    band = MomentumBand.symmetric(6)
    grid = AngleGrid(2 * band.dim + 1)
    qs1 = QuantizerSet(K1, grid, band)
    qsS = QuantizerSet(KS, grid, band)
    J, K = np.meshgrid(band.indices, band.indices, indexing="ij")
    worst = 0.0
    for j, k in [(0, 0), (1, -1), (2, 0), (-2, 2), (3, 1)]:
        X = np.zeros((band.dim, band.dim))
        X[band.position(k), band.position(j)] = 1.0      # picks <j|Omega|k>
        F1 = CylinderFunction(grid, band, qs1.trace_pairing(X))
        FS = qsS.trace_pairing(X)
        inner = band.interior(3)
        worst = max(worst, np.max(np.abs((k_hat_apply(KS, F1).values - FS)[:, inner])))
    assert worst <= 1e-12


def test_property_report_symmetric():
    band = MomentumBand.symmetric(6)
    rep = quantizer_property_report(KS, AngleGrid(27), band, guard=2)
    assert rep.all_ok, rep.errors


def test_property_report_weyl_angle_resolution_is_approximate():
    band = MomentumBand.symmetric(6)
    rep = quantizer_property_report(K1, AngleGrid(27), band, guard=2)
    for prop in ("unit_trace", "hermitian", "momentum_resolution"):
        assert rep.ok(prop)
    assert rep.errors["angle_resolution"] > 1e-4
