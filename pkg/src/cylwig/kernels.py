"""Quantization kernels K(sigma, l) and checks of their admissibility conditions.

A kernel selects the operator ordering of the quantization map. Two kernels
are built in:

* ``weyl``: K = 1 (Weyl ordering),
* ``symmetric``: K = cos(sigma*l/2) (symmetric ordering).

All quantizer matrix elements are assembled from the moment

    I_K(l, mu) = integral_{-pi}^{pi} K(sigma, l) exp(i*sigma*mu) d sigma

evaluated at integer and half-integer ``mu``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DEFAULT_CONFIG, ValidationError

CONDITIONS = ("cond_theta", "cond_L", "cond_sym", "nonvanishing", "admissible")
UNKNOWN = "unknown"


class KernelError(ValueError):
    """The kernel does not support the requested operation."""


class AdmissibilityError(KernelError):
    """The kernel lets negative momenta leak into Fock-space matrix elements."""


def weyl_moment(mu) -> np.ndarray:
    """``integral_{-pi}^{pi} exp(i sigma mu) d sigma = 2 sin(pi mu) / mu``."""
    mu = np.asarray(mu, dtype=float)
    out = np.full(mu.shape, 2 * np.pi)
    nz = np.abs(mu) > 1e-14
    out[nz] = 2.0 * np.sin(np.pi * mu[nz]) / mu[nz]
    # sin(pi*mu) is not exactly zero at integers in floating point
    integer = nz & (np.abs(mu - np.round(mu)) < 1e-12)
    out[integer] = 0.0
    return out


@dataclass(eq=False)
class Kernel:
    """A quantization kernel.

    Parameters
    ----------
    name : str
    eval : callable
        ``eval(sigma, l)``, vectorised over numpy broadcasting.
    half_moment : callable, optional
        Analytic ``I_K(l, mu)``; when absent, Gauss-Legendre quadrature is used.
    reciprocal_moment : callable, optional
        Analytic moment of ``1/K``; only meaningful for nonvanishing kernels.
    flags : dict
        Cached verdicts for the conditions in :data:`CONDITIONS`; each entry
        is True, False or ``"unknown"``.
    """

    name: str
    eval: Callable
    half_moment: Optional[Callable] = None
    reciprocal_moment: Optional[Callable] = None
    flags: dict = field(default_factory=lambda: {c: UNKNOWN for c in CONDITIONS})

    def __call__(self, sigma, l):
        return np.asarray(self.eval(sigma, l), dtype=complex)

    def moment(self, l, mu, quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> np.ndarray:
        """``I_K(l, mu)`` for broadcastable integer ``l`` and real ``mu``."""
        if self.half_moment is not None:
            return np.asarray(self.half_moment(l, mu), dtype=complex)
        return quadrature_moment(self.eval, l, mu, quad_nodes)

    def inverse_moment(self, l, mu, quad_nodes: int = DEFAULT_CONFIG.quad_nodes,
                       tol: float = DEFAULT_CONFIG.tol) -> np.ndarray:
        """Moment of ``1/K``."""
        if self.reciprocal_moment is not None:
            return np.asarray(self.reciprocal_moment(l, mu), dtype=complex)

        def recip(sigma, ll):
            k = np.asarray(self.eval(sigma, ll), dtype=complex)
            if np.min(np.abs(k)) < tol:
                raise KernelError(f"kernel {self.name!r} vanishes on the quadrature nodes")
            return 1.0 / k

        return quadrature_moment(recip, l, mu, quad_nodes)

    def flag(self, condition: str):
        return self.flags[condition]


def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return np.pi * x, np.pi * w


def quadrature_moment(func, l, mu, quad_nodes: int = DEFAULT_CONFIG.quad_nodes) -> np.ndarray:
    """Gauss-Legendre evaluation of ``integral func(sigma, l) exp(i sigma mu)`` over [-pi, pi].

    The integrand is smooth but not periodic at half-integer ``mu``, so the
    periodic rule would not be exact here. The node count grows with
    ``max |mu|`` to keep the oscillation resolved.
    """
    l, mu = np.broadcast_arrays(np.asarray(l), np.asarray(mu, dtype=float))
    shape = l.shape
    if l.size == 0:
        return np.zeros(shape, dtype=complex)
    # evaluate on unique (l, mu) pairs only
    pairs = np.stack([l.ravel().astype(float), mu.ravel()], axis=1)
    uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    extra = int(np.ceil(np.max(np.abs(uniq[:, 1])) * 1.5)) + 32
    n = max(quad_nodes, extra)
    sigma, w = _gauss_legendre(n)
    out = np.empty(len(uniq), dtype=complex)
    chunk = max(1, 2_000_000 // n)
    for s in range(0, len(uniq), chunk):
        lu = uniq[s:s + chunk, 0].astype(int)[:, None]
        mu_u = uniq[s:s + chunk, 1][:, None]
        vals = np.asarray(func(sigma[None, :], lu), dtype=complex)
        vals = np.broadcast_to(vals, (len(lu), n))
        out[s:s + chunk] = (vals * np.exp(1j * sigma[None, :] * mu_u)) @ w
    return out[inverse].reshape(shape)


def kernel_weyl() -> Kernel:
    def ev(sigma, l):
        return np.ones(np.broadcast(np.asarray(sigma), np.asarray(l)).shape)

    def mom(l, mu):
        l, mu = np.broadcast_arrays(np.asarray(l), np.asarray(mu, dtype=float))
        return weyl_moment(mu).astype(complex)

    return Kernel("weyl", ev, mom, mom, flags={
        "cond_theta": True, "cond_L": True, "cond_sym": True,
        "nonvanishing": True, "admissible": False})


def kernel_symmetric() -> Kernel:
    def ev(sigma, l):
        return np.cos(np.asarray(sigma) * np.asarray(l) / 2.0)

    def mom(l, mu):
        l, mu = np.broadcast_arrays(np.asarray(l, dtype=float), np.asarray(mu, dtype=float))
        return (0.5 * (weyl_moment(mu + l / 2) + weyl_moment(mu - l / 2))).astype(complex)

    return Kernel("symmetric", ev, mom, None, flags={
        "cond_theta": True, "cond_L": True, "cond_sym": True,
        "nonvanishing": False, "admissible": True})


_BUILTIN = {"weyl": kernel_weyl, "symmetric": kernel_symmetric}


def get_kernel(name: str) -> Kernel:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise ValidationError(
            f"unknown kernel {name!r}; choose one of {sorted(_BUILTIN)}") from None


def is_symmetric_kernel(kernel: Kernel) -> bool:
    return kernel.name == "symmetric"


def is_weyl_kernel(kernel: Kernel) -> bool:
    return kernel.name == "weyl"


@dataclass
class ConditionVerdict:
    ok: bool
    violation: float
    witness: Optional[tuple] = None


@dataclass
class KernelReport:
    kernel: str
    verdicts: dict

    def __getitem__(self, condition) -> ConditionVerdict:
        return self.verdicts[condition]

    def ok(self, condition) -> bool:
        return self.verdicts[condition].ok

    def rows(self):
        for name, v in self.verdicts.items():
            witness = "" if v.witness is None else " ".join(repr(x) for x in v.witness)
            yield {"condition": name, "verdict": v.ok, "violation": v.violation,
                   "witness": witness}


def probe_sigmas(count: int = 64) -> np.ndarray:
    """Deterministic probe lattice ``-pi + 2*pi*j/count``, ``j = 0..count``.

    The closing point ``sigma = pi`` is included because the symmetry
    condition compares ``sigma`` with ``-sigma``.
    """
    return -np.pi + 2 * np.pi * np.arange(count + 1) / count


def _worst(diff: np.ndarray, witnesses, tol: float) -> ConditionVerdict:
    diff = np.ravel(diff)
    i = int(np.argmax(diff))
    worst = float(diff[i])
    return ConditionVerdict(worst <= tol, worst, witnesses(i) if worst > tol else None)


def check_kernel_conditions(kernel: Kernel, l_range: int = 8, sigma_probes: int = 64,
                            tol: float = DEFAULT_CONFIG.tol) -> KernelReport:
    """Probe the quantization conditions on a fixed (sigma, l) lattice.

    * ``cond_theta``: K(0, l) = 1 for |l| <= l_range,
    * ``cond_L``: K(sigma, 0) = 1,
    * ``cond_sym``: conj K(sigma, l) = K(-sigma, -l),
    * ``nonvanishing``: |K| >= tol everywhere on the lattice.

    Lattice probing can only reject a kernel; a pass is evidence, not proof.
    Witnesses are ``(sigma, l)`` pairs.
    """
    if l_range < 1:
        raise ValidationError("l_range must be >= 1")
    sig = probe_sigmas(sigma_probes)
    ls = np.arange(-l_range, l_range + 1)
    S, Lg = np.meshgrid(sig, ls, indexing="ij")
    S, Lg = S.ravel(), Lg.ravel()
    Kv = kernel(S, Lg)

    theta_diff = np.abs(kernel(np.zeros(ls.shape), ls) - 1.0)
    L_diff = np.abs(kernel(sig, np.zeros(sig.shape, dtype=int)) - 1.0)
    sym_diff = np.abs(np.conj(Kv) - kernel(-S, -Lg))
    small = np.abs(Kv)
    i = int(np.argmin(small))
    nv_worst = float(small[i])

    verdicts = {
        "cond_theta": _worst(theta_diff, lambda i: (0.0, int(ls[i])), tol),
        "cond_L": _worst(L_diff, lambda i: (float(sig[i]), 0), tol),
        "cond_sym": _worst(sym_diff, lambda i: (float(S[i]), int(Lg[i])), tol),
        "nonvanishing": ConditionVerdict(
            nv_worst >= tol, nv_worst,
            (float(S[i]), int(Lg[i])) if nv_worst < tol else None),
    }
    for name, v in verdicts.items():
        kernel.flags[name] = v.ok
    return KernelReport(kernel.name, verdicts)


def check_admissibility(kernel: Kernel, j_max: int = 16, n_depth: int = 16,
                        tol: float = DEFAULT_CONFIG.tol) -> ConditionVerdict:
    """Check that quantizers at negative momenta vanish on Fock states.

    Tests ``|I_K(j - k, (j + k)/2 - n)| <= tol`` for ``0 <= j, k <= j_max``
    and ``-n_depth <= n < 0``. The witness is ``(j, k, n)``.
    """
    if j_max < 0 or n_depth < 1:
        raise ValidationError("need j_max >= 0 and n_depth >= 1")
    j = np.arange(j_max + 1)
    J, K, N = np.meshgrid(j, j, np.arange(-n_depth, 0), indexing="ij")
    vals = np.abs(kernel.moment(J - K, (J + K) / 2.0 - N))
    idx = np.unravel_index(np.argmax(vals), vals.shape)
    worst = float(vals[idx])
    ok = worst <= tol
    kernel.flags["admissible"] = ok
    witness = None if ok else (int(J[idx]), int(K[idx]), int(N[idx]))
    return ConditionVerdict(ok, worst, witness)


def kernel_report(kernel: Kernel, l_range: int = 8, j_max: int = 16, n_depth: int = 16,
                  tol: float = DEFAULT_CONFIG.tol) -> KernelReport:
    """Conditions report including the Fock-space admissibility check."""
    report = check_kernel_conditions(kernel, l_range=l_range, tol=tol)
    adm = check_admissibility(kernel, j_max=j_max, n_depth=n_depth, tol=tol)
    report.verdicts["admissible"] = adm
    return report
