"""Analytic single-mode states and their closed-form number-phase Wigner functions.

Closed forms here serve as oracles for the generic pipeline in
:mod:`cylwig.numberphase`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TWO_PI, AngleGrid, ValidationError
from .numberphase import FockDensity, FockVector, number_phase_wigner

KINDS = {
    "fock": ("N",),
    "coherent": ("abs", "arg"),
    "squeezed": ("abs", "arg", "r", "theta"),
    "thermal": ("bho",),
    "cat": ("eta", "phi0", "N", "Nprime"),
}
INT_FIELDS = {"N", "Nprime", "NF"}
PHASE_FIELDS = {"arg", "theta", "phi0"}
MAX_TAIL = 1e-8
AUTO_TAIL = 1e-13
MAX_NF = 1000


@dataclass(frozen=True)
class StateSpec:
    """A state family with its parameters and Fock truncation.

    ``n_f=None`` lets :func:`build_state` choose the smallest truncation
    whose discarded norm is below ``1e-13``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    n_f: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown state kind {self.kind!r}; expected one of {sorted(KINDS)}")
        missing = [k for k in KINDS[self.kind] if k not in self.params]
        extra = [k for k in self.params if k not in KINDS[self.kind]]
        if missing or extra:
            raise ValidationError(f"{self.kind} state needs fields {KINDS[self.kind]}; "
                                  f"missing {missing}, unexpected {extra}")
        p = dict(self.params)
        for k in p:
            p[k] = int(p[k]) if k in INT_FIELDS else float(p[k])
            if k in INT_FIELDS and p[k] < 0:
                raise ValidationError(f"{k} must be a nonnegative integer, got {p[k]}")
            if k in PHASE_FIELDS and not -np.pi <= p[k] < np.pi:
                raise ValidationError(f"phase {k}={p[k]} must lie in [-pi, pi)")
        if self.kind in ("coherent", "squeezed") and p["abs"] < 0:
            raise ValidationError("coherent amplitude modulus must be nonnegative")
        if self.kind == "squeezed" and p["r"] < 0:
            raise ValidationError(f"squeeze parameter r must be nonnegative, got {p['r']}")
        if self.kind == "thermal" and not p["bho"] > 0:
            raise ValidationError(f"thermal parameter beta*hbar*omega must be positive, got {p['bho']}")
        if self.kind == "cat" and p["N"] == p["Nprime"]:
            raise ValidationError("Fock cat needs N != Nprime")
        if self.n_f is not None and self.n_f < 0:
            raise ValidationError(f"truncation N_F must be nonnegative, got {self.n_f}")
        object.__setattr__(self, "params", p)

    @classmethod
    def parse(cls, text: str, n_f: int | None = None) -> "StateSpec":
        """Parse ``kind:key=value,...``; an optional ``NF`` field sets the truncation."""
        kind, _, body = text.strip().partition(":")
        params = {}
        for item in filter(None, (s.strip() for s in body.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValidationError(f"malformed state field {item!r}; expected key=value")
            key = key.strip()
            try:
                params[key] = int(val) if key in INT_FIELDS else float(val)
            except ValueError:
                raise ValidationError(f"state field {key} has non-numeric value {val!r}") from None
        nf = params.pop("NF", None)
        return cls(kind.strip(), params, n_f if n_f is not None else nf)

    def __str__(self) -> str:
        body = ",".join(f"{k}={self.params[k]!r}" for k in KINDS[self.kind])
        return f"{self.kind}:{body}" + (f",NF={self.n_f}" if self.n_f is not None else "")

    def with_nf(self, n_f: int) -> "StateSpec":
        return StateSpec(self.kind, dict(self.params), n_f)

    @property
    def alpha(self) -> complex:
        return self.params["abs"] * np.exp(1j * self.params["arg"])


def hermite(n: int, z):
    """Physicists' Hermite polynomial ``H_n(z)`` by the three-term recurrence."""
    if n < 0 or int(n) != n:
        raise ValidationError(f"Hermite degree must be a nonnegative integer, got {n}")
    if n > 512:
        raise OverflowError(f"Hermite degree {n} exceeds the supported maximum 512")
    z = np.asarray(z, dtype=complex)
    h0, h1 = np.ones_like(z), 2 * z
    if n == 0:
        out = h0
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, n):
                h0, h1 = h1, 2 * z * h1 - 2 * k * h0
        out = h1
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"H_{n} overflows at |z| = {np.max(np.abs(z)):.3g}")
    return out[()] if out.ndim == 0 else out


def scaled_hermite(beta: complex, w: complex, n_max: int) -> np.ndarray:
    """``h_n = s^n H_n(beta / 2s) / sqrt(n!)`` with ``s^2 = w/2``, for ``n <= n_max``.

    The combination is a polynomial in ``w``, so no branch of ``s`` enters and
    ``w = 0`` gives ``beta^n / sqrt(n!)``.
    """
    h = np.zeros(n_max + 1, dtype=complex)
    h[0] = 1.0
    if n_max >= 1:
        h[1] = beta
    for n in range(1, n_max):
        h[n + 1] = (beta * h[n] - w * np.sqrt(n) * h[n - 1]) / np.sqrt(n + 1)
    return h


def _coherent_amplitudes(alpha: complex, n_f: int) -> np.ndarray:
    n = np.arange(n_f + 1)
    if alpha == 0:
        return (n == 0).astype(complex)
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n])
    return np.exp(logmag + 1j * n * np.angle(alpha))


def _squeezed_params(alpha: complex, r: float, theta: float, verbatim: bool = False):
    t = np.tanh(r)
    w = np.exp(1j * theta) * t
    beta = alpha + np.conj(alpha) * (np.exp(-1j * theta) * t if verbatim else w)
    return t, w, beta


def _squeezed_amplitudes(alpha: complex, r: float, theta: float, n_f: int) -> np.ndarray:
    t, w, beta = _squeezed_params(alpha, r, theta)
    pref = np.exp(-0.5 * (abs(alpha) ** 2 + np.conj(alpha) ** 2 * w)) / np.sqrt(np.cosh(r))
    return pref * scaled_hermite(beta, w, n_f)


def _thermal_weights(x: float, n_f: int) -> np.ndarray:
    p = np.exp(-x * np.arange(n_f + 1))
    return p / p.sum()


def amplitudes(spec: StateSpec, n_f: int) -> np.ndarray | None:
    """Fock amplitudes of a pure family, or ``None`` for the thermal state."""
    p = spec.params
    if spec.kind == "fock":
        if p["N"] > n_f:
            raise ValidationError(f"Fock level {p['N']} exceeds truncation {n_f}")
        c = np.zeros(n_f + 1, dtype=complex)
        c[p["N"]] = 1.0
        return c
    if spec.kind == "coherent":
        return _coherent_amplitudes(spec.alpha, n_f)
    if spec.kind == "squeezed":
        return _squeezed_amplitudes(spec.alpha, p["r"], p["theta"], n_f)
    if spec.kind == "cat":
        top = max(p["N"], p["Nprime"])
        if top > n_f:
            raise ValidationError(f"Fock level {top} exceeds truncation {n_f}")
        c = np.zeros(n_f + 1, dtype=complex)
        c[p["N"]] = np.cos(p["eta"])
        c[p["Nprime"]] += np.exp(1j * p["phi0"]) * np.sin(p["eta"])
        return c
    return None


def tail_mass(spec: StateSpec, n_f: int) -> float:
    """Norm discarded by truncating the family at ``n_f`` (before any renormalization)."""
    if spec.kind == "thermal":
        return float(np.exp(-spec.params["bho"] * (n_f + 1)))
    c = amplitudes(spec, n_f)
    return max(0.0, float(1.0 - np.sum(np.abs(c) ** 2)))


def _auto_nf(spec: StateSpec) -> int:
    p = spec.params
    if spec.kind == "fock":
        return p["N"]
    if spec.kind == "cat":
        return max(p["N"], p["Nprime"])
    if spec.kind == "thermal":
        return min(MAX_NF, int(np.ceil(-np.log(AUTO_TAIL) / p["bho"])))
    lo = 0
    while lo < MAX_NF and tail_mass(spec, lo) > AUTO_TAIL:
        lo = max(lo + 1, int(lo * 1.25))
    return lo


def resolve_nf(spec: StateSpec) -> int:
    return spec.n_f if spec.n_f is not None else _auto_nf(spec)


def build_state(spec: StateSpec, max_tail: float = MAX_TAIL) -> FockVector | FockDensity:
    """Construct the state on ``0 .. N_F``.

    Pure families are not renormalized: the discarded norm is carried as
    ``tail_mass`` and states losing more than ``max_tail`` are refused.
    The thermal state is renormalized over the truncation.
    """
    n_f = resolve_nf(spec)
    tail = tail_mass(spec, n_f)
    if tail > max_tail:
        raise ValidationError(f"{spec.kind} state truncated at N_F={n_f} discards norm "
                              f"{tail:.3e} > {max_tail:.1e}; raise N_F or pass a larger max_tail")
    if spec.kind == "thermal":
        return FockDensity(np.diag(_thermal_weights(spec.params["bho"], n_f)).astype(complex))
    c = amplitudes(spec, n_f)
    return FockVector(c, tail_mass=float(1.0 - np.sum(np.abs(c) ** 2)))


def _lg(n):
    return np.array([math.lgamma(k + 1) for k in np.atleast_1d(n)])


def _coherent_wigner(alpha: complex, phi, n: int, n_f: int):
    a, arg = abs(alpha), np.angle(alpha)
    if a == 0:
        return np.where(n == 0, 1.0, 0.0) / TWO_PI * np.ones_like(phi)
    k = np.arange(n_f + 1)
    lead = np.exp(n * np.log(a) - a * a - 0.5 * _lg(n)[0])
    series = np.exp(k * np.log(a) - 0.5 * _lg(k))
    return lead / TWO_PI * (np.cos(np.outer(phi - arg, n - k)) @ series)


def _squeezed_vacuum_wigner(r: float, theta: float, phi, n: int, n_f: int):
    if n % 2:
        return np.zeros_like(phi)
    if r == 0:
        return np.where(n == 0, 1.0, 0.0) / TWO_PI * np.ones_like(phi)
    m = n // 2
    t = np.tanh(r)
    l = np.arange(n_f // 2 + 1)
    # sqrt((2l)!)/l! (-t/2)^l, in log-magnitude with an explicit sign
    def coef(j):
        j = np.atleast_1d(j)
        mag = 0.5 * _lg(2 * j) - _lg(j) + j * np.log(t / 2)
        return (-1.0) ** j * np.exp(mag)
    series = coef(l)
    return coef(m)[0] / (TWO_PI * np.cosh(r)) * (np.cos(np.outer(2 * phi - theta, m - l)) @ series)


def _squeezed_wigner(alpha: complex, r: float, theta: float, phi, n: int, n_f: int,
                     verbatim: bool = False):
    t, w, beta = _squeezed_params(alpha, r, theta)
    _, _, beta_k = _squeezed_params(alpha, r, theta, verbatim)
    # conjugate factor for row n: s*^n H_n((alpha* + alpha w*)/2s*) / sqrt(n!)
    hn = np.conj(scaled_hermite(beta, w, n)[n])
    hk = scaled_hermite(beta_k, w, n_f)
    arg = np.angle(alpha) if alpha != 0 else 0.0
    damp = np.exp(-abs(alpha) ** 2 * (1 + np.cos(2 * arg - theta) * t))
    k = np.arange(n_f + 1)
    series = np.exp(1j * np.outer(phi, n - k)) @ hk
    return np.real(damp * hn * series) / (TWO_PI * np.cosh(r))


def _cat_wigner(p: dict, phi, n: int):
    eta, N, Np = p["eta"], p["N"], p["Nprime"]
    on = float(n == N) + float(n == Np)
    base = np.cos(eta) ** 2 * (n == N) + np.sin(eta) ** 2 * (n == Np)
    fringe = 0.5 * np.sin(2 * eta) * np.cos((N - Np) * phi + p["phi0"]) * on
    return (base + fringe) / TWO_PI


def exact_number_phase_wigner(spec: StateSpec, phi, n: int, verbatim: bool = False):
    """Closed-form number-phase Wigner function of an analytic family.

    Series are truncated at the StateSpec's ``N_F`` so that the result is
    directly comparable with the pipeline. ``verbatim`` switches to the
    uncorrected squeezed-state series, whose ``H_k`` argument carries
    ``exp(-i theta)`` instead of ``exp(i theta)``.
    """
    n_f = resolve_nf(spec)
    if not 0 <= n <= n_f:
        raise ValidationError(f"photon number {n} outside 0..{n_f}")
    scalar = np.ndim(phi) == 0
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = spec.params
    if spec.kind == "fock":
        out = np.full(phi.shape, float(n == p["N"]) / TWO_PI)
    elif spec.kind == "coherent":
        out = _coherent_wigner(spec.alpha, phi, n, n_f)
    elif spec.kind == "thermal":
        out = np.full(phi.shape, _thermal_weights(p["bho"], n_f)[n] / TWO_PI)
    elif spec.kind == "cat":
        out = _cat_wigner(p, phi, n)
    elif p["abs"] == 0 and not verbatim:
        out = _squeezed_vacuum_wigner(p["r"], p["theta"], phi, n, n_f)
    else:
        out = _squeezed_wigner(spec.alpha, p["r"], p["theta"], phi, n, n_f, verbatim)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"closed form for {spec.kind} overflows at N_F={n_f}")
    return float(out[0]) if scalar else out


@dataclass
class Table:
    """Rows of a figure table with its column names and provenance."""

    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)


FIGURES = ("max", "coh", "squeezed", "cat")


def _pipeline_rows(spec: StateSpec, grid: AngleGrid, ns, panel: str, extra: dict, max_tail):
    W = number_phase_wigner(build_state(spec, max_tail), grid)
    rows = []
    for t, phi in enumerate(grid.points):
        for n in ns:
            rows.append({"panel": panel, **extra, "phi": float(phi), "n": int(n),
                         "W": float(W.values[t, n])})
    return rows


def figure_data(which: str, M: int = 256, alphas=None, ns=None,
                max_tail: float = MAX_TAIL) -> Table:
    """Data behind the number-phase figures.

    ``max``: peak height ``W(0, n)`` against ``|alpha|`` for coherent states.
    ``coh``: coherent-state rows for several ``|alpha|`` and ``n``.
    ``squeezed``: squeezed-vacuum rows. ``cat``: the Fock cat with
    ``eta = pi/10``, ``N = 0``, ``N' = 7``. Rows are phi-major then n.
    """
    if which not in FIGURES:
        raise ValidationError(f"unknown figure {which!r}; expected one of {FIGURES}")
    grid = AngleGrid(M)
    meta = {"figure": which, "M": M}
    if which == "max":
        alphas = np.linspace(0.0, 8.0, 161) if alphas is None else np.asarray(alphas, float)
        ns = (0, 1, 2, 5, 10, 20, 30, 40) if ns is None else tuple(ns)
        rows = []
        for a in alphas:
            spec = StateSpec("coherent", {"abs": a, "arg": 0.0})
            n_f = max(resolve_nf(spec), max(ns))
            spec = spec.with_nf(n_f)
            rho = build_state(spec, max_tail)
            W = number_phase_wigner(rho, AngleGrid(4))   # phi = 0 is node 2
            for n in ns:
                rows.append({"alpha": float(a), "n": int(n), "W": float(W.values[2, n])})
        return Table(("alpha", "n", "W"), rows, meta)
    if which == "coh":
        panels = [("a", 0.1, (0, 1)), ("b", 1.0, (0, 1, 2)), ("c", 5.0, (0, 1, 2)),
                  ("fig2", 5.0, (15, 20, 25)), ("fig3", 1.0, (15, 20, 25))]
        rows = []
        for name, a, pn in panels:
            spec = StateSpec("coherent", {"abs": a, "arg": 0.0})
            spec = spec.with_nf(max(resolve_nf(spec), max(pn)))
            rows += _pipeline_rows(spec, grid, pn, name, {"alpha": a}, max_tail)
        return Table(("panel", "alpha", "phi", "n", "W"), rows, meta)
    if which == "squeezed":
        rows = []
        for name, r, pn in [("a", 1.0, (2,)), ("a", 0.8, (2,)), ("a", 0.6, (2,)),
                            ("b", 1.0, (0, 2, 4))]:
            spec = StateSpec("squeezed", {"abs": 0.0, "arg": 0.0, "r": r, "theta": 0.0})
            rows += _pipeline_rows(spec, grid, pn, name, {"r": r}, max_tail)
        return Table(("panel", "r", "phi", "n", "W"), rows, meta)
    spec = StateSpec("cat", {"eta": np.pi / 10, "phi0": 0.0, "N": 0, "Nprime": 7})
    rows = _pipeline_rows(spec, grid, range(8), "fc", {}, max_tail)
    return Table(("panel", "phi", "n", "W"), rows, meta)
