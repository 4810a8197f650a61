"""Command-line front end: ``cylwig <command> ...``.

Every command writes one table, either CSV (``#`` metadata lines, then a
single header row) or JSON (an object with ``meta`` and ``rows``). Output is
deterministic: no timestamps, fixed row order.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .core import (AngleGrid, Config, CylinderFunction, CylinderOperator, DensityOperator,
                   MomentumBand, ValidationError)
from .kernels import KernelError, get_kernel, kernel_report
from .numberphase import number_distribution, number_phase_wigner, phase_distribution
from .quantizer import quantize
from .star import star_product
from .states import FIGURES, StateSpec, build_state, figure_data, resolve_nf
from .wigner import WignerGrid, reconstruct_density, wigner_function


def _fmt(value, column: str):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        if column in ("phi", "theta"):
            return format(float(value), ".17g")
        return repr(float(value))
    return str(value)


def write_table(columns, rows, meta: dict, fmt: str, stream):
    if fmt == "json":
        json.dump({"meta": meta, "rows": [{c: r[c] for c in columns} for r in rows]},
                  stream, indent=1, default=_json_default)
        stream.write("\n")
        return
    for key in sorted(meta):
        stream.write(f"# {key}: {json.dumps(meta[key], default=_json_default)}\n")
    w = csv.writer(stream, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c], c) for c in columns])


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _complex_array(obj: dict, shape, path: str) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(shape)), dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed re/im arrays ({exc})") from None
    if re.shape != tuple(shape) or im.shape != tuple(shape):
        raise ValidationError(f"{path}: re/im must have shape {tuple(shape)}, got "
                              f"{re.shape} and {im.shape}")
    return re + 1j * im


def load_density(path: str, tol: float) -> DensityOperator:
    """Read ``{"n_min", "dim", "re", "im"}``."""
    obj = _load_json(path)
    try:
        band = MomentumBand(int(obj["n_min"]), int(obj["n_min"]) + int(obj["dim"]) - 1)
    except KeyError as exc:
        raise ValidationError(f"{path}: missing field {exc}") from None
    return DensityOperator(band, _complex_array(obj, (band.dim, band.dim), path), tol)


def load_symbol(path: str, hbar: float) -> CylinderFunction:
    """Read ``{"M", "n_min", "dim", "re", "im"}`` with angle-major ``(M, dim)`` arrays."""
    obj = _load_json(path)
    try:
        grid = AngleGrid(int(obj["M"]))
        band = MomentumBand(int(obj["n_min"]), int(obj["n_min"]) + int(obj["dim"]) - 1)
    except KeyError as exc:
        raise ValidationError(f"{path}: missing field {exc}") from None
    return CylinderFunction(grid, band, _complex_array(obj, (grid.M, band.dim), path), hbar)


def load_wigner(path: str, hbar: float) -> WignerGrid:
    """Accept the symbol-file layout or the JSON output of ``cyl-wigner``."""
    obj = _load_json(path)
    if "rows" in obj:
        rows = obj["rows"]
        meta = obj.get("meta", {})
        if meta.get("kernel", "symmetric") != "symmetric":
            raise ValidationError(f"{path}: reconstruction needs symmetric-kernel data, "
                                  f"file was made with {meta.get('kernel')!r}")
        try:
            thetas = sorted({float(r["theta"]) for r in rows})
            ns = sorted({int(r["n"]) for r in rows})
            M = int(meta.get("M", len(thetas)))
            grid = AngleGrid(M)
            band = MomentumBand(ns[0], ns[-1])
            vals = np.zeros((M, band.dim))
            seen = np.zeros((M, band.dim), dtype=bool)
            index = {th: t for t, th in enumerate(thetas)}
            for r in rows:
                t, i = index[float(r["theta"])], band.position(int(r["n"]))
                vals[t, i] = float(r["W"])
                seen[t, i] = True
        except (KeyError, ValueError, IndexError) as exc:
            raise ValidationError(f"{path}: malformed Wigner rows ({exc})") from None
        if len(thetas) != M or not seen.all() or not np.allclose(thetas, grid.points, atol=1e-12):
            raise ValidationError(f"{path}: rows do not cover a uniform {M}-point grid")
    else:
        f = load_symbol(path, hbar)
        grid, band, vals = f.grid, f.band, np.real(f.values)
    flags = dict(get_kernel("symmetric").flags)
    return WignerGrid(grid, band, vals, hbar, "symmetric", flags)


def _meta(args, cfg: Config, **extra) -> dict:
    meta = {"tool": "cylwig", "version": __version__, "command": args.command,
            "hbar": cfg.hbar, "tol": cfg.tol}
    meta.update(extra)
    return meta


def _state(args):
    spec = StateSpec.parse(args.state, n_f=args.nf)
    return spec, build_state(spec, args.max_tail)


def cmd_wigner(args, cfg):
    spec, st = _state(args)
    grid = AngleGrid(args.grid)
    W = number_phase_wigner(st, grid, get_kernel(args.kernel), tol=cfg.tol)
    rows = [{"phi": phi, "n": n, "W": W.values[t, n]}
            for t, phi in enumerate(grid.points) for n in range(W.n_f + 1)]
    meta = _meta(args, cfg, kernel=args.kernel, state=str(spec), N_F=W.n_f, M=grid.M,
                 tail_mass=getattr(st, "tail_mass", 0.0))
    return ("phi", "n", "W"), rows, meta


def cmd_marginals(args, cfg):
    spec, st = _state(args)
    grid = AngleGrid(args.grid)
    P = phase_distribution(st, grid)
    Pn = number_distribution(st)
    rows = [{"table": "phase", "x": phi, "value": p} for phi, p in zip(grid.points, P)]
    rows += [{"table": "number", "x": n, "value": p} for n, p in enumerate(Pn)]
    meta = _meta(args, cfg, kernel="symmetric", state=str(spec), N_F=resolve_nf(spec), M=grid.M)
    return ("table", "x", "value"), rows, meta


def _embed_in_band(rho: DensityOperator, N: int, tol: float) -> DensityOperator:
    band = MomentumBand.symmetric(N)
    if rho.band.n_min < band.n_min or rho.band.n_max > band.n_max:
        raise ValidationError(f"density matrix on [{rho.band.n_min}, {rho.band.n_max}] does "
                              f"not fit the band [-{N}, {N}]")
    full = np.zeros((band.dim, band.dim), dtype=complex)
    i0 = band.position(rho.band.n_min)
    full[i0:i0 + rho.band.dim, i0:i0 + rho.band.dim] = rho.matrix
    return DensityOperator(band, full, tol)


def cmd_cyl_wigner(args, cfg):
    rho = _embed_in_band(load_density(args.rho, cfg.tol), args.band, cfg.tol)
    M = args.grid if args.grid else 2 * rho.band.dim + 1
    grid = AngleGrid(M)
    W = wigner_function(get_kernel(args.kernel), rho, grid, hbar=cfg.hbar, tol=cfg.tol)
    vals = W.values
    if np.iscomplexobj(vals):
        raise ValidationError(f"kernel {args.kernel!r} gave a complex Wigner function")
    rows = [{"theta": th, "n": int(n), "W": vals[t, i]}
            for t, th in enumerate(grid.points) for i, n in enumerate(rho.band.indices)]
    meta = _meta(args, cfg, kernel=args.kernel, band=[rho.band.n_min, rho.band.n_max], M=M)
    return ("theta", "n", "W"), rows, meta


def cmd_reconstruct(args, cfg):
    W = load_wigner(args.wigner, cfg.hbar)
    rho = reconstruct_density(W, paper_literal=args.paper_literal, tol=cfg.tol)
    W2 = wigner_function(get_kernel("symmetric"), rho, W.grid, hbar=W.hbar)
    err = float(np.max(np.abs(W2.values - np.real(W.values))))
    rows = [{"j": int(j), "k": int(k), "re": rho.matrix[a, b].real, "im": rho.matrix[a, b].imag}
            for a, j in enumerate(W.band.indices) for b, k in enumerate(W.band.indices)]
    meta = _meta(args, cfg, kernel="symmetric", band=[W.band.n_min, W.band.n_max], M=W.grid.M,
                 paper_literal=args.paper_literal, roundtrip_error=err)
    return ("j", "k", "re", "im"), rows, meta


def cmd_quantize(args, cfg):
    f = load_symbol(args.symbol, cfg.hbar)
    op = quantize(get_kernel(args.kernel), f, quad_nodes=cfg.quad_nodes)
    n = f.band.indices
    rows = [{"j": int(j), "k": int(k), "re": op.matrix[a, b].real, "im": op.matrix[a, b].imag}
            for a, j in enumerate(n) for b, k in enumerate(n)]
    meta = _meta(args, cfg, kernel=args.kernel, band=[f.band.n_min, f.band.n_max], M=f.grid.M)
    return ("j", "k", "re", "im"), rows, meta


def cmd_star(args, cfg):
    f = load_symbol(args.f, cfg.hbar)
    g = load_symbol(args.g, cfg.hbar)
    h = star_product(get_kernel(args.kernel), f, g, backend=args.backend,
                     quad_nodes=cfg.quad_nodes)
    rows = [{"theta": th, "n": int(n), "re": h.values[t, i].real, "im": h.values[t, i].imag}
            for t, th in enumerate(f.grid.points) for i, n in enumerate(f.band.indices)]
    meta = _meta(args, cfg, kernel=args.kernel, backend=args.backend,
                 band=[f.band.n_min, f.band.n_max], M=f.grid.M)
    return ("theta", "n", "re", "im"), rows, meta


def cmd_kernel_report(args, cfg):
    rep = kernel_report(get_kernel(args.kernel), tol=cfg.tol)
    meta = _meta(args, cfg, kernel=args.kernel)
    return ("condition", "verdict", "violation", "witness"), list(rep.rows()), meta


def cmd_figures(args, cfg):
    tab = figure_data(args.which, M=args.grid, max_tail=args.max_tail)
    return tab.columns, tab.rows, _meta(args, cfg, kernel="symmetric", **tab.meta)


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")


def _add_state(p):
    p.add_argument("--state", required=True, help="e.g. fock:N=3 or coherent:abs=1.0,arg=0.0")
    p.add_argument("--nf", type=int, default=None, help="Fock truncation N_F (default: automatic)")
    p.add_argument("--max-tail", type=float, default=1e-8,
                   help="largest discarded norm accepted for truncated pure states")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cylwig",
                                     description="Wigner functions on the cylinder and number-phase Wigner functions.")
    parser.add_argument("--version", action="version", version=f"cylwig {__version__}")
    parser.add_argument("--hbar", type=float, default=1.0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner", help="number-phase Wigner function of an analytic state")
    _add_state(p)
    p.add_argument("--grid", type=int, default=64, help="number of phase grid points")
    p.add_argument("--kernel", default="symmetric")
    _add_output(p)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("marginals", help="phase and photon-number distributions")
    _add_state(p)
    p.add_argument("--grid", type=int, default=64)
    _add_output(p)
    p.set_defaults(func=cmd_marginals)

    p = sub.add_parser("cyl-wigner", help="cylinder Wigner function of a density-matrix file")
    p.add_argument("--rho", required=True)
    p.add_argument("--band", type=int, required=True, help="band half-width N, momenta -N..N")
    p.add_argument("--kernel", default="symmetric")
    p.add_argument("--grid", type=int, default=None, help="angle grid size (default 2*dim+1)")
    _add_output(p)
    p.set_defaults(func=cmd_cyl_wigner)

    p = sub.add_parser("reconstruct", help="density matrix from symmetric-kernel Wigner data")
    p.add_argument("--wigner", required=True)
    p.add_argument("--paper-literal", action="store_true",
                   help="read Fourier moments directly as matrix elements (no chain solve)")
    _add_output(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("quantize", help="operator matrix of a sampled symbol")
    p.add_argument("--symbol", required=True)
    p.add_argument("--kernel", default="weyl")
    _add_output(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("star", help="star product of two sampled symbols")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--kernel", default="weyl")
    p.add_argument("--backend", choices=("operator", "trace"), default="operator")
    _add_output(p)
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("kernel-report", help="kernel condition and admissibility checks")
    p.add_argument("--kernel", required=True)
    _add_output(p)
    p.set_defaults(func=cmd_kernel_report)

    p = sub.add_parser("figures", help="tables behind the number-phase figures")
    p.add_argument("--which", choices=FIGURES, required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--max-tail", type=float, default=1e-8)
    _add_output(p)
    p.set_defaults(func=cmd_figures)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config.from_env(hbar=args.hbar)
        columns, rows, meta = args.func(args, cfg)
    except (ValidationError, KernelError, OverflowError, ValueError) as exc:
        print(f"cylwig {args.command}: error: {exc}", file=sys.stderr)
        return 2
    buf = io.StringIO()
    write_table(columns, rows, meta, args.format, buf)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def main():
    sys.exit(run())
