"""Command-line driver: solves, sweeps, tension checks, margin scans.

Subcommands write diff-able artifacts into --out: ``solve`` produces
solution.json and boundary.csv, ``sweep`` produces table.csv (and sweep.svg
with --plot), ``check-sigma`` and ``margin-scan`` produce report.json.
Exit codes: 0 success, 1 numerical failure, 2 degeneracy or admissibility
rejection, 64 usage error.  All outputs are bit-reproducible for a fixed
configuration.
"""

from __future__ import annotations

import os

# cap BLAS pools before numpy is pulled in anywhere below
_threads = os.environ.get("THINRING_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .physics import (NondimParams, SigmaLaw, asymptotic_wgn, check_sigma,
                      degeneracy_margin, nu_sigma_rescaled, s_asymptotic)
from .shape import build_grid
from .solver import (ContinuationError, SolutionState, SolverError,
                     SolverOptions, continuation, newton_solve)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_REJECTED = 2
EXIT_USAGE = 64

_HALF_PI_SQ_INV = 1.0 / (2.0 * math.pi**2)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; reserve 2 for admissibility rejection
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_json_safe(payload), indent=2) + "\n")


def _emit_error(code: int, message: str, **extra) -> int:
    print(json.dumps(_json_safe({"error": {"code": code, "message": message,
                                           **extra}})))
    return code


def _sigma_from_args(args) -> SigmaLaw:
    kind = args.sigma_kind
    if kind == "none":
        return SigmaLaw()
    if kind == "c_power":
        return SigmaLaw(kind=kind, c=args.sigma_c, p=args.sigma_p)
    return SigmaLaw(kind=kind, c=args.sigma_c)


def _parse_grid(spec: str) -> list[float]:
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be a:b:n, got {spec!r}") from None
    if a <= 0.0 or b <= 0.0 or n < 1:
        raise argparse.ArgumentTypeError("grid endpoints must be positive, n >= 1")
    if n == 1:
        return [a]
    pts = np.geomspace(a, b, n)
    return sorted((float(p) for p in pts), reverse=True)


def _params_payload(args, eps=None) -> dict:
    d = {"rho": args.rho,
         "sigma": {"kind": args.sigma_kind, "c": args.sigma_c, "p": args.sigma_p},
         "modes": args.modes, "grid": args.grid, "tol": args.tol}
    if eps is not None:
        d["eps"] = eps
    return d


def _state_payload(state: SolutionState, args, params: NondimParams) -> dict:
    sig = params.sigma_law
    nu_pair = {"standard": state.nu}
    if not sig.is_zero:
        es = sig.eps_sigma(state.eps)
        nu_pair["sigma_rescaled"] = state.nu / es
        nu_pair["sigma_rescaled_asym"] = nu_sigma_rescaled(state.eps, params.rho, sig)
    return {
        "params": _params_payload(args, eps=state.eps),
        "shape": {"coeffs": state.shape.coeffs},
        "w": state.w,
        "gamma": state.gamma,
        "nu": state.nu,
        "nu_normalizations": nu_pair,
        "s": state.s,
        "diagnostics": state.diagnostics,
    }


def _write_boundary_csv(path: Path, state: SolutionState) -> None:
    grid = build_grid(state.shape, state.eps, state.mu.size)
    rows = ["alpha,theta,mu,lambda,h"]
    for i in range(grid.n):
        rows.append(",".join(f"{v:.17g}" for v in
                             (grid.alpha[i], grid.theta[i], state.mu[i],
                              state.lam[i], grid.h[i])))
    path.write_text("\n".join(rows) + "\n")


_TABLE_HEADER = ("eps,w,w_asym,gamma,gamma_asym,nu,nu_asym,s,"
                 "theta_sup,theta_h5,residual")


def _table_row(state: SolutionState, params: NondimParams) -> str:
    wa, ga, nua = asymptotic_wgn(state.eps, params.rho, params.sigma_law)
    d = state.diagnostics
    vals = (state.eps, state.w, wa, state.gamma, ga, state.nu, nua, state.s,
            d["theta_sup"], d["theta_h5"], d["residual_norm"])
    return ",".join(f"{v:.17g}" for v in vals)


def _svg_polyline(xs, ys, x0, y0, w, h, xlim, ylim, color) -> str:
    def mapx(x):
        return x0 + w * (x - xlim[0]) / (xlim[1] - xlim[0])

    def mapy(y):
        return y0 + h * (1.0 - (y - ylim[0]) / (ylim[1] - ylim[0]))

    pts = " ".join(f"{mapx(x):.2f},{mapy(y):.2f}" for x, y in zip(xs, ys))
    return (f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>')


def _pad(lo: float, hi: float) -> tuple[float, float]:
    span = (hi - lo) or max(abs(hi), 1e-12)
    return lo - 0.08 * span, hi + 0.08 * span


def _write_sweep_svg(path: Path, states: list[SolutionState],
                     params: NondimParams) -> None:
    eps = [s.eps for s in states]
    dw = [abs(s.w - asymptotic_wgn(s.eps, params.rho, params.sigma_law)[0])
          for s in states]
    xlim = _pad(min(eps), max(eps))
    ylim = _pad(0.0, max(dw))
    parts = ['<svg xmlns="http://www.w3.org/2000/svg" width="900" height="420" '
             'viewBox="0 0 900 420">',
             '<rect width="900" height="420" fill="white"/>']
    # left panel: |W - W_asym| vs eps
    parts.append('<rect x="60" y="40" width="340" height="320" fill="none" '
                 'stroke="black"/>')
    parts.append(_svg_polyline(eps, dw, 60, 40, 340, 320, xlim, ylim, "#1f6fb2"))
    for x, y in zip(eps, dw):
        cx = 60 + 340 * (x - xlim[0]) / (xlim[1] - xlim[0])
        cy = 40 + 320 * (1 - (y - ylim[0]) / (ylim[1] - ylim[0]))
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="#1f6fb2"/>')
        parts.append(f'<text x="{cx:.2f}" y="375" font-size="11" '
                     f'text-anchor="middle">{x:g}</text>')
    parts.append('<text x="230" y="400" font-size="13" text-anchor="middle">'
                 'eps</text>')
    parts.append('<text x="230" y="25" font-size="13" text-anchor="middle">'
                 '|W - W_asym|</text>')
    # right panel: cross-section at the smallest eps, unit circle dashed
    st = states[-1]
    alpha = np.linspace(0.0, 2.0 * math.pi, 257)
    r = 1.0 + st.shape.theta(alpha)
    scale = 140.0 / float(np.max(r))
    cx0, cy0 = 670, 200
    xs = cx0 + scale * r * np.cos(alpha)
    ys = cy0 - scale * r * np.sin(alpha)
    circ = " ".join(
        f"{cx0 + scale * math.cos(a):.2f},{cy0 - scale * math.sin(a):.2f}"
        for a in alpha)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{circ}" fill="none" stroke="#999" '
                 'stroke-dasharray="4 3"/>')
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#b23a1f" '
                 'stroke-width="1.5"/>')
    parts.append(f'<text x="{cx0}" y="25" font-size="13" text-anchor="middle">'
                 f'section at eps = {st.eps:g} (unit circle dashed)</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _reject_inadmissible(args, params: NondimParams):
    """Exit-2 payload for an inadmissible tension law, None when fine."""
    report = check_sigma(params.sigma_law, params.rho)
    if report.admissible or args.force:
        return None, report
    return _emit_error(EXIT_REJECTED, "sigma law rejected: " +
                       "; ".join(report.messages or ("inadmissible",)),
                       margin=report.margin, worst_mode=report.worst_mode,
                       omega=report.omega), report


def _options(args) -> SolverOptions:
    return SolverOptions(n_grid=args.grid, modes=args.modes, tol=args.tol)


def cmd_solve(args) -> int:
    params = NondimParams(rho=args.rho, sigma_law=_sigma_from_args(args),
                          omega=_sigma_from_args(args).omega)
    bail, _ = _reject_inadmissible(args, params)
    if bail is not None:
        return bail
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        state = newton_solve(args.eps, params, options=_options(args))
    except (SolverError, ValueError) as exc:
        return _emit_error(EXIT_NUMERICAL, str(exc))
    _write_json(out / "solution.json", _state_payload(state, args, params))
    _write_boundary_csv(out / "boundary.csv", state)
    print(f"solved eps={args.eps:g}: W={state.w:.10g} gamma={state.gamma:.10g} "
          f"nu={state.nu:.10g} S={state.s:.10g} "
          f"residual={state.diagnostics['residual_norm']:.3g}")
    for w in state.diagnostics["warnings"]:
        print("warning:", w, file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = NondimParams(rho=args.rho, sigma_law=_sigma_from_args(args),
                          omega=_sigma_from_args(args).omega)
    bail, _ = _reject_inadmissible(args, params)
    if bail is not None:
        return bail
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    partial = False
    try:
        states = continuation(args.eps_grid, params, options=_options(args))
    except ContinuationError as exc:
        states = exc.results
        partial = True
        message = str(exc)
    rows = [_TABLE_HEADER] + [_table_row(s, params) for s in states]
    (out / "table.csv").write_text("\n".join(rows) + "\n")
    if args.plot and states:
        _write_sweep_svg(out / "sweep.svg", states, params)
    if partial:
        return _emit_error(EXIT_NUMERICAL, message, solved=len(states))
    print(f"swept {len(states)} eps values into {out / 'table.csv'}")
    return EXIT_OK


def cmd_check_sigma(args) -> int:
    law = _sigma_from_args(args)
    try:
        report = check_sigma(law, args.rho)
    except ValueError as exc:
        return _emit_error(EXIT_NUMERICAL, str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"rho": args.rho,
               "sigma": {"kind": args.sigma_kind, "c": args.sigma_c,
                         "p": args.sigma_p},
               "omega": report.omega, "omega_source": report.omega_source,
               "omega_uncertainty": report.omega_uncertainty,
               "margin": report.margin, "worst_mode": report.worst_mode,
               "excluded": report.excluded,
               "eps2_sigma_ok": report.eps2_sigma_ok,
               "derivative_ok": report.derivative_ok,
               "derivative_ratio_max": report.derivative_ratio_max,
               "admissible": report.admissible,
               "messages": list(report.messages)}
    _write_json(out / "report.json", payload)
    print("admissible" if report.admissible else "inadmissible")
    return EXIT_OK


def cmd_margin_scan(args) -> int:
    k0 = 8.0 * args.rho + _HALF_PI_SQ_INV
    lo, hi, n = args.omega_grid
    omegas = np.linspace(lo, hi, int(n))
    scan = []
    for om in omegas:
        margin, worst = degeneracy_margin(args.rho, float(om))
        scan.append({"omega": float(om), "k": float(om) * k0,
                     "margin": margin, "worst_mode": worst})
    k_lo, k_hi = lo * k0, hi * k0
    flagged = []
    first = max(3, math.ceil(k_lo - 1e-12))
    for k_int in range(first, math.floor(k_hi + 1e-12) + 1):
        om = k_int / k0
        margin, worst = degeneracy_margin(args.rho, om)
        flagged.append({"k": k_int, "omega": om, "margin": margin,
                        "worst_mode": worst})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json",
                {"rho": args.rho, "k0": k0, "scan": scan,
                 "degenerate_points": flagged})
    print(f"scanned {len(omegas)} omega values; "
          f"{len(flagged)} degenerate points in range")
    return EXIT_OK


def _omega_grid(spec: str) -> tuple[float, float, int]:
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"omega grid must be a:b:n, got {spec!r}") from None
    if a < 0.0 or b <= a or n < 2:
        raise argparse.ArgumentTypeError("omega grid needs 0 <= a < b, n >= 2")
    return a, b, n


def _add_common(p: argparse.ArgumentParser, eps_kind: str | None) -> None:
    p.add_argument("--rho", type=float, default=0.0,
                   help="density ratio parameter (>= 0)")
    p.add_argument("--sigma-kind", default="none",
                   choices=["none", "c_over_eps", "c_log_over_eps", "c_power"])
    p.add_argument("--sigma-c", type=float, default=0.0,
                   help="tension coefficient c")
    p.add_argument("--sigma-p", type=float, default=None,
                   help="exponent for c_power, in (1, 2)")
    p.add_argument("--modes", type=int, default=32, help="cosine truncation M")
    p.add_argument("--grid", type=int, default=256, help="boundary nodes N")
    p.add_argument("--tol", type=float, default=1e-10, help="Newton tolerance")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--force", action="store_true",
                   help="run even if the sigma law is inadmissible")
    if eps_kind == "single":
        p.add_argument("--eps", type=float, required=True,
                       help="thinness parameter")
    elif eps_kind == "grid":
        p.add_argument("--eps-grid", dest="eps_grid", type=_parse_grid,
                       required=True, metavar="A:B:N",
                       help="log-spaced eps grid, swept descending")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="thinring",
                  description="steady thin vortex rings with surface tension")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="single steady solve", parents=[])
    _add_common(p, "single")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", help="continuation over an eps grid")
    _add_common(p, "grid")
    p.add_argument("--plot", action="store_true", help="also write sweep.svg")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("check-sigma", help="tension-law admissibility report")
    _add_common(p, None)
    p.set_defaults(fn=cmd_check_sigma)

    p = sub.add_parser("margin-scan", help="degeneracy margins over omega")
    _add_common(p, None)
    p.add_argument("--omega-grid", type=_omega_grid, default=(0.0, 60.0, 601),
                   metavar="A:B:N", help="linear omega grid (default 0:60:601)")
    p.set_defaults(fn=cmd_margin_scan)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _sigma_from_args(args)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"thinring: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())