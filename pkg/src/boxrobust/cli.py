"""Command-line front end.

Exit codes: 0 success, 1 domain violation, 2 parse or I/O error,
3 numerical failure.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import io as _io
import json
import os
import sys

import numpy as np

from . import __version__
from .constructions import Wiring, apply_wiring, pr_box, pr_pseudostate, prop2_pseudostate
from .correlations import (
    Box,
    is_no_signalling,
    is_probability,
    marginal_alice,
    marginal_bob,
    signalling_violation,
)
from .di_bounds import certify
from .errors import BoxRobustError, ConvergenceFailure, DomainError, NoQuantumBoundRegistered, RangeError, ShapeMismatch
from .io import dump_json, load_json
from .operators import PseudoState, closest_state, expectation, negativity, negativity_witness, trace_norm
from .robustness import (
    best_local_approximation,
    generalized_local_robustness,
    local_robustness,
    negativity_floor,
    verify_certificate,
)

EXIT_OK, EXIT_DOMAIN, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_COLUMNS = [
    "eps",
    "chsh_value",
    "r_local",
    "r_generalized",
    "q_nl_min",
    "neg_floor",
    "neg_actual",
    "saturation_gap",
]


class ParseError(Exception):
    pass


class _Out:
    def __init__(self, stream):
        self.stream = stream
        self.color = "NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()

    def __call__(self, *parts):
        print(*parts, file=self.stream)

    def flag(self, ok):
        text = "yes" if ok else "no"
        if not self.color:
            return text
        return f"\033[32m{text}\033[0m" if ok else f"\033[31m{text}\033[0m"


def _load(path, loader):
    try:
        data = load_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return loader(data)
    except (KeyError, TypeError, ShapeMismatch) as exc:
        raise ParseError(f"{path}: malformed content ({exc})") from exc
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise ParseError(f"{path}: {exc}") from exc


def _fmt(v, digits=12):
    """Fixed significant digits, tiny values snapped to zero (CSV stability)."""
    if v is None:
        return ""
    if abs(v) < 10.0 ** (-digits):
        return "0"
    return format(v, f".{digits}g")


def _emit(obj, path, out):
    text = dump_json(obj, path)
    if path in (None, "-"):
        out.stream.write(text)
    else:
        out(f"wrote {path}")


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_check(args, out):
    box = _load(args.box, Box.from_dict)
    tol = args.tol
    prob = is_probability(box, tol)
    ns = is_no_signalling(box, tol)
    s = box.scenario
    out(f"scenario: nX={s.nX} nY={s.nY} nA={s.nA} nB={s.nB}")
    out(f"probability: {out.flag(prob)} (min entry {box.p.min():.6g}, tol {tol:g})")
    out(f"no-signalling: {out.flag(ns)} (max marginal deviation {signalling_violation(box):.3g}, tol {tol:g})")
    if ns:
        for x in range(s.nX):
            out(f"p_A(.|x={x}) = {np.array2string(marginal_alice(box, x, tol), precision=6)}")
        for y in range(s.nY):
            out(f"p_B(.|y={y}) = {np.array2string(marginal_bob(box, y, tol), precision=6)}")
    return EXIT_OK if prob and ns else EXIT_DOMAIN


def _describe(label, res, report, out):
    out(f"[{label}] t = {res.value!r}")
    out(f"[{label}] gap = {res.gap:.3g}; certificate: {out.flag(report.ok)} (tol 1e-08)")
    for reason in report.reasons:
        out(f"[{label}]   {reason}")
    coeffs = res.dual.coefficients if res.dual is not None else None
    if coeffs is not None:
        out(f"[{label}] dual Bell functional B(a,b|x,y), indexed [x][y][a][b]:")
        out(np.array2string(coeffs, precision=6, suppress_small=True))


def cmd_robustness(args, out):
    box = _load(args.box, Box.from_dict)
    kinds = ["local", "generalized"] if args.kind == "both" else [args.kind]
    payload = {}
    ok = True
    for kind in kinds:
        if kind == "local":
            res = local_robustness(box, args.tol)
            label = "r_L"
        else:
            res = generalized_local_robustness(box, args.tol)
            label = "r^G_L (noise over NS)"
        report = verify_certificate(box, res)
        ok = ok and report.ok
        _describe(label, res, report, out)
        payload[kind] = dict(res.to_dict(), verified=report.ok)
    if args.out:
        _emit(payload if len(kinds) > 1 else payload[kinds[0]], args.out, out)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_epr2(args, out):
    box = _load(args.box, Box.from_dict)
    q, local_part, ns_part = best_local_approximation(box, args.tol)
    out(f"q_NL^min = {q!r}")
    out(f"local weight = {1.0 - q!r}")
    if args.out:
        _emit(
            {
                "q_nl_min": q,
                "local_part": None if local_part is None else local_part.to_dict(),
                "ns_part": None if ns_part is None else ns_part.to_dict(),
            },
            args.out,
            out,
        )
    return EXIT_OK


def cmd_negativity(args, out):
    O = _load(args.operator, PseudoState.from_dict)
    tn = trace_norm(O)
    W = negativity_witness(O)
    rho, dist = closest_state(O)
    out(f"trace norm = {tn!r}")
    out(f"negativity = {negativity(O)!r}")
    out(f"distance to closest state = {dist!r}")
    out(f"Tr(W O) = {expectation(W, O)!r}")
    out("witness W = P_plus - P_minus:")
    out(np.array2string(W.matrix, precision=6, suppress_small=True))
    if args.closest_out:
        _emit(rho.to_dict(), args.closest_out, out)
    return EXIT_OK


def cmd_realize(args, out):
    box = _load(args.box, Box.from_dict)
    real = prop2_pseudostate(box)
    tn = trace_norm(real.state)
    c1, c2 = real.coefficients
    out(f"r_L = {real.robustness!r}; coefficients (1+t, -t) = ({c1!r}, {c2!r})")
    out(f"state dimension {real.state.dim}, bipartition {real.state.bipartition}")
    out(f"trace norm of constructed operator = {tn!r}")
    try:
        floor = negativity_floor(box)
        out(f"negativity = {(tn - 1) / 2!r}; negativity floor = {floor!r}; gap = {(tn - 1) / 2 - floor:.6g}")
    except NoQuantumBoundRegistered:
        out("negativity floor: no functional with a quantum bound for this scenario")
    roundtrip = real.realization.check(1e-9)
    out(f"round trip (born box = input within 1e-09): {out.flag(roundtrip)}")
    if args.out:
        _emit(real.realization.to_dict(), args.out, out)
    return EXIT_OK if roundtrip and real.check() else EXIT_NUMERIC


def cmd_certify(args, out):
    box = _load(args.box, Box.from_dict)
    cert = certify(box)
    d = cert.to_dict()
    for k in ("chsh_value", "trace_norm_floor", "negativity_floor", "entanglement_floor"):
        out(f"{k} = {d[k]!r}")
    for a in cert.assumptions:
        out(f"assumes: {a}")
    if args.out:
        _emit(d, args.out, out)
    return EXIT_OK


def parse_grid(spec):
    """'start:stop:count' (inclusive linspace) or a comma separated list."""
    try:
        if ":" in spec:
            start, stop, count = spec.split(":")
            grid = np.linspace(float(start), float(stop), int(count)).tolist()
        else:
            grid = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"bad --eps-grid {spec!r}: {exc}") from exc
    if not grid:
        raise ParseError("empty --eps-grid")
    for e in grid:
        if not 0.0 <= e <= 0.5:
            raise RangeError(f"grid value {e!r} outside [0, 1/2]")
    return grid


def sweep_row(eps):
    from .correlations import bell_value, chsh_functional

    box = pr_box(eps)
    chsh = bell_value(box, chsh_functional())
    r_l = local_robustness(box).value
    r_g = generalized_local_robustness(box).value
    q = best_local_approximation(box).q_nl_min
    floor = negativity_floor(box)
    actual = max(0.0, (trace_norm(pr_pseudostate(eps)) - 1.0) / 2.0)
    return [eps, chsh, r_l, r_g, q, floor, actual, abs(floor - actual)]


def sweep_csv(grid, jobs=1):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, grid))  # map keeps grid order
    else:
        rows = [sweep_row(e) for e in grid]
    buf = _io.StringIO()
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def cmd_pr_sweep(args, out):
    grid = parse_grid(args.eps_grid)
    text = sweep_csv(grid, args.jobs)
    if args.out in (None, "-"):
        out.stream.write(text)
    else:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ParseError(str(exc)) from exc
        out(f"wrote {len(grid)} rows to {args.out}")
    return EXIT_OK


def cmd_wire(args, out):
    box = _load(args.box, Box.from_dict)
    wiring = _load(args.wiring, Wiring.from_dict)
    wired = apply_wiring(box, wiring)
    before = local_robustness(box, args.tol).value
    after = local_robustness(wired, args.tol).value
    out(f"r_L before = {before!r}")
    out(f"r_L after  = {after!r}")
    monotone = after <= before + 1e-8
    out(f"non-increase (tol 1e-08): {out.flag(monotone)}")
    if args.out:
        _emit(wired.to_dict(), args.out, out)
    return EXIT_OK if monotone else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="boxrobust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"boxrobust {__version__}")
    parser.add_argument("--tol", type=float, default=1e-9, help="membership tolerance (default 1e-9)")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("check", help="validity, no-signalling and marginals of a box")
    p.add_argument("box")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("robustness", help="r_L and/or r^G_L with dual certificates")
    p.add_argument("box")
    p.add_argument("--kind", choices=["local", "generalized", "both"], default="local")
    p.add_argument("--out", help="certificate JSON path ('-' for stdout)")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("epr2", help="best local approximation (minimal non-local weight)")
    p.add_argument("box")
    p.add_argument("--out")
    p.set_defaults(func=cmd_epr2)

    p = sub.add_parser("negativity", help="trace norm, negativity, closest state and witness")
    p.add_argument("operator")
    p.add_argument("--closest-out", help="write the closest state here")
    p.set_defaults(func=cmd_negativity)

    p = sub.add_parser("realize", help="affine-of-separables realization of a box")
    p.add_argument("box")
    p.add_argument("--out")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("certify", help="device-independent floors")
    p.add_argument("box")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("pr-sweep", help="noisy PR family table (CSV)")
    p.add_argument("--eps-grid", default="0:0.5:21", help="'start:stop:count' or comma list")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_pr_sweep)

    p = sub.add_parser("wire", help="apply a classical wiring and compare r_L")
    p.add_argument("box")
    p.add_argument("wiring")
    p.add_argument("--out")
    p.set_defaults(func=cmd_wire)
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    out = _Out(stdout)
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_PARSE
    except (ConvergenceFailure, BoxRobustError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return getattr(exc, "exit_code", EXIT_NUMERIC)


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
