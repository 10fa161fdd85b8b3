"""Command-line front end (``momcert``).

Exit status: 0 when everything requested passed, 1 when a certification or
check failed, 2 on usage errors.  Progress goes to standard error; reports are
only written to the path given with ``--report`` (atomically).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bounds import E_CAP, THRESHOLD, SpectrumPoint, f1, f2_bonus, gate_holds
from .cases import exhaustiveness_scan, get_case, the_18_cases, verify_maximality
from .certify import (
    DEFAULT_DOMAIN,
    EMPTY_CASE,
    MAX_DEPTH,
    SLICE_DOMAIN,
    CertificateBundle,
    Strategy,
    certify_cases,
    certify_slice,
    default_workers,
)
from .fillings import AllSlopesAdmissible, CuspLattice, FillingDomainError, enumerate_slopes, slope_cutoff, slopes_to_csv
from .jets import MACHINE, Jet
from .scalars import ScalarKind, evaluate

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".momcert-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _progress(quiet: bool):
    if quiet:
        return None
    return lambda msg: print(msg, file=sys.stderr, flush=True)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {value}")
    return value


def _depth(text: str) -> int:
    value = _positive_int(text)
    if value > MAX_DEPTH:
        raise argparse.ArgumentTypeError(f"depth must lie in [1, {MAX_DEPTH}]")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0 or not np.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text}")
    return value


def _add_common(p: argparse.ArgumentParser, depth_default: int):
    p.add_argument("--mode", choices=("adaptive", "grid"), default="adaptive")
    p.add_argument("--depth", type=_depth, default=depth_default,
                   help="adaptive: bisection cap per axis; grid: 2**depth cells per axis")
    p.add_argument("--threshold", type=_positive_float, default=THRESHOLD)
    p.add_argument("--workers", type=_positive_int, default=None,
                   help="worker processes (default: $MOMCERT_WORKERS or 1)")
    p.add_argument("--budget", type=_positive_int, default=None, help="maximum boxes per case")
    p.add_argument("--report", metavar="PATH", help="write the JSON certificate here")
    p.add_argument("--reproducible", action="store_true",
                   help="omit wall times and worker count so reports are byte-identical across runs")
    p.add_argument("--quiet", action="store_true", help="no progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momcert", description="Rigorous cusp volume bound certification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="certify max(f1, f2) > threshold for the maximal cases")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--all", action="store_true", help="all 18 cases")
    which.add_argument("--case", type=int, metavar="N", help="a single case id (1..18)")
    _add_common(p, 9)

    p = sub.add_parser("verify-slice", help="certify f1 > threshold on the face e4 = 1.5152")
    _add_common(p, 9)

    p = sub.add_parser("verify-section4", help="validate the single-configuration bounds on dense grids")
    p.add_argument("--threshold", type=_positive_float, default=THRESHOLD)
    p.add_argument("--grid", type=_positive_int, default=101, help="points per axis for 2-D regions")
    p.add_argument("--curve", type=_positive_int, default=1001, help="points along 1-D curves")
    p.add_argument("--report", metavar="PATH")
    p.add_argument("--reproducible", action="store_true")

    p = sub.add_parser("eval", help="evaluate the bounds at one spectrum point")
    p.add_argument("--e2", type=float, required=True)
    p.add_argument("--e3", type=float, required=True)
    p.add_argument("--e4", type=float, required=True)
    p.add_argument("--case", type=int, default=0, help="case id; 0 (default) means no triples")
    p.add_argument("--kind", choices=[k.value for k in ScalarKind], default="plain")

    p = sub.add_parser("cases", help="list or check the maximal triple collections")
    p.add_argument("action", choices=("list", "check"))

    p = sub.add_parser("slopes", help="enumerate filling slopes shorter than the volume cutoff")
    p.add_argument("--volume", type=_positive_float, required=True)
    p.add_argument("--threshold", type=_positive_float, default=THRESHOLD)
    p.add_argument("--lattice", required=True, metavar="MX,MY,LX,LY",
                   help="meridian and longitude vectors of the cusp lattice")
    p.add_argument("--output", metavar="PATH", help="write CSV here instead of standard output")
    return parser


def _strategy(args) -> Strategy:
    workers = args.workers if args.workers is not None else default_workers()
    return Strategy(mode=args.mode, depth=args.depth, threshold=args.threshold, workers=workers,
                    budget=args.budget)


def _summary(reports) -> None:
    for r in reports:
        lb = r.min_certified_lower_bound
        print(f"{str(r.case_id):>18}  {r.status:<16} boxes={r.boxes_processed:<8} min_lb={lb:.6f}")


def cmd_verify(args) -> int:
    if args.case is not None:
        try:
            cases = [get_case(args.case)]
        except KeyError as exc:
            raise UsageError(str(exc.args[0]))
    else:
        cases = the_18_cases()
    strategy = _strategy(args)
    bundle = certify_cases(cases, DEFAULT_DOMAIN, strategy, progress=_progress(args.quiet))
    _summary(bundle.reports)
    if args.report:
        write_atomic(args.report, _dump(bundle.to_json(args.reproducible)))
    return EXIT_OK if bundle.passed else EXIT_FAILED


def cmd_verify_slice(args) -> int:
    strategy = _strategy(args)
    report = certify_slice(SLICE_DOMAIN, strategy, progress=_progress(args.quiet))
    _summary([report])
    if args.report:
        domain = SLICE_DOMAIN.describe()
        domain["e4"] = [E_CAP, E_CAP]
        bundle = CertificateBundle(strategy.threshold, strategy, domain, [report])
        write_atomic(args.report, _dump(bundle.to_json(args.reproducible)))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_verify_section4(args) -> int:
    from .regional import certify_section4

    reports = certify_section4(args.threshold, args.grid, args.curve)
    _summary(reports)
    for r in reports:
        for note in r.notes:
            print(f"  note ({r.case_id}): {note}", file=sys.stderr)
    if args.report:
        doc = {
            "threshold": args.threshold,
            "eps_model": MACHINE.describe(),
            "kind": "precise",
            "grid": {"region_points_per_axis": args.grid, "curve_points": args.curve},
            "all_passed": all(r.passed for r in reports),
            "cases": [r.to_json(args.reproducible) for r in reports],
        }
        write_atomic(args.report, _dump(doc))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def _fmt(value) -> str:
    if isinstance(value, Jet):
        lo, hi = value.range()
        return f"[{lo!r}, {hi!r}]"
    return str(value)


def cmd_eval(args) -> int:
    if args.case == 0:
        case = EMPTY_CASE
    else:
        try:
            case = get_case(args.case)
        except KeyError as exc:
            raise UsageError(str(exc.args[0]))
    kind = ScalarKind(args.kind)
    try:
        SpectrumPoint(args.e2, args.e3, args.e4)
    except ValueError as exc:
        raise UsageError(str(exc))

    def both(e2, e3, e4):
        pt = SpectrumPoint(e2, e3, e4)
        gate = gate_holds(pt)
        return f1(case, pt), (f2_bonus(pt) if bool(np.all(gate)) else None), bool(np.all(gate))

    v1, bonus, gate = evaluate(both, args.e2, args.e3, args.e4, kind=kind)
    print(f"case {case.id} ({case.label() or 'no triples'}), kind {kind.value}")
    print(f"f1 = {_fmt(v1)}")
    if bonus is None:
        print("f2 = n/a (gate e4 <= 1.5152 and e2 + 1 >= e4^2 does not hold)")
    else:
        print(f"f2 = {_fmt(v1 + bonus)}")
    return EXIT_OK


def cmd_cases(args) -> int:
    cases = the_18_cases()
    if args.action == "list":
        for c in cases:
            print(f"{c.id:>2}  {c.label()}")
        return EXIT_OK
    ok = True
    for c in cases:
        maximal = verify_maximality(c)
        ok &= maximal
        print(f"{c.id:>2}  {'maximal' if maximal else 'NOT maximal':<12} {c.label()}")
    scan = exhaustiveness_scan()
    clean = not scan["uncovered"] and not scan["unlisted_maximal"]
    ok &= clean
    print(f"exhaustiveness: {scan['scanned']} collections of up to {scan['max_size']} triples, "
          f"{scan['free']} free of certifiable structures, "
          f"{len(scan['uncovered'])} uncovered, {len(scan['unlisted_maximal'])} unlisted maximal")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_slopes(args) -> int:
    try:
        lattice = CuspLattice.parse(args.lattice)
    except (FillingDomainError, ValueError) as exc:
        raise UsageError(f"--lattice: {exc}")
    try:
        cutoff = slope_cutoff(args.volume, args.threshold)
    except AllSlopesAdmissible as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILED
    slopes = enumerate_slopes(lattice, cutoff)
    print(f"cutoff length {cutoff:.6f} (squared {cutoff * cutoff:.6f}); {len(slopes)} slopes", file=sys.stderr)
    text = slopes_to_csv(slopes)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "verify-slice": cmd_verify_slice,
    "verify-section4": cmd_verify_section4,
    "eval": cmd_eval,
    "cases": cmd_cases,
    "slopes": cmd_slopes,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"momcert {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))
