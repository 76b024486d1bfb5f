"""Command-line driver: ``siciak {rho,envelope,grid,verify,oracle-compare}``."""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from .domains import minkowski_gauge
from .envelope import KINDS
from .errors import GaugeError, NoFeasibleDiscError, NotInConeError, PreconditionError, SiciakError
from .grid import discs_sidecar, eval_scenario_grid, fmt, to_csv, write_results
from .oracles import CASES, fixture_provenance, reference_vh, reinhardt_hull_gauge
from .scenario import load_scenario, suite_scenario
from .verify import verify_suite


def parse_point(text: str) -> np.ndarray:
    """'0.3,0.4' or '0.5+0.1j, 1' -> complex coordinates."""
    try:
        return np.array([complex(part.strip().replace(" ", "")) for part in text.split(",")])
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"cannot parse point {text!r}") from err


def _scenario(args):
    if args.config:
        scn = load_scenario(args.config)
    elif getattr(args, "case", None):
        scn = suite_scenario(args.case)
    else:
        raise SystemExit("a --config file (or --case) is required")
    if args.seed is not None:
        scn.optimizer = dataclasses.replace(scn.optimizer, seed=args.seed)
        scn.seed = args.seed
    return scn


def _points(args, scn):
    if getattr(args, "point", None) is not None:
        P = np.atleast_2d(args.point)
        if P.shape[1] != scn.dimension:
            raise SystemExit(f"point has dimension {P.shape[1]}, scenario has {scn.dimension}")
        return P
    return scn.points


def cmd_rho(args) -> int:
    scn = _scenario(args)
    hw = scn.homogenized()
    print("point,rho,tilde_phi")
    for z in _points(args, scn):
        label = " ".join(fmt(c.real) + ("" if c.imag == 0 else f"{c.imag:+.12g}j") for c in z)
        try:
            t = hw.tilde_phi(z)
            print(f"{label},{fmt(math.exp(t) if t > hw.floor else 0.0)},{fmt(t)}")
        except NotInConeError:
            print(f"{label},,not-in-cone")
    return 0


def cmd_envelope(args) -> int:
    scn = _scenario(args)
    # one point: --point, else the first grid point
    scn.points = _points(args, scn)[:1]
    if args.kind:
        scn.kinds = (args.kind,)
    results = eval_scenario_grid(scn, budget_secs=args.budget_secs)
    if args.out:
        write_results(results, scn.dimension, args.out)
    else:
        sys.stdout.write(to_csv(results, scn.dimension))
        sys.stdout.write(discs_sidecar(results))
    return 0 if all(r.status == "ok" for r in results) else 1


def cmd_grid(args) -> int:
    scn = _scenario(args)
    results = eval_scenario_grid(scn, workers=args.workers, budget_secs=args.budget_secs)
    out = args.out or scn.output
    if out:
        write_results(results, scn.dimension, out)
        print(f"wrote {len(results)} rows to {out} (discs in {out}.discs)")
    else:
        sys.stdout.write(to_csv(results, scn.dimension))
    return 0


def cmd_verify(args) -> int:
    return verify_suite(args.selection, seed=args.seed or 0, budget_secs=args.budget_secs, out=args.out)


def cmd_oracle_compare(args) -> int:
    case = args.case
    scn = suite_scenario(case)
    hw = scn.homogenized()
    points = _points(args, scn)
    print(f"# {case}: reference is a {fixture_provenance(case)}")
    cols = ["point", "reference_vh", "log_rho", "log_gauge", "log_hull_gauge"]
    print(",".join(cols))
    for z in points:
        ref = reference_vh(case, z)
        try:
            lr = fmt(hw.tilde_phi(z))
        except NotInConeError:
            lr = "not-in-cone"
        try:
            lg = fmt(math.log(minkowski_gauge(scn.region, z)))
        except GaugeError:
            lg = ""
        lh = ""
        if case == "polydisc-union":
            lh = fmt(math.log(reinhardt_hull_gauge(scn.region.params["radii"], z)))
        label = " ".join(str(complex(c)) for c in z)
        print(f"{label},{fmt(ref)},{lr},{lg},{lh}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file")
    common.add_argument("--out", help="output path")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--workers", type=int, default=1, help="worker processes for grid evaluation")
    common.add_argument("--budget-secs", type=float, default=None, help="wall-clock budget per point")

    p = argparse.ArgumentParser(prog="siciak", description="Homogeneous extremal functions by disc envelopes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rho", parents=[common], help="homogenized weight at grid points or --point")
    s.add_argument("--point", type=parse_point)
    s.add_argument("--case", choices=CASES)
    s.set_defaults(func=cmd_rho)

    s = sub.add_parser("envelope", parents=[common], help="envelope upper bound at one point")
    s.add_argument("--point", type=parse_point)
    s.add_argument("--case", choices=CASES)
    s.add_argument("--kind", choices=KINDS)
    s.set_defaults(func=cmd_envelope)

    s = sub.add_parser("grid", parents=[common], help="evaluate the scenario grid to CSV")
    s.add_argument("--case", choices=CASES)
    s.set_defaults(func=cmd_grid)

    s = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    s.add_argument("selection", nargs="*", help="check names or numbers 1-10 (default: all)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("oracle-compare", parents=[common], help="compare references with rho and gauges")
    s.add_argument("case", choices=CASES)
    s.add_argument("--point", type=parse_point)
    s.set_defaults(func=cmd_oracle_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PreconditionError, NoFeasibleDiscError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SiciakError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
