"""Command-line entry point: ``kpdg <subcommand> ...``.

Payloads go to stdout (JSON unless noted) and are deterministic; timing and
progress go to stderr. Exit codes: 0 success, 2 bad input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import density, sat
from .forbidden import generate_Fk, make_Tk
from .pdg import PdgError, bits, find_embedding, from_text as pdg_from_text, to_text as pdg_to_text
from .search import SCHEMA, BudgetExceeded, lift_theta, merge_partials, theta_max

CHECKPOINT_ENV = "KPDG_CHECKPOINT_DIR"

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3


class InputError(Exception):
    pass


def _frac(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _parse_frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from None


def _parse_range(s: str) -> tuple[int, int]:
    try:
        a, b = s.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {s!r}") from None


def _family(name: str, k: int):
    if name == "tk":
        return [make_Tk(k)]
    return generate_Fk(k)


def _payload(d: dict) -> dict:
    return {"schema": SCHEMA, **d}


# --- subcommands --------------------------------------------------------------------

def cmd_gen_forbidden(args):
    fam = generate_Fk(args.k)
    lines = []
    for g, tr in zip(fam.members, fam.traces):
        line = pdg_to_text(g)
        if args.trace:
            line += "  # " + tr.describe()
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


def cmd_check_free(args):
    g = pdg_from_text(args.graph)
    fam = _family(args.family, g.k)
    hit = next((m for m in fam if find_embedding(g, m) is not None), None)
    return _payload({"free": hit is None, "contains": None if hit is None else pdg_to_text(hit)})


def _theta_json(res) -> dict:
    d = res.to_json()
    partial = getattr(res, "partial", None)
    if partial is not None:
        d["partial"] = partial
    return d


def cmd_enumerate(args):
    if args.merge:
        records = [json.loads(Path(p).read_text()) for p in args.merge]
        heads = {(r["n"], r["k"], tuple(r["level_counts"])) for r in records}
        if len(heads) != 1:
            raise InputError("partial records disagree on n, k or level counts")
        n, k, counts = heads.pop()
        parts = sorted(records, key=lambda r: r["partial"]["batch_index"])
        res = merge_partials(n, k, list(counts), [r["partial"]["part"] for r in parts],
                             exhaustive=parts[0].get("final_count") is not None)
        return _payload(_theta_json(res))
    if args.n is None or args.k is None:
        raise InputError("--n and --k are required unless --merge is given")
    final = args.final
    if args.final_no_dedup:
        final = "exhaustive"
    checkpoint = args.checkpoint or os.environ.get(CHECKPOINT_ENV)
    family = None if args.family == "tk" else generate_Fk(args.k)
    res = theta_max(
        args.n, args.k, family,
        workers=args.threads, batches=args.batches, batch_index=args.batch_index,
        checkpoint=checkpoint, final=final, max_seconds=args.max_seconds,
    )
    return _payload(_theta_json(res))


def cmd_theta_table(args):
    lo, hi = args.k_range
    rows = []
    for n in range(max(lo, 2), args.max_n + 1):
        for k in range(lo, min(hi, n) + 1):
            res = theta_max(n, k, workers=args.threads)
            rows.append((n, k, res.theta))
    for cell in args.extra or []:
        n, k = (int(t) for t in cell.split(","))
        rows.append((n, k, theta_max(n, k, workers=args.threads).theta))
    if args.format == "csv":
        return "n,k,theta\n" + "".join(f"{n},{k},{_frac(t)}\n" for n, k, t in rows)
    return _payload({"rows": [{"n": n, "k": k, "theta": _frac(t)} for n, k, t in rows]})


def cmd_lift(args):
    return _payload({"theta": _frac(args.theta), "k": args.k, "lifted": _frac(lift_theta(args.theta, args.k))})


def _formula(args) -> sat.Formula:
    return sat.from_text(args.formula, n=args.n)


def cmd_sat_minimal(args):
    f = _formula(args)
    wit = sat.minimality_witnesses(f)
    return _payload({
        "minimal": all(w is not None for w in wit.values()),
        "witnesses": [{"clause": str(c), "witness": None if w is None else "".join(map(str, w))}
                      for c, w in wit.items()],
    })


def cmd_sat_type(args):
    f = _formula(args)
    return _payload({"semisimple": True, "type": pdg_to_text(sat.type_of(f))})


def cmd_sat_count(args):
    fn = sat.count_unate_functions if args.unate else sat.count_functions
    return _payload({"n": args.n, "k": args.k, "unate": args.unate, "count": fn(args.n, args.k)})


def cmd_sat_unate(args):
    f = _formula(args)
    return _payload({
        "unate": sat.is_unate(f),
        "distance": sat.distance_to_unate(f),
        "literal_counts": [list(p) for p in sat.literal_counts(f)],
    })


def cmd_fm_density(args):
    return _payload({"rho": args.rho, "f": density.fm_density(args.rho)})


def cmd_check_system(args):
    return _payload(density.check_system(args.phi, args.res).to_json())


def _read_hyper(path):
    return density.read_hypergraph(Path(path).read_text())


def cmd_kk_check(args):
    h = _read_hyper(args.file)
    return _payload({"edges": len(h.edges), "simplices": density.count_simplices(h),
                     "holds": density.kruskal_katona_check(h)})


def cmd_orient(args):
    h = _read_hyper(args.file)
    heads = density.orient_hypergraph(h)
    ok, worst, bound = density.codegree_audit(h, heads)
    edges = [" ".join(map(str, bits(m))) + f">{heads[m]}" for m in sorted(heads)]
    return _payload({"bound": bound, "max_codegree": worst, "audit": ok, "edges": edges})


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kpdg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"kpdg {__version__}")
    p.add_argument("--record", help="also write a run record (argv, timing, payload) to this JSON file")
    p.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-forbidden", help="list F_k, one canonical graph per line")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--trace", action="store_true", help="append one construction trace per member")
    s.set_defaults(func=cmd_gen_forbidden)

    s = sub.add_parser("check-free", help="test a graph for containing T_k or an F_k member")
    s.add_argument("--graph", required=True, help='text encoding, e.g. "4 3 ; 0 1 2 , 0 1 3>3"')
    s.add_argument("--family", choices=["tk", "fk"], default="fk")
    s.set_defaults(func=cmd_check_free)

    s = sub.add_parser("enumerate", help="exact theta_max(n, k) with an extremal witness")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--family", choices=["tk", "fk"], default="tk")
    s.add_argument("--batches", type=int, default=1)
    s.add_argument("--batch-index", type=int)
    s.add_argument("--checkpoint", help=f"directory for level sets and batch results (default ${CHECKPOINT_ENV})")
    s.add_argument("--final", choices=["bound", "exhaustive", "dedup"], default="bound",
                   help="last level: branch and bound, every labeled graph, or iso classes")
    s.add_argument("--final-no-dedup", action="store_true", help="same as --final exhaustive")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--max-seconds", type=float)
    s.add_argument("--merge", nargs="+", metavar="FILE", help="combine per-batch JSON records")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("theta-table", help="theta_max for a range of (n, k)")
    s.add_argument("--max-n", type=int, required=True)
    s.add_argument("--k-range", type=_parse_range, default=(2, 99), help="A:B inclusive")
    s.add_argument("--extra", action="append", help="additional cell N,K (repeatable)")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_theta_table)

    s = sub.add_parser("lift", help="((k-1) theta + 1) / k")
    s.add_argument("--theta", type=_parse_frac, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_lift)

    for name, func, help_ in [
        ("sat-minimal", cmd_sat_minimal, "minimality with per-clause witnesses"),
        ("sat-type", cmd_sat_type, "type of a semisimple formula"),
        ("sat-unate", cmd_sat_unate, "unateness, distance to unate, literal counts"),
    ]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--formula", required=True, help='e.g. "0 1, ~0 2"')
        s.add_argument("--n", type=int, help="variable count (default: largest index + 1)")
        s.set_defaults(func=func)

    s = sub.add_parser("sat-count", help="number of distinct k-SAT functions on n variables")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--unate", action="store_true")
    s.set_defaults(func=cmd_sat_count)

    s = sub.add_parser("fm-density", help="the Furedi-Maleki function f(rho)")
    s.add_argument("--rho", type=float, required=True)
    s.set_defaults(func=cmd_fm_density)

    s = sub.add_parser("check-system", help="grid search for a solution of the link-density system")
    s.add_argument("--phi", type=_parse_frac, required=True)
    s.add_argument("--res", type=float, default=1e-3)
    s.set_defaults(func=cmd_check_system)

    s = sub.add_parser("kk-check", help="simplex count against the Kruskal-Katona bound")
    s.add_argument("--file", required=True)
    s.set_defaults(func=cmd_kk_check)

    s = sub.add_parser("orient", help="direct a uniform hypergraph with bounded outward codegree")
    s.add_argument("--file", required=True)
    s.set_defaults(func=cmd_orient)
    return p


def _render(payload) -> str:
    if isinstance(payload, str):
        return payload
    return json.dumps(payload, sort_keys=True) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    t0 = time.monotonic()
    try:
        payload = args.func(args)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}; checkpoint: {e.checkpoint}", file=sys.stderr)
        sys.stdout.write(_render(_payload({"error": "budget", "checkpoint": e.checkpoint})))
        return EXIT_BUDGET
    except sat.SatBudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, PdgError, sat.SatError, ValueError, OSError) as e:
        print(f"kpdg {args.command}: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    elapsed = time.monotonic() - t0
    out = _render(payload)
    sys.stdout.write(out)
    print(f"{args.command}: {elapsed:.3f}s", file=sys.stderr)
    if args.record:
        rec = {
            "schema": SCHEMA,
            "argv": argv,
            "params": {k: v for k, v in vars(args).items() if k != "func" and _jsonable(v)},
            "seconds": round(elapsed, 3),
            "payload": out,
            "version": __version__,
        }
        Path(args.record).write_text(json.dumps(rec, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def _jsonable(v) -> bool:
    return isinstance(v, (str, int, float, bool, type(None), list, tuple))


if __name__ == "__main__":
    sys.exit(main())
