"""Command-line entry point: ``unigen <subcommand> ...``.

Exit codes: 0 everything passed (or a value was computed), 1 a check failed
or the value is Invalid, 2 usage or parse error, 3 inconclusive or budget
exceeded.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from typing import Optional, Sequence

from . import __version__
from .axioms import (DEFAULT_N, boxplus_from_M, check_abelian_group, check_axioms,
                     check_roundtrip, iota_from_M, overall)
from .derive import (UnknownIdentity, build_chain, chain_z_independence,
                     identities_for, verify_identity, verify_transport)
from .expr import ParseError, UnboundVariable, evaluate, parse_polish, print_polish, to_infix
from .family import (DEFAULT_TOL, FamilyRegistry, UnknownFamily, builtin_families, load_config,
                     with_domain)
from .report import Report, render_structured, render_text
from .search import BudgetExceeded, UnknownTarget, find_target, search_minimal

EXIT = {"pass": 0, "fail": 1, "usage": 2, "inconclusive": 3}


class UsageError(Exception):
    pass


# -- argument parsing ---------------------------------------------------------------

_PI = re.compile(r"^([+-]?)(\d*\.?\d*)\*?pi(?:/(\d+(?:\.\d*)?))?$")


def parse_value(text: str) -> float:
    """Decimal, ``inf``, or a fraction of pi such as ``pi/2``, ``-3pi/4``, ``2*pi``."""
    t = text.strip().lower().replace(" ", "")
    m = _PI.match(t)
    if m:
        sign, mult, div = m.groups()
        v = (float(mult) if mult else 1.0) * math.pi / (float(div) if div else 1.0)
        return -v if sign == "-" else v
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"bad number {text!r}") from None


def parse_point(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise UsageError(f"bad point component {part!r}; expected NAME=VALUE")
        name, val = part.split("=", 1)
        out[name.strip()] = parse_value(val)
    return out


def parse_domain(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"bad domain {text!r}; expected lo,hi")
    lo, hi = (parse_value(p) for p in parts)
    if not lo < hi:
        raise UsageError("domain needs lo < hi")
    return lo, hi


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _odd_size(text: str) -> int:
    v = int(text)
    if v < 1 or v % 2 == 0:
        raise argparse.ArgumentTypeError("must be odd and >= 1")
    return v


def _default_seed() -> int:
    env = os.environ.get("UNIGEN_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"UNIGEN_SEED must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed (default: $UNIGEN_SEED or 42)")
    common.add_argument("--samples", type=int, default=DEFAULT_N, help="samples per check")
    common.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    common.add_argument("--output", choices=("text", "structured"), default="text")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--config", metavar="PATH", help="JSON file with extra families")
    common.add_argument("--domain", metavar="LO,HI", help="override the sample domain")

    p = argparse.ArgumentParser(prog="unigen", description="Single-operator generators of "
                                "elementary functions: checks, derivations, search.")
    p.add_argument("--version", action="version", version=f"unigen {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("families", parents=[common], help="list registered families")
    for name, hlp in (("axioms", "check the axioms of M and its group"),
                      ("derive", "build and verify the six-step chain")):
        sp = sub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("family")
    sp = sub.add_parser("identities", parents=[common], help="check registered identities")
    sp.add_argument("family")
    sp.add_argument("--id", dest="identity", help="check just this identity")
    sp = sub.add_parser("search", parents=[common], help="minimal tree search")
    sp.add_argument("family")
    sp.add_argument("--target", required=True)
    sp.add_argument("--max-size", type=_odd_size, default=9)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--k", type=int, default=16, help="fingerprint points")
    sp.add_argument("--max-trees", type=int, default=None)
    sp.add_argument("--time-limit", type=float, default=None, help="seconds")
    sp.add_argument("--allow-large", action="store_true", help="permit max size above 13")
    sp = sub.add_parser("eval", parents=[common], help="evaluate a Polish expression")
    sp.add_argument("family")
    sp.add_argument("expression")
    sp.add_argument("--point", default="", help='e.g. "x=0.5,y=pi/2"')
    return p


# -- subcommands -------------------------------------------------------------------

def _family(registry: FamilyRegistry, args):
    fam = registry[args.family]
    if args.domain:
        fam = with_domain(fam, *parse_domain(args.domain))
    return fam


def _domain_list(fam):
    d = fam.sample_domain
    return [float(d.lo), float(d.hi)]


def cmd_families(registry, args, seed):
    payload = {"families": [registry[n].summary() for n in registry]}
    return Report("families", "*", payload, seed, args.tol)


def cmd_axioms(registry, args, seed):
    fam = _family(registry, args)
    ext = fam.extended

    def M(a, b):
        return fam.M(a, b, ext)

    ax = check_axioms(M, fam.e, fam.sample_domain, args.samples, seed, args.tol)
    grp = check_abelian_group(boxplus_from_M(M, fam.e), iota_from_M(M, fam.e), fam.e,
                              fam.sample_domain, args.samples, seed, args.tol)
    rt = check_roundtrip(M, fam.e, fam.sample_domain, 32, seed, args.tol)
    payload = {
        "M": fam.M.name,
        "e": fam.e,
        "domain": _domain_list(fam),
        "axioms": [r.to_dict() for r in ax],
        "group": [r.to_dict() for r in grp],
        "roundtrip": rt.to_dict(),
        "verdict": overall([*ax, *grp, rt]),
    }
    return Report("axioms", fam.name, payload, seed, args.tol)


def _combine(verdicts) -> str:
    vs = set(verdicts)
    return "fail" if "fail" in vs else "inconclusive" if "inconclusive" in vs else "pass"


def cmd_derive(registry, args, seed):
    fam = _family(registry, args)
    chain = build_chain(fam, n=args.samples, seed=seed, tol=args.tol)
    payload = chain.to_dict()
    payload["domain"] = _domain_list(fam)
    zi = chain_z_independence(fam, chain, seed=seed, tol=args.tol)
    payload["z_independence"] = {**zi.to_dict(), "z_values": list(fam.z_values)}
    verdicts = [chain.verdict, zi.verdict]
    if fam.transport is not None:
        tr = verify_transport(fam, chain, n=args.samples, seed=seed, tol=args.tol)
        payload["transport"] = {**tr.to_dict(), "kind": fam.transport.kind,
                                "law": fam.transport.law}
        verdicts.append(tr.verdict)
    else:
        payload["transport"] = None
    payload["verdict"] = _combine(verdicts)
    return Report("chain", fam.name, payload, seed, args.tol)


def cmd_identities(registry, args, seed):
    fam = _family(registry, args)
    ids = [args.identity] if args.identity else identities_for(fam)
    checks = []
    for i in ids:
        try:
            checks.append(verify_identity(fam, i, n=args.samples, seed=seed, tol=args.tol))
        except UnknownIdentity as exc:
            raise UsageError(f"unknown identity {exc.args[0]!r}; known for {fam.name}: "
                             f"{identities_for(fam)}") from None
    payload = {"identities": [c.to_dict() for c in checks],
               "verdict": _combine(c.verdict for c in checks)}
    return Report("identity", fam.name, payload, seed, args.tol)


def cmd_search(registry, args, seed):
    fam = _family(registry, args)
    try:
        target = find_target(fam, args.target)
    except UnknownTarget as exc:
        raise UsageError(exc.args[0]) from None
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        res = search_minimal(fam, target, max_size=args.max_size, k=args.k, seed=seed,
                             workers=args.workers, tol=args.tol, max_trees=args.max_trees,
                             time_limit=args.time_limit, allow_large=args.allow_large)
        verdict = "pass" if res.found else "fail"
    except BudgetExceeded as exc:
        res = exc.partial
        verdict = "inconclusive"
        print(f"unigen: {exc}", file=sys.stderr)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload = {**res.to_dict(), "domain": _domain_list(fam), "verdict": verdict}
    return Report("search", fam.name, payload, seed, args.tol, elapsed=res.elapsed)


def cmd_eval(registry, args, seed):
    fam = _family(registry, args)
    try:
        tree = parse_polish(args.expression)
    except ParseError as exc:
        raise UsageError(f"parse error: {exc}") from None
    point = parse_point(args.point)
    try:
        value = evaluate(tree, fam, point)
    except UnboundVariable as exc:
        raise UsageError(f"unbound variable {exc.args[0]!r}; pass it with --point") from None
    value = float(value)
    payload = {
        "polish": print_polish(tree),
        "infix": to_infix(tree),
        "point": point,
        "value": value,
        "valid": not math.isnan(value),
        "verdict": "fail" if math.isnan(value) else "pass",
    }
    return Report("eval", fam.name, payload, seed, args.tol)


COMMANDS = {"families": cmd_families, "axioms": cmd_axioms, "derive": cmd_derive,
            "identities": cmd_identities, "search": cmd_search, "eval": cmd_eval}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        registry = builtin_families()
        if args.config:
            registry = load_config(args.config, registry)
        report = COMMANDS[args.command](registry, args, seed)
    except UsageError as exc:
        print(f"unigen: {exc}", file=sys.stderr)
        return EXIT["usage"]
    except UnknownFamily as exc:
        print(f"unigen: unknown family {exc.args[0]!r}", file=sys.stderr)
        return EXIT["usage"]
    except (OSError, ValueError) as exc:
        print(f"unigen: {exc}", file=sys.stderr)
        return EXIT["usage"]
    text = render_structured(report) if args.output == "structured" else render_text(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT[report.verdict]


if __name__ == "__main__":
    sys.exit(main())
