"""Command-line front end.

Exit status: 0 for a decisive answer, 2 when the answer is undetermined at
the chosen precision, 1 for usage or validation errors.
"""

import argparse
import json
import re
import sys
from pathlib import Path

from .logic import TriBool
from .primes import isprime, nth_prime
from .profinite import PrecisionContext, quotient_from_profile
from .scenarios import BUILTIN_NAMES, NAMED, Scenario, builtin, replay
from .setalg import (
    Interval, density, find_3ap, format_set, is_divisibility_chain, parse_set, thickness_witness,
    verify_thick,
)
from .sketch import Engine, Principal, Principality, mk_sketch, selfdiv_classify
from .supernatural import OMEGA, SnClass, SupernaturalNumber, format_sn, parse_sn

EXIT_OK, EXIT_USAGE, EXIT_UNDETERMINED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# argument parsing helpers

def _context(args):
    text = args.primes.strip()
    if "," in text:
        primes = [int(p) for p in text.split(",") if p.strip()]
    else:
        primes = [nth_prime(k) for k in range(1, int(text) + 1)]
    if not primes or any(not isprime(p) for p in primes) or len(set(primes)) != len(primes):
        raise UsageError(f"--primes must be a count or a list of distinct primes, got {args.primes!r}")
    if args.cap < 1:
        raise UsageError("--cap must be positive")
    return PrecisionContext.of(sorted(primes), args.cap)


def _sn(text):
    try:
        return parse_sn(text)
    except ValueError as e:
        raise UsageError(f"bad supernatural literal: {e}") from None


_PROFILE = re.compile(r"^(np|sd)\[(.*)\]$")


def parse_sketch(text, ctx):
    """Integer, a named profile, np[<phi>] (nonprincipal) or sd[<phi>] (self-divisible)."""
    t = text.strip()
    if re.fullmatch(r"[+-]?\d+", t):
        return Principal(int(t))
    if t in NAMED:
        return NAMED[t](ctx)
    m = _PROFILE.match(t)
    if m:
        sd = TriBool.TRUE if m.group(1) == "sd" else TriBool.UNDETERMINED
        try:
            return mk_sketch(_sn(m.group(2)), ctx, selfdiv=sd, label=t,
                             principality=Principality.NONPRINCIPAL)
        except ValueError as e:
            raise UsageError(str(e)) from None
    raise UsageError(f"bad sketch literal {text!r}; use an integer, one of "
                     f"{', '.join(sorted(NAMED))}, np[<phi>] or sd[<phi>]")


def _alpha(text):
    if text.startswith("const:"):
        v = text[len("const:"):]
        return SupernaturalNumber((), OMEGA if v in ("omega", "w", "inf") else int(v))
    return _sn(text)


def _window(text):
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--window wants lo,hi, got {text!r}") from None
    if lo > hi:
        raise UsageError("empty window")
    return Interval(lo, hi)


def _minimal_context(phi, ctx):
    """Smallest (primes, cap) showing every finite exponent of phi exactly; None if ctx does."""
    primes = sorted(set(ctx.primes) | set(phi.exception_primes))
    finite = [phi(p) for p in primes if phi(p) is not OMEGA]
    if primes == list(ctx.primes) and all(e <= ctx.cap(p) for p, e in zip(primes, map(phi, primes))
                                          if e is not OMEGA):
        return None
    return primes, max([max(ctx.caps)] + finite)


# commands; each returns (exit code, human text, json payload)

_CLASS_TEXT = {
    SnClass.FINITE: "Finite; not self-divisible unless principal",
    SnClass.COFINITE: "Cofinite; always self-divisible",
    SnClass.INTERMEDIATE: "Intermediate; both self-divisible and non-self-divisible ultrafilters occur",
}


def cmd_classify(args, ctx):
    phi = _sn(args.phi)
    c = phi.classify()
    return EXIT_OK, _CLASS_TEXT[c], {"phi": format_sn(phi), "class": c.value,
                                     "selfdiv": selfdiv_classify(phi, 0).cls.value}


def cmd_quotient(args, ctx):
    phi = _sn(args.phi)
    need = _minimal_context(phi, ctx)
    if need is not None:
        primes, cap = need
        raise UsageError(f"context too small for {format_sn(phi)}; minimal context: "
                         f"--primes {','.join(map(str, primes))} --cap {cap}")
    Q = quotient_from_profile(phi, ctx)
    text = Q.describe() + f"\n({Q.outside_summary()})"
    return EXIT_OK, text, {"phi": format_sn(phi), "components": Q.to_json(), "context": ctx.to_json()}


def _verdict_exit(values):
    return EXIT_UNDETERMINED if any(v is TriBool.UNDETERMINED for v in values) else EXIT_OK


def cmd_congruence(args, ctx):
    u, v, w = (parse_sketch(x, ctx) for x in (args.u, args.v, args.w))
    if w == Principal(0):
        raise UsageError("the modulus w must be nonzero")
    engine = Engine(ctx)
    out, lines = {}, []
    for rel in ("weak", "strong") if args.relation == "both" else (args.relation,):
        verdict = getattr(engine, f"{rel}_congruent")(u, v, w)
        out[rel] = verdict.to_json()
        lines.append(f"{rel}: {verdict.value}  [{' > '.join(verdict.rules) or 'no rule applies'}]")
    values = [TriBool(o["value"]) for o in out.values()]
    return _verdict_exit(values), "\n".join(lines), {"u": args.u, "v": args.v, "w": args.w, **out}


def cmd_thickness(args, ctx):
    alpha = _alpha(args.alpha)
    if args.len < 1:
        raise UsageError("--len must be positive")
    try:
        n = thickness_witness(alpha, args.len)
    except ValueError as e:
        raise UsageError(str(e)) from None
    ok = verify_thick(alpha, n, args.len)
    lines = [str(n)]
    for k in range(1, args.len + 1):
        p = nth_prime(k)
        lines.append(f"  {n + k} = {p}^{alpha(p)} * {(n + k) // p ** alpha(p)}")
    lines.append("verified" if ok else "VERIFICATION FAILED")
    return (EXIT_OK if ok else EXIT_USAGE), "\n".join(lines), {
        "alpha": format_sn(alpha), "len": args.len, "witness": str(n), "verified": ok}


def cmd_density(args, ctx):
    try:
        S = parse_set(args.set)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        rep = density(S, _window(args.window) if args.window else None)
    except ValueError as e:
        raise UsageError(f"{e}") from None
    text = f"{rep.kind}: {rep.value} ~ {float(rep.value):.6f}"
    if rep.count is not None:
        text += f" ({rep.count} of {len(rep.window)})"
    return EXIT_OK, text, {"set": format_set(S), **rep.to_json()}


def cmd_chain(args, ctx):
    try:
        xs = [int(x) for x in args.values]
        chain = is_divisibility_chain(xs)
    except ValueError as e:
        raise UsageError(str(e)) from None
    ap = find_3ap(xs)
    text = f"divisibility chain: {'yes' if chain else 'no'}; 3-AP: {ap if ap else 'none'}"
    return EXIT_OK, text, {"values": [str(x) for x in xs], "chain": chain,
                           "ap3": None if ap is None else [str(a) for a in ap]}


def cmd_fip(args, ctx):
    phi = _sn(args.phi)
    report = selfdiv_classify(phi, args.n_primes)
    lines = [f"{report.cls.value}"]
    for c in report.certificates:
        mark = "ok" if c.verify() else "FAILED"
        lines.append(f"  {c.side:10s} [{', '.join(map(str, c.subfamily))}] -> {c.witness} ({mark})")
    ok = report.verified
    return (EXIT_OK if ok else EXIT_USAGE), "\n".join(lines), {
        "phi": format_sn(phi), "class": report.cls.value,
        "certificates": [c.to_json() for c in report.certificates]}


def cmd_scenario(args, ctx):
    if args.action == "list":
        return EXIT_OK, "\n".join(BUILTIN_NAMES), {"scenarios": list(BUILTIN_NAMES)}
    if not args.target:
        raise UsageError(f"scenario {args.action} needs a name or file")
    path = Path(args.target)
    try:
        if path.suffix == ".json" and path.exists():
            sc = Scenario.from_json(json.loads(path.read_text()))
        else:
            sc = builtin(args.target)
    except (KeyError, ValueError) as e:
        raise UsageError(str(e)) from None
    if args.action == "dump":
        return EXIT_OK, sc.dumps(), sc.to_json()
    rep = replay(sc)
    code = EXIT_OK if rep.passed else (EXIT_UNDETERMINED if rep.undetermined else EXIT_USAGE)
    return code, "\n".join(rep.lines()), rep.to_json()


def build_parser():
    def common_options(suppress):
        c = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        c.add_argument("--json", action="store_true", default=d(False), help="emit JSON")
        c.add_argument("--primes", default=d("10"), help="number of primes or a comma list (default 10)")
        c.add_argument("--cap", type=int, default=d(6), help="p-adic precision per prime (default 6)")
        return c

    # options may come before or after the subcommand
    top, common = common_options(False), common_options(True)
    p = _Parser(prog="ultracong", description=__doc__.splitlines()[0], parents=[top])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", parents=[common], help="shape of a supernatural number")
    c.add_argument("phi")
    c.set_defaults(fn=cmd_classify)

    c = sub.add_parser("quotient", parents=[common], help="the procyclic quotient for phi")
    c.add_argument("phi")
    c.set_defaults(fn=cmd_quotient)

    c = sub.add_parser("congruence", parents=[common], help="u = v modulo w")
    c.add_argument("u")
    c.add_argument("v")
    c.add_argument("w")
    c.add_argument("--relation", choices=("weak", "strong", "both"), default="both")
    c.set_defaults(fn=cmd_congruence)

    c = sub.add_parser("thickness", parents=[common], help="L consecutive non-alpha-free integers")
    c.add_argument("--alpha", default="const:2")
    c.add_argument("--len", type=int, required=True)
    c.set_defaults(fn=cmd_thickness)

    c = sub.add_parser("density", parents=[common], help="density of a set expression")
    c.add_argument("set")
    c.add_argument("--window", help="lo,hi")
    c.set_defaults(fn=cmd_density)

    c = sub.add_parser("chain", parents=[common], help="divisibility chain and 3-AP check")
    c.add_argument("values", nargs="+")
    c.set_defaults(fn=cmd_chain)

    c = sub.add_parser("fip", parents=[common], help="FIP witnesses for both extensions of phi")
    c.add_argument("phi")
    c.add_argument("--n-primes", type=int, default=6)
    c.set_defaults(fn=cmd_fip)

    c = sub.add_parser("scenario", parents=[common], help="list, run or dump a scenario")
    c.add_argument("action", choices=("list", "run", "dump"))
    c.add_argument("target", nargs="?")
    c.set_defaults(fn=cmd_scenario)
    return p


def run(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        ctx = _context(args)
        code, text, payload = args.fn(args, ctx)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        out.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(text + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
