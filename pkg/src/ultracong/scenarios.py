"""Named, replayable bundles of sketches, engine claims and checkable certificates.

A scenario is plain data (see ``to_json``/``from_json``).  Replaying one
rebuilds every sketch, re-asks the engine every claim and re-verifies every
certificate from scratch; nothing stored is trusted.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .logic import TriBool
from .profinite import PrecisionContext
from .setalg import (
    Complement, FamilyMember, FipCertificate, Interval, PrimePowerUnion, count_in, find_3ap, format_set,
    is_divisibility_chain, parse_set, squarefree, thickness_witness, verify_thick,
)
from .sketch import (
    Engine, Principal, Principality, factorial_sketch, max_plus_one, max_profile, mk_sketch, neg,
    power_of_two, prime_parity_product, selfdiv_classify, sk_sum,
)
from .supernatural import SupernaturalNumber, d_enumerate, format_sn, parse_sn

SCHEMA_VERSION = 1

NAMED = {
    "max": max_profile,
    "max+1": max_plus_one,
    "2^a": power_of_two,
    "factorial": factorial_sketch,
    "even-primes": lambda ctx: prime_parity_product(ctx, True),
    "odd-primes": lambda ctx: prime_parity_product(ctx, False),
}


@dataclass
class Scenario:
    name: str
    sketches: list          # [{"name", "kind", ...}] in dependency order
    claims: list            # [{"query", "args", "expected", "anchor"}]
    certificates: list      # [{"kind", ...}]
    ctx: PrecisionContext = field(default_factory=PrecisionContext.default)
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"schema": SCHEMA_VERSION, "name": self.name, "context": self.ctx.to_json(),
                "sketches": self.sketches, "claims": self.claims,
                "certificates": self.certificates, "notes": self.notes}

    @classmethod
    def from_json(cls, data):
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported scenario schema {data.get('schema')!r}")
        return cls(data["name"], data["sketches"], data["claims"], data["certificates"],
                   PrecisionContext.from_json(data["context"]), data.get("notes", []))

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class CheckResult:
    label: str
    ok: bool
    detail: str
    undetermined: bool = False


@dataclass
class ScenarioReport:
    name: str
    results: list

    @property
    def passed(self):
        return all(r.ok for r in self.results)

    @property
    def undetermined(self):
        return sum(r.undetermined for r in self.results)

    def lines(self):
        out = [f"{'PASS' if r.ok else 'FAIL'}  {r.label}: {r.detail}" for r in self.results]
        out.append(f"{self.name}: {'PASS' if self.passed else 'FAIL'} "
                   f"({sum(r.ok for r in self.results)}/{len(self.results)})")
        return out

    def to_json(self):
        return {"name": self.name, "passed": self.passed,
                "results": [{"label": r.label, "ok": r.ok, "detail": r.detail} for r in self.results]}


# building sketches from data

def build_sketches(defs, ctx):
    env = {}

    def ref(token):
        token = str(token)
        if token in env:
            return env[token]
        try:
            return Principal(int(token))
        except ValueError:
            raise KeyError(f"unknown sketch {token!r}") from None

    for s in defs:
        kind = s["kind"]
        if kind == "principal":
            val = Principal(int(s["n"]))
        elif kind == "named":
            val = NAMED[s["value"]](ctx)
        elif kind == "profile":
            val = mk_sketch(parse_sn(s["phi"]), ctx,
                            principality=Principality(s.get("principality", "nonprincipal")),
                            selfdiv=TriBool(s.get("selfdiv", "undetermined")),
                            label=s["name"])
        elif kind == "sum":
            a, b = s["of"]
            val = sk_sum(ref(a), ref(b))
        elif kind == "neg":
            val = neg(ref(s["of"]))
        else:
            raise ValueError(f"unknown sketch kind {kind!r}")
        env[s["name"]] = val
    return env, ref


def _ask(engine, ref, query, args):
    """Evaluate one claim; returns (rendered result, verdict or None)."""
    if query in ("weak_congruent", "strong_congruent"):
        v = getattr(engine, query)(*(ref(a) for a in args))
        return v.value.value, v
    if query in ("divides_tilde", "divides_strong"):
        v = getattr(engine, query)(ref(args[0]), ref(args[1]))
        return v.value.value, v
    if query == "powers_congruent":
        v = engine.powers_congruent(ref(args[0]), int(args[1]), int(args[2]))
        return v.value.value, v
    if query == "selfdiv":
        return ref(args[0]).selfdiv.value, None
    if query == "phi":
        return format_sn(ref(args[0]).phi_upper), None
    if query == "d_enumerate":
        s = ref(args[0])
        if s.phi != s.phi_upper:
            return "undetermined", None
        return json.dumps(d_enumerate(s.phi, int(args[1]))), None
    if query == "selfdiv_class":
        return selfdiv_classify(parse_sn(args[0])).cls.value, None
    raise ValueError(f"unknown query {query!r}")


def _check_certificate(c, verdicts):
    kind = c["kind"]
    if kind == "density":
        S, w = parse_set(c["set"]), Interval(int(c["window"][0]), int(c["window"][1]))
        count = count_in(S, w)
        value = Fraction(count, len(w))
        ok = count == int(c["count"])
        if "anchor" in c:
            ok = ok and abs(float(value) - float(c["anchor"])) <= float(c["tolerance"])
        return ok, f"count {count} in [{w.lo}, {w.hi}], density {float(value):.6f}"
    if kind == "thickness":
        alpha, n, L = parse_sn(c["alpha"]), int(c["witness"]), int(c["L"])
        ok = verify_thick(alpha, n, L) and thickness_witness(alpha, L) == n
        return ok, f"n = {n}: n+1..n+{L} all in ppu({c['alpha']})"
    if kind == "fip":
        phi = parse_sn(c["phi"])
        sub = tuple(FamilyMember(*_member_args(m)) for m in c["subfamily"])
        ok = FipCertificate(phi, sub, c["side"], int(c["witness"])).verify()
        return ok, f"{c['side']} witness {c['witness']} for [{', '.join(c['subfamily'])}]"
    if kind == "chain":
        xs = [int(x) for x in c["values"]]
        ok = is_divisibility_chain(xs) and find_3ap(xs) is None
        return ok, f"divisibility chain without 3-AP: {xs[:6]}{'...' if len(xs) > 6 else ''}"
    if kind == "transitivity_audit":
        # a |- b, b |- c, not a |- c  on three decisive claims
        a, b, cc = (verdicts[i] for i in c["claims"])
        ok = (a, b, cc) == ("true", "true", "false")
        return ok, "True/True/False pattern: the relation is not transitive" if ok else "pattern absent"
    if kind == "note":
        return True, c["text"]
    raise ValueError(f"unknown certificate kind {kind!r}")


def _member_args(text):
    kind, _, rest = text.partition(":")
    p, _, n = rest.partition("^")
    return kind, int(p), int(n) if n else 0


def replay(scenario, engine=None):
    ctx = scenario.ctx
    engine = engine or Engine(ctx)
    _, ref = build_sketches(scenario.sketches, ctx)
    results, verdicts = [], []
    for c in scenario.claims:
        label = f"{c['query']}({', '.join(str(a) for a in c['args'])})"
        got, v = _ask(engine, ref, c["query"], c["args"])
        verdicts.append(got)
        detail = f"expected {c['expected']}, got {got}"
        if v is not None and v.trace:
            detail += f" via {' > '.join(v.rules)}"
        results.append(CheckResult(label, got == c["expected"], detail, got == "undetermined"))
    for c in scenario.certificates:
        ok, detail = _check_certificate(c, verdicts)
        results.append(CheckResult(f"certificate:{c['kind']}", ok, detail))
    return ScenarioReport(scenario.name, results)


# the bundled scenarios

def _claim(query, args, expected, anchor):
    return {"query": query, "args": [str(a) for a in args], "expected": expected, "anchor": anchor}


def scenario_ex1(ctx=None):
    """w = MAX (+) 1: 0 ~ w and w ~ 1 modulo w, yet 0 !~ 1."""
    ctx = ctx or PrecisionContext.default()
    sketches = [{"name": "MAX", "kind": "named", "value": "max"},
                {"name": "w", "kind": "sum", "of": ["MAX", "1"]}]
    claims = [
        _claim("weak_congruent", [0, "w", "w"], "true", "w tilde-divides -w"),
        _claim("weak_congruent", ["w", 1, "w"], "true", "w - 1 lies in MAX"),
        _claim("weak_congruent", [0, 1, "w"], "false", "a nonprincipal w divides no unit"),
        _claim("strong_congruent", ["w", 0, "w"], "false", "w is not self-divisible"),
        _claim("selfdiv", ["w"], "false", "finite divisor profile forces non-self-divisibility"),
    ]
    certs = [{"kind": "transitivity_audit", "claims": [0, 1, 2]}]
    return Scenario("ex1", sketches, claims, certs, ctx)


def scenario_squarefree(L=12, window=(1, 10 ** 6), alpha=None, ctx=None):
    ctx = ctx or PrecisionContext.default()
    alpha = alpha or SupernaturalNumber((), 2)
    S = Complement(PrimePowerUnion(alpha))
    w = Interval(*window)
    density_cert = {"kind": "density", "set": format_set(S), "window": [str(w.lo), str(w.hi)],
                    "count": str(count_in(S, w))}
    if S == squarefree():
        # 6/pi^2 as a sanity anchor; the sieve count is the ground truth
        density_cert.update(anchor="0.607927", tolerance="0.005")
    certs = [
        density_cert,
        {"kind": "thickness", "alpha": format_sn(alpha), "L": str(L),
         "witness": str(thickness_witness(alpha, L))},
        {"kind": "note", "text": "the complement of this set is thick while the set itself has "
                                 "positive density; the ultrafilters u, v that separate "
                                 "u (+) v from v (+) u exist only non-constructively"},
    ]
    return Scenario(f"squarefree(L={L})", [], [], certs, ctx)


def scenario_phidf(phi, ctx=None, n_primes=6):
    ctx = ctx or PrecisionContext.default()
    report = selfdiv_classify(phi, n_primes)
    claims = [_claim("selfdiv_class", [format_sn(phi)], report.cls.value,
                     "classification by the shape of phi")]
    certs = [{"kind": "fip", "phi": format_sn(phi), "subfamily": [str(f) for f in c.subfamily],
              "side": c.side, "witness": str(c.witness)} for c in report.certificates]
    return Scenario(f"phidf({format_sn(phi)})", [], claims, certs, ctx)


def scenario_disjoint_primes(ctx=None):
    ctx = ctx or PrecisionContext.default()
    sketches = [{"name": "u", "kind": "named", "value": "even-primes"},
                {"name": "v", "kind": "named", "value": "odd-primes"},
                {"name": "s", "kind": "sum", "of": ["u", "v"]}]
    claims = [
        _claim("selfdiv", ["u"], "true", "product over a chain, hence self-divisible"),
        _claim("selfdiv", ["v"], "true", "product over a chain, hence self-divisible"),
        _claim("phi", ["s"], "default=0", "each prime divides exactly one summand"),
        _claim("selfdiv", ["s"], "false", "finite profile, nonprincipal sum"),
        _claim("d_enumerate", ["s", 30], "[-1, 1]", "D(u (+) v) = {-1, 1}"),
        _claim("divides_strong", ["s", "s"], "false", "D(u (+) v) is finite"),
    ]
    return Scenario("disjoint_primes", sketches, claims, [], ctx)


def _factorials(k):
    out, acc = [], 1
    for i in range(1, k + 1):
        acc *= i
        out.append(acc)
    return out


def scenario_chains(ctx=None):
    ctx = ctx or PrecisionContext.default()
    sketches = [{"name": "F", "kind": "named", "value": "factorial"},
                {"name": "P", "kind": "named", "value": "2^a"}]
    claims = [
        _claim("selfdiv", ["F"], "true", "factorials form a divisibility chain"),
        _claim("selfdiv", ["P"], "true", "powers of 2 form a divisibility chain"),
        _claim("divides_strong", ["P", "P"], "true", "division-linear, hence self-divisible"),
        _claim("divides_strong", [4, "P"], "true", "4Z belongs to the type of a power of 2"),
        _claim("powers_congruent", ["P", 1, 2], "true", "w and w (+) w agree modulo w"),
    ]
    certs = [
        {"kind": "chain", "values": ["1", "2", "6", "24"]},
        {"kind": "chain", "values": [str(x) for x in _factorials(20)]},
        {"kind": "chain", "values": [str(2 ** i) for i in range(40)]},
    ]
    return Scenario("chains", sketches, claims, certs, ctx)


def builtin(name):
    table = {
        "ex1": scenario_ex1,
        "squarefree": scenario_squarefree,
        "phidf": lambda: scenario_phidf(SupernaturalNumber((), 2)),
        "disjoint_primes": scenario_disjoint_primes,
        "chains": scenario_chains,
    }
    if name not in table:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(sorted(table))}")
    return table[name]()


BUILTIN_NAMES = ("ex1", "squarefree", "phidf", "disjoint_primes", "chains")
