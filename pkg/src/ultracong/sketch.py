"""Finite proxies for ultrafilters on Z and a three-valued engine for their relations.

A sketch is either a principal ultrafilter ``Principal(n)`` or a ``Profile``
recording what is known about a (usually nonprincipal) ultrafilter w:

* an interval ``phi <= phi_w <= phi_upper`` of supernatural numbers, where
  phi_w(p) is the largest k with p^k Z in w;
* pi(w), the profinite integer of w's remainder classes, at some precision;
* whether w is known to be nonprincipal, and whether it is self-divisible.

The engine answers tilde-divisibility, strong divisibility and the weak and
strong congruences with TRUE, FALSE or UNDETERMINED.  It never guesses:
every decisive answer comes from a named rule, recorded in the trace.
"""

from collections import OrderedDict
from dataclasses import dataclass, field, replace
from enum import Enum
from random import Random
from typing import Optional, Union as TUnion

from .logic import TriBool
from .primes import factor
from .profinite import (
    ContextMismatch, PrecisionContext, ProfiniteInt, pf_valuation, quotient_from_profile, sigma_w,
)
from .setalg import FipCertificate, phidf_witness, standard_subfamilies, verify_phidf
from .supernatural import (
    OMEGA, ParityRule, SnClass, SupernaturalNumber, pointwise, sn_of_integer,
)


class Principality(Enum):
    NONPRINCIPAL = "nonprincipal"
    UNKNOWN = "unknown"


class ForcingViolation(ValueError):
    pass


@dataclass(frozen=True)
class Principal:
    n: int

    @property
    def label(self):
        return str(self.n)

    @property
    def phi(self):
        return sn_of_integer(self.n)

    phi_upper = phi

    @property
    def selfdiv(self):
        # nZ belongs to the principal ultrafilter at n, so n lies in D(n)
        return TriBool.TRUE

    def __str__(self):
        return f"Principal({self.n})"


def _tighten(lo, hi, pi):
    """Narrow the phi interval using the valuations readable from pi."""
    if pi.shadow is not None:
        exact = sn_of_integer(pi.shadow)
        if not (lo.le(exact) and exact.le(hi)):
            raise ValueError(f"pi = Shadow({pi.shadow}) contradicts the phi bounds")
        return exact, exact
    new_lo, new_hi = dict(lo.exceptions), dict(hi.exceptions)
    for p in pi.ctx.primes:
        v = pf_valuation(pi, p)
        if v.exact:
            if not lo(p) <= v.k <= hi(p):
                raise ValueError(f"pi has valuation {v.k} at {p}, outside [{lo(p)}, {hi(p)}]")
            new_lo[p] = new_hi[p] = v.k
        else:
            if hi(p) < v.k:
                raise ValueError(f"pi is divisible by {p}^{v.k} but phi({p}) <= {hi(p)}")
            new_lo[p] = max(lo(p), v.k)
            new_hi[p] = hi(p)
    return (SupernaturalNumber(tuple(new_lo.items()), lo.default),
            SupernaturalNumber(tuple(new_hi.items()), hi.default))


@dataclass(frozen=True)
class Profile:
    phi: SupernaturalNumber
    pi: ProfiniteInt
    principality: Principality = Principality.NONPRINCIPAL
    selfdiv: TriBool = TriBool.UNDETERMINED
    label: str = "w"
    phi_upper: Optional[SupernaturalNumber] = None
    neg_of: Optional["Profile"] = field(default=None, repr=False)
    power_of: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        hi = self.phi if self.phi_upper is None else self.phi_upper
        if not self.phi.le(hi):
            raise ValueError("phi lower bound exceeds the upper bound")
        lo, hi = _tighten(self.phi, hi, self.pi)
        object.__setattr__(self, "phi", lo)
        object.__setattr__(self, "phi_upper", hi)
        if lo.is_all(OMEGA) and self.pi.shadow is None:
            object.__setattr__(self, "pi", ProfiniteInt.of_int(0, self.pi.ctx))
        sd = self.selfdiv
        if hi.classify() is SnClass.FINITE and self.principality is Principality.NONPRINCIPAL:
            if sd is TriBool.TRUE:
                raise ForcingViolation(
                    "a nonprincipal ultrafilter with finitely many divisors is never self-divisible")
            sd = TriBool.FALSE
        if lo.classify() is SnClass.COFINITE:
            if sd is TriBool.FALSE:
                raise ForcingViolation(
                    "an ultrafilter divisible by all powers of almost every prime is self-divisible")
            sd = TriBool.TRUE
        object.__setattr__(self, "selfdiv", sd)

    @property
    def ctx(self):
        return self.pi.ctx

    @property
    def phi_exact(self):
        return self.phi == self.phi_upper

    def __str__(self):
        return f"Profile({self.label})"


Sketch = TUnion[Principal, Profile]


# construction helpers

def canonical_pi(phi, ctx):
    """Representative pi with unit part 1: residue p^phi(p) mod p^cap."""
    res = {}
    for p, cap in zip(ctx.primes, ctx.caps):
        e = phi(p)
        res[p] = 0 if e >= cap else p ** e
    return ProfiniteInt.window(res, ctx)


def mk_sketch(phi, ctx, *, pi=None, principality=Principality.NONPRINCIPAL,
              selfdiv=TriBool.UNDETERMINED, label="w", phi_upper=None):
    if pi is None:
        pi = canonical_pi(phi, ctx)
    return Profile(phi, pi, principality, selfdiv, label, phi_upper)


def max_profile(ctx, label="MAX"):
    return mk_sketch(SupernaturalNumber((), OMEGA), ctx, pi=ProfiniteInt.of_int(0, ctx), label=label)


def max_plus_one(ctx, label="MAX+1"):
    return mk_sketch(SupernaturalNumber(), ctx, pi=ProfiniteInt.of_int(1, ctx), label=label)


def power_of_two(ctx, label="2^a"):
    """Type of a nonstandard power of 2: chain-bearing, hence self-divisible."""
    return mk_sketch(SupernaturalNumber(((2, OMEGA),), 0), ctx, selfdiv=TriBool.TRUE, label=label)


def factorial_sketch(ctx, label="n!"):
    """An ultrafilter on the factorials: every n divides almost all of them."""
    return max_profile(ctx, label)


def prime_parity_product(ctx, even, label=None):
    """Type of prod_{0<b<=a} f(2b) (even=True) or f(2b-1), f enumerating primes."""
    rule = ParityRule(1, 0) if even else ParityRule(0, 1)
    label = label or ("even-primes" if even else "odd-primes")
    return mk_sketch(SupernaturalNumber((), rule), ctx, selfdiv=TriBool.TRUE, label=label)


def principal(n):
    return Principal(n)


# accessors

def phi_of(s):
    return s.phi


def phi_bounds(s):
    return s.phi, s.phi_upper


def pi_of(s, ctx):
    if isinstance(s, Principal):
        return ProfiniteInt.of_int(s.n, ctx)
    if s.ctx != ctx:
        raise ContextMismatch("sketch lives in a different precision context")
    return s.pi


def is_max(s):
    lo, hi = phi_bounds(s)
    if lo.is_all(OMEGA):
        return TriBool.TRUE
    if not hi.is_all(OMEGA):
        return TriBool.FALSE
    return TriBool.UNDETERMINED


def _is_nonprincipal(s):
    return isinstance(s, Profile) and s.principality is Principality.NONPRINCIPAL


# arithmetic on sketches

def neg(s):
    if isinstance(s, Principal):
        return Principal(-s.n)
    if s.neg_of is not None:
        return s.neg_of
    power = None if s.power_of is None else (s.power_of[0], -s.power_of[1])
    label = s.label[1:] if s.label.startswith("-") else "-" + s.label
    out = Profile(s.phi, -s.pi, s.principality, s.selfdiv, label, s.phi_upper, None, power)
    object.__setattr__(out, "neg_of", s)
    return out


def _as_multiple(s):
    """(base, k) with pi(s) = k * pi(base) known exactly."""
    if s.power_of is not None:
        return s.power_of
    if s.neg_of is not None:
        return (s.neg_of, -1)
    return (s, 1)


def multiple(base, k):
    """The k-fold sum of base with itself (negated for k < 0); exact pi and phi."""
    if isinstance(base, Principal):
        return Principal(k * base.n)
    if k == 0:
        raise ValueError("use a MAX sketch for w - w")
    base, k0 = _as_multiple(base)
    k *= k0
    if k == 1:
        return base
    if k == -1:
        return neg(base)
    vk = sn_of_integer(k)
    lo = pointwise(lambda a, b: a + b, base.phi, vk)
    hi = pointwise(lambda a, b: a + b, base.phi_upper, vk)
    label = f"{base.label}^{k}" if k > 0 else f"-{base.label}^{-k}"
    return Profile(lo, k * base.pi, base.principality, TriBool.UNDETERMINED, label, hi,
                   None, (base, k))


def _sum_interval(lu, hu, lv, hv):
    if hu < lv:
        return lu, hu
    if hv < lu:
        return lv, hv
    if lu is OMEGA and lv is OMEGA:
        return OMEGA, OMEGA
    return min(lu, lv), OMEGA


def sk_sum(u, v):
    """u (+) v: pi adds exactly; phi follows the ultrametric rule and the window."""
    if isinstance(u, Principal) and isinstance(v, Principal):
        return Principal(u.n + v.n)
    ctx = u.ctx if isinstance(u, Profile) else v.ctx
    principality = (Principality.NONPRINCIPAL if _is_nonprincipal(u) or _is_nonprincipal(v)
                    else Principality.UNKNOWN)
    label = f"({u.label}+{v.label})"
    if isinstance(u, Profile) and isinstance(v, Profile):
        (bu, ku), (bv, kv) = _as_multiple(u), _as_multiple(v)
        if bu == bv:
            if ku + kv == 0:
                return replace(max_profile(ctx, label), principality=principality)
            return multiple(bu, ku + kv)
    pi = pi_of(u, ctx) + pi_of(v, ctx)
    lo_u, hi_u = phi_bounds(u)
    lo_v, hi_v = phi_bounds(v)
    lo = pointwise(lambda a, b, c, d: _sum_interval(a, b, c, d)[0], lo_u, hi_u, lo_v, hi_v)
    hi = pointwise(lambda a, b, c, d: _sum_interval(a, b, c, d)[1], lo_u, hi_u, lo_v, hi_v)
    return Profile(lo, pi, principality, TriBool.UNDETERMINED, label, hi)


# verdicts

@dataclass(frozen=True)
class TraceStep:
    rule: str
    anchor: str


@dataclass(frozen=True)
class Verdict:
    value: TriBool
    trace: tuple = ()

    @property
    def rules(self):
        return [s.rule for s in self.trace]

    def to_json(self):
        return {"value": self.value.value,
                "trace": [{"rule": s.rule, "anchor": s.anchor} for s in self.trace]}

    @classmethod
    def from_json(cls, data):
        return cls(TriBool(data["value"]),
                   tuple(TraceStep(s["rule"], s["anchor"]) for s in data["trace"]))


ANCHORS = {
    "R1": "principal ultrafilters: tilde-divisibility is integer divisibility",
    "R2": "every ultrafilter in MAX is divisible by every nonzero ultrafilter",
    "R3": "every w tilde-divides -w",
    "R4": "a nonprincipal w divides no nonzero integer, which has finitely many divisors",
    "R5": "for self-divisible w: w tilde-divides u iff phi_w <= phi_u",
    "R6": "w tilde-divides u only if phi_w <= phi_u",
    "S1": "n strongly divides u iff nZ belongs to u",
    "S2": "every nonzero ultrafilter strongly divides every element of MAX",
    "S3": "a finite D(u) belongs to no nonprincipal w",
    "S4": "for self-divisible w: w strongly divides u iff phi_w <= phi_u",
    "S5": "w tilde-divides t and t strongly divides u imply w strongly divides u",
    "C1": "for self-divisible w the weak and strong congruences coincide",
    "D-principal": "difference of integers",
    "D-reflexive": "u - u lies in MAX",
    "D-zero": "u - 0 = u",
    "D-neg": "0 - v = -v",
    "D-sum": "u - v = u (+) (-v), pi additive",
}


def _step(rule):
    return TraceStep(rule, ANCHORS[rule])


_PRINCIPAL_VERDICTS = {
    (strong, ok): Verdict(TriBool.of(ok), (_step("D-principal"), _step("S1" if strong else "R1")))
    for strong in (False, True) for ok in (False, True)
}


def _le3(a_lo, a_hi, b_lo, b_hi):
    """Whether phi_a <= phi_b given interval bounds on both."""
    if a_hi.le(b_lo):
        return TriBool.TRUE
    if not a_lo.le(b_hi):
        return TriBool.FALSE
    return TriBool.UNDETERMINED


class Engine:
    """Decision session; holds the bounded cache feeding the transfer rule."""

    def __init__(self, ctx=None, cache_size=64, coincidence=True):
        self.ctx = ctx or PrecisionContext.default()
        self.cache_size = cache_size
        self.coincidence = coincidence
        self._tilde_facts = OrderedDict()

    # tilde-divisibility

    def _r1(self, w, u):
        if isinstance(w, Principal) and isinstance(u, Principal):
            return TriBool.of(u.n % w.n == 0)

    def _r2(self, w, u):
        if is_max(u) is TriBool.TRUE:
            return TriBool.TRUE

    def _r3(self, w, u):
        if u == neg(w):
            return TriBool.TRUE

    def _r4(self, w, u):
        if _is_nonprincipal(w) and isinstance(u, Principal) and u.n != 0:
            return TriBool.FALSE

    def _r5(self, w, u):
        if w.selfdiv is TriBool.TRUE:
            v = _le3(*phi_bounds(w), *phi_bounds(u))
            if v.decisive:
                return v

    def _r6(self, w, u):
        if _le3(*phi_bounds(w), *phi_bounds(u)) is TriBool.FALSE:
            return TriBool.FALSE

    # strong divisibility

    def _s1(self, w, u):
        if not isinstance(w, Principal):
            return None
        if isinstance(u, Principal):
            # same test as below: phi_u >= v_p(n) for all p | n means n | u
            return TriBool.of(u.n % w.n == 0)
        lo, hi = phi_bounds(u)
        need = factor(w.n).items()
        if all(lo(p) >= k for p, k in need):
            return TriBool.TRUE
        if any(hi(p) < k for p, k in need):
            return TriBool.FALSE
        return None

    def _s2(self, w, u):
        if is_max(u) is TriBool.TRUE:
            return TriBool.TRUE

    def _s3(self, w, u):
        if _is_nonprincipal(w) and phi_bounds(u)[1].classify() is SnClass.FINITE:
            return TriBool.FALSE

    def _s4(self, w, u):
        if w.selfdiv is TriBool.TRUE:
            v = _le3(*phi_bounds(w), *phi_bounds(u))
            if v.decisive:
                return v

    def _s5(self, w, u):
        for (w2, t) in list(self._tilde_facts):
            if w2 != w or t == u or t == Principal(0):
                continue
            if self._cascade(self.STRONG_RULES[:-1], t, u)[0] is TriBool.TRUE:
                return TriBool.TRUE

    TILDE_RULES = ("R1", "R2", "R3", "R4", "R5", "R6")
    STRONG_RULES = ("S1", "S2", "S3", "S4", "S5")

    def _rule(self, name):
        return getattr(self, "_" + name.lower())

    def _cascade(self, rules, w, u):
        for name in rules:
            v = self._rule(name)(w, u)
            if v is not None:
                return v, name
        return TriBool.UNDETERMINED, None

    @staticmethod
    def _check_modulus(w):
        if isinstance(w, Principal) and w.n == 0:
            raise ValueError("the modulus w must be nonzero")

    def _remember(self, w, t):
        self._tilde_facts[(w, t)] = True
        self._tilde_facts.move_to_end((w, t))
        while len(self._tilde_facts) > self.cache_size:
            self._tilde_facts.popitem(last=False)

    def divides_tilde(self, w, u):
        self._check_modulus(w)
        value, rule = self._cascade(self.TILDE_RULES, w, u)
        if value is TriBool.TRUE:
            self._remember(w, u)
        trace = (TraceStep(rule, ANCHORS[rule]),) if rule else ()
        return Verdict(value, trace)

    def divides_strong(self, w, u):
        self._check_modulus(w)
        value, rule = self._cascade(self.STRONG_RULES, w, u)
        trace = (TraceStep(rule, ANCHORS[rule]),) if rule else ()
        return Verdict(value, trace)

    def replay(self, verdict, relation, w, u):
        """Re-run the deciding rule of a divisibility verdict; True if it reproduces."""
        if not verdict.trace:
            return verdict.value is TriBool.UNDETERMINED
        table = self.TILDE_RULES if relation == "tilde" else self.STRONG_RULES
        rule = verdict.trace[-1].rule
        if rule not in table:
            return False
        return self._rule(rule)(w, u) is verdict.value

    # congruences

    def difference(self, u, v):
        """u (-) v with exact symbolic shortcuts applied first."""
        if isinstance(u, Principal) and isinstance(v, Principal):
            return Principal(u.n - v.n), "D-principal"
        if u == v:
            pr = Principality.NONPRINCIPAL if _is_nonprincipal(u) else Principality.UNKNOWN
            d = replace(max_profile(self._ctx_of(u, v), f"({u.label}-{u.label})"), principality=pr)
            return d, "D-reflexive"
        if v == Principal(0):
            return u, "D-zero"
        if u == Principal(0):
            return neg(v), "D-neg"
        return sk_sum(u, neg(v)), "D-sum"

    def _ctx_of(self, *sketches):
        for s in sketches:
            if isinstance(s, Profile):
                return s.ctx
        return self.ctx

    def _congruence(self, u, v, w, strong):
        self._check_modulus(w)
        if type(u) is Principal and type(v) is Principal and type(w) is Principal:
            # D-principal then R1 / S1, inlined: this is the hot path for integer queries
            return _PRINCIPAL_VERDICTS[strong, (u.n - v.n) % w.n == 0]
        delta, step = self.difference(u, v)
        first = self.divides_strong if strong else self.divides_tilde
        other = self.divides_tilde if strong else self.divides_strong
        verdict = first(w, delta)
        trace = (TraceStep(step, ANCHORS[step]),) + verdict.trace
        if (verdict.value is TriBool.UNDETERMINED and self.coincidence
                and w.selfdiv is TriBool.TRUE):
            alt = other(w, delta)
            if alt.value.decisive:
                return Verdict(alt.value, trace + alt.trace + (TraceStep("C1", ANCHORS["C1"]),))
        return Verdict(verdict.value, trace)

    def weak_congruent(self, u, v, w):
        return self._congruence(u, v, w, strong=False)

    def strong_congruent(self, u, v, w):
        return self._congruence(u, v, w, strong=True)

    def powers_congruent(self, w, n, m):
        """Whether w^(+n) and w^(+m) are strongly congruent modulo w."""
        if n == m or n < 1 or m < 1:
            raise ValueError("need distinct positive n, m")
        wn, wm = w, w
        for _ in range(n - 1):
            wn = sk_sum(wn, w)
        for _ in range(m - 1):
            wm = sk_sum(wm, w)
        return self.strong_congruent(wn, wm, w)


# self-divisibility classification

class SelfdivClass(Enum):
    FORCED_NON_SELFDIV_UNLESS_PRINCIPAL = "ForcedNonSelfDivisibleUnlessPrincipal"
    FORCED_SELFDIV = "ForcedSelfDivisible"
    BOTH_POSSIBLE = "BothPossible"


@dataclass(frozen=True)
class SelfdivReport:
    phi: SupernaturalNumber
    cls: SelfdivClass
    certificates: tuple = ()

    @property
    def verified(self):
        return all(c.verify() for c in self.certificates)


def selfdiv_classify(phi, n_primes=6):
    c = phi.classify()
    if c is SnClass.FINITE:
        return SelfdivReport(phi, SelfdivClass.FORCED_NON_SELFDIV_UNLESS_PRINCIPAL)
    if c is SnClass.COFINITE:
        return SelfdivReport(phi, SelfdivClass.FORCED_SELFDIV)
    certs = []
    for sub in standard_subfamilies(phi, n_primes):
        for side in ("union", "complement"):
            certs.append(FipCertificate(phi, tuple(sub), side, phidf_witness(phi, sub, side)))
    return SelfdivReport(phi, SelfdivClass.BOTH_POSSIBLE, tuple(certs))


# u/v for principal ultrafilters

@dataclass(frozen=True)
class QuotientFamily:
    kind: str  # "principal", "empty" or "undetermined"
    r: Optional[int] = None

    def __str__(self):
        return {"principal": f"Principal({self.r})", "empty": "EmptyFamily"}.get(self.kind, "Undetermined")


def ultra_quotient(u, v):
    """u/v = {A : {n : nA in v} in u}, decided for principal u = a != 0 and v = b."""
    if not (isinstance(u, Principal) and isinstance(v, Principal)):
        return QuotientFamily("undetermined")
    a, b = u.n, v.n
    if a == 0:
        return QuotientFamily("empty") if b != 0 else QuotientFamily("undetermined")
    if b % a == 0:
        return QuotientFamily("principal", b // a)
    return QuotientFamily("empty")


# injectivity of sigma_w

@dataclass(frozen=True)
class InjectivityReport:
    is_max: bool
    injective_at_precision: bool
    samples: int = 0
    kernel_hits: int = 0
    witness: Optional[ProfiniteInt] = None
    p0: Optional[int] = None
    k0: Optional[int] = None
    witness_nonzero: Optional[bool] = None
    witness_in_kernel_at_precision: Optional[bool] = None
    witness_in_kernel_exact: Optional[bool] = None


def _random_nonzero(rng, ctx):
    while True:
        x = ProfiniteInt(ctx, tuple(rng.randrange(m) for m in ctx.moduli()))
        if any(x.residues):
            return x


def sigma_injectivity_probe(w, ctx=None, samples=1000, seed=0, k0=None):
    """Check that sigma_w is injective exactly when w is in MAX.

    For w outside MAX pick a context prime p0 with phi_w(p0) finite and
    k0 > phi_w(p0); the element v with pi(v) = p0^(k0-1) at p0 and 0 at
    every other prime is nonzero but lies in the kernel, since
    D(v) = complement of p0^k0 Z belongs to w.
    """
    if isinstance(w, Principal) and w.n == 0:
        raise ValueError("w must be nonzero")
    ctx = ctx or (w.ctx if isinstance(w, Profile) else PrecisionContext.default())
    lo, hi = phi_bounds(w)
    Q = quotient_from_profile(lo, ctx)
    status = is_max(w)
    if status is TriBool.TRUE:
        rng = Random(seed)
        hits = sum(sigma_w(_random_nonzero(rng, ctx), Q).at_precision_zero() for _ in range(samples))
        return InjectivityReport(True, hits == 0, samples, hits)
    if status is TriBool.UNDETERMINED:
        raise ValueError("cannot tell whether w is in MAX from this sketch")
    p0 = next((p for p in ctx.primes if lo(p) == hi(p) and lo(p) is not OMEGA), None)
    if p0 is None:
        raise ValueError("w has no context prime with a known finite exponent to use as p0")
    k0 = lo(p0) + 1 if k0 is None else k0
    if k0 <= lo(p0):
        raise ValueError(f"k0 must exceed phi_w({p0}) = {lo(p0)}")
    if k0 - 1 >= ctx.cap(p0):
        raise ValueError(f"context too small: cap({p0}) must be at least {k0}")
    v = ProfiniteInt.window({p0: p0 ** (k0 - 1)}, ctx)
    image = sigma_w(v, Q)
    phi_v = SupernaturalNumber(((p0, k0 - 1),), OMEGA)
    return InjectivityReport(
        False, False, 0, 0, v, p0, k0,
        witness_nonzero=v.is_zero() is TriBool.FALSE,
        witness_in_kernel_at_precision=image.at_precision_zero(),
        # kernel membership is phi_w <= phi_v pointwise
        witness_in_kernel_exact=hi.le(phi_v),
    )
