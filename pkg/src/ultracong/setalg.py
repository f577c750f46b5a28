"""Symbolic subsets of Z and the combinatorics run on them.

Sets are small expression trees over residue classes, intervals, finite sets
and prime-power unions U_p p^alpha(p) Z (with p^omega Z read as {0}).  The
squarefree integers are ``Complement(PrimePowerUnion(const 2))``.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Optional

import numpy as np

from .primes import crt, factor, first_primes, lcm_all, nextprime, nth_prime
from .supernatural import OMEGA, ParityRule, SupernaturalNumber, SnClass, format_sn, parse_sn

DEFAULT_BUDGET = 10 ** 6


class NotPeriodic(ValueError):
    pass


class NotFoundWithinBudget(LookupError):
    pass


class SetExpr:
    def __and__(self, other):
        return Intersection(self, other)

    def __or__(self, other):
        return Union(self, other)

    def __invert__(self):
        return Complement(self)

    def __contains__(self, m):
        return member(self, m)


@dataclass(frozen=True)
class ResidueClass(SetExpr):
    a: int
    n: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.a < self.n:
            raise ValueError("residue class needs n >= 1 and 0 <= a < n")


@dataclass(frozen=True)
class Interval(SetExpr):
    lo: int
    hi: int

    def __len__(self):
        return max(0, self.hi - self.lo + 1)


@dataclass(frozen=True)
class FiniteSet(SetExpr):
    items: frozenset

    def __init__(self, items):
        object.__setattr__(self, "items", frozenset(items))


@dataclass(frozen=True)
class PrimePowerUnion(SetExpr):
    alpha: SupernaturalNumber

    def __post_init__(self):
        d = self.alpha.default
        values = [e for _, e in self.alpha.exceptions]
        values += [d.even, d.odd] if isinstance(d, ParityRule) else [d]
        if any(e == 0 for e in values):
            raise ValueError("prime-power union needs alpha(p) >= 1 everywhere")


@dataclass(frozen=True)
class Complement(SetExpr):
    s: SetExpr


@dataclass(frozen=True)
class Union(SetExpr):
    a: SetExpr
    b: SetExpr


@dataclass(frozen=True)
class Intersection(SetExpr):
    a: SetExpr
    b: SetExpr


INTEGERS = ResidueClass(0, 1)


def squarefree():
    return Complement(PrimePowerUnion(SupernaturalNumber((), 2)))


_SMALL_PRIMES = tuple(first_primes(200))


def member(S, m):
    if isinstance(S, ResidueClass):
        return (m - S.a) % S.n == 0
    if isinstance(S, Interval):
        return S.lo <= m <= S.hi
    if isinstance(S, FiniteSet):
        return m in S.items
    if isinstance(S, PrimePowerUnion):
        if m == 0:
            return True
        # cheap small-prime pass before a full factorisation
        for p in _SMALL_PRIMES:
            e = S.alpha(p)
            if e is not OMEGA and m % p ** e == 0:
                return True
        return any(S.alpha(p) is not OMEGA and k >= S.alpha(p) for p, k in factor(m).items())
    if isinstance(S, Complement):
        return not member(S.s, m)
    if isinstance(S, Union):
        return member(S.a, m) or member(S.b, m)
    if isinstance(S, Intersection):
        return member(S.a, m) and member(S.b, m)
    raise TypeError(f"not a set expression: {S!r}")


def verify_thick(alpha, n, L):
    """Whether n+1, ..., n+L all lie in the prime-power union of alpha."""
    S = PrimePowerUnion(alpha)
    return all(member(S, n + k) for k in range(1, L + 1))


def period(S):
    """A period of S if S is periodic, else None (decided syntactically)."""
    if isinstance(S, ResidueClass):
        return S.n
    if isinstance(S, (Interval, FiniteSet)):
        return None
    if isinstance(S, PrimePowerUnion):
        a = S.alpha
        if a.default is not OMEGA:
            return None
        finite = [p ** e for p, e in a.exceptions if e is not OMEGA]
        # with no finite exponent the union is {0}
        return lcm_all(finite) if finite else None
    if isinstance(S, Complement):
        return period(S.s)
    pa, pb = period(S.a), period(S.b)
    if pa is None or pb is None:
        return None
    return pa * pb // gcd(pa, pb)


def _prime_sieve(limit):
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.nonzero(flags)[0]


def _mask(S, lo, hi):
    """Boolean membership mask of S over [lo, hi]; agrees with member()."""
    if max(abs(lo), abs(hi)) > 2 ** 62:
        raise ValueError("window too far out for the vectorised counter")
    xs = np.arange(lo, hi + 1, dtype=np.int64)
    size = hi - lo + 1
    if isinstance(S, ResidueClass):
        return (xs - S.a) % S.n == 0
    if isinstance(S, Interval):
        return (xs >= S.lo) & (xs <= S.hi)
    if isinstance(S, FiniteSet):
        return np.isin(xs, list(S.items)) if S.items else np.zeros(size, dtype=bool)
    if isinstance(S, PrimePowerUnion):
        out = np.zeros(size, dtype=bool)
        top = max(abs(lo), abs(hi))
        for p in _prime_sieve(top):
            e = S.alpha(int(p))
            if e is OMEGA:
                continue
            q = int(p) ** e
            if q > top:
                continue
            start = -(-lo // q) * q
            out[start - lo::q] = True
        if lo <= 0 <= hi:
            out[-lo] = True
        return out
    if isinstance(S, Complement):
        return ~_mask(S.s, lo, hi)
    if isinstance(S, Union):
        return _mask(S.a, lo, hi) | _mask(S.b, lo, hi)
    if isinstance(S, Intersection):
        return _mask(S.a, lo, hi) & _mask(S.b, lo, hi)
    raise TypeError(f"not a set expression: {S!r}")


def count_in(S, window):
    if len(window) == 0:
        return 0
    return int(np.count_nonzero(_mask(S, window.lo, window.hi)))


@dataclass(frozen=True)
class DensityReport:
    kind: str  # "exact_periodic" or "window_estimate"
    value: Fraction
    window: Optional[Interval] = None
    count: Optional[int] = None

    def to_json(self):
        out = {"kind": self.kind, "value": f"{self.value.numerator}/{self.value.denominator}"}
        if self.window is not None:
            out["window"] = [str(self.window.lo), str(self.window.hi)]
            out["count"] = str(self.count)
        return out


def density(S, window=None):
    if window is not None:
        if len(window) == 0:
            raise ValueError("empty window")
        c = count_in(S, window)
        return DensityReport("window_estimate", Fraction(c, len(window)), window, c)
    m = period(S)
    if m is None:
        raise NotPeriodic("set is not periodic; give a window for an estimate")
    c = count_in(S, Interval(0, m - 1))
    return DensityReport("exact_periodic", Fraction(c, m))


def thickness_witness(alpha, L):
    """Least n >= 0 with p_k^alpha(p_k) | n + k for k = 1..L.

    Then n+1, ..., n+L all lie in the prime-power union of alpha.
    """
    if L < 1:
        raise ValueError("L must be positive")
    residues, moduli = [], []
    for k in range(1, L + 1):
        p = nth_prime(k)
        e = alpha(p)
        if e is OMEGA or e < 1:
            raise ValueError(f"alpha({p}) = {e} does not give a usable modulus")
        residues.append(-k)
        moduli.append(p ** e)
    n, _ = crt([r % m for r, m in zip(residues, moduli)], moduli)
    return n


def is_divisibility_chain(xs):
    if any(x == 0 for x in xs):
        raise ValueError("chains are made of nonzero integers")
    ys = sorted(xs, key=abs)
    return all(b % a == 0 for a, b in zip(ys, ys[1:]))


def find_3ap(xs):
    """Some (a, a+b, a+2b) inside xs with b != 0, or None."""
    s = set(xs)
    for a, c in combinations(sorted(s), 2):
        if (a + c) % 2 == 0 and (a + c) // 2 in s:
            return (a, (a + c) // 2, c)
    return None


def antichain_in_multiples(n, size):
    if n == 0:
        raise ValueError("n must be nonzero")
    out, q = [], 2
    while len(out) < size:
        if n % q:
            out.append(n * q)
        q = int(nextprime(q))
    return out


def chain_in_periodic(S, length, budget=DEFAULT_BUDGET):
    """A chain a | a(1+m) | a(1+m)^2 | ... inside S, m a period of S."""
    m = period(S)
    if m is None:
        raise NotPeriodic("chain_in_periodic needs a periodic set")
    for a in range(1, budget + 1):
        if member(S, a):
            return [a * (1 + m) ** i for i in range(length)]
    raise NotFoundWithinBudget(f"no positive member of S below {budget}")


def fp_prefix_chain(xs, k):
    if len(xs) < k + 1:
        raise ValueError("need at least k+1 elements")
    if any(x <= 1 for x in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("elements must be > 1 and strictly increasing")
    out, acc = [], 1
    for x in xs[:k + 1]:
        acc *= x
        out.append(acc)
    return out


# The family used to extend a prescribed phi to an ultrafilter:
#   exact  p: p^phi(p) Z minus p^(phi(p)+1) Z    (phi(p) in {1, 2, ...})
#   avoid  p: complement of p Z                   (phi(p) = 0)
#   power  p, n: p^n Z                            (phi(p) = omega)

@dataclass(frozen=True)
class FamilyMember:
    kind: str
    p: int
    n: int = 0

    def as_set(self, phi):
        if self.kind == "exact":
            e = phi(self.p)
            return Intersection(ResidueClass(0, self.p ** e), Complement(ResidueClass(0, self.p ** (e + 1))))
        if self.kind == "avoid":
            return Complement(ResidueClass(0, self.p))
        return ResidueClass(0, self.p ** self.n)

    def check(self, phi):
        e = phi(self.p)
        ok = {
            "exact": e is not OMEGA and e >= 1,
            "avoid": e == 0,
            "power": e is OMEGA and self.n >= 1,
        }.get(self.kind, False)
        if not ok:
            raise ValueError(f"{self} is not a member of the family for phi({self.p}) = {e}")

    def __str__(self):
        return f"{self.kind}:{self.p}" + (f"^{self.n}" if self.kind == "power" else "")


def divisor_union(phi):
    """U_p p^(phi(p)+1) Z, the complement of D."""
    return PrimePowerUnion(phi.combine(phi, lambda a, _: a + 1))


def _first_prime_where(pred, skip):
    p = 2
    while True:
        if p not in skip and pred(p):
            return p
        p = int(nextprime(p))


def phidf_witness(phi, subfamily, side):
    """An integer in every set of ``subfamily`` and in D^c ("union") or D ("complement").

    Built as a = prod p_i^phi(p_i) * prod r_j^n_j, then adjusted by one fresh
    prime from whichever fiber of phi is infinite.
    """
    if phi.classify() is not SnClass.INTERMEDIATE:
        raise ValueError("witnesses exist for both sides only when phi is intermediate")
    if side not in ("union", "complement"):
        raise ValueError("side must be 'union' or 'complement'")
    for f in subfamily:
        f.check(phi)
    a = 1
    for f in subfamily:
        if f.kind == "exact":
            a *= f.p ** phi(f.p)
        elif f.kind == "power":
            a *= f.p ** f.n
    used = {f.p for f in subfamily}
    if phi.finite_positive_is_infinite():
        pd = _first_prime_where(lambda p: phi(p) is not OMEGA and phi(p) >= 1, used)
        return a * pd ** (phi(pd) + 1) if side == "union" else a * pd
    q = _first_prime_where(lambda p: phi(p) == 0, used)
    return a * q if side == "union" else a


def verify_phidf(phi, subfamily, side, n):
    """Re-check a witness by membership, independently of its construction."""
    if not all(member(f.as_set(phi), n) for f in subfamily):
        return False
    in_union = member(divisor_union(phi), n)
    return in_union if side == "union" else not in_union


@dataclass(frozen=True)
class FipCertificate:
    """A witness that subfamily plus one side of D still has a common element."""

    phi: SupernaturalNumber
    subfamily: tuple
    side: str
    witness: int

    def verify(self):
        return verify_phidf(self.phi, self.subfamily, self.side, self.witness)

    def to_json(self):
        return {"phi": format_sn(self.phi), "subfamily": [str(f) for f in self.subfamily],
                "side": self.side, "witness": str(self.witness), "verified": self.verify()}


def standard_subfamilies(phi, n_primes=6):
    """Prefixes of the family over the first primes, plus a powers-only pick."""
    members = []
    p = 2
    for _ in range(n_primes):
        e = phi(p)
        if e is OMEGA:
            members.append(FamilyMember("power", p, 2))
        elif e == 0:
            members.append(FamilyMember("avoid", p))
        else:
            members.append(FamilyMember("exact", p))
        p = int(nextprime(p))
    subs = [members[:i] for i in range(len(members) + 1)]
    powers_only = [m for m in members if m.kind != "avoid"]
    if powers_only not in subs:
        subs.append(powers_only)
    return subs


# Text grammar: res(a,n) | int(lo,hi) | fin{...} | ppu(<supernatural>) | !(S) | (S & S) | (S | S)

class _Parser:
    def __init__(self, text):
        self.s = text
        self.i = 0

    def error(self, msg):
        raise ValueError(f"{msg} at position {self.i} in {self.s!r}")

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def eat(self, tok):
        self.ws()
        if not self.s.startswith(tok, self.i):
            self.error(f"expected {tok!r}")
        self.i += len(tok)

    def peek(self, tok):
        self.ws()
        return self.s.startswith(tok, self.i)

    def until(self, close):
        depth, start = 0, self.i
        while self.i < len(self.s):
            c = self.s[self.i]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0 and close == ")":
                    break
                depth -= 1
            elif c == close and depth == 0:
                break
            self.i += 1
        else:
            self.error(f"unterminated, expected {close!r}")
        return self.s[start:self.i]

    def ints(self, close):
        body = self.until(close)
        self.eat(close)
        try:
            return [int(t) for t in body.split(",") if t.strip()]
        except ValueError:
            self.error("expected integers")

    def expr(self):
        if self.peek("res("):
            self.eat("res(")
            a, n = self.ints(")")
            return ResidueClass(a % n, n)
        if self.peek("int("):
            self.eat("int(")
            lo, hi = self.ints(")")
            return Interval(lo, hi)
        if self.peek("fin{"):
            self.eat("fin{")
            return FiniteSet(self.ints("}"))
        if self.peek("ppu("):
            self.eat("ppu(")
            body = self.until(")")
            self.eat(")")
            return PrimePowerUnion(parse_sn(body))
        if self.peek("Z"):
            self.eat("Z")
            return INTEGERS
        if self.peek("!"):
            self.eat("!")
            self.eat("(")
            inner = self.expr()
            self.eat(")")
            return Complement(inner)
        if self.peek("("):
            self.eat("(")
            left = self.expr()
            self.ws()
            op = self.s[self.i:self.i + 1]
            if op not in ("&", "|"):
                self.error("expected & or |")
            self.i += 1
            right = self.expr()
            self.eat(")")
            return Intersection(left, right) if op == "&" else Union(left, right)
        self.error("expected a set expression")


def parse_set(text):
    p = _Parser(text)
    out = p.expr()
    p.ws()
    if p.i != len(p.s):
        p.error("trailing input")
    return out


def format_set(S):
    if isinstance(S, ResidueClass):
        return "Z" if S == INTEGERS else f"res({S.a},{S.n})"
    if isinstance(S, Interval):
        return f"int({S.lo},{S.hi})"
    if isinstance(S, FiniteSet):
        return "fin{" + ",".join(str(x) for x in sorted(S.items)) + "}"
    if isinstance(S, PrimePowerUnion):
        return f"ppu({format_sn(S.alpha)})"
    if isinstance(S, Complement):
        return f"!({format_set(S.s)})"
    op = "&" if isinstance(S, Intersection) else "|"
    return f"({format_set(S.a)} {op} {format_set(S.b)})"
