"""Supernatural (Steinitz) numbers: functions from the primes to omega + 1.

A value is stored as finitely many exceptional primes over a default, where
the default is either a constant exponent or a rule keyed on the parity of the
prime's index in the increasing enumeration 2, 3, 5, 7, ... (2 has index 1).
Such a value also encodes the divisor set D = {m : v_p(m) <= phi(p) for all p}
and the closed subgroup prod_p p^phi(p) Z_p of the profinite integers.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from enum import Enum
from typing import Union

from .primes import factor, isprime, prime_index


class _Omega:
    """The exponent omega: larger than every natural number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    def __str__(self):
        return "omega"

    def __reduce__(self):
        return (_Omega, ())

    def __hash__(self):
        return hash("omega-exponent")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__


OMEGA = _Omega()

Exponent = Union[int, _Omega]


def check_exponent(e):
    if e is OMEGA:
        return e
    if isinstance(e, bool) or not isinstance(e, int) or e < 0:
        raise ValueError(f"exponent must be a non-negative integer or omega, got {e!r}")
    return e


@dataclass(frozen=True)
class ParityRule:
    """Default that depends on whether the prime's index is even or odd."""

    even: Exponent
    odd: Exponent

    def __post_init__(self):
        check_exponent(self.even)
        check_exponent(self.odd)

    def at(self, p):
        return self.even if prime_index(p) % 2 == 0 else self.odd

    def __str__(self):
        return f"parity({self.even},{self.odd})"


class SnClass(Enum):
    FINITE = "Finite"
    COFINITE = "Cofinite"
    INTERMEDIATE = "Intermediate"


def _default_classes(default):
    """(even-index value, odd-index value) of a default."""
    if isinstance(default, ParityRule):
        return default.even, default.odd
    return default, default


def _make_default(even, odd):
    return even if even == odd else ParityRule(even, odd)


@dataclass(frozen=True)
class SupernaturalNumber:
    """phi: primes -> omega + 1, in canonical form.

    ``exceptions`` is a sorted tuple of (prime, exponent) pairs, none of
    which agrees with the default at that prime, so structural equality is
    functional equality.
    """

    exceptions: tuple = ()
    default: object = 0

    def __post_init__(self):
        default = self.default
        if isinstance(default, ParityRule):
            default = _make_default(default.even, default.odd)
        else:
            check_exponent(default)
        items = dict(self.exceptions)
        canon = []
        for p in sorted(items):
            if not isinstance(p, int) or not isprime(p):
                raise ValueError(f"exception key {p!r} is not a prime")
            e = check_exponent(items[p])
            base = default.at(p) if isinstance(default, ParityRule) else default
            if e != base:
                canon.append((p, e))
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "exceptions", tuple(canon))

    @classmethod
    def of(cls, mapping=None, default=0):
        return cls(tuple((mapping or {}).items()), default)

    def __call__(self, p):
        for q, e in self.exceptions:
            if q == p:
                return e
        if isinstance(self.default, ParityRule):
            return self.default.at(p)
        return self.default

    def default_at(self, p):
        if isinstance(self.default, ParityRule):
            return self.default.at(p)
        return self.default

    @property
    def exception_primes(self):
        return tuple(p for p, _ in self.exceptions)

    def combine(self, other, fn):
        """Pointwise fn over two supernaturals (exact, always representable)."""
        return pointwise(fn, self, other)

    def le(self, other):
        """Pointwise order; exact because each default class is infinite."""
        keys = set(self.exception_primes) | set(other.exception_primes)
        if any(not self(p) <= other(p) for p in keys):
            return False
        se, so = _default_classes(self.default)
        oe, oo = _default_classes(other.default)
        return se <= oe and so <= oo

    def meet(self, other):
        """gcd as the pointwise minimum."""
        return self.combine(other, min)

    def join(self, other):
        """lcm as the pointwise maximum."""
        return self.combine(other, max)

    def is_all(self, e):
        return not self.exceptions and self.default == e

    def classify(self):
        even, odd = _default_classes(self.default)
        if even is OMEGA and odd is OMEGA:
            return SnClass.COFINITE
        if even == 0 and odd == 0 and all(e is not OMEGA for _, e in self.exceptions):
            return SnClass.FINITE
        return SnClass.INTERMEDIATE

    def finite_positive_is_infinite(self):
        """Whether phi takes a value in {1, 2, ...} at infinitely many primes."""
        return any(e is not OMEGA and e > 0 for e in _default_classes(self.default))

    def zero_is_infinite(self):
        return any(e == 0 for e in _default_classes(self.default))

    def __str__(self):
        return format_sn(self)


def pointwise(fn, *sns):
    """SupernaturalNumber p -> fn(s1(p), ..., sk(p)); exact for this class."""
    keys = set()
    for s in sns:
        keys.update(s.exception_primes)
    classes = [_default_classes(s.default) for s in sns]
    default = _make_default(fn(*(c[0] for c in classes)), fn(*(c[1] for c in classes)))
    return SupernaturalNumber(tuple((p, fn(*(s(p) for s in sns))) for p in keys), default)


@lru_cache(maxsize=4096)
def sn_of_integer(n):
    """phi of the principal ultrafilter n; 0 is divisible by every integer."""
    if n == 0:
        return SupernaturalNumber((), OMEGA)
    return SupernaturalNumber(tuple(factor(n).items()), 0)


def sn_le(a, b):
    return a.le(b)


def sn_classify(phi):
    return phi.classify()


def d_member(phi, m):
    """Whether m lies in D = complement of the union of p^(phi(p)+1) Z."""
    if m == 0:
        raise ValueError("0 lies in every p^k Z, so it is never in D")
    return all(k <= phi(p) for p, k in factor(m).items())


def d_enumerate(phi, bound):
    if bound < 1:
        raise ValueError("bound must be positive")
    return [m for m in range(-bound, bound + 1) if m != 0 and d_member(phi, m)]


def _fmt_exp(e):
    return "omega" if e is OMEGA else str(e)


def format_sn(phi):
    body = ", ".join(f"{p}:{_fmt_exp(e)}" for p, e in phi.exceptions)
    d = phi.default
    head = f"default={d}" if isinstance(d, ParityRule) else f"default={_fmt_exp(d)}"
    return f"{head}; {body}" if body else head


_PARITY = re.compile(r"^parity\(\s*(\w+)\s*,\s*(\w+)\s*\)$")


def _parse_exp(text):
    t = text.strip().lower()
    if t in ("omega", "w", "inf"):
        return OMEGA
    if not t.isdigit():
        raise ValueError(f"bad exponent {text!r}")
    return int(t)


def parse_sn(text):
    """Parse ``default=<int|omega|parity(e,o)>; p1:e1, p2:e2, ...``."""
    text = text.strip()
    head, _, rest = text.partition(";")
    key, eq, dval = head.partition("=")
    if key.strip() != "default" or not eq:
        raise ValueError(f"supernatural literal must start with 'default=': {text!r}")
    dval = dval.strip()
    m = _PARITY.match(dval)
    default = ParityRule(_parse_exp(m.group(1)), _parse_exp(m.group(2))) if m else _parse_exp(dval)
    exceptions = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        p, colon, e = item.partition(":")
        if not colon or not p.strip().isdigit():
            raise ValueError(f"bad exception entry {item!r}")
        p = int(p)
        if p in exceptions:
            raise ValueError(f"prime {p} listed twice")
        exceptions[p] = _parse_exp(e)
    return SupernaturalNumber(tuple(exceptions.items()), default)
