"""Profinite integers at finite precision and the procyclic quotients of Z-hat.

Z-hat is viewed as prod_p Z_p and observed through a PrecisionContext, a
finite list of primes each with a cap, so an element is known modulo
prod p^cap(p).  Elements that are images of ordinary integers keep the
integer itself (the shadow form), which makes their valuations exact at
every prime, inside the window or not.
"""

from dataclasses import dataclass
from typing import Optional

from .logic import TriBool, all3
from .primes import crt, first_primes, lcm_all, valuation
from .supernatural import OMEGA, ParityRule, SupernaturalNumber, sn_le, sn_of_integer


class ContextMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PrecisionContext:
    primes: tuple
    caps: tuple

    def __post_init__(self):
        if not self.primes:
            raise ValueError("a precision context needs at least one prime")
        if list(self.primes) != sorted(set(self.primes)):
            raise ValueError("context primes must be distinct and ascending")
        if len(self.caps) != len(self.primes) or any(c < 1 for c in self.caps):
            raise ValueError("every context prime needs a positive cap")

    @classmethod
    def of(cls, primes, cap=6):
        primes = tuple(primes)
        if isinstance(cap, int):
            caps = (cap,) * len(primes)
        else:
            caps = tuple(cap[p] for p in primes)
        return cls(primes, caps)

    @classmethod
    def default(cls, n_primes=10, cap=6):
        return cls.of(first_primes(n_primes), cap)

    def cap(self, p):
        try:
            return self.caps[self.primes.index(p)]
        except ValueError:
            raise KeyError(f"prime {p} is not in the precision context") from None

    def moduli(self):
        return tuple(p ** c for p, c in zip(self.primes, self.caps))

    @property
    def modulus(self):
        n = 1
        for m in self.moduli():
            n *= m
        return n

    def with_cap(self, cap):
        return PrecisionContext.of(self.primes, cap)

    def to_json(self):
        return {"primes": list(self.primes), "cap": {str(p): c for p, c in zip(self.primes, self.caps)}}

    @classmethod
    def from_json(cls, data):
        primes = tuple(int(p) for p in data["primes"])
        return cls(primes, tuple(int(data["cap"][str(p)]) for p in primes))


@dataclass(frozen=True)
class ProfiniteInt:
    """An element of Z-hat in a context: residues mod p^cap, plus the integer when known."""

    ctx: PrecisionContext
    residues: tuple
    shadow: Optional[int] = None

    def __post_init__(self):
        mods = self.ctx.moduli()
        if len(self.residues) != len(mods):
            raise ValueError("one residue per context prime is required")
        for r, m in zip(self.residues, mods):
            if not 0 <= r < m:
                raise ValueError(f"residue {r} out of range for modulus {m}")
        if self.shadow is not None and tuple(self.shadow % m for m in mods) != self.residues:
            raise ValueError("shadow integer disagrees with its residues")

    @classmethod
    def of_int(cls, n, ctx):
        return cls(ctx, tuple(n % m for m in ctx.moduli()), n)

    @classmethod
    def window(cls, residues, ctx):
        """Window form from a prime -> residue mapping; missing primes read as 0."""
        mods = ctx.moduli()
        return cls(ctx, tuple(residues.get(p, 0) % m for p, m in zip(ctx.primes, mods)))

    @property
    def form(self):
        return "shadow" if self.shadow is not None else "window"

    def residue(self, p):
        return self.residues[self.ctx.primes.index(p)]

    def _check(self, other):
        if not isinstance(other, ProfiniteInt):
            return NotImplemented
        if other.ctx != self.ctx:
            raise ContextMismatch("profinite integers live in different precision contexts")
        return other

    def _combine(self, other, op):
        mods = self.ctx.moduli()
        res = tuple(op(a, b) % m for a, b, m in zip(self.residues, other.residues, mods))
        shadow = None
        if self.shadow is not None and other.shadow is not None:
            shadow = op(self.shadow, other.shadow)
        return ProfiniteInt(self.ctx, res, shadow)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        if isinstance(other, int):
            other = ProfiniteInt.of_int(other, self.ctx)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        mods = self.ctx.moduli()
        shadow = None if self.shadow is None else -self.shadow
        return ProfiniteInt(self.ctx, tuple(-r % m for r, m in zip(self.residues, mods)), shadow)

    def is_zero(self):
        if self.shadow is not None:
            return TriBool.of(self.shadow == 0)
        return TriBool.UNDETERMINED if not any(self.residues) else TriBool.FALSE

    def to_json(self):
        out = {"ctx": self.ctx.to_json(), "form": self.form}
        if self.shadow is not None:
            out["value"] = str(self.shadow)
        else:
            out["residues"] = {str(p): str(r) for p, r in zip(self.ctx.primes, self.residues)}
        return out

    @classmethod
    def from_json(cls, data):
        ctx = PrecisionContext.from_json(data["ctx"])
        if data["form"] == "shadow":
            return cls.of_int(int(data["value"]), ctx)
        return cls.window({int(p): int(r) for p, r in data["residues"].items()}, ctx)


def pf_ring(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown ring operation {op!r}")


def crt_pack(x):
    """The residue mod the context modulus matching x's per-prime residues."""
    r, _ = crt(x.residues, x.ctx.moduli())
    return r


def crt_unpack(r, ctx):
    if not 0 <= r < ctx.modulus:
        raise ValueError("residue out of range for the context modulus")
    return ProfiniteInt(ctx, tuple(r % m for m in ctx.moduli()))


@dataclass(frozen=True)
class Valuation:
    k: int
    exact: bool

    def __str__(self):
        return f"Exact({self.k})" if self.exact else f"AtLeast({self.k})"


def Exact(k):
    return Valuation(k, True)


def AtLeast(k):
    return Valuation(k, False)


def pf_valuation(x, p):
    cap = x.ctx.cap(p)
    if x.shadow is not None:
        return Exact(valuation(x.shadow, p)) if x.shadow else AtLeast(cap)
    r = x.residue(p)
    return Exact(valuation(r, p)) if r else AtLeast(cap)


def val_of_sum(a, b):
    """Valuation of x + y given those of x and y (ultrametric rule)."""
    if a.exact and b.exact:
        return Exact(min(a.k, b.k)) if a.k != b.k else AtLeast(a.k)
    if a.exact and a.k < b.k:
        return Exact(a.k)
    if b.exact and b.k < a.k:
        return Exact(b.k)
    return AtLeast(min(a.k, b.k))


def _positive_outside(phi, ctx):
    """Whether phi is nonzero at some prime outside the context."""
    if any(e > 0 for e in _classes(phi)):
        return True
    return any(p not in ctx.primes and e > 0 for p, e in phi.exceptions)


def _classes(phi):
    d = phi.default
    return (d.even, d.odd) if isinstance(d, ParityRule) else (d, d)


def subgroup_member(phi, x):
    """Membership of x in prod_p p^phi(p) Z_p."""
    if x.shadow is not None:
        return TriBool.of(sn_le(phi, sn_of_integer(x.shadow)))
    verdicts = []
    for p in x.ctx.primes:
        v, e = pf_valuation(x, p), phi(p)
        if v.exact:
            verdicts.append(TriBool.of(v.k >= e))
        else:
            verdicts.append(TriBool.TRUE if v.k >= e else TriBool.UNDETERMINED)
    if _positive_outside(phi, x.ctx):
        verdicts.append(TriBool.UNDETERMINED)
    return all3(verdicts)


@dataclass(frozen=True)
class Component:
    """G_p: Z/p^n when the exponent is finite, Z_p (kept mod p^cap) when omega."""

    p: int
    exponent: object
    cap: int

    @property
    def kind(self):
        return "padic" if self.exponent is OMEGA else "cyclic"

    @property
    def work(self):
        """Exponent of the modulus that coordinates are reduced by."""
        return min(self.exponent, self.cap)

    @property
    def modulus(self):
        return self.p ** self.work

    @property
    def truncated(self):
        return self.exponent > self.cap

    @property
    def trivial(self):
        return self.exponent == 0

    def label(self, unicode=False):
        if self.exponent is OMEGA:
            return f"Z{self.p}(truncated)" if not unicode else f"Z{_sub(self.p)}(truncated)"
        return f"Z/{self.p ** self.exponent}"

    def json_label(self):
        if self.exponent is OMEGA:
            return f"Z{self.p}(truncated)"
        return f"Z/{self.p}^{self.exponent}"


_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def _sub(n):
    return str(n).translate(_SUBSCRIPTS)


@dataclass(frozen=True)
class ProcyclicQuotient:
    """prod_p G_p over the context primes; the rest is summarized by ``phi``."""

    ctx: PrecisionContext
    phi: SupernaturalNumber
    components: tuple

    def component(self, p):
        return self.components[self.ctx.primes.index(p)]

    def identity(self):
        return QuotientElement(self, (0,) * len(self.components), 0)

    def outside_summary(self):
        outside = [f"{p}:{e}" for p, e in self.phi.exceptions if p not in self.ctx.primes]
        text = f"primes outside the context follow default={self.phi.default}"
        if outside:
            text += "; exceptions " + ", ".join(outside)
        return text

    def describe(self, unicode=True):
        parts = [c.label(unicode) for c in self.components if not c.trivial]
        return " × ".join(parts) if parts else "trivial group"

    def to_json(self):
        return {str(c.p): c.json_label() for c in self.components if not c.trivial}


def quotient_from_profile(phi, ctx):
    comps = tuple(Component(p, phi(p), c) for p, c in zip(ctx.primes, ctx.caps))
    return ProcyclicQuotient(ctx, phi, comps)


@dataclass(frozen=True)
class QuotientElement:
    parent: ProcyclicQuotient
    coords: tuple
    shadow: Optional[int] = None

    def coord(self, p):
        return self.coords[self.parent.ctx.primes.index(p)]

    def _check(self, other):
        if other.parent != self.parent:
            raise ContextMismatch("quotient elements from different groups")

    def __add__(self, other):
        self._check(other)
        cs = tuple((a + b) % c.modulus for a, b, c in zip(self.coords, other.coords, self.parent.components))
        sh = None if self.shadow is None or other.shadow is None else self.shadow + other.shadow
        return QuotientElement(self.parent, cs, sh)

    def __neg__(self):
        cs = tuple(-a % c.modulus for a, c in zip(self.coords, self.parent.components))
        return QuotientElement(self.parent, cs, None if self.shadow is None else -self.shadow)

    def __eq__(self, other):
        # coordinates are the element; the shadow only records a known preimage
        if not isinstance(other, QuotientElement):
            return NotImplemented
        return self.parent == other.parent and self.coords == other.coords

    def __hash__(self):
        return hash((self.parent, self.coords))

    def at_precision_zero(self):
        return not any(self.coords)

    def is_identity(self):
        """Whether the element is the identity of prod_p G_p (three-valued)."""
        if self.shadow is not None:
            n = self.shadow
            return TriBool.of(n == 0 or sn_le(self.parent.phi, sn_of_integer(n)))
        verdicts = []
        for a, c in zip(self.coords, self.parent.components):
            if a:
                verdicts.append(TriBool.FALSE)
            elif c.truncated:
                verdicts.append(TriBool.UNDETERMINED)
        if _positive_outside(self.parent.phi, self.parent.ctx):
            verdicts.append(TriBool.UNDETERMINED)
        return all3(verdicts)


def sigma_w(x, Q):
    if x.ctx != Q.ctx:
        raise ContextMismatch("element and quotient use different precision contexts")
    coords = tuple(r % c.modulus for r, c in zip(x.residues, Q.components))
    return QuotientElement(Q, coords, x.shadow)


@dataclass(frozen=True)
class Order:
    kind: str  # "finite" or "infinite_at_precision"
    n: Optional[int] = None
    truncated: bool = False

    def __str__(self):
        if self.kind == "finite":
            return f"Finite({self.n})" + (" at precision" if self.truncated else "")
        return "InfiniteAtPrecision"


def _coord_order(a, c, shadow):
    if shadow is not None and c.kind == "cyclic":
        n = shadow % (c.p ** c.exponent)
        k = valuation(n, c.p) if n else c.exponent
        return c.p ** (c.exponent - k)
    if not a:
        return 1
    return c.p ** (c.work - valuation(a, c.p))


def torsion_order(e):
    """Order of the projection of e onto the cyclic components."""
    comps = [(a, c) for a, c in zip(e.coords, e.parent.components) if c.kind == "cyclic"]
    return lcm_all(_coord_order(a, c, e.shadow) for a, c in comps)


def element_order(e):
    padic = [(a, c) for a, c in zip(e.coords, e.parent.components) if c.kind == "padic"]
    if e.shadow is not None:
        if padic and e.shadow != 0:
            return Order("infinite_at_precision")
    elif any(a for a, _ in padic):
        return Order("infinite_at_precision")
    truncated = e.shadow is None and any(c.truncated for c in e.parent.components)
    return Order("finite", torsion_order(e), truncated)
