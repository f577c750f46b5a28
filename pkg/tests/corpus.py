"""Deterministic random sketch corpora, described as data so they can be rebuilt per context."""

import random

from ultracong.logic import TriBool
from ultracong.scenarios import NAMED
from ultracong.sketch import Principal, mk_sketch, neg, sk_sum
from ultracong.supernatural import OMEGA, ParityRule, SnClass, SupernaturalNumber

EXPS = [0, 1, 2, 3, 4, 5, OMEGA]


def random_phi(rng, primes=(2, 3, 5, 7, 11, 13)):
    keys = rng.sample(primes, rng.randint(0, 3))
    exc = tuple((p, rng.choice(EXPS)) for p in keys)
    r = rng.random()
    if r < 0.5:
        default = rng.choice([0, 1, 2, OMEGA])
    else:
        default = ParityRule(rng.choice(EXPS), rng.choice(EXPS))
    return SupernaturalNumber(exc, default)


def random_desc(rng, depth=1, selfdiv=None):
    r = rng.random()
    if depth > 0 and r < 0.2:
        return ("sum", random_desc(rng, depth - 1), random_desc(rng, depth - 1))
    if depth > 0 and r < 0.3:
        return ("neg", random_desc(rng, depth - 1))
    if r < 0.55:
        return ("int", rng.choice([n for n in range(-40, 41)]))
    if r < 0.65:
        return ("named", rng.choice(sorted(NAMED)))
    phi = random_phi(rng)
    sd = selfdiv if selfdiv is not None else (rng.random() < 0.5 and phi.classify() is not SnClass.FINITE)
    return ("prof", phi, sd)


def random_selfdiv_desc(rng):
    r = rng.random()
    if r < 0.3:
        return ("int", rng.choice([n for n in range(-30, 31) if n]))
    if r < 0.45:
        return ("named", rng.choice(["2^a", "even-primes", "odd-primes", "factorial", "max"]))
    while True:
        phi = random_phi(rng)
        if phi.classify() is not SnClass.FINITE:
            return ("prof", phi, True)


def build(desc, ctx):
    kind = desc[0]
    if kind == "int":
        return Principal(desc[1])
    if kind == "named":
        return NAMED[desc[1]](ctx)
    if kind == "prof":
        return mk_sketch(desc[1], ctx, selfdiv=TriBool.TRUE if desc[2] else TriBool.UNDETERMINED,
                         label=f"p{abs(hash(desc)) % 10 ** 6}")
    if kind == "sum":
        return sk_sum(build(desc[1], ctx), build(desc[2], ctx))
    if kind == "neg":
        return neg(build(desc[1], ctx))
    raise ValueError(kind)
