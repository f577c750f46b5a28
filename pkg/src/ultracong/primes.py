"""Small number-theory helpers shared across modules."""

from functools import lru_cache, reduce
from math import gcd

from sympy import factorint as _factorint
from sympy import isprime, nextprime, prime, primepi

__all__ = [
    "isprime", "nextprime", "nth_prime", "prime_index", "factor",
    "valuation", "first_primes", "crt", "lcm_all",
]


@lru_cache(maxsize=4096)
def nth_prime(k):
    """The k-th prime, 1-based (nth_prime(1) == 2)."""
    return int(prime(k))


@lru_cache(maxsize=4096)
def prime_index(p):
    """Position of the prime p in the increasing enumeration, 1-based."""
    return int(primepi(p))


@lru_cache(maxsize=65536)
def _factor_items(n):
    return tuple((int(p), int(e)) for p, e in sorted(_factorint(n).items()))


def factor(n):
    """Prime factorization of |n| as a dict; n must be nonzero."""
    if n == 0:
        raise ValueError("cannot factor 0")
    return dict(_factor_items(abs(n)))


def valuation(n, p):
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is unbounded")
    k = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        k += 1
    return k


def first_primes(count):
    out = []
    p = 2
    while len(out) < count:
        out.append(p)
        p = int(nextprime(p))
    return out


def crt(residues, moduli):
    """Least non-negative x with x = r_i mod m_i for pairwise coprime m_i.

    Returns (x, M) with M the product of the moduli.
    """
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        if gcd(m, n) != 1:
            raise ValueError(f"moduli not coprime: {m}, {n}")
        # lift x (mod m) to the unique class mod m*n that is r mod n
        t = ((r - x) * pow(m, -1, n)) % n
        x += m * t
        m *= n
    return x % m, m


def lcm_all(values):
    return reduce(lambda a, b: a * b // gcd(a, b), values, 1)
