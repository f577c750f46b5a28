import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from ultracong.logic import TriBool
from ultracong.primes import valuation
from ultracong.profinite import (
    AtLeast, ContextMismatch, Exact, PrecisionContext, ProfiniteInt, crt_pack, crt_unpack,
    element_order, pf_ring, pf_valuation, quotient_from_profile, sigma_w, subgroup_member,
    torsion_order, val_of_sum,
)
from ultracong.supernatural import OMEGA, parse_sn

from strategies import supernaturals

CTX = PrecisionContext.of([2, 3, 5, 7], 4)


def windows(ctx=CTX):
    return st.tuples(*(st.integers(0, m - 1) for m in ctx.moduli())).map(lambda r: ProfiniteInt(ctx, r))


elements = st.one_of(windows(), st.integers(-10 ** 9, 10 ** 9).map(lambda n: ProfiniteInt.of_int(n, CTX)))


def test_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext((3, 2), (1, 1))
    with pytest.raises(ValueError):
        PrecisionContext((2,), (0,))
    with pytest.raises(KeyError):
        CTX.cap(11)
    assert PrecisionContext.from_json(json.loads(json.dumps(CTX.to_json()))) == CTX


def test_shadow_consistency_enforced():
    with pytest.raises(ValueError):
        ProfiniteInt(CTX, (1, 0, 0, 0), shadow=2)
    with pytest.raises(ValueError):
        ProfiniteInt(CTX, (16, 0, 0, 0))


def test_context_mismatch():
    other = PrecisionContext.of([2, 3], 4)
    with pytest.raises(ContextMismatch):
        ProfiniteInt.of_int(1, CTX) + ProfiniteInt.of_int(1, other)
    with pytest.raises(ContextMismatch):
        sigma_w(ProfiniteInt.of_int(1, other), quotient_from_profile(parse_sn("default=1"), CTX))


@given(st.integers(-10 ** 12, 10 ** 12), st.integers(-10 ** 12, 10 ** 12))
def test_of_int_is_a_ring_homomorphism(a, b):
    A, B = ProfiniteInt.of_int(a, CTX), ProfiniteInt.of_int(b, CTX)
    assert A + B == ProfiniteInt.of_int(a + b, CTX)
    assert A - B == ProfiniteInt.of_int(a - b, CTX)
    assert A * B == ProfiniteInt.of_int(a * b, CTX)
    assert -A == ProfiniteInt.of_int(-a, CTX)
    assert pf_ring(A, B, "mul") == A * B


@given(elements, elements, elements)
def test_ring_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    d = x + (-x)
    assert not any(d.residues) and d.is_zero() is not TriBool.FALSE


@given(elements)
def test_crt_round_trip(x):
    r = crt_pack(x)
    assert 0 <= r < CTX.modulus
    assert crt_unpack(r, CTX).residues == x.residues


@given(st.integers(-10 ** 9, 10 ** 9).filter(bool), st.sampled_from([2, 3, 5, 7]))
def test_valuation_of_shadow_is_exact(n, p):
    assert pf_valuation(ProfiniteInt.of_int(n, CTX), p) == Exact(valuation(n, p))


@given(windows(), windows(), st.sampled_from([2, 3, 5, 7]))
def test_val_of_sum_is_sound(x, y, p):
    predicted = val_of_sum(pf_valuation(x, p), pf_valuation(y, p))
    actual = pf_valuation(x + y, p)
    if predicted.exact:
        assert actual == predicted
    else:
        assert actual.k >= predicted.k


def test_val_of_sum_table():
    assert val_of_sum(Exact(1), Exact(3)) == Exact(1)
    assert val_of_sum(Exact(2), Exact(2)) == AtLeast(2)
    assert val_of_sum(Exact(1), AtLeast(4)) == Exact(1)
    assert val_of_sum(AtLeast(1), AtLeast(4)) == AtLeast(1)


def test_json_round_trip_big_numbers():
    big = ProfiniteInt.of_int(10 ** 40 + 7, CTX)
    data = json.loads(json.dumps(big.to_json()))
    assert data["value"] == str(10 ** 40 + 7)
    assert ProfiniteInt.from_json(data) == big
    w = ProfiniteInt.window({2: 3, 5: 10}, CTX)
    assert ProfiniteInt.from_json(json.loads(json.dumps(w.to_json()))) == w


def test_subgroup_membership_examples():
    phi = parse_sn("default=0;2:3")
    assert subgroup_member(phi, ProfiniteInt.of_int(8, CTX)) is TriBool.TRUE
    assert subgroup_member(phi, ProfiniteInt.of_int(4, CTX)) is TriBool.FALSE
    assert subgroup_member(parse_sn("default=1"), ProfiniteInt.window({2: 2, 3: 3, 5: 5, 7: 7}, CTX)) \
        is TriBool.UNDETERMINED
    assert subgroup_member(parse_sn("default=0;2:omega"), ProfiniteInt.window({}, CTX)) is TriBool.UNDETERMINED


def test_quotient_structure():
    Q = quotient_from_profile(parse_sn("default=0;2:3,3:omega"), CTX)
    assert Q.describe() == "Z/8 × Z₃(truncated)"
    assert Q.to_json() == {"2": "Z/2^3", "3": "Z3(truncated)"}
    one = sigma_w(ProfiniteInt.of_int(1, CTX), Q)
    assert torsion_order(one) == 8
    assert one.coord(3) != 0
    assert element_order(one).kind == "infinite_at_precision"
    eight = sigma_w(ProfiniteInt.of_int(8, CTX), Q)
    assert eight.coord(2) == 0 and element_order(eight).kind == "infinite_at_precision"
    assert quotient_from_profile(parse_sn("default=0"), CTX).describe() == "trivial group"


def test_finite_order_when_no_padic_part():
    Q = quotient_from_profile(parse_sn("default=0;2:3,3:1"), CTX)
    e = sigma_w(ProfiniteInt.of_int(2, CTX), Q)
    assert element_order(e).kind == "finite" and element_order(e).n == 12


@given(supernaturals(primes=[2, 3, 5, 7, 11]), elements)
def test_kernel_law(phi, x):
    Q = quotient_from_profile(phi, CTX)
    assert sigma_w(x, Q).is_identity() is subgroup_member(phi, x)


@given(supernaturals(primes=[2, 3, 5, 7]), elements, elements)
def test_sigma_is_a_homomorphism(phi, x, y):
    Q = quotient_from_profile(phi, CTX)
    assert sigma_w(x + y, Q) == sigma_w(x, Q) + sigma_w(y, Q)
    assert sigma_w(-x, Q) == -sigma_w(x, Q)
