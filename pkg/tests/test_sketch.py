import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ultracong.logic import TriBool
from ultracong.profinite import PrecisionContext, ProfiniteInt
from ultracong.setalg import FiniteSet
from ultracong.sketch import (
    Engine, ForcingViolation, Principal, Principality, Profile, SelfdivClass, Verdict, canonical_pi,
    factorial_sketch, is_max, max_plus_one, max_profile, mk_sketch, multiple, neg, pi_of,
    power_of_two, prime_parity_product, selfdiv_classify, sigma_injectivity_probe, sk_sum,
    ultra_quotient,
)
from ultracong.supernatural import OMEGA, SnClass, SupernaturalNumber, d_enumerate, parse_sn

from corpus import build, random_desc, random_selfdiv_desc

CTX = PrecisionContext.default()


@pytest.fixture
def engine():
    return Engine(CTX)


def test_principal_sketch():
    s = Principal(6)
    assert s.phi == parse_sn("default=0;2:1,3:1")
    assert pi_of(s, CTX).shadow == 6 and s.selfdiv is TriBool.TRUE
    assert Principal(0).selfdiv is TriBool.TRUE


def test_named_profiles():
    w = sk_sum(max_profile(CTX), Principal(1))
    assert w.phi.is_all(0) and w.pi.shadow == 1
    assert w.principality is Principality.NONPRINCIPAL and w.selfdiv is TriBool.FALSE
    assert max_plus_one(CTX).phi == w.phi and max_plus_one(CTX).pi == w.pi
    a = power_of_two(CTX)
    assert a.phi == parse_sn("default=0;2:omega") and a.selfdiv is TriBool.TRUE
    assert is_max(max_profile(CTX)) is TriBool.TRUE and is_max(a) is TriBool.FALSE
    assert is_max(factorial_sketch(CTX)) is TriBool.TRUE


def test_forcing_rules():
    finite = parse_sn("default=0;2:3")
    with pytest.raises(ForcingViolation):
        mk_sketch(finite, CTX, selfdiv=TriBool.TRUE)
    assert mk_sketch(finite, CTX).selfdiv is TriBool.FALSE
    assert mk_sketch(finite, CTX, principality=Principality.UNKNOWN).selfdiv is TriBool.UNDETERMINED
    with pytest.raises(ForcingViolation):
        mk_sketch(parse_sn("default=omega"), CTX, selfdiv=TriBool.FALSE)
    assert mk_sketch(parse_sn("default=omega;3:1"), CTX).selfdiv is TriBool.TRUE


def test_consistency_with_pi():
    with pytest.raises(ValueError):
        mk_sketch(parse_sn("default=0;2:3"), CTX, pi=ProfiniteInt.window({2: 4}, CTX))
    with pytest.raises(ValueError):
        mk_sketch(parse_sn("default=0;2:3"), CTX, pi=ProfiniteInt.of_int(0, CTX))
    s = mk_sketch(parse_sn("default=omega"), CTX, pi=ProfiniteInt.window({}, CTX))
    assert s.pi.shadow == 0


def test_sum_examples():
    assert sk_sum(Principal(2), Principal(3)) == Principal(5)
    s = sk_sum(prime_parity_product(CTX, True), prime_parity_product(CTX, False))
    assert s.phi.is_all(0) and s.phi_exact and s.selfdiv is TriBool.FALSE
    assert d_enumerate(s.phi, 10) == [-1, 1]


def test_sum_widens_and_window_tightens():
    u = mk_sketch(parse_sn("default=1"), CTX)
    v = neg(u)
    s = sk_sum(u, v)  # same base: exact cancellation
    assert is_max(s) is TriBool.TRUE
    w = mk_sketch(parse_sn("default=1"), CTX, label="other")
    t = sk_sum(u, w)
    # inside the context the window decides; outside only [1, omega] is known
    assert t.phi(3) == 1 and t.phi_upper(3) == 1
    assert t.phi(2) == 2
    assert t.phi(31) == 1 and t.phi_upper(31) is OMEGA


def test_neg_and_multiple():
    a = power_of_two(CTX)
    assert neg(neg(a)) is a
    assert multiple(a, -1) == neg(a)
    m = multiple(a, 6)
    assert m.phi(3) == 1 and m.phi(2) is OMEGA and m.pi == 6 * a.pi
    assert multiple(Principal(4), 3) == Principal(12)


def test_tilde_examples(engine):
    w = max_plus_one(CTX)
    assert engine.divides_tilde(Principal(3), Principal(12)).value is TriBool.TRUE
    v = engine.divides_tilde(w, Principal(-1))
    assert v.value is TriBool.FALSE and v.rules == ["R4"]
    v = engine.divides_tilde(power_of_two(CTX), max_profile(CTX))
    assert v.value is TriBool.TRUE and v.rules == ["R2"]
    v = engine.divides_tilde(w, neg(w))
    assert v.value is TriBool.TRUE and v.rules == ["R3"]
    with pytest.raises(ValueError):
        engine.divides_tilde(Principal(0), w)


def test_strong_examples(engine):
    w, a = max_plus_one(CTX), power_of_two(CTX)
    v = engine.divides_strong(w, w)
    assert v.value is TriBool.FALSE and v.rules == ["S3"]
    v = engine.divides_strong(a, a)
    assert v.value is TriBool.TRUE and v.rules == ["S4"]
    v = engine.divides_strong(Principal(4), a)
    assert v.value is TriBool.TRUE and v.rules == ["S1"]
    assert engine.divides_strong(Principal(3), a).value is TriBool.FALSE


def test_transfer_uses_cache():
    eng = Engine(CTX, cache_size=4)
    w = mk_sketch(parse_sn("default=1"), CTX, label="w")
    assert eng.divides_tilde(w, neg(w)).value is TriBool.TRUE
    assert (w, neg(w)) in eng._tilde_facts
    # record w ~| s for a self-divisible s, then s |s u decides w |s u
    s = mk_sketch(parse_sn("default=1;2:omega"), CTX, selfdiv=TriBool.TRUE, label="s")
    eng._remember(w, s)
    u = mk_sketch(parse_sn("default=2;2:omega"), CTX, label="u")
    v = eng.divides_strong(w, u)
    assert v.value is TriBool.TRUE and v.rules == ["S5"]
    assert Engine(CTX).divides_strong(w, u).value is TriBool.UNDETERMINED
    for k in range(10):
        eng._remember(w, Principal(k + 1))
    assert len(eng._tilde_facts) == 4


def test_example_triple(engine):
    w = max_plus_one(CTX)
    assert engine.weak_congruent(Principal(0), w, w).value is TriBool.TRUE
    assert engine.weak_congruent(w, Principal(1), w).value is TriBool.TRUE
    assert engine.weak_congruent(Principal(0), Principal(1), w).value is TriBool.FALSE
    assert engine.strong_congruent(w, Principal(0), w).value is TriBool.FALSE


def test_principal_congruence(engine):
    for rel in (engine.weak_congruent, engine.strong_congruent):
        assert rel(Principal(14), Principal(2), Principal(6)).value is TriBool.TRUE
        assert rel(Principal(14), Principal(3), Principal(6)).value is TriBool.FALSE


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_reflexivity(rng):
    eng = Engine(CTX)
    u = build(random_desc(rng), CTX)
    w = build(random_desc(rng), CTX)
    if w == Principal(0):
        return
    assert eng.weak_congruent(u, u, w).value is TriBool.TRUE


def test_coincidence_and_strong_transitivity():
    rng = random.Random(11)
    for _ in range(300):
        eng = Engine(CTX, coincidence=False)
        w = build(random_selfdiv_desc(rng), CTX)
        a, b, c = (build(random_desc(rng), CTX) for _ in range(3))
        weak, strong = eng.weak_congruent(a, b, w).value, eng.strong_congruent(a, b, w).value
        if weak.decisive and strong.decisive:
            assert weak is strong
        ab, bc, ac = (eng.strong_congruent(x, y, w).value for x, y in ((a, b), (b, c), (a, c)))
        if ab is TriBool.TRUE and bc is TriBool.TRUE:
            assert ac is not TriBool.FALSE


def test_traces_are_replayable():
    rng = random.Random(5)
    eng = Engine(CTX)
    for _ in range(300):
        w, u = build(random_desc(rng), CTX), build(random_desc(rng), CTX)
        if w == Principal(0):
            continue
        for rel, fn in (("tilde", eng.divides_tilde), ("strong", eng.divides_strong)):
            v = fn(w, u)
            if v.value.decisive:
                assert v.trace
            assert eng.replay(v, rel, w, u)
            assert Verdict.from_json(v.to_json()) == v


def test_powers_congruent(engine):
    assert engine.powers_congruent(Principal(3), 1, 2).value is TriBool.TRUE
    assert engine.powers_congruent(power_of_two(CTX), 1, 2).value is TriBool.TRUE
    w = max_plus_one(CTX)
    for n, m in ((1, 2), (2, 5), (3, 1)):
        v = engine.powers_congruent(w, n, m)
        assert v.value is TriBool.FALSE and "S3" in v.rules
    with pytest.raises(ValueError):
        engine.powers_congruent(w, 2, 2)


def test_selfdiv_classify():
    assert selfdiv_classify(parse_sn("default=0;2:3")).cls is SelfdivClass.FORCED_NON_SELFDIV_UNLESS_PRINCIPAL
    assert selfdiv_classify(parse_sn("default=omega")).cls is SelfdivClass.FORCED_SELFDIV
    rep = selfdiv_classify(SupernaturalNumber((), 2))
    assert rep.cls is SelfdivClass.BOTH_POSSIBLE and rep.certificates and rep.verified
    assert {c.side for c in rep.certificates} == {"union", "complement"}


def quotient_oracle(a, b, universe=range(-6, 7)):
    """All A within the universe with {n : nA contains b} containing a, by brute force."""
    pts = list(universe)
    family = []
    for mask in range(1 << len(pts)):
        A = {pts[i] for i in range(len(pts)) if mask >> i & 1}
        if b in {a * x for x in A}:
            family.append(frozenset(A))
    return family


@pytest.mark.parametrize("a,b", [(3, 12), (2, 3), (5, 5), (-2, 6), (2, -6), (4, 0)])
def test_ultra_quotient_against_oracle(a, b):
    q = ultra_quotient(Principal(a), Principal(b))
    family = quotient_oracle(a, b)
    if q.kind == "principal":
        assert family and all(q.r in A for A in family)
        assert len(family) == 1 << 12  # exactly the sets containing r
    else:
        assert q.kind == "empty" and family == []
    assert ultra_quotient(Principal(0), Principal(0)).kind == "undetermined"
    assert ultra_quotient(Principal(0), Principal(1)).kind == "empty"
    assert ultra_quotient(max_profile(CTX), Principal(1)).kind == "undetermined"


def test_sigma_probe():
    rep = sigma_injectivity_probe(max_profile(CTX), CTX, samples=300)
    assert rep.is_max and rep.injective_at_precision and rep.kernel_hits == 0
    w = mk_sketch(parse_sn("default=omega;2:3"), CTX)
    rep = sigma_injectivity_probe(w, CTX)
    assert rep.p0 == 2 and rep.k0 == 4 and rep.witness.residue(2) == 8
    assert rep.witness_nonzero and rep.witness_in_kernel_at_precision and rep.witness_in_kernel_exact
    rep = sigma_injectivity_probe(Principal(6), CTX)
    assert not rep.injective_at_precision and rep.witness_in_kernel_exact
    with pytest.raises(ValueError):
        sigma_injectivity_probe(w, CTX, k0=3)
    with pytest.raises(ValueError):
        sigma_injectivity_probe(mk_sketch(parse_sn("default=omega;31:2"), CTX), CTX)


@given(st.integers(-60, 60), st.integers(-60, 60), st.integers(-25, 25).filter(bool))
def test_integer_fast_path_matches_rule_cascade(a, b, n):
    eng = Engine(CTX)
    u, v, w = Principal(a), Principal(b), Principal(n)
    d, _ = eng.difference(u, v)
    assert eng.weak_congruent(u, v, w).value is eng.divides_tilde(w, d).value
    assert eng.strong_congruent(u, v, w).value is eng.divides_strong(w, d).value
    assert eng.weak_congruent(u, v, w).rules[1:] == eng.divides_tilde(w, d).rules
