import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudoarc import errors
from pseudoarc import supernatural as sn

INF = math.inf
UNIVERSE = (2, 3, 5, 7)
GENERIC = 101          # stands for every prime outside UNIVERSE

exps = st.sampled_from([0, 1, 2, 3, INF])


@st.composite
def supers(draw, allow_zero=True):
    if allow_zero and draw(st.integers(0, 15)) == 0:
        return sn.Supernatural.of_zero()
    default = draw(exps)
    exc = draw(st.dictionaries(st.sampled_from(UNIVERSE), exps, max_size=4))
    return sn.Supernatural(default, exc)


def points(s):
    """Pointwise oracle view: exponents at the universe plus one generic prime."""
    if s.zero:
        return "zero"
    return tuple(s(p) for p in UNIVERSE + (GENERIC,))


def o_mul(a, b):
    if a == "zero" or b == "zero":
        return "zero"
    return tuple(x + y for x, y in zip(a, b))


def o_leq(a, b):
    if b == "zero":
        return True
    if a == "zero":
        return False
    return all(x <= y for x, y in zip(a, b))


def o_equiv(a, b):
    if a == "zero" or b == "zero":
        return a == b
    same_fiber = all((x == INF) == (y == INF) for x, y in zip(a, b))
    return same_fiber and a[-1] == b[-1]


@settings(max_examples=300, deadline=None)
@given(supers(), supers())
def test_mul_matches_pointwise_oracle(s, t):
    assert points(s * t) == o_mul(points(s), points(t))
    assert s * t == t * s


@settings(max_examples=200, deadline=None)
@given(supers(), supers(), supers())
def test_mul_associative(s, t, u):
    assert (s * t) * u == s * (t * u)


@settings(max_examples=100, deadline=None)
@given(supers())
def test_one_is_identity(s):
    assert s * sn.Supernatural.one() == s


@settings(max_examples=300, deadline=None)
@given(supers(), supers())
def test_leq_and_solve(s, t):
    assert sn.leq(s, t) == o_leq(points(s), points(t))
    u = sn.multiplication_solve(s, t)
    if sn.leq(s, t):
        assert u is not sn.NoSolution
        assert u * s == t
    else:
        assert u is sn.NoSolution


@settings(max_examples=300, deadline=None)
@given(supers(), supers())
def test_type_equiv_oracle(s, t):
    assert sn.type_equiv(s, t) == o_equiv(points(s), points(t))
    assert (sn.TypeClass(s) == sn.TypeClass(t)) == sn.type_equiv(s, t)


@st.composite
def equivalent_pair(draw):
    """s together with a finite perturbation of s off its infinity fiber."""
    s = draw(supers())
    if s.zero:
        return s, s
    exc = {}
    for p in UNIVERSE:
        e = s(p)
        exc[p] = e if e == INF else draw(st.integers(0, 3))
    return s, sn.Supernatural(s.default, exc)


@settings(max_examples=200, deadline=None)
@given(equivalent_pair(), equivalent_pair())
def test_type_is_a_congruence(st_pair, tt_pair):
    (s, s2), (t, t2) = st_pair, tt_pair
    assert sn.type_equiv(s, s2) and sn.type_equiv(t, t2)
    assert sn.type_equiv(s * t, s2 * t2)


@settings(max_examples=200, deadline=None)
@given(supers(allow_zero=False))
def test_canonical_representative(s):
    c = sn.TypeClass(s).canonical()
    assert sn.type_equiv(c, s)
    assert sn.TypeClass(c).canonical() == c


@settings(max_examples=200, deadline=None)
@given(supers())
def test_json_roundtrip(s):
    assert sn.Supernatural.from_json(s.to_json()) == s


degs = st.integers(-6, 6)


@settings(max_examples=200, deadline=None)
@given(st.lists(degs, max_size=5), st.lists(degs, min_size=1, max_size=3), st.integers(0, 10))
def test_prefix_cut_invariance(prefix, cycle, k):
    spec = sn.DegreeSequenceSpec(tuple(prefix), tuple(cycle))
    assert sn.type_of_sequence(spec) == sn.type_of_sequence(spec.tail(k))


def test_examples():
    two_inf = sn.Supernatural.power_inf([2])
    assert sn.Supernatural.of_int(12) == sn.Supernatural(0, {2: 2, 3: 1})
    assert repr(two_inf * sn.Supernatural.of_int(3)) == "2^∞·3"
    assert sn.type_equiv(two_inf, two_inf * sn.Supernatural.of_int(3))
    assert not sn.type_equiv(two_inf, sn.Supernatural.power_inf([3]))
    assert sn.multiplication_solve(sn.Supernatural.of_int(3), sn.Supernatural.of_int(12)).value() == 4
    assert sn.multiplication_solve(two_inf, two_inf) == sn.Supernatural.one()
    z = sn.Supernatural.of_zero()
    assert sn.leq(two_inf, z) and not sn.leq(z, two_inf)
    assert sn.multiplication_solve(z, two_inf) is sn.NoSolution


def test_sequence_types():
    spec = sn.DegreeSequenceSpec((3,), (2,))
    assert sn.type_of_sequence(spec) == sn.TypeClass(sn.Supernatural.power_inf([2]))
    assert sn.type_of_sequence(sn.DegreeSequenceSpec((5, 0), (1,))).is_zero is False
    assert sn.type_of_sequence(sn.DegreeSequenceSpec((), (0, 2))).is_zero
    assert sn.sequence_product(sn.DegreeSequenceSpec((2, -3), (1,))).value() == 6


def test_type_of_map_data():
    sX = sn.DegreeSequenceSpec((), (2,))
    sY = sn.DegreeSequenceSpec((), (2,))
    assert sn.type_of_map_data(sX, 0, sY, 0, 3) == sn.Supernatural(0, {2: 0, 3: 1})
    with pytest.raises(errors.IncoherentData):
        sn.type_of_map_data(sn.DegreeSequenceSpec((), (1,)), 0, sY, 0, 1)


def test_degree_sets():
    P = sn.PrimeSet.parse("2,3")
    assert sn.degree_set_membership(-12, P)
    assert not sn.degree_set_membership(10, P)
    assert not sn.degree_set_membership(0, P)
    assert sn.degree_set_membership(sn.Supernatural.power_inf([2]), P)
    allbut5 = sn.PrimeSet.parse("all-5")
    assert sn.degree_set_membership(sn.Supernatural(INF, {5: 0}), allbut5)
    assert not sn.degree_set_membership(sn.Supernatural(1), P)
    assert 7 in allbut5 and 5 not in allbut5
    with pytest.raises(errors.ParseError):
        sn.PrimeSet.parse("4")


def test_rejects_composite_exception():
    with pytest.raises(errors.ParseError):
        sn.Supernatural(0, {4: 1})
