import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudoarc import errors
from pseudoarc import interval as iv

from .helpers import random_pl_surjection, random_walk_map


def test_build_rejects_big_steps_and_range():
    with pytest.raises(errors.StepViolation):
        iv.build_simplicial(3, [0, 2, 3])
    with pytest.raises(errors.RangeViolation):
        iv.build_simplicial(2, [0, 1, 2, 3])
    with pytest.raises(errors.RangeViolation):
        iv.build_simplicial(2, [])


def test_float_rejected():
    with pytest.raises(errors.ParseError):
        iv.rational(0.5)
    assert iv.rational("3/6") == F(1, 2)


def test_combinators():
    s = iv.build_simplicial(2, [0, 1, 2])
    t = iv.build_simplicial(2, [2, 1])
    assert iv.concat(s, t).tolist() == [0, 1, 2, 1]
    with pytest.raises(errors.ConcatMismatch):
        iv.concat(s, iv.build_simplicial(2, [0, 1]))
    assert iv.include(2, 1, 4).tolist() == [1, 2, 3]
    with pytest.raises(errors.IncludeOutOfRange):
        iv.include(3, 2, 4)
    assert iv.reverse(3).tolist() == [3, 2, 1, 0]
    assert iv.combinators("reverse", s).tolist() == [2, 1, 0]


def test_compose_simplicial_matches_lists():
    rng = random.Random(3)
    for _ in range(50):
        inner = random_walk_map(rng, rng.randint(1, 20), rng.randint(1, 8))
        outer = random_walk_map(rng, inner.codomain_size, rng.randint(1, 8))
        got = iv.compose(outer, inner).tolist()
        assert got == [outer.tolist()[v] for v in inner.tolist()]


def test_compose_domain_mismatch():
    with pytest.raises(errors.DomainMismatch):
        iv.compose(iv.identity(3), iv.identity(2))


def test_pl_canonical_form_merges_collinear():
    f = iv.PLMap([(0, 0), (F(1, 3), F(1, 3)), (1, 1)])
    assert f == iv.pl_identity()
    assert len(f.xs) == 2


def test_pl_rejects_bad_input():
    with pytest.raises(errors.InvalidPLMap):
        iv.PLMap([(0, 0), (F(1, 2), 2), (1, 1)])
    with pytest.raises(errors.InvalidPLMap):
        iv.PLMap([(0, 0), (F(1, 2), 1), (F(1, 2), 0), (1, 1)])


fracs = st.fractions(min_value=0, max_value=1, max_denominator=50)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.lists(fracs, min_size=1, max_size=6))
def test_compose_pl_pointwise(seed, xs):
    rng = random.Random(seed)
    f = random_pl_surjection(rng, rng.randint(2, 6))
    g = random_pl_surjection(rng, rng.randint(2, 6))
    h = iv.compose_pl(g, f)
    for x in xs:
        assert h(x) == g(f(x))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_sup_dist_dominates_samples(seed):
    rng = random.Random(seed)
    f = random_pl_surjection(rng, rng.randint(2, 6))
    g = random_pl_surjection(rng, rng.randint(2, 6))
    d, x = iv.sup_dist_witness(f, g)
    assert d == iv.sup_dist(f, g) == abs(f(x) - g(x))
    for k in range(101):
        t = F(k, 100)
        assert abs(f(t) - g(t)) <= d


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_pl_serialization_roundtrip(seed):
    f = random_pl_surjection(random.Random(seed), 5)
    assert iv.PLMap.from_csv(f.to_csv()) == f
    assert iv.PLMap.from_json(f.to_json()) == f


def test_modulus():
    mod = iv.modulus(iv.tent())
    assert mod.lipschitz == 2
    assert mod.delta(F(1, 2)) == F(1, 4)
    assert mod.witnesses(F(1, 2), F(1, 4))
    assert not mod.witnesses(F(1, 2), F(1, 3))


def test_realize_and_lazy_realization_agree():
    s = iv.build_simplicial(3, [0, 1, 2, 1, 2, 3])
    f = iv.realize(s)
    assert f(F(2, 5)) == F(2, 3)
    assert f(F(1, 2)) == F(1, 2)

    class Lazy(iv.LazyMap):
        m, codomain_size = 5, 3

        def at(self, i):
            return s.at(i)

    lf = iv.realize(Lazy())
    for k in range(41):
        assert lf(F(k, 40)) == f(F(k, 40))


def test_realize_degenerate():
    with pytest.raises(errors.DegenerateCodomain):
        iv.realize(iv.build_simplicial(2, [1]))
    assert iv.realize(iv.build_simplicial(0, [0, 0])) == iv.pl_constant(0)


def test_svg_roundtrip():
    s = iv.build_simplicial(3, [0, 1, 2, 1, 2, 3])
    pts = iv.parse_svg_polyline(iv.simplicial_to_svg(s))
    assert pts == list(enumerate(s.tolist()))


def test_simplicial_json_roundtrip():
    s = iv.build_simplicial(3, [0, 1, 2, 1, 2, 3])
    assert iv.SimplicialMap.from_json(s.to_json()) == s
