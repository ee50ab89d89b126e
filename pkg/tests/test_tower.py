import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relex import groups as G
from relex import tower as T
from relex.errors import NotAQuotient, ResourceLimit


@pytest.fixture(scope="module")
def h2():
    t = T.build_tower(2, 2)
    return t, G.enumerate_group(t.reps[2])


def test_order_law_m2(h2):
    t, idx = h2
    assert [ix.order for ix in t.indices[:2]] == [1, 4]
    assert idx.order == 4 * 2 ** T.rank(4, 2) == 128


def test_order_law_m1_is_cyclic():
    idx = T.tower_index(1, 3)
    assert idx.order == 8
    assert T.gamma_series(idx).orders() == [8, 4, 2, 1]


def test_exponent_of_h2(h2):
    _, idx = h2
    x = np.arange(idx.order)
    sq = idx.mul_idx(x, x)
    assert np.all(idx.mul_idx(sq, sq) == 0)


def test_h2_gamma_series_is_the_tower(h2):
    _, idx = h2
    assert T.gamma_series(idx).orders() == [128, 32, 1]


def test_schreier_rank_and_words(h2):
    t, _ = h2
    sd = T.SchreierData.build(t.indices[1], 2)
    assert sd.rank == 5
    lazy = T.LazyTower(t.indices[1], 2)
    for arc in sd.arcs:
        # a Schreier word lies in the kernel of the projection and flips exactly its own arc
        x, S = lazy.from_word(sd.schreier_word(arc))
        assert x == 0 and S == frozenset({int(arc)})


@pytest.fixture(scope="module")
def lazy_h3(h2):
    _, idx = h2
    return T.LazyTower(idx, 2, level=3)


words = st.lists(st.sampled_from([1, 2, -1, -2]), max_size=30)


@settings(max_examples=40, deadline=None)
@given(words, words, words)
def test_lazy_level_is_a_group(lazy_h3, a, b, c):
    L = lazy_h3
    x, y, z = L.from_word(a), L.from_word(b), L.from_word(c)
    assert L.mul(L.mul(x, y), z) == L.mul(x, L.mul(y, z))
    assert L.mul(x, L.inv(x)) == L.identity
    assert L.from_word(a + b) == L.mul(x, y)


@settings(max_examples=30, deadline=None)
@given(words)
def test_lazy_squares_of_squares_of_squares_vanish(lazy_h3, w):
    L = lazy_h3
    x = L.from_word(w)
    for _ in range(3):
        x = L.mul(x, x)
    assert x == L.identity


def test_epimorphism_onto_dihedral(h2):
    _, idx = h2
    d8 = G.enumerate_group(G.DihedralGroup(3))
    phi = T.tower_epimorphism(idx, d8)
    assert phi.surjective and phi.verified == "exhaustive"
    assert T.nested_square_check(d8, 2, samples=300) == 0
    assert T.nested_square_check(d8, 1, samples=300) > 0


def test_q16_is_not_a_quotient_of_h2(h2):
    _, idx = h2
    q16 = G.enumerate_group(G.DicyclicGroup(4))
    with pytest.raises(NotAQuotient):
        T.tower_epimorphism(idx, q16)


def test_lazy_epimorphism_onto_q16(lazy_h3):
    q16 = G.enumerate_group(G.DicyclicGroup(4))
    phi = T.tower_epimorphism(lazy_h3, q16, samples=100)
    assert phi.verified == "exact-schreier" and phi.surjective


@pytest.mark.parametrize("n,order", [(1, 4), (2, 128), (3, 4096)])
def test_surrogate_orders(n, order):
    inst = T.box_family("sl2-surrogate", n)
    assert inst.order == order == 2 ** (5 * n - 3)
    assert inst.enumerate().order == order


def test_surrogate_beyond_cap_reports_largest_feasible():
    with pytest.raises(ResourceLimit) as err:
        T.box_family("sl2-surrogate", 5)
    assert err.value.largest_feasible == 4


def test_semidirect_family_level1():
    inst = T.box_family("sl2-semidirect", 1)
    assert len(inst.gens) == 5
    assert inst.enumerate().order == 4


def test_gamma_series_of_dihedral_and_quaternion():
    assert T.gamma_series(G.enumerate_group(G.DihedralGroup(3))).orders() == [8, 2, 1]
    assert T.gamma_series(G.enumerate_group(G.DicyclicGroup(4))).orders() == [16, 4, 2, 1]


def test_nested_square_word_depth():
    rng = np.random.default_rng(0)
    w = T.nested_square_word(2, 2, rng)
    assert len(w) > 0 and all(c in (1, 2, -1, -2) for c in w)
