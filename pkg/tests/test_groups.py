import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relex import groups as G
from relex.errors import OrderMismatch, ResourceLimit, ValidationError


def brute_closure(gens, mul, identity):
    """Plain set-based closure, independent of the BFS enumerator."""
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = mul(a, g)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def matmul_mod(a, b, d, M):
    A = np.array(a).reshape(d, d)
    B = np.array(b).reshape(d, d)
    return tuple(int(x) for x in ((A @ B) % M).ravel())


@pytest.mark.parametrize("d,n", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 2)])
def test_congruence_kernel_order_matches_brute_force(d, n):
    Q = G.congruence_kernel(d, n)
    M = 1 << n
    gens = [tuple(int(x) for x in row) for row in Q.gen_rows]
    ident = tuple(int(x) for x in np.eye(d, dtype=int).ravel())
    brute = brute_closure(gens, lambda a, b: matmul_mod(a, b, d, M), ident)
    assert G.enumerate_group(Q).order == len(brute) == 2 ** ((3 if d == 2 else 8) * (n - 1))


def test_kernel_elements_are_congruent_to_identity():
    Q = G.congruence_kernel(2, 4)
    idx = G.enumerate_group(Q)
    mats = Q.matrices(idx.elements)
    assert np.all((mats - np.eye(2, dtype=int)) % 2 == 0)
    dets = (mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]) % 16
    assert np.all(dets == 1)


def test_sl2_kernel_level3_has_order_64():
    assert G.enumerate_group(G.congruence_kernel(2, 3)).order == 64


def test_sl3_transvections_alone_fall_short_mod_4():
    # the six elementary transvections generate an index-4 subgroup of the kernel mod 4
    Q = G.congruence_kernel(3, 2)
    trans = [g for g, name in zip(Q.gen_rows, Q.gen_names) if name.startswith("e")]
    assert len(trans) == 6
    assert G.enumerate_group(Q, np.array(trans)).order == 64
    assert G.enumerate_group(Q).order == 256


@pytest.mark.parametrize("rep", [G.DihedralGroup(4), G.DicyclicGroup(4), G.ResidueGroup(3, 2),
                                 G.congruence_kernel(2, 3)])
def test_group_laws(rep):
    idx = G.enumerate_group(rep)
    assert idx.order == 2 ** int(rep.log2_order)
    assert G.check_group_laws(idx, samples=2000)


def test_dihedral_matches_permutation_oracle():
    # D16 acting on the 8-gon
    rep = G.DihedralGroup(4)
    idx = G.enumerate_group(rep)

    def perm(row):
        a, s = int(row[0]), int(row[1])
        return tuple(((-v if s else v) + a) % 8 for v in range(8))

    def compose(p, q):
        return tuple(p[q[v]] for v in range(8))

    for i, j in itertools.product(range(16), repeat=2):
        prod = idx.elements[idx.mul_idx(np.array([i]), np.array([j]))[0]]
        assert perm(prod) == compose(perm(idx.elements[i]), perm(idx.elements[j]))


def test_quaternion_has_unique_involution():
    rep = G.DicyclicGroup(5)
    idx = G.enumerate_group(rep)
    sq = idx.mul_idx(np.arange(idx.order), np.arange(idx.order))
    assert np.sum(sq == 0) == 2  # identity and the central involution


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2 ** 20), min_size=1, max_size=40))
def test_mixed_radix_keys_roundtrip(vals):
    rep = G.SemidirectProduct(G.ResidueGroup(3, 2), G.DihedralGroup(3), lambda k, v: np.asarray(v), check=False)
    rng = np.random.default_rng(len(vals))
    rows = np.stack([rng.integers(0, r, size=len(vals)) for r in rep.radices], axis=1)
    assert np.array_equal(rep.rows(rep.keys(rows)), rows)


def test_keys_beyond_62_bits_are_refused():
    with pytest.raises(ResourceLimit):
        G.ResidueGroup(7, 10).keys(np.zeros((1, 10), dtype=np.int64))


def test_enumeration_cap():
    with pytest.raises(ResourceLimit):
        G.enumerate_group(G.ResidueGroup(4, 2), cap=100)


def test_congruence_kernel_rejects_bad_dimension():
    with pytest.raises(ValidationError):
        G.congruence_kernel(4, 2)


def test_order_mismatch_is_reported(monkeypatch):
    monkeypatch.setattr(G, "_sl2_generators", lambda M: [np.eye(2, dtype=np.int64)])
    with pytest.raises(OrderMismatch):
        G.congruence_kernel(2, 3)


def test_wreath_order_and_laws(wreath2):
    inst, idx, _ = wreath2
    assert idx.order == 2 ** 8 * 8
    assert G.check_group_laws(idx, samples=2000)


def test_normal_subgroups(surrogate2):
    inst, idx, _ = surrogate2
    N = inst.normal_members(idx)
    assert N.size == 16
    assert G.is_subgroup(idx, N) and G.is_normal(idx, N)
    # a non-normal subgroup: generated by one reflection-like involution of the acting part
    gens = idx.index_of(np.asarray(inst.gens, dtype=np.int64))
    H = G.subgroup_closure(idx, gens[2:3])
    assert G.is_subgroup(idx, H)
    assert not G.is_normal(idx, H)


def test_surrogate_ball_sizes(surrogate2):
    _, idx, _ = surrogate2
    assert idx.ball_sizes().tolist()[-1] == 128
    assert idx.diameter == len(idx.ball_sizes()) - 1
