import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relex import cayley as C
from relex import groups as G
from relex.errors import Disconnected, NotGenerating


def to_nx(g):
    out = nx.MultiGraph()
    out.add_nodes_from(range(g.n))
    out.add_edges_from(map(tuple, g.edges()))
    return out


def test_surrogate_graph_shape(surrogate2):
    _, idx, cay = surrogate2
    assert cay.regular_degree() == 10
    assert cay.degree(count_loops=True) == 10
    assert cay.connected and cay.diameter() == 5


def test_bfs_matches_networkx(surrogate2):
    _, _, cay = surrogate2
    ref = nx.single_source_shortest_path_length(to_nx(cay), 17)
    d = cay.bfs(17)
    assert all(d[v] == ref[v] for v in range(cay.n))


def test_word_metric_is_graph_metric(surrogate2, rng):
    _, _, cay = surrogate2
    D = cay.all_pairs()
    i, j = rng.integers(cay.n, size=(2, 500))
    assert np.array_equal(cay.dist(i, j), D[i, j])


def test_vertex_transitive(surrogate2):
    _, _, cay = surrogate2
    D = cay.all_pairs()
    prof = np.sort(D, axis=1)
    assert np.all(prof == prof[0])


def test_left_translation_is_an_automorphism(surrogate2, rng):
    _, idx, cay = surrogate2
    g = int(rng.integers(cay.n))
    img = cay.translate(g, np.arange(cay.n))
    E = set(map(tuple, cay.edges()))
    for u, v in cay.edges()[:300]:
        a, b = sorted((int(img[u]), int(img[v])))
        assert (a, b) in E


@pytest.mark.parametrize("n,girth", [(3, 3), (5, 5), (8, 8)])
def test_cycle_girth(n, girth):
    assert C.cycle_graph(n).girth() == girth


def test_complete_and_tower_girth():
    assert C.complete_graph(4).girth() == 3
    assert C.path_graph(5).girth() is None or C.path_graph(5).girth() == np.inf


def test_loops_counted_only_when_asked():
    # Z/2 x Z/2 with a generator that is the identity
    rep = G.ResidueGroup(1, 2)
    idx = G.enumerate_group(rep, np.array([[1, 0], [0, 1], [0, 0]]))
    with_loops = C.build_cayley(idx, count_loops=True)
    without = C.build_cayley(idx, count_loops=False)
    assert with_loops.regular_degree() == 6
    assert without.regular_degree() == 4
    f = np.arange(4.0)
    assert with_loops.energy(f) == without.energy(f)


def test_not_generating_and_disconnected():
    idx = G.enumerate_group(G.ResidueGroup(2, 2), np.array([[1, 0]]))
    with pytest.raises(NotGenerating):
        C.build_cayley(idx, expected_order=16)
    g = C.Graph.from_edges(4, [[0, 1], [2, 3]])
    assert not g.connected
    with pytest.raises(Disconnected):
        g.require_connected()


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 40), st.integers(0, 2 ** 31))
def test_energy_conventions(n, seed):
    g = C.cycle_graph(n)
    f = np.random.default_rng(seed).standard_normal(n)
    direct = sum((f[i] - f[(i + 1) % n]) ** 2 for i in range(n))
    assert np.isclose(g.energy(f, "unordered"), direct)
    assert np.isclose(g.energy(f, "ordered"), 2 * direct)
    assert np.isclose(f @ g.laplacian("unordered") @ f, direct)
    assert np.isclose(f @ g.laplacian("ordered") @ f, 2 * direct)


def test_exports_roundtrip(surrogate2, tmp_path):
    _, _, cay = surrogate2
    cay.export_edges(tmp_path / "e.txt")
    lines = (tmp_path / "e.txt").read_text().splitlines()
    assert len(lines) == cay.n * 5
    u, v, lab = lines[0].split()
    assert lab in cay.label_names
    cay.export_csr(tmp_path / "a.npz")
    A = C.load_csr(tmp_path / "a.npz")
    assert (A != cay.adjacency).nnz == 0
    cay.export_dot(tmp_path / "g.dot")
    assert (tmp_path / "g.dot").read_text().startswith("graph cayley {")


def test_induced_at_most_intrinsic(surrogate2):
    inst, idx, cay = surrogate2
    N = inst.normal_members(idx)
    ind = C.induced_metric(cay, N)
    intr = C.intrinsic_metric(cay, N)
    ok = intr >= 0
    assert np.all(ind[ok] <= intr[ok])


def test_coset_partition(surrogate2):
    inst, idx, _ = surrogate2
    N = inst.normal_members(idx)
    part = C.coset_partition(idx, N)
    assert len(part.blocks) == 8 and set(np.asarray(part.sizes).tolist()) == {16}
    # g and g n lie in the same block
    g = np.arange(idx.order)
    n = np.full(idx.order, N[3])
    assert np.array_equal(part.labels[g], part.labels[idx.mul_idx(g, n)])


def test_y_metric_cyclic():
    a = np.array([[0, 3, 1]])
    b = np.array([[1, 0, 1]])
    assert C.y_metric(a, b, 4).tolist() == [2]


def test_action_extension_on_wreath(wreath2):
    inst, idx, _ = wreath2
    rep = inst.rep
    nrep = G.ResidueGroup(1, 8)
    nidx = G.enumerate_group(nrep)
    T = np.array(rep.y_generators())
    report = C.action_extension_check(nidx, T, rep, idx, samples=64)
    assert report.ok


def test_folner_on_cyclic():
    aidx = G.enumerate_group(G.ResidueGroup(5))
    res = C.folner_set(aidx, r=1, eps=0.5)
    assert res.R == 2 and res.members.size == 5
    assert res.diameter <= res.diameter_bound
