import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relex import cayley as C
from relex import detect as D
from relex import tower as T
from relex.errors import CompressionTooWeak, GenerationFailed, ValidationError


def test_k4_certificate():
    X = D.certify(C.complete_graph(4))
    assert abs(X.lam - 4) < 1e-12 and abs(X.beta2 - 0.5) < 1e-12


def test_petersen_certificate():
    import networkx as nx

    g = nx.petersen_graph()
    X = D.certify(C.Graph.from_edges(10, np.array(list(g.edges()))))
    assert abs(X.lam - 2) < 1e-12


def test_expander_inequality_holds():
    X = D.random_expander(300, 3, 0.1, seed=3)
    assert X.lam >= 0.1
    rng = np.random.default_rng(0)
    margins = [D.eq1_margin(X, rng.standard_normal((300, 2))) for _ in range(1000)]
    assert min(margins) >= -1e-9


def test_expander_inequality_is_tight_on_fiedler_vector():
    X = D.certify(C.cycle_graph(10))
    L = X.graph.laplacian("unordered").toarray()
    w, U = np.linalg.eigh(L)
    assert abs(D.eq1_margin(X, U[:, 1])) < 1e-9


def test_generation_failure():
    with pytest.raises(GenerationFailed):
        D.random_expander(64, 3, 2.5, seed=0, max_retries=3)
    with pytest.raises(ValidationError):
        D.random_expander(7, 3)


def test_theta_series_values():
    assert abs(D.theta_series(1, 1, 1)[0] - 12) < 1e-8
    assert abs(D.theta_series(1, 1, 2)[0] - 88) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5), st.integers(2, 10), st.floats(1, 3))
def test_theta_series_tail_bound(h, d, p):
    s, tail, terms = D.theta_series(h, d, p)
    q = 1 + h / d
    partial = math.fsum((2 * i + 4) ** p / q ** i for i in range(terms))
    assert abs(partial - s) < 1e-9 * max(1, s)
    more = math.fsum((2 * i + 4) ** p / q ** i for i in range(terms, terms + 20000) if i * math.log(q) < 700)
    assert more <= tail + 1e-12


def test_concentration_bounds_formula():
    b = D.concentration_bounds(2.0, 3, 2, 0.5, 1.5)
    th = D.theta_series(1.5, 3, 2)[0]
    assert math.isclose(b.beta_prime, 2.0 * (3 + th) / 0.25)
    assert math.isclose(b.radius, 2 * math.sqrt(b.beta_prime))


@pytest.fixture(scope="module")
def setup():
    inst = T.box_family("sl2-surrogate", 2)
    idx = inst.enumerate()
    return D.fiber_setup(inst, idx)


def test_walk_map_is_one_lipschitz(setup):
    X = D.random_expander(256, 3, 0.1, seed=1)
    h = D.bfs_walk_map(X.graph, setup.cay, seed=1)
    e = X.graph.edges()
    assert setup.cay.dist(h[e[:, 0]], h[e[:, 1]]).max() <= 1


@pytest.mark.parametrize("n,seed", [(256, 0), (1024, 1)])
def test_fiber_is_a_true_fiber(setup, n, seed):
    X = D.random_expander(n, 3, 0.1, seed=seed)
    h = D.bfs_walk_map(X.graph, setup.cay, seed=seed)
    r = D.find_fiber(X, h, setup.cay, setup.N, setup.psi, setup.q_of, setup.q_dist, setup.phi, setup.n_dist)
    assert np.array_equal(r.fiber, np.flatnonzero(h == r.y))
    assert r.size >= r.measured_bound >= r.bound
    assert r.k == 11


def test_constant_map_gives_everything(setup):
    X = D.random_expander(256, 3, 0.1, seed=2)
    h = np.zeros(256, dtype=np.int64)
    r = D.find_fiber(X, h, setup.cay, setup.N, setup.psi, setup.q_of, setup.q_dist, setup.phi, setup.n_dist)
    assert r.size == 256


def test_strict_mode_flags_weak_profiles(setup):
    X = D.random_expander(256, 3, 0.1, seed=0)
    h = D.bfs_walk_map(X.graph, setup.cay, seed=0)
    with pytest.raises(CompressionTooWeak):
        D.find_fiber(X, h, setup.cay, setup.N, setup.psi, setup.q_of, setup.q_dist, setup.phi, setup.n_dist,
                     strict=True)


def test_refuter_matches_double_sum(rng):
    F = rng.standard_normal((10, 3))
    A = np.array([1, 4, 5, 8])
    mu = rng.random(4)
    mu /= mu.sum()
    direct = sum(mu[a] * mu[b] * np.sum((F[A[a]] - F[A[b]]) ** 2) for a in range(4) for b in range(4))
    assert np.isclose(D.refute_subset_poincare(F, A, mu), direct)


def test_refuter_values_increase():
    vals = [D.refuter_instance(n).value for n in (1, 2)]
    assert vals[0] == pytest.approx(0.5) and vals[1] > vals[0]


def test_diameter_lower_bound():
    assert D.diameter_lower_bound(1.0, 1.0, 1.0, 1024) == pytest.approx(9.0)
