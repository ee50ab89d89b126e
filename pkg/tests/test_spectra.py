import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relex import cayley as C
from relex import groups as G
from relex import spectra as S
from relex.errors import ConvergenceError, DegenerateDenominator, NoConvergence, NotNormal, ValidationError
from relex.lanczos import lanczos


@settings(max_examples=20, deadline=None)
@given(st.integers(20, 120), st.integers(0, 2 ** 31), st.sampled_from(["LM", "LA", "SA"]))
def test_lanczos_matches_eigh(n, seed, which):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = (A + A.T) / 2
    w = np.linalg.eigvalsh(A)
    ref = {"LM": w[np.argmax(np.abs(w))], "LA": w[-1], "SA": w[0]}[which]
    r = lanczos(lambda v: A @ v, n, k=1, which=which, tol=1e-9, krylov=min(n - 1, 60), max_restarts=50)
    assert abs(r.values[0] - ref) < 1e-8
    assert r.residuals[0] <= 1e-9


def test_lanczos_strict_raises():
    rng = np.random.default_rng(0)
    A = np.diag(np.linspace(0, 1, 400)) + 1e-3 * rng.standard_normal((400, 400))
    A = (A + A.T) / 2
    with pytest.raises(ConvergenceError):
        lanczos(lambda v: A @ v, 400, k=1, which="LA", tol=1e-14, krylov=10, max_restarts=0)


def test_averaging_operators(surrogate2):
    inst, idx, cay = surrogate2
    N = inst.normal_members(idx)
    MH = S.averaging_operator(idx, N)
    assert MH.is_projector
    assert MH.idempotence_defect() < 1e-12 and MH.symmetry_defect() < 1e-10
    MS = S.generator_average(cay)
    assert MS.symmetry_defect() < 1e-10
    assert np.allclose(MS(np.ones(cay.n)), 1)


def test_relative_gap_dense_vs_lanczos(surrogate2):
    inst, idx, cay = surrogate2
    N = inst.normal_members(idx)
    a = S.relative_gap(cay, N, lazy=True, method="dense")
    b = S.relative_gap(cay, N, lazy=True, method="lanczos")
    assert abs(a.theta - b.theta) < 1e-8 and b.residual <= 1e-8
    # frozen reference: (I + M_S)/2 on the order-128 surrogate
    assert abs(b.theta - 0.8414213562373) < 1e-10


def test_non_lazy_gap_is_one_for_bipartite_surrogate(surrogate2):
    inst, idx, cay = surrogate2
    a = S.relative_gap(cay, inst.normal_members(idx), lazy=False, method="dense")
    assert abs(a.theta - 1) < 1e-10


def test_non_normal_subgroup_rejected(surrogate2):
    inst, idx, cay = surrogate2
    gens = idx.index_of(np.asarray(inst.gens, dtype=np.int64))
    H = G.subgroup_closure(idx, gens[2:3])
    with pytest.raises(NotNormal):
        S.relative_gap(cay, H)


def z4():
    idx = G.enumerate_group(G.ResidueGroup(2))
    return idx, C.build_cayley(idx)


def test_z4_character_value():
    # characters chi_k(g) = i^{kg}: ratio |chi(2) - 1|^2 / sum_s |chi(s) - 1|^2 maxes at k = 1, 3 with value 4/4
    idx, cay = z4()
    y = int(idx.index_of(np.array([[2]]))[0])
    rep = S.poincare_constant(cay, S.FormSpec("element", y=y, convention="ordered"))
    assert abs(rep.C_star - 1.0) < 1e-10
    assert abs(S.poincare_constant(cay, S.FormSpec("element", y=y, convention="unordered")).C_star - 2) < 1e-10


def brute_poincare(graph, spec, trials=4000, seed=0):
    rng = np.random.default_rng(seed)
    L = graph.laplacian(spec.convention).toarray()
    N = spec.matrix(graph)
    F = rng.standard_normal((graph.n, trials))
    F -= F.mean(axis=0)
    return float(np.max(np.einsum("it,ij,jt->t", F, N, F) / np.einsum("it,ij,jt->t", F, L, F)))


@pytest.mark.parametrize("n", [5, 8, 11])
def test_poincare_constant_dominates_random_ratios(n):
    g = C.cycle_graph(n)
    spec = S.FormSpec("measure", measure=S.measure_on_far_pairs(g.all_pairs(), 2))
    C_star = S.poincare_constant(g, spec).C_star
    assert brute_poincare(g, spec) <= C_star * (1 + 1e-12)
    assert abs(C_star - S.poincare_oracle(g, spec)) < 1e-8


def test_poincare_witness_attains(surrogate2):
    inst, idx, cay = surrogate2
    spec = S.FormSpec("partition", partition=C.coset_partition(idx, inst.normal_members(idx)))
    rep = S.poincare_constant(cay, spec)
    f = rep.witness
    L = cay.laplacian(spec.convention).toarray()
    assert abs(spec.value(cay, f) / (f @ L @ f) - rep.C_star) < 1e-9


def test_disconnected_denominator():
    g = C.Graph.from_edges(4, [[0, 1], [2, 3]])
    with pytest.raises(DegenerateDenominator):
        S.poincare_constant(g, S.FormSpec("partition", partition=C.partition_from_labels([0, 0, 1, 1])))


def test_cheeger_known_values():
    assert S.cheeger(C.cycle_graph(8)).h == 0.5
    assert S.cheeger(C.complete_graph(4)).h == 2.0
    assert S.cheeger(C.path_graph(6)).h == pytest.approx(1 / 3)


@pytest.mark.parametrize("n", [6, 9, 12])
def test_cheeger_sweep_sandwich(n):
    g = C.cycle_graph(n)
    ex = S.cheeger(g).h
    sw = S.cheeger(g, "sweep")
    assert sw.lower <= ex <= sw.upper


def test_alpha_exact_cheeger():
    g = C.cycle_graph(10)
    assert S.cheeger(g, "alpha-exact", alpha=0.5).h == S.cheeger(g).h
    assert S.cheeger(g, "alpha-exact", alpha=0.8).h == 1.0


def test_interpolation_examples():
    assert S.interpolation_n0(4, 0.5, 0.5).n0 == 3
    assert S.curved_n0(math.sqrt, 0.5, 0.5).n0 == 3


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_p2_closed_form(theta, c):
    closed = max(1, math.ceil(math.log(1 - c) / math.log(theta)))
    got = S.interpolation_n0(2, theta, c).n0
    # ties within rounding may land on either side
    if abs(math.log(1 - c) / math.log(theta) - round(math.log(1 - c) / math.log(theta))) > 1e-9:
        assert got == closed


def test_p1_has_no_interpolation_gain():
    with pytest.raises(NoConvergence):
        S.interpolation_n0(1, 0.5, 0.5)


def test_alpha_one_has_no_feasible_subset():
    with pytest.raises(ValidationError):
        S.cheeger(C.cycle_graph(6), "alpha-exact", alpha=1.0)
