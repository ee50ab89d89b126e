"""The fourteen acceptance checks, shared by ``relex certify`` and the test suite.

Each check returns a CheckResult; ``measured`` holds only reproducible data
(wall-clock time goes into ``seconds`` and is reported separately).
"""
from __future__ import annotations

import itertools
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import cayley as C
from . import detect as D
from . import embed as E
from . import groups as G
from . import spectra as S
from . import tower as T
from .config import child_seed, stream
from .report import strip_volatile


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] #{self.number:02d} {self.name}"

    def to_dict(self):
        return dict(number=self.number, name=self.name, passed=self.passed, measured=self.measured)


def _timed(number, name, fn, *args):
    t0 = time.perf_counter()
    passed, measured = fn(*args)
    return CheckResult(number, name, bool(passed), measured, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# graph batteries


def _nx_graph(g: nx.Graph, name: str) -> C.Graph:
    g = nx.convert_node_labels_to_integers(g)
    return C.Graph.from_edges(g.number_of_nodes(), np.array(list(g.edges()), dtype=np.int64).reshape(-1, 2), name)


def _cayley(rep, name=None):
    return C.build_cayley(G.enumerate_group(rep))


def graph_battery(seed: int, max_n: int):
    """Named connected graphs on at most ``max_n`` vertices."""
    out = []
    for n in range(3, max_n + 1):
        out.append(C.cycle_graph(n))
    for n in range(2, max_n + 1):
        out.append(C.path_graph(n))
    for n in range(2, min(max_n, 8) + 1):
        out.append(C.complete_graph(n))
    out.append(_nx_graph(nx.petersen_graph(), "petersen"))
    for k in (2, 3, 4):
        if 2 ** k <= max_n:
            out.append(_nx_graph(nx.hypercube_graph(k), f"Q{k}-cube"))
    for rep in (G.ResidueGroup(2), G.ResidueGroup(3), G.ResidueGroup(1, 3), G.DihedralGroup(3),
                G.DicyclicGroup(3), G.ResidueGroup(2, 2), G.DihedralGroup(4), G.DicyclicGroup(4)):
        if rep.order <= max_n:
            out.append(_cayley(rep))
    rng = stream(seed, 0)
    for n in range(6, max_n + 1, 2):
        for _ in range(2):
            g = nx.random_regular_graph(3, n, seed=int(rng.integers(2 ** 31)))
            if nx.is_connected(g):
                out.append(_nx_graph(g, f"RR({n},3)"))
    return [g for g in out if g.n <= max_n and g.connected]


# ---------------------------------------------------------------------------
# 1-3: groups and towers


def check_orders():
    rows = []
    ok = True
    t0 = time.perf_counter()
    for d, ns, a in ((2, range(1, 6), 3), (3, range(1, 3), 8)):
        for n in ns:
            Q = G.congruence_kernel(d, n)
            order = G.enumerate_group(Q).order
            expected = 2 ** (a * n - a)
            rows.append(dict(d=d, n=n, order=order, expected=expected))
            ok &= order == expected
    elapsed = time.perf_counter() - t0
    return ok and elapsed < 30, dict(instances=rows, under_30s=elapsed < 30)


def _semidirect_cyclic(k, unit):
    """Z/2^k x| Z/2 with the generator acting by multiplication by ``unit``."""
    V, K = G.ResidueGroup(k), G.ResidueGroup(1)
    M = V.modulus

    def act(kr, vr):
        kr, vr = np.broadcast_arrays(np.asarray(kr), np.asarray(vr))
        f = np.where(kr[..., :1] == 1, unit, 1)
        return (vr * f) % M

    return G.semidirect(V, K, act, name=f"Z/{M} x|_{unit} Z/2")


def _swap_square(k):
    V, K = G.ResidueGroup(k, 2), G.ResidueGroup(1)

    def act(kr, vr):
        kr, vr = np.broadcast_arrays(np.asarray(kr), np.asarray(vr))
        return np.where(kr[..., :1] == 1, vr[..., ::-1], vr)

    return G.semidirect(V, K, act, name=f"(Z/{V.modulus})^2 x| swap")


def gamma_battery_groups():
    reps = [G.ResidueGroup(k) for k in range(1, 7)]
    reps += [G.ResidueGroup(1, 3), G.ResidueGroup(2, 2), G.ResidueGroup(1, 6)]
    reps += [G.DihedralGroup(k) for k in range(2, 7)]
    reps += [G.DicyclicGroup(k) for k in range(3, 7)]
    reps += [G.congruence_kernel(2, 2)]
    reps += [_semidirect_cyclic(3, 3), _semidirect_cyclic(3, 5), _semidirect_cyclic(4, 7),
             _semidirect_cyclic(5, 15), _swap_square(1), _swap_square(2)]
    return reps


def check_gamma_battery():
    rows, failures = [], 0
    for rep in gamma_battery_groups():
        idx = G.enumerate_group(rep)
        n = int(round(math.log2(idx.order)))
        s = T.gamma_series(idx)
        good = s.trivial and s.steps is not None and s.steps <= n
        failures += not good
        rows.append(dict(group=rep.name, order=idx.order, steps=s.steps, series=s.orders()))
    return failures == 0 and len(rows) >= 10, dict(groups=rows, failures=failures)


def check_tower():
    t = T.build_tower(2, 2)
    h1 = t.indices[1]
    h2 = G.enumerate_group(t.reps[2])
    law = h1.order * 2 ** T.rank(h1.order, 2)
    lazy = T.LazyTower(h1, 2, level=2)
    pk = t.reps[2]
    col_to_arc = lazy.sd.arcs
    elems = [(int(x), frozenset(int(col_to_arc[c]) for c in range(lazy.r) if (int(b) >> c) & 1))
             for x, b in h2.elements]
    mismatches = 0
    for i, a in enumerate(elems):
        prod = np.array([lazy.to_packed(lazy.mul(a, b)) for b in elems])
        mismatches += int(np.sum(np.any(prod != pk.bmul(h2.elements[i][None], h2.elements), axis=1)))
    ok = h1.order == 4 and h2.order == 128 and h2.order == law and mismatches == 0
    return ok, dict(H1=h1.order, H2=h2.order, order_law=law, pairs=len(elems) ** 2, mismatches=mismatches)


# ---------------------------------------------------------------------------
# 4-5: Cayley graphs and relative gaps


def check_degree(ns=(1, 2, 3, 4)):
    rows = []
    for n in ns:
        inst = T.box_family("sl2-surrogate", n)
        cay = C.build_cayley(inst.enumerate())
        rows.append(dict(family="sl2-surrogate", n=n, order=cay.n, degree=cay.regular_degree()))
    inst = T.box_family("sl2-semidirect", 1)
    cay = C.build_cayley(inst.enumerate())
    rows.append(dict(family="sl2-semidirect", n=1, order=cay.n, degree=cay.regular_degree()))
    return all(r["degree"] == 10 for r in rows), dict(instances=rows)


def check_relgap(ns=(2, 3, 4), tol=1e-8):
    rows, ok = [], True
    for n in ns:
        inst = T.box_family("sl2-surrogate", n)
        idx = inst.enumerate()
        cay = C.build_cayley(idx)
        H = inst.normal_members(idx)
        rep = S.relative_gap(cay, H, lazy=True, method="lanczos" if n > 2 else "auto", tol=tol)
        row = dict(n=n, order=idx.order, theta=rep.theta, residual=rep.residual, operator=rep.operator,
                   method=rep.method, witness_hash=rep.witness_hash)
        ok &= rep.method == "lanczos" and rep.residual <= tol
        if rep.dense_theta is not None:
            row["dense_theta"] = rep.dense_theta
            row["dense_gap"] = abs(rep.dense_theta - rep.theta)
            ok &= row["dense_gap"] <= tol
        rows.append(row)
    top = max(r["theta"] for r in rows)
    ok &= top < 0.999 and any("dense_theta" in r for r in rows)
    return ok, dict(instances=rows, max_theta=top, convention="lazy (I+M_S)/2")


# ---------------------------------------------------------------------------
# 6-8: calculators


def _forms_for(g, rng):
    n = g.n
    forms = []
    labels = rng.integers(0, max(2, n // 3), size=n)
    forms.append(("partition", S.FormSpec("partition", partition=C.partition_from_labels(labels))))
    Dm = g.all_pairs()
    forms.append(("far-pairs", S.FormSpec("measure", measure=S.measure_on_far_pairs(Dm, max(1, int(Dm.max()) // 2)))))
    mu = rng.random((n, n))
    np.fill_diagonal(mu, 0)
    forms.append(("random-measure", S.FormSpec("measure", measure=mu / mu.sum())))
    if isinstance(g, C.CayleyGraph):
        for y in range(1, n):
            forms.append((f"element-{y}", S.FormSpec("element", y=y)))
    return forms


def check_poincare(seed=0, tol=1e-8):
    rng = stream(seed, 6)
    worst, count = 0.0, 0
    for g in graph_battery(seed, 12):
        for _, form in _forms_for(g, rng):
            for conv in ("ordered", "unordered"):
                form.convention = conv
                a = S.poincare_constant(g, form).C_star
                b = S.poincare_oracle(g, form)
                worst = max(worst, abs(a - b) / max(1.0, abs(b)))
                count += 1
    idx = G.enumerate_group(G.ResidueGroup(2))
    cay = C.build_cayley(idx)
    y = int(idx.index_of(np.array([[2]]))[0])
    c_star = S.poincare_constant(cay, S.FormSpec("element", y=y, convention="ordered")).C_star
    ok = worst <= tol and abs(c_star - 1.0) <= 1e-10
    return ok, dict(comparisons=count, worst_relative_gap=worst, z4_C_star=c_star, z4_convention="ordered")


def check_interpolation(seed=0):
    a = S.interpolation_n0(4, 0.5, 0.5)
    b = S.curved_n0(math.sqrt, 0.5, 0.5)
    rng = stream(seed, 7)
    bad = 0
    for _ in range(100):
        theta, c = rng.uniform(0.05, 0.95, size=2)
        closed = math.ceil(math.log(1 - c) / math.log(theta))
        bad += S.interpolation_n0(2, theta, c).n0 != max(1, closed)
    return a.n0 == 3 and b.n0 == 3 and bad == 0, dict(lp_n0=a.n0, curved_n0=b.n0, p2_mismatches=bad)


def _direct_series(h, d, p):
    """Plain summation until the terms are negligible past their peak."""
    q = 1 + h / d
    terms, i = [], 0
    while True:
        t = math.exp(p * math.log(2 * i + 4) - i * math.log(q))
        terms.append(t)
        if i > 10 and t < 1e-30 and t < terms[-2]:
            return math.fsum(terms)
        i += 1


def check_theta_series(seed=0):
    t1, _, _ = D.theta_series(1.0, 1.0, 1)
    t2, _, _ = D.theta_series(1.0, 1.0, 2)
    ok = abs(t1 - 12) <= 1e-8 and abs(t2 - 88) <= 1e-8
    ok &= abs(t1 - _direct_series(1, 1, 1)) <= 1e-8 and abs(t2 - _direct_series(1, 1, 2)) <= 1e-8
    rng = stream(seed, 8)
    worst = 0.0
    for _ in range(20):
        beta, d = rng.uniform(0.1, 10), rng.integers(3, 12)
        p, alpha = rng.uniform(1, 3), rng.uniform(0.2, 1)
        h = rng.uniform(0.5, 3)
        b = D.concentration_bounds(beta, d, p, alpha, h)
        direct = beta * (d + _direct_series(h, d, p)) / alpha ** 2
        worst = max(worst, abs(b.beta_prime - direct) / direct, abs(b.radius - 2 * math.sqrt(direct)) / b.radius)
    ok &= worst <= 1e-8
    return ok, dict(theta_p1=t1, theta_p2=t2, beta_prime_worst_relative=worst)


# ---------------------------------------------------------------------------
# 9-10, 13: embeddings


def check_sandwich(seed=0, samples=10 ** 6):
    configs = np.array(list(itertools.product((0, 1), repeat=8)), dtype=np.int64)
    r1 = E.sandwich_check(E.wreath_euclidean(configs, 2), configs, 2, strict=False)
    inst = T.box_family("sl2-wreath-haagerup", 2, lamp="z2")
    idx = inst.enumerate()
    lamps = inst.rep.lamp_rows(idx.elements)
    rng = stream(seed, 9)
    i = rng.integers(idx.order, size=samples)
    j = rng.integers(idx.order, size=samples)
    r2 = E.sandwich_check(E.wreath_euclidean(lamps, 2), lamps, 2, pairs=(i, j), strict=False)
    ok = r1.violations == 0 and r2.violations == 0 and r1.pairs == 256 * 255 // 2 and idx.order == 2048
    return ok, dict(exhaustive=r1.to_dict(), sampled=r2.to_dict(), wreath_order=idx.order)


def _refuter_instances(ns=(1, 2)):
    return [D.refuter_instance(n) for n in ns]


def check_truncation(instances=None):
    rows, ok = [], True
    for a in instances or _refuter_instances():
        X = a.phi.coords
        diff = X[a.graph.heads] - X[a.graph.tails]
        worst = float(np.sqrt(np.max(np.sum(diff * diff, axis=1))))
        rows.append(dict(n=a.n, order=a.graph.n, arcs=int(a.graph.heads.size), r=a.r, max_edge_stretch=worst))
        ok &= worst <= 2 + 1e-12
    return ok, dict(instances=rows)


def check_refuter(instances=None):
    inst = instances or _refuter_instances()
    vals = [a.value for a in inst]
    ok = all(b > a for a, b in zip(vals, vals[1:])) and len(vals) >= 2
    return ok, dict(values=vals, n=[a.n for a in inst], subgroup="lamp subgroup", measure="uniform")


# ---------------------------------------------------------------------------
# 11-12: detection and Cheeger


def check_fibers(seed=0, trials=50, sizes=(256, 1024, 2000)):
    t0 = time.perf_counter()
    inst = T.box_family("sl2-surrogate", 2)
    idx = inst.enumerate()
    st = D.fiber_setup(inst, idx)
    rows, violations = [], 0
    for t in range(trials):
        n = sizes[t % len(sizes)]
        s = child_seed(seed, 11, t)
        X = D.random_expander(n, 3, 0.1, seed=s)
        h = D.bfs_walk_map(X.graph, st.cay, seed=s)
        r = D.find_fiber(X, h, st.cay, st.N, st.psi, st.q_of, st.q_dist, st.phi, st.n_dist)
        direct = np.flatnonzero(h == r.y)
        true_fiber = np.array_equal(np.sort(r.fiber), direct)
        bad = not true_fiber or direct.size < r.bound or direct.size < r.measured_bound
        violations += bad
        rows.append(dict(seed=s, X=n, bound=r.bound, measured_bound=r.measured_bound, fiber_size=int(direct.size),
                         fiber_diam=r.fiber_diameter, y=r.y, r=r.r, r_prime=r.r_prime, lam=X.lam))
    elapsed = time.perf_counter() - t0
    return violations == 0 and elapsed < 300, dict(trials=rows, violations=violations, under_5min=elapsed < 300)


def check_cheeger(seed=0):
    c8 = S.cheeger(C.cycle_graph(8)).h
    k4 = S.cheeger(C.complete_graph(4)).h
    ok = abs(c8 - 0.5) < 1e-15 and abs(k4 - 2) < 1e-15
    bad, count = [], 0
    for g in graph_battery(seed, 26):
        if g.n < 2:
            continue
        ex = S.cheeger(g).h
        sw = S.cheeger(g, "sweep")
        count += 1
        if not (sw.lower <= ex + 1e-12 and ex <= sw.upper + 1e-12):
            bad.append(g.name)
    return ok and not bad, dict(C8=c8, K4=k4, graphs=count, sandwich_failures=bad)


# ---------------------------------------------------------------------------
# 14: determinism


def check_determinism(seed=7, workdir=None):
    """Run ``relex certify`` twice in fresh processes and compare the reports."""
    import json

    workdir = workdir or tempfile.mkdtemp(prefix="relex-det-")
    paths = [os.path.join(workdir, f"certify-{k}.json") for k in (1, 2)]
    codes = []
    for p in paths:
        proc = subprocess.run([sys.executable, "-m", "relex.cli", "certify", "--seed", str(seed), "--output", p],
                              capture_output=True, text=True)
        codes.append(proc.returncode)
    if not all(os.path.exists(p) for p in paths):
        return False, dict(exit_codes=codes, identical=False)
    docs = []
    for p in paths:
        with open(p) as fh:
            docs.append(json.dumps(strip_volatile(json.load(fh)), sort_keys=True))
    return docs[0] == docs[1], dict(exit_codes=codes, identical=docs[0] == docs[1])


# ---------------------------------------------------------------------------


NAMES = {
    1: "order formulas",
    2: "gamma-series battery",
    3: "tower law",
    4: "degree check",
    5: "relative gap",
    6: "poincare oracle equivalence",
    7: "interpolation calculator",
    8: "theta-series",
    9: "sandwich",
    10: "truncated embedding Lipschitz",
    11: "fiber detector",
    12: "cheeger",
    13: "subset-poincare refuter",
    14: "determinism",
}


def run_checks(seed: int = 7, numbers=None, progress=None):
    """Run checks 1-13 (or the chosen subset) and return their results in order."""
    numbers = sorted(numbers or range(1, 14))
    cache = {}

    def refuters():
        if "app" not in cache:
            cache["app"] = _refuter_instances()
        return cache["app"]

    table = {
        1: lambda: check_orders(),
        2: lambda: check_gamma_battery(),
        3: lambda: check_tower(),
        4: lambda: check_degree(),
        5: lambda: check_relgap(),
        6: lambda: check_poincare(seed),
        7: lambda: check_interpolation(seed),
        8: lambda: check_theta_series(seed),
        9: lambda: check_sandwich(seed),
        10: lambda: check_truncation(refuters()),
        11: lambda: check_fibers(seed),
        12: lambda: check_cheeger(seed),
        13: lambda: check_refuter(refuters()),
        14: lambda: check_determinism(seed),
    }
    out = []
    for k in numbers:
        res = _timed(k, NAMES[k], table[k])
        if progress:
            progress(res)
        out.append(res)
    return out
