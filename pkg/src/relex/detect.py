"""Giant fibers of Lipschitz maps from expanders, and the subset-Poincare refuter.

The fiber finder runs the two-stage concentration argument on concrete data:
concentrate the quotient image, pigeonhole onto one coset, concentrate the
coset image, pigeonhole onto one point. Abstract proper functions are
replaced by the measured compression profiles of the supplied embeddings.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import groups as G
from .cayley import CayleyGraph, Graph, build_cayley, coset_partition
from .embed import (
    CompressionProfile,
    EmbeddingTable,
    compression_profile,
    edge_stretch,
    spectral_embedding,
    truncate_fiberwise,
    wreath_euclidean,
)
from .errors import CompressionTooWeak, GenerationFailed, LipschitzViolation, ValidationError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# certified expanders


@dataclass
class CertifiedExpander:
    graph: Graph
    d: int
    lam: float
    beta2: float
    seed: int | None = None
    attempts: int = 1

    @property
    def n(self):
        return self.graph.n

    @property
    def cheeger_lower(self):
        return self.lam / 2

    def to_dict(self):
        return dict(n=self.n, d=self.d, lam=self.lam, beta2=self.beta2, cheeger_lower=self.cheeger_lower,
                    seed=self.seed, attempts=self.attempts)


def smallest_nonzero_laplacian(graph: Graph) -> float:
    """Second eigenvalue of D - A."""
    w = np.linalg.eigvalsh(graph.laplacian("unordered").toarray())
    return float(w[1])


def certify(graph: Graph, seed=None, attempts=1) -> CertifiedExpander:
    """beta_2 = 2 / lambda_2 (lambda_2 of D - A) for
    (1/|X|^2) sum_{x,y} ||f(x)-f(y)||^2 <= (beta/|X|) sum_{x~y} ||f(x)-f(y)||^2, edges unordered."""
    graph.require_connected()
    lam = smallest_nonzero_laplacian(graph)
    d = graph.degree(count_loops=True) or int(graph.degrees().max())
    return CertifiedExpander(graph, d, lam, 2.0 / lam, seed, attempts)


def random_expander(n: int, d: int = 3, lam_target: float = 0.1, seed: int = 0, max_retries: int = 50):
    """Random simple connected d-regular graph with lambda_2 >= lam_target."""
    if n * d % 2 or d < 3 or d >= n:
        raise ValidationError("need n*d even and 3 <= d < n")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_retries + 1):
        s = int(rng.integers(2 ** 31))
        nxg = nx.random_regular_graph(d, n, seed=s)
        edges = np.array(sorted(tuple(sorted(e)) for e in nxg.edges()), dtype=np.int64)
        g = Graph.from_edges(n, edges, name=f"RR({n},{d})")
        if not g.connected:
            continue
        lam = smallest_nonzero_laplacian(g)
        if lam >= lam_target:
            return CertifiedExpander(g, d, lam, 2.0 / lam, seed, attempt)
    raise GenerationFailed(f"no {d}-regular graph on {n} vertices with lambda_2 >= {lam_target} "
                           f"in {max_retries} attempts")


def eq1_margin(exp: CertifiedExpander, F) -> float:
    """RHS - LHS of the expander inequality for one vector-valued F."""
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n = exp.n
    centered = F - F.mean(axis=0)
    lhs = 2.0 * float(np.sum(centered ** 2)) / n
    rhs = exp.beta2 / n * exp.graph.energy(F, "unordered")
    return rhs - lhs


# ---------------------------------------------------------------------------
# constants


def theta_series(h: float, d: float, p: float, tol: float = 1e-9):
    """sum_i (2i+4)^p / (1 + h/d)^i with an explicit tail bound."""
    if h <= 0 or d <= 0:
        raise ValidationError("need h > 0 and d > 0")
    q = 1.0 + h / d
    terms = []
    i = 0
    while True:
        t = (2 * i + 4) ** p / q ** i
        terms.append(t)
        # ratio of consecutive terms is decreasing in i
        ratio = ((2 * i + 6) / (2 * i + 4)) ** p / q
        if ratio < 1:
            tail = t * ratio / (1 - ratio)
            if tail < tol:
                return math.fsum(terms), tail, i + 1
        i += 1
        if i > 10 ** 8:
            raise ValidationError("theta series did not reach its tail tolerance")


@dataclass
class DetectorBounds:
    p: float
    beta: float
    d: float
    alpha: float
    h_alpha: float
    theta: float
    tail: float
    beta_prime: float
    radius: float
    beta_full: float
    radius_full: float

    def to_dict(self):
        return dict(self.__dict__)


def concentration_bounds(beta: float, d: float, p: float, alpha: float, h_alpha: float) -> DetectorBounds:
    if not 0 < alpha <= 1:
        raise ValidationError("alpha must lie in (0, 1]")
    th, tail, _ = theta_series(h_alpha, d, p)
    bp = beta * (d + th) / alpha ** 2
    return DetectorBounds(p, beta, d, alpha, h_alpha, th, tail, bp, 2 * math.sqrt(bp), beta * d,
                          2 * math.sqrt(beta * d))


def diameter_lower_bound(h_alpha: float, d: float, alpha: float, n: int) -> float:
    """diam(A) >= log_{1+h/d}(alpha |X|) - 1 from the decay of |[A]_i^c|."""
    return math.log(alpha * n) / math.log(1 + h_alpha / d) - 1


# ---------------------------------------------------------------------------
# fiber finder


def pullback_radius(profile: CompressionProfile, R: float):
    """Largest realised t with rho_bar(t) <= R, and whether rho ever exceeds R."""
    env = profile.rho_monotone()
    ok = env <= R
    if not ok.any():
        return 0, False
    if ok.all():
        return int(profile.t[-1]), True
    return int(profile.t[np.flatnonzero(ok).max()]), False


def _center(F):
    """argmin_x sum_y ||F(x) - F(y)||^2 (= point closest to the mean)."""
    mean = F.mean(axis=0)
    return int(np.argmin(np.sum((F - mean) ** 2, axis=1)))


@dataclass
class FiberResult:
    y: int
    fiber: np.ndarray
    bound: float
    measured_bound: float
    r: int
    r_prime: int
    k: int
    K: float
    sizes: dict
    degenerate: list
    fiber_diameter: int | None
    diam_lower_bound: float | None
    stage_bounds: list = field(default_factory=list)

    @property
    def size(self):
        return int(self.fiber.size)

    def to_dict(self):
        return dict(y=self.y, fiber_size=self.size, bound=self.bound, measured_bound=self.measured_bound,
                    r=self.r, r_prime=self.r_prime, k=self.k, K=self.K, sizes=self.sizes,
                    degenerate=self.degenerate, fiber_diam=self.fiber_diameter,
                    diam_lower_bound=self.diam_lower_bound)


def find_fiber(X: CertifiedExpander, h, cay: CayleyGraph, N_members, psi: EmbeddingTable | None,
               q_of, q_dist, phi: EmbeddingTable, n_dist, strict: bool = False, fiber_diameter: bool = True):
    """Run the concentration-and-pigeonhole pipeline for h: X -> G.

    ``q_of[g]`` is the quotient index of vertex g, ``q_dist`` the distance
    matrix of the quotient graph and ``psi`` a table on it (None for a trivial
    quotient). ``phi`` is a table on the sorted N_members with distance matrix
    ``n_dist`` (the induced metric).
    """
    h = np.asarray(h, dtype=np.int64)
    gX = X.graph
    n = gX.n
    N_members = np.asarray(N_members, dtype=np.int64)
    pos_in_N = np.full(cay.n, -1, dtype=np.int64)
    pos_in_N[N_members] = np.arange(N_members.size)
    # Lipschitz constant of h (edges of X)
    keep = gX.heads != gX.tails
    K = float(cay.dist(h[gX.heads[keep]], h[gX.tails[keep]]).max()) if keep.any() else 0.0
    K = max(K, 1.0)
    k = cay.n_labels + 1
    degenerate = []
    sizes = {"X": n}
    stage_bounds = []

    # stage 1: quotient
    qv = np.asarray(q_of)[h]
    if psi is None or q_dist.shape[0] == 1:
        A1 = np.arange(n)
        r = 0
        ball_q = 1
    else:
        Lpsi = max(psi.K, 1e-300)
        F = psi.coords[qv] / (K * Lpsi)
        b = concentration_bounds(X.beta2, X.d, 2, 1.0, X.lam)
        x0 = _center(F)
        A = np.flatnonzero(np.linalg.norm(F - F[x0], axis=1) <= b.radius_full + 1e-12)
        if A.size < n / 2:
            raise LipschitzViolation("concentration failed: the expander inequality was violated")
        sizes["A"] = int(A.size)
        stage_bounds.append(dict(stage="quotient", radius=b.radius_full))
        prof = compression_profile(psi, q_dist)
        r, weak = pullback_radius(prof, b.radius_full * K * Lpsi)
        if weak:
            degenerate.append("quotient")
            if strict:
                raise CompressionTooWeak("quotient profile never exceeds the concentration radius")
        ball_q = int(np.sum(q_dist[qv[x0]] <= r))
        vals, counts = np.unique(qv[A], return_counts=True)
        q_star = vals[np.argmax(counts)]
        A1 = A[qv[A] == q_star]
    sizes["A1"] = int(A1.size)

    # stage 2: translate into N and concentrate there
    rep = cay.idx.rep
    g0 = h[A1[0]]
    ginv = rep.binv(cay.idx.elements[g0][None])
    moved = cay.idx.index_of(rep.bmul(ginv, cay.idx.elements[h[A1]]))
    if np.any(pos_in_N[moved] < 0):
        raise ValidationError("stage-one set does not lie in a single coset of N")
    npos = pos_in_N[moved]
    alpha = A1.size / n
    Lphi = max(phi.K, 1e-300)
    if N_members.size == 1:
        r_prime, ball_n = 0, 1
        A2 = A1
    else:
        F2 = phi.coords[npos] / (K * Lphi)
        h_alpha = X.lam * alpha  # spectral lower bound for h_alpha
        b2 = concentration_bounds(X.beta2, X.d, 2, alpha, h_alpha)
        y0 = _center(F2)
        sel = np.linalg.norm(F2 - F2[y0], axis=1) <= b2.radius + 1e-12
        A2 = A1[sel]
        if 2 * A2.size < A1.size:
            raise LipschitzViolation("coset concentration captured less than half of the stage-one set")
        stage_bounds.append(dict(stage="coset", radius=b2.radius, alpha=alpha, h_alpha=h_alpha))
        prof2 = compression_profile(phi, n_dist)
        r_prime, weak = pullback_radius(prof2, b2.radius * K * Lphi)
        if weak:
            degenerate.append("coset")
            if strict:
                raise CompressionTooWeak("coset profile never exceeds the concentration radius")
        ball_n = int(np.sum(n_dist[npos[y0]] <= r_prime))
    sizes["A2"] = int(A2.size)

    vals, counts = np.unique(h[A2], return_counts=True)
    y = int(vals[np.argmax(counts)])
    fiber = np.flatnonzero(h == y)
    bound = n / (4.0 * float(k) ** (r + r_prime))
    measured = n / (4.0 * ball_q * ball_n)
    diam = None
    if fiber_diameter and fiber.size:
        d0 = gX.bfs(int(fiber[0]))
        diam = int(d0[fiber].max())
    lb = None
    if sizes.get("A1"):
        ha = X.lam * alpha
        lb = diameter_lower_bound(ha, X.d, alpha, n)
    return FiberResult(y, fiber, bound, measured, r, r_prime, k, K, sizes, degenerate, diam, lb, stage_bounds)


def bfs_walk_map(X: Graph, cay: CayleyGraph, seed: int = 0, stay: float = 0.3):
    """h(x) = w_{d(root, x)} for a lazy random walk w on Cay(G, S): 1-Lipschitz."""
    rng = np.random.default_rng(seed)
    root = int(rng.integers(X.n))
    dist = X.bfs(root)
    depth = int(dist.max())
    walk = np.zeros(depth + 1, dtype=np.int64)
    L = cay.n_labels
    tab = cay.idx.table
    for i in range(1, depth + 1):
        walk[i] = walk[i - 1] if rng.random() < stay else tab[walk[i - 1], int(rng.integers(L))]
    return walk[dist]


@dataclass
class FiberSetup:
    cay: CayleyGraph
    N: np.ndarray
    psi: EmbeddingTable | None
    q_of: np.ndarray
    q_dist: np.ndarray
    phi: EmbeddingTable
    n_dist: np.ndarray


def fiber_setup(inst, idx: G.GroupIndex, qdim: int = 3, ndim: int = 4) -> FiberSetup:
    """Quotient and coset embeddings for a semidirect or wreath family member."""
    cay = build_cayley(idx)
    N = inst.normal_members(idx)
    part = coset_partition(idx, N)
    q_of = part.labels
    nq = len(part.blocks)
    # quotient graph: blocks joined along the arcs of the Cayley graph
    if nq > 1:
        qh, qt = q_of[cay.heads], q_of[cay.tails]
        qgraph = Graph(nq, qh, qt, name="quotient")
        q_dist = qgraph.all_pairs()
        psi = spectral_embedding(qgraph, min(qdim, nq - 1))
        psi.K = edge_stretch(qgraph, psi.coords)
    else:
        q_dist = np.zeros((1, 1), dtype=np.int64)
        psi = None
    D = cay.all_pairs() if cay.n <= 4096 else None
    if D is None:
        raise ValidationError("fiber setup needs an all-pairs table (|G| <= 4096)")
    n_dist = D[np.ix_(N, N)]
    rep = inst.rep
    if hasattr(rep, "lamp_rows"):
        lamps = rep.lamp_rows(idx.elements[N])
        phi = wreath_euclidean(lamps, int(rep.A.radices[0]))
    else:
        sub = cay.subgraph(N)
        if sub.connected and N.size > 1:
            phi = spectral_embedding(sub, min(ndim, N.size - 1))
        else:
            phi = EmbeddingTable(_classical_scaling(n_dist, ndim), 1.0, "mds")
    # Lipschitz constant with respect to the induced metric on N
    nn = N.size
    if nn > 1:
        iu, ju = np.nonzero(n_dist == 1)
        dd = phi.coords[iu] - phi.coords[ju]
        phi.K = float(np.sqrt(np.max(np.sum(dd * dd, axis=1)))) if iu.size else 1.0
    return FiberSetup(cay, N, psi, q_of, q_dist, phi, n_dist)


def _classical_scaling(D, k):
    n = D.shape[0]
    J = np.eye(n) - 1.0 / n
    Gm = -0.5 * J @ (np.asarray(D, dtype=float) ** 2) @ J
    w, U = np.linalg.eigh((Gm + Gm.T) / 2)
    w = w[::-1][:k]
    U = U[:, ::-1][:, :k]
    return U * np.sqrt(np.maximum(w, 0))


# ---------------------------------------------------------------------------
# subset Poincare refuter


def refute_subset_poincare(f, A, mu=None, graph: Graph | None = None) -> float:
    """sum_{a,b in A} ||f(a) - f(b)||^2 mu(a) mu(b), f normalised to be 1-Lipschitz."""
    F = np.asarray(f.coords if isinstance(f, EmbeddingTable) else f, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if graph is not None:
        s = edge_stretch(graph, F)
        if s > 0:
            F = F / s
    A = np.asarray(A, dtype=np.int64)
    if mu is None:
        mu = np.full(A.size, 1.0 / A.size)
    mu = np.asarray(mu, dtype=float)
    if mu.size != A.size or mu.min() <= 0:
        raise ValidationError("mu must be positive on A")
    mu = mu / mu.sum()
    FA = F[A]
    mean = mu @ FA
    return float(2.0 * (mu @ np.sum(FA * FA, axis=1) - mean @ mean))


@dataclass
class RefuterInstance:
    n: int
    graph: CayleyGraph
    members: np.ndarray
    phi: EmbeddingTable
    r: int
    value: float


def refuter_instance(n: int, lamp: str = "z2", family: str = "sl2-wreath-haagerup") -> RefuterInstance:
    """Truncated lamp embedding on the wreath family and its subset-Poincare value."""
    from .tower import box_family

    inst = box_family(family, n, lamp=lamp)
    idx = inst.enumerate()
    cay = build_cayley(idx)
    N = inst.normal_members(idx)
    rep = inst.rep
    psi = wreath_euclidean(rep.lamp_rows(idx.elements), int(rep.A.radices[0]))
    r = max(1, int(math.ceil(np.sqrt(np.sum(psi.coords[N] ** 2, axis=1)).max())))
    phi, info = truncate_fiberwise(cay, psi.coords, N, r)
    value = refute_subset_poincare(phi, N, graph=cay)
    return RefuterInstance(n, cay, N, phi, r, value)
