"""Embedding tables and their measurement.

Tables map vertex indices to points of R^k. All Lipschitz constants are
taken with respect to graph metrics, so "K-Lipschitz" is checked on edges.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cayley import CayleyGraph, Graph, y_metric
from .errors import Disconnected, LipschitzViolation, NotCND, SandwichViolation, ValidationError

log = logging.getLogger(__name__)

CND_TOL = 1e-10


@dataclass
class EmbeddingTable:
    coords: np.ndarray
    K: float
    name: str = "embedding"
    notes: list = field(default_factory=list)

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]

    def stretch(self, graph: Graph) -> float:
        return edge_stretch(graph, self.coords)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex"] + [f"x{i}" for i in range(self.dim)])
            for v, row in enumerate(self.coords):
                w.writerow([v] + [repr(float(x)) for x in row])

    def image_distances(self, i, j):
        d = self.coords[np.asarray(i)] - self.coords[np.asarray(j)]
        return np.sqrt(np.sum(d * d, axis=-1))


def edge_stretch(graph: Graph, coords) -> float:
    """max ||X(u) - X(v)|| over the edges of the graph."""
    X = np.asarray(coords, dtype=float)
    keep = graph.heads != graph.tails
    d = X[graph.heads[keep]] - X[graph.tails[keep]]
    return float(np.sqrt(np.max(np.sum(d * d, axis=1)))) if keep.any() else 0.0


def lipschitz_table(coords, graph: Graph, name: str) -> EmbeddingTable:
    X = np.asarray(coords, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return EmbeddingTable(X, edge_stretch(graph, X), name)


# ---------------------------------------------------------------------------
# lamp embeddings


def polygon_chord(delta, modulus: int):
    """Distance between vertices ``delta`` apart on the unit-side regular polygon."""
    delta = np.asarray(delta, dtype=float)
    if modulus == 2:
        return delta
    return np.sin(np.pi * delta / modulus) / np.sin(np.pi / modulus)


def wreath_euclidean(lamps, modulus: int) -> EmbeddingTable:
    """Each lamp value a in Z/M goes to vertex a of a regular M-gon with unit sides.

    For M = 2 the lamp is its own 0/1 coordinate. Summing over lamps gives
    sqrt(d_Y) <= ||h(f) - h(f')|| <= d_Y for every pair.
    """
    L = np.asarray(lamps, dtype=np.int64)
    if modulus == 2:
        return EmbeddingTable(L.astype(float), 1.0, "wreath-indicator")
    R = 1.0 / (2 * np.sin(np.pi / modulus))
    ang = 2 * np.pi * L / modulus
    X = np.concatenate([R * np.cos(ang), R * np.sin(ang)], axis=1)
    return EmbeddingTable(X, 1.0, f"wreath-polygon-{modulus}")


@dataclass
class SandwichReport:
    pairs: int
    violations: int
    worst_lower: float  # min over pairs of ||.|| - sqrt(d_Y)
    worst_upper: float  # min over pairs of d_Y - ||.||
    modulus: int

    @property
    def ok(self):
        return self.violations == 0

    def to_dict(self):
        return dict(pairs=self.pairs, violations=self.violations, worst_lower=self.worst_lower,
                    worst_upper=self.worst_upper, modulus=self.modulus)


def sandwich_check(table: EmbeddingTable, lamps, modulus: int, pairs=None, strict: bool = True,
                   tol: float = 1e-9) -> SandwichReport:
    """Check sqrt(d_Y) <= ||h(f) - h(f')|| <= d_Y on all (or the given) pairs."""
    L = np.asarray(lamps, dtype=np.int64)
    n = L.shape[0]
    if pairs is None:
        iu, ju = np.triu_indices(n, 1)
    else:
        iu, ju = (np.asarray(p, dtype=np.int64) for p in pairs)
    viol, lo, hi = 0, np.inf, np.inf
    step = 1 << 18
    for a in range(0, iu.size, step):
        i, j = iu[a:a + step], ju[a:a + step]
        dy = y_metric(L[i], L[j], modulus).astype(float)
        im = table.image_distances(i, j)
        lower = im - np.sqrt(dy)
        upper = dy - im
        viol += int(np.sum((lower < -tol) | (upper < -tol)))
        if i.size:
            lo = min(lo, float(lower.min()))
            hi = min(hi, float(upper.min()))
    rep = SandwichReport(int(iu.size), viol, lo, hi, modulus)
    if strict and viol:
        raise SandwichViolation(f"{viol} pairs violate sqrt(d_Y) <= ||h - h'|| <= d_Y")
    return rep


# ---------------------------------------------------------------------------
# truncation


@dataclass
class TruncationInfo:
    r: int
    scale: float
    psi_lipschitz: float
    phi_lipschitz: float
    neighborhood: int


def truncate_fiberwise(graph: CayleyGraph, psi, members, r: int, tol: float = 1e-12):
    """phi(g) = psi(g) (1 - d(g, N)/r) on [N]_r, 0 elsewhere; phi/2 is 1-Lipschitz."""
    if r <= 0:
        raise ValidationError("r must be positive")
    psi = np.asarray(psi, dtype=float)
    if psi.ndim == 1:
        psi = psi[:, None]
    dN = graph.dist_to_set(members)
    inside = dN <= r
    h, t = graph.heads, graph.tails
    both = inside[h] & inside[t] & (h != t)
    d = psi[h[both]] - psi[t[both]]
    lip = float(np.sqrt(np.max(np.sum(d * d, axis=1)))) if both.any() else 0.0
    if lip > 1 + 1e-9:
        raise LipschitzViolation(f"psi has stretch {lip:.6g} > 1 on [N]_r")
    norms = np.sqrt(np.sum(psi[inside] ** 2, axis=1))
    scale = 1.0
    if norms.max() > r:
        scale = r / float(norms.max())
        log.info("truncate: psi rescaled by %.6g so that ||psi|| <= r on [N]_r", scale)
    w = np.where(inside, 1.0 - dN / r, 0.0)
    phi = psi * scale * w[:, None]
    K = edge_stretch(graph, phi)
    if K > 2 * (1 + tol):
        raise LipschitzViolation(f"phi has edge stretch {K:.6g} > 2")
    info = TruncationInfo(int(r), scale, lip * scale, K, int(inside.sum()))
    return EmbeddingTable(phi, K, "truncated-fiberwise"), info


# ---------------------------------------------------------------------------
# profiles


@dataclass
class CompressionProfile:
    t: np.ndarray
    rho: np.ndarray
    gamma: np.ndarray
    pairs: int
    mode: str

    def to_list(self):
        return [[int(a), float(b), float(c)] for a, b, c in zip(self.t, self.rho, self.gamma)]

    def rho_at(self, t):
        """Smallest image distance over realised source distances >= t."""
        sel = self.t >= t
        return float(self.rho[sel].min()) if sel.any() else math.inf

    def rho_monotone(self):
        """rho_bar(t) = min over s >= t of rho(s): the properness envelope."""
        return np.minimum.accumulate(self.rho[::-1])[::-1]


def compression_profile(table: EmbeddingTable, D, samples: int | None = None, seed: int = 0) -> CompressionProfile:
    """rho(t) = min and gamma(t) = max image distance over pairs with d = t.

    ``D`` is a distance matrix or, for sampled profiles, a callable
    ``D(i, j)`` returning distances of index arrays.
    """
    X = np.ascontiguousarray(table.coords, dtype=float)
    n = X.shape[0]
    if samples is None:
        D = np.asarray(D)
        tmax = int(D.max())
        rho, gamma = kernels.pair_profile(X, D.astype(np.int64), tmax)
        pairs, mode = n * (n - 1) // 2, "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(n, size=samples)
        j = rng.integers(n, size=samples)
        keep = i != j
        i, j = i[keep], j[keep]
        t = (D(i, j) if callable(D) else np.asarray(D)[i, j]).astype(np.int64)
        tmax = int(t.max())
        dist = table.image_distances(i, j)
        rho = np.full(tmax + 1, np.inf)
        gamma = np.full(tmax + 1, -np.inf)
        np.minimum.at(rho, t, dist)
        np.maximum.at(gamma, t, dist)
        pairs, mode = int(i.size), "sampled"
    ts = np.flatnonzero(np.isfinite(rho))
    ts = ts[ts > 0]
    return CompressionProfile(ts, rho[ts], gamma[ts], pairs, mode)


# ---------------------------------------------------------------------------
# Bernstein rescaling


def _bernstein(F, a: float = 1.0):
    if callable(F):
        return F
    table = {
        "identity": lambda t: t,
        "sqrt": np.sqrt,
        "frac": lambda t: t / (1 + t),
        "exp": lambda t: 1 - np.exp(-a * t),
    }
    if F not in table:
        raise ValidationError(f"unknown Bernstein function {F!r}; choose from {sorted(table)}")
    return table[F]


def centered_gram(K2):
    K2 = np.asarray(K2, dtype=float)
    n = K2.shape[0]
    J = np.eye(n) - 1.0 / n
    Gm = -0.5 * J @ K2 @ J
    return (Gm + Gm.T) / 2


def cnd_defect(K2) -> float:
    """Most negative centered-Gram eigenvalue, relative to the largest (0 if CND)."""
    w = np.linalg.eigvalsh(centered_gram(K2))
    scale = max(1.0, float(np.abs(w).max()))
    return float(max(0.0, -w.min()) / scale)


def squared_distances(coords):
    X = np.asarray(coords, dtype=float)
    sq = np.sum(X * X, axis=1)
    K2 = sq[:, None] + sq[None, :] - 2 * X @ X.T
    return np.maximum(K2, 0.0)


def realize(K2, tol: float = CND_TOL):
    """Points whose squared distances are K2 (classical scaling)."""
    Gm = centered_gram(K2)
    w, U = np.linalg.eigh(Gm)
    scale = max(1.0, float(np.abs(w).max()))
    if w.min() < -tol * scale:
        raise NotCND(f"kernel is not conditionally negative definite (eigenvalue {w.min():.3e})")
    keep = w > tol * scale
    X = U[:, keep] * np.sqrt(w[keep])
    for c in range(X.shape[1]):
        i = int(np.argmax(np.abs(X[:, c])))
        if X[i, c] < 0:
            X[:, c] *= -1
    return X


def bernstein_rescale(source, F="identity", a: float = 1.0, kernel: bool = False, name=None) -> EmbeddingTable:
    """Realise the squared-distance kernel F(||x - y||^2) (or F(K2) if ``kernel``)."""
    K2 = np.asarray(source, dtype=float) if kernel else squared_distances(
        source.coords if isinstance(source, EmbeddingTable) else source)
    if cnd_defect(K2) > CND_TOL:
        raise NotCND("input kernel is not conditionally negative definite")
    f = _bernstein(F, a)
    out = f(K2)
    np.fill_diagonal(out, 0.0)
    X = realize(out)
    if cnd_defect(squared_distances(X)) > CND_TOL:
        raise NotCND("rescaled kernel failed the CND re-check")
    label = F if isinstance(F, str) else getattr(F, "__name__", "F")
    return EmbeddingTable(X, math.nan, name or f"bernstein-{label}")


def slow_down(table: EmbeddingTable, D, K: float, iters: int = 60):
    """Least aggressive F_a(t) = (1 - exp(-a t))/a with F_a(gamma(t)^2) <= (t/K)^2.

    Returns (a, rescaled table); a = 0 means the identity already works.
    """
    prof = compression_profile(table, D)
    t, g2 = prof.t.astype(float), prof.gamma ** 2
    target = (t / K) ** 2

    def ok(a):
        val = g2 if a == 0 else (1 - np.exp(-a * g2)) / a
        return bool(np.all(val <= target * (1 + 1e-12)))

    if ok(0.0):
        return 0.0, table
    lo, hi = 0.0, 1.0
    while not ok(hi):
        hi *= 2
        if hi > 1e12:
            raise ValidationError("no member of the family slows the map down enough")
    for _ in range(iters):
        mid = (lo + hi) / 2
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    a = hi
    out = bernstein_rescale(table, lambda s: (1 - np.exp(-a * s)) / a, name="slowed")
    return a, out


# ---------------------------------------------------------------------------
# spectral embeddings and weak embeddings


def spectral_embedding(graph: Graph, k: int) -> EmbeddingTable:
    """Lowest k nonzero Laplacian eigenvectors, scaled to be 1-Lipschitz."""
    n = graph.n
    if not graph.connected:
        raise Disconnected("spectral embedding needs a connected graph")
    if not 1 <= k <= n - 1:
        raise ValidationError("need 1 <= k <= |V| - 1")
    w, U = np.linalg.eigh(graph.laplacian("unordered").toarray())
    X = U[:, 1:k + 1].copy()
    for c in range(k):
        i = int(np.argmax(np.abs(X[:, c])))
        if X[i, c] < 0:
            X[:, c] *= -1
    s = edge_stretch(graph, X)
    if s > 0:
        X /= s
    return EmbeddingTable(X, edge_stretch(graph, X), f"spectral-{k}")


@dataclass
class WeakEmbeddingResult:
    ratios: list
    fiber_ratios: list
    R: float
    decreasing: bool

    def to_dict(self):
        return dict(R=self.R, ratios=self.ratios, fiber_ratios=self.fiber_ratios, decreasing=self.decreasing)


def fiber_ratio(phi, DY, R: float) -> float:
    """sup_x |phi^-1(B(phi(x), R))| / |X| for a vertex map into a metric DY."""
    phi = np.asarray(phi, dtype=np.int64)
    DY = np.asarray(DY)
    mult = np.bincount(phi, minlength=DY.shape[0]).astype(float)
    img = np.unique(phi)
    counts = (DY[np.ix_(img, np.arange(DY.shape[0]))] <= R) @ mult
    return float(counts.max() / phi.size)


def weak_embedding_test(maps, R: float = 0.0) -> WeakEmbeddingResult:
    """``maps``: sequence of (phi_n vertex map, distance matrix of Y_n)."""
    ratios = [fiber_ratio(phi, DY, R) for phi, DY in maps]
    fibers = [fiber_ratio(phi, DY, 0) for phi, DY in maps]
    dec = len(ratios) > 1 and all(b <= a for a, b in zip(ratios, ratios[1:])) and ratios[-1] < ratios[0]
    return WeakEmbeddingResult(ratios, fibers, R, bool(dec))


def lamp_composite(graph: CayleyGraph, lamps, modulus: int, quotient_coords=None, quotient_of=None):
    """g -> (h(lamp(g)) + q(pi(g))) / sqrt(2): 1-Lipschitz on the wreath Cayley graph.

    Right multiplication by a lamp generator changes one lamp by one step,
    and by a base generator leaves the lamps unchanged, so h o lamp is
    1-Lipschitz; the quotient part is 1-Lipschitz by assumption.
    """
    h = wreath_euclidean(lamps, modulus).coords
    if quotient_coords is None:
        X = h
    else:
        X = np.concatenate([h, np.asarray(quotient_coords)[quotient_of]], axis=1) / math.sqrt(2)
    return EmbeddingTable(X, edge_stretch(graph, X), "lamp-composite")
