"""Graphs, Cayley graphs, word metrics, cosets, action extensions, Folner sets.

A :class:`Graph` is a symmetric multiset of arcs. Each undirected edge
{x, y} contributes the two arcs (x, y) and (y, x); a loop at x contributes
the arcs its labels produce. Energies are available under two conventions:

* ``"unordered"``: sum over undirected edges, i.e. half the arc sum;
* ``"ordered"``: sum over all arcs (g, gs), the sum over pairs (g, s).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import groups as G
from . import kernels
from .errors import Disconnected, NotASubgroup, NotGenerating, NotInvariant, ValidationError

log = logging.getLogger(__name__)

CONVENTIONS = ("unordered", "ordered")


class Graph:
    def __init__(self, n: int, heads, tails, labels=None, name: str = "graph"):
        self.n = int(n)
        self.heads = np.asarray(heads, dtype=np.int64)
        self.tails = np.asarray(tails, dtype=np.int64)
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        self.name = name
        self._adj = None
        self._csr = None

    @classmethod
    def from_edges(cls, n, edges, name="graph"):
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        return cls(n, np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]], name=name)

    # structure -------------------------------------------------------
    @property
    def adjacency(self):
        """Arc-count matrix (loop arcs kept on the diagonal)."""
        if self._adj is None:
            data = np.ones(self.heads.size)
            self._adj = sp.csr_matrix((data, (self.heads, self.tails)), shape=(self.n, self.n))
            self._adj.sum_duplicates()
        return self._adj

    def degrees(self, count_loops: bool = True):
        deg = np.bincount(self.heads, minlength=self.n)
        if not count_loops:
            deg = deg - np.bincount(self.heads[self.heads == self.tails], minlength=self.n)
        return deg

    def degree(self, count_loops: bool = True):
        """The common degree; None if the graph is not regular."""
        deg = self.degrees(count_loops)
        return int(deg[0]) if deg.size and np.all(deg == deg[0]) else None

    def edges(self):
        """Undirected edges (u <= v) with multiplicity, loops excluded."""
        keep = self.heads < self.tails
        return np.stack([self.heads[keep], self.tails[keep]], axis=1)

    def laplacian(self, convention: str = "unordered"):
        """L with f.L.f equal to the edge energy under ``convention``."""
        if convention not in CONVENTIONS:
            raise ValidationError(f"convention must be one of {CONVENTIONS}")
        A = self.adjacency
        L = sp.diags(np.asarray(A.sum(axis=1)).ravel()) - A
        L = L.tocsr()
        # f.(D - A).f sums each unordered edge once
        return L * 2.0 if convention == "ordered" else L

    def energy(self, F, convention: str = "unordered"):
        """Sum of ||F(x) - F(y)||^2 (F of shape (n,) or (n, k))."""
        F = np.asarray(F, dtype=float)
        diff = F[self.heads] - F[self.tails]
        total = float(np.sum(diff * diff))
        return total if convention == "ordered" else total / 2

    def neighbor_csr(self):
        if self._csr is None:
            A = self.adjacency
            self._csr = (A.indptr.astype(np.int64), A.indices.astype(np.int64))
        return self._csr

    def bfs(self, source: int):
        indptr, indices = self.neighbor_csr()
        return kernels.bfs_csr(indptr, indices, int(source))

    def all_pairs(self):
        indptr, indices = self.neighbor_csr()
        return kernels.all_pairs_csr(indptr, indices)

    def components(self):
        return connected_components(self.adjacency, directed=False)

    @property
    def connected(self):
        return self.components()[0] == 1

    def require_connected(self):
        if not self.connected:
            raise Disconnected(f"{self.name} has {self.components()[0]} components")

    def diameter(self):
        return int(self.all_pairs().max())

    def girth(self):
        """Girth of the underlying simple graph (BFS from every vertex)."""
        return _girth(self, range(self.n))

    def subgraph(self, members):
        members = np.asarray(members, dtype=np.int64)
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[members] = np.arange(members.size)
        keep = (pos[self.heads] >= 0) & (pos[self.tails] >= 0)
        return Graph(members.size, pos[self.heads[keep]], pos[self.tails[keep]], name=f"{self.name}[sub]")


def _girth(g: Graph, roots):
    A = g.adjacency.copy()
    A.setdiag(0)
    A.eliminate_zeros()
    A.data[:] = 1
    indptr, indices = A.indptr, A.indices
    best = np.inf
    for root in roots:
        dist = np.full(g.n, -1)
        parent = np.full(g.n, -1)
        dist[root] = 0
        queue = [root]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            if 2 * dist[u] + 1 >= best:
                break
            for v in indices[indptr[u]:indptr[u + 1]]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif parent[u] != v:
                    best = min(best, dist[u] + dist[v] + 1)
    return int(best) if np.isfinite(best) else None


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], name=f"K{n}")


# ---------------------------------------------------------------------------
# Cayley graphs


class CayleyGraph(Graph):
    """Right Cayley graph: arcs g -> g s for every label s of the symmetrized S."""

    def __init__(self, idx: G.GroupIndex, count_loops: bool = True, name: str | None = None):
        self.idx = idx
        self.count_loops = count_loops
        n, L = idx.table.shape
        heads = np.repeat(np.arange(n), L)
        tails = idx.table.reshape(-1).astype(np.int64)
        labels = np.tile(np.arange(L), n)
        self.loop_labels = tuple(int(j) for j in np.flatnonzero(idx.table[0] == 0))
        super().__init__(n, heads, tails, labels, name=name or f"Cay({idx.rep.name})")
        self.label_names = idx.label_names

    @property
    def n_labels(self):
        return self.idx.table.shape[1]

    def regular_degree(self):
        """Degree of the regular graph; loops counted once per label if enabled."""
        return self.n_labels - (0 if self.count_loops else len(self.loop_labels))

    # metric: word length of x^-1 y ----------------------------------
    def dist(self, i, j):
        idx = self.idx
        rep = idx.rep
        d = rep.bmul(rep.binv(idx.elements[np.asarray(i)]), idx.elements[np.asarray(j)])
        return idx.word_length[idx.index_of(d)]

    def dist_to_set(self, members):
        """d_S(g, N) for every vertex g (multi-source BFS)."""
        members = np.asarray(members, dtype=np.int64)
        out = np.full(self.n, -1, dtype=np.int64)
        out[members] = 0
        frontier = members
        d = 0
        tab = self.idx.table
        while frontier.size:
            d += 1
            nb = np.unique(tab[frontier].ravel())
            nb = nb[out[nb] < 0]
            out[nb] = d
            frontier = nb
        return out

    def translate(self, g, verts):
        """Left translation v -> g v on vertex indices."""
        return self.idx.mul_idx(np.full(np.shape(verts), g), verts)

    def export_edges(self, path):
        with open(path, "w") as fh:
            for u, v, lab in self._positive_arcs():
                fh.write(f"{u} {v} {self.label_names[lab]}\n")

    def export_dot(self, path):
        with open(path, "w") as fh:
            fh.write("graph cayley {\n")
            for u, v, lab in self._positive_arcs():
                fh.write(f'  {u} -- {v} [label="{self.label_names[lab]}"];\n')
            fh.write("}\n")

    def export_csr(self, path):
        A = self.adjacency.astype(np.int32)
        with open(path, "wb") as fh:
            np.savez(fh, indptr=A.indptr.astype(np.int64), indices=A.indices.astype(np.int32),
                     data=A.data, shape=np.array(A.shape))

    def _positive_arcs(self):
        k = self.idx.n_gens
        tab = self.idx.table
        for u in range(self.n):
            for j in range(k):
                v = int(tab[u, j])
                if v == u and not self.count_loops:
                    continue
                yield u, v, j


def build_cayley(idx: G.GroupIndex, expected_order: int | None = None, count_loops: bool = True) -> CayleyGraph:
    if expected_order is not None and idx.order != expected_order:
        raise NotGenerating(f"S reaches {idx.order} of {expected_order} vertices")
    if idx.n_gens and (idx.table[0] == 0).any():
        log.info("cayley: %d loop labels (%s)", int((idx.table[0] == 0).sum()),
                 "counted" if count_loops else "not counted")
    return CayleyGraph(idx, count_loops=count_loops)


def load_csr(path):
    with np.load(path) as z:
        return sp.csr_matrix((z["data"], z["indices"], z["indptr"]), shape=tuple(z["shape"]))


# ---------------------------------------------------------------------------
# auxiliary metrics


def induced_metric(graph: Graph, members, D=None):
    """Ambient distances restricted to ``members``."""
    members = np.asarray(members, dtype=np.int64)
    if D is None:
        D = graph.all_pairs()
    return D[np.ix_(members, members)]


def intrinsic_metric(graph: Graph, members):
    """Distances inside the induced subgraph (-1 where disconnected)."""
    return graph.subgraph(members).all_pairs()


def y_metric(lamps_a, lamps_b, modulus: int):
    """Word metric on (+)_Z Z/modulus w.r.t. Y = {+-1_g}: sum of cyclic distances."""
    delta = (np.asarray(lamps_a) - np.asarray(lamps_b)) % modulus
    return np.sum(np.minimum(delta, modulus - delta), axis=-1)


# ---------------------------------------------------------------------------
# cosets


@dataclass
class Partition:
    labels: np.ndarray  # block id per vertex
    blocks: list

    @property
    def sizes(self):
        return [len(b) for b in self.blocks]


def partition_from_labels(labels) -> Partition:
    labels = np.asarray(labels, dtype=np.int64)
    _, lab = np.unique(labels, return_inverse=True)
    order = np.argsort(lab, kind="stable")
    splits = np.cumsum(np.bincount(lab))[:-1]
    return Partition(lab, [np.sort(b) for b in np.split(order, splits)])


def coset_partition(idx: G.GroupIndex, members) -> Partition:
    """Blocks gH: the orbits of right multiplication by H."""
    members = np.unique(np.asarray(members, dtype=np.int64))
    if not G.is_subgroup(idx, members):
        raise NotASubgroup("the given set is not closed under products and inverses")
    n = idx.order
    rows, cols = [], []
    for h in _small_generating(idx, members):
        rows.append(np.arange(n))
        cols.append(idx.mul_idx(np.arange(n), np.full(n, h)))
    if not rows:
        return partition_from_labels(np.arange(n))
    A = sp.csr_matrix((np.ones(n * len(rows)), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    _, lab = connected_components(A, directed=False)
    part = partition_from_labels(lab)
    if any(s != members.size for s in part.sizes):
        raise NotASubgroup("coset blocks have unequal sizes")
    return part


def _small_generating(idx: G.GroupIndex, members):
    """A generating subset of the subgroup, accepted greedily."""
    rep = idx.rep
    acc = []
    cur = np.zeros(1, dtype=np.int64)
    for g in members[1:]:
        if not np.isin(g, cur):
            acc.append(int(g))
            sub = G.enumerate_group(rep, idx.elements[acc])
            cur = np.sort(idx.index_of(sub.elements))
            if cur.size == members.size:
                break
    return acc


# ---------------------------------------------------------------------------
# action of N x| R on Cay(N, T)


@dataclass
class ActionReport:
    invariant: bool
    edges_preserved: bool
    homomorphism: bool
    permutations: np.ndarray  # for the generators of H, on indices of N
    checked_elements: int
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.invariant and self.edges_preserved and self.homomorphism


def action_extension_check(nidx: G.GroupIndex, T, H: G.ArrayGroup, hidx: G.GroupIndex | None = None,
                           samples: int = 256, seed: int = 0) -> ActionReport:
    """Check that h o n0 = n (r . n0) acts on Cay(N, T) by labelled-graph maps.

    ``H`` must provide ``act_on_normal(h_rows, n_rows)`` and ``split``;
    ``nidx`` indexes N with its own row encoding (as returned by split).
    """
    rng = np.random.default_rng(seed)
    T = np.asarray(T, dtype=np.int64)
    Nrep = nidx.rep
    tkeys = np.sort(Nrep.keys(T))

    def in_T(rows):
        k = Nrep.keys(rows)
        pos = np.minimum(np.searchsorted(tkeys, k), tkeys.size - 1)
        return tkeys[pos] == k

    zero = np.asarray(Nrep.identity_row)
    # R-conjugation: the pure-R generators of H acting on T
    hgens = H.gen_rows
    pure_r = [h for h in hgens if np.array_equal(H.split(h)[0], zero)]
    invariant = all(in_T(H.act_on_normal(np.broadcast_to(h, (T.shape[0], h.size)), T)).all() for h in pure_r)
    if not invariant:
        raise NotInvariant("T is not invariant under the R-action")

    def perm(h):
        img = H.act_on_normal(np.broadcast_to(h, (nidx.order, h.size)), nidx.elements)
        return nidx.index_of(img)

    elems = list(hgens)
    if hidx is not None:
        pick = rng.integers(hidx.order, size=min(samples, hidx.order))
        elems += list(hidx.elements[pick])
    perms = np.array([perm(h) for h in elems])
    edges_ok = True
    for p in perms:
        if np.unique(p).size != nidx.order:
            edges_ok = False
            break
        # edge (n0, n0 t) -> (p n0, p (n0 t)); need (p n0)^-1 p(n0 t) in T
        for t in T:
            tgt = nidx.index_of(Nrep.bmul(nidx.elements, t[None]))
            diff = Nrep.bmul(Nrep.binv(nidx.elements[p]), nidx.elements[p[tgt]])
            if not in_T(diff).all():
                edges_ok = False
                break
        if not edges_ok:
            break
    hom = True
    src = hidx.elements if hidx is not None else hgens
    for _ in range(samples):
        a = src[rng.integers(len(src))]
        b = src[rng.integers(len(src))]
        n0 = nidx.elements[rng.integers(nidx.order)]
        lhs = H.act_on_normal(H.bmul(a[None], b[None]), n0[None])
        rhs = H.act_on_normal(a[None], H.act_on_normal(b[None], n0[None]))
        if not np.array_equal(lhs, rhs):
            hom = False
            break
    return ActionReport(invariant, edges_ok, hom, perms[: len(hgens)], len(elems))


# ---------------------------------------------------------------------------
# Folner sets


@dataclass
class FolnerResult:
    members: np.ndarray
    R: int
    ratio: float
    diameter_bound: int
    diameter: int


def folner_set(aidx: G.GroupIndex, r: int, eps: float, max_R: int | None = None) -> FolnerResult:
    """Smallest word ball F = B(R) with |gF delta F| <= eps |F| for all |g| <= r.

    The word metric of ``aidx`` plays the role of the invariant metric; the
    ball's diameter is at most 2R, inside the 2R + 2r allowance.
    """
    wl = aidx.word_length
    dmax = int(wl.max())
    max_R = dmax if max_R is None else max_R
    probes = np.flatnonzero(wl <= r)
    for R in range(0, max_R + 1):
        F = np.flatnonzero(wl <= R)
        worst = 0.0
        for g in probes:
            gF = aidx.mul_idx(np.full(F.size, g), F)
            sym = 2 * (F.size - np.isin(gF, F).sum())
            worst = max(worst, sym / F.size)
        if worst <= eps:
            diam = _set_diameter(aidx, F)
            return FolnerResult(F, R, worst, 2 * R + 2 * r, diam)
    F = np.arange(aidx.order)
    return FolnerResult(F, dmax, 0.0, 2 * dmax + 2 * r, dmax)


def _set_diameter(aidx: G.GroupIndex, F):
    rep = aidx.rep
    if F.size > 4096:
        return int(2 * aidx.word_length[F].max())
    a = aidx.elements[F]
    d = rep.bmul(rep.binv(a)[:, None, :], a[None, :, :])
    return int(aidx.word_length[aidx.index_of(d)].max())
