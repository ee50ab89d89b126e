"""Square-subgroup series, the tower H_n = F_m / Gamma_n(F_m) and the families.

H_{n+1} is stored as pairs (x, v): x in H_n and v a mod-2 vector indexed by
the non-tree arcs of the Schreier graph of H_n (its Cayley graph w.r.t.
t_1..t_m). A word w maps to its endpoint x and the parity with which it
crosses each non-tree arc. Tree arcs come from the BFS spanning tree of the
enumerated H_n, so transversal words always carry v = 0.

Two implementations share this encoding:

* :class:`TowerGroup` packs v into an int64 and multiplies whole batches;
  it is used whenever |H_n| * 2^r fits in 62 bits.
* :class:`LazyTower` keeps v as a frozenset of arcs and multiplies by
  rewriting the right factor into a word. It never needs enumeration.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import groups as G
from .errors import NotAQuotient, ResourceLimit, ValidationError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# gamma series


@dataclass
class GammaSeries:
    group: G.GroupIndex
    subgroups: list
    trivial: bool

    @property
    def steps(self):
        """Smallest n with Gamma_n = {e}, or None."""
        for i, s in enumerate(self.subgroups):
            if s.size == 1:
                return i
        return None

    def orders(self):
        return [int(s.size) for s in self.subgroups]


def gamma_series(idx: G.GroupIndex, max_steps: int = 64) -> GammaSeries:
    cur = np.arange(idx.order, dtype=np.int64)
    series = [cur]
    for _ in range(max_steps):
        squares = np.unique(idx.mul_idx(cur, cur))
        nxt = G.subgroup_closure(idx, squares)
        if nxt.size == cur.size:
            break
        series.append(nxt)
        cur = nxt
        if cur.size == 1:
            break
    return GammaSeries(idx, series, bool(series[-1].size == 1))


def nested_square_word(depth: int, m: int, rng, width: int = 2, base_len: int = 3):
    """Random word (signed 1-based letters) lying in Gamma_depth(F_m)."""
    if depth == 0:
        length = int(rng.integers(1, base_len + 1))
        return [int(c) for c in rng.choice(np.r_[1:m + 1, -m:0], size=length)]
    out = []
    for _ in range(width):
        w = nested_square_word(depth - 1, m, rng, width, base_len)
        out += w + w
    return out


# ---------------------------------------------------------------------------
# Schreier data


@dataclass
class SchreierData:
    """BFS spanning tree of Cayley(H, {t_i}) and its non-tree arcs."""

    base: G.GroupIndex
    m: int
    tree: np.ndarray  # bool, length N*m, arc id z*m + i
    col: np.ndarray  # arc id -> non-tree column or -1
    arcs: np.ndarray  # non-tree arc ids in column order

    @property
    def rank(self):
        return int(self.arcs.size)

    @classmethod
    def build(cls, base: G.GroupIndex, m: int):
        if base.n_gens != m:
            raise ValidationError(f"base has {base.n_gens} generators, expected m = {m}")
        N = base.order
        tree = np.zeros(N * m, dtype=bool)
        x = np.arange(1, N)
        p, j = base.parent[1:], base.parent_label[1:]
        fwd = j < m
        tree[p[fwd] * m + j[fwd]] = True
        tree[x[~fwd] * m + (j[~fwd] - m)] = True
        arcs = np.flatnonzero(~tree)
        col = np.full(N * m, -1, dtype=np.int64)
        col[arcs] = np.arange(arcs.size)
        r = N * (m - 1) + 1
        if arcs.size != r:
            raise ValidationError(f"Schreier rank {arcs.size} != |H|(m-1)+1 = {r}")
        return cls(base, m, tree, col, arcs)

    def letters(self, label):
        m = self.m
        return label + 1 if label < m else -(label - m + 1)

    def transversal(self, z):
        """Transversal word tau(z) as signed 1-based letters."""
        return [self.letters(j) for j in self.base.word(int(z))]

    def schreier_word(self, arc):
        z, i = divmod(int(arc), self.m)
        end = int(self.base.table[z, i])
        back = [-c for c in reversed(self.transversal(end))]
        return self.transversal(z) + [i + 1] + back


def rank(N: int, m: int) -> int:
    return N * (m - 1) + 1


# ---------------------------------------------------------------------------
# packed tower level


class TowerGroup(G.ArrayGroup):
    """H_{n+1} over an enumerated H_n with the mod-2 vector packed in int64."""

    def __init__(self, base: G.GroupIndex, m: int, level: int | None = None):
        sd = SchreierData.build(base, m)
        N, r = base.order, sd.rank
        if r + math.log2(N) > 62:
            raise ResourceLimit(f"packed tower needs {r + math.log2(N):.0f} bits")
        self.sd, self.base, self.m, self.N, self.r = sd, base, m, N, r
        self.level = level
        self.width = 2
        self.radices = np.array([N, 1 << r], dtype=np.int64)
        self.identity = (0, 0)
        self.log2_order = math.log2(N) + r
        self.name = f"H_{level}(m={m})" if level is not None else f"2-cover of {base.rep.name}"
        tab = base.table
        # left multiplication and inverses in H_n
        self._inv = base.inv_idx(np.arange(N))
        lm = np.empty((N, N), dtype=np.int64)
        for x in range(N):
            lm[x] = base.index_of(base.rep.bmul(base.elements[x][None], base.elements))
        self._lm = lm
        # tree path parity vectors over all arcs
        tp = np.zeros((N, N * m), dtype=bool)
        for x in range(1, N):
            p, j = base.parent[x], base.parent_label[x]
            tp[x] = tp[p]
            arc = p * m + j if j < m else x * m + (j - m)
            tp[x, arc] ^= True
        weights = np.zeros(N * m, dtype=np.int64)
        weights[sd.arcs] = 1 << np.arange(r, dtype=np.int64)
        arc_z, arc_i = np.divmod(np.arange(N * m), m)

        def pack_shifted(vecs, x):
            # arc (z, i) -> (x z, i)
            tgt = lm[x, arc_z] * m + arc_i
            out = np.zeros(vecs.shape[0], dtype=np.int64)
            for k in range(vecs.shape[0]):
                out[k] = np.bitwise_xor.reduce(weights[tgt[vecs[k]]]) if vecs[k].any() else 0
            return out

        fund = np.zeros((r, N * m), dtype=bool)
        for j, a in enumerate(sd.arcs):
            z, i = divmod(int(a), m)
            fund[j] = tp[z] ^ tp[tab[z, i]]
            fund[j, a] ^= True
        self._C = np.stack([pack_shifted(fund, x) for x in range(N)])  # (N, r)
        self._c = np.stack([pack_shifted(tp, x) for x in range(N)])  # (N, N): c[x, y]
        gens = []
        for i in range(m):
            a = i  # arc (e, i)
            bits = (1 << int(sd.col[a])) if sd.col[a] >= 0 else 0
            gens.append((int(tab[0, i]), bits))
        self.gens = tuple(gens)
        self.gen_names = tuple(f"t{i + 1}" for i in range(m))

    def _apply_C(self, x, u):
        out = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(u)), dtype=np.int64)
        for j in range(self.r):
            bit = (u >> j) & 1
            out ^= np.where(bit == 1, self._C[x, j], 0)
        return out

    def bmul(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X), np.asarray(Y))
        x, v = X[..., 0], X[..., 1]
        y, u = Y[..., 0], Y[..., 1]
        out = np.empty_like(X)
        out[..., 0] = self._lm[x, y]
        out[..., 1] = v ^ self._apply_C(x, u) ^ self._c[x, y]
        return out

    def binv(self, X):
        X = np.asarray(X)
        x, v = X[..., 0], X[..., 1]
        xi = self._inv[x]
        out = np.empty_like(X)
        out[..., 0] = xi
        out[..., 1] = self._apply_C(xi, v) ^ self._c[xi, x]
        return out

    def project(self, X):
        """Base projection H_{n+1} -> H_n (index into the base)."""
        return np.asarray(X)[..., 0]

    def describe(self, a):
        return f"({int(a[0])};{int(a[1]):#x})"


# ---------------------------------------------------------------------------
# lazy tower level


class LazyTower(G.Group):
    """H_{n+1} over an enumerated H_n; elements are (x, frozenset of arcs)."""

    def __init__(self, base: G.GroupIndex, m: int, level: int | None = None):
        self.sd = SchreierData.build(base, m)
        self.base, self.m, self.level = base, m, level
        self.N, self.r = base.order, self.sd.rank
        self.log2_order = math.log2(self.N) + self.r
        self.name = f"H_{level}(m={m})" if level is not None else f"2-cover of {base.rep.name}"
        self.identity = (0, frozenset())
        self.gen_names = tuple(f"t{i + 1}" for i in range(m))
        self.gens = tuple(self.step(self.identity, i + 1) for i in range(m))
        self._word_cache = {}

    def step(self, a, letter):
        x, S = a
        m, tab, tree = self.m, self.base.table, self.sd.tree
        i = abs(letter) - 1
        if letter > 0:
            y = int(tab[x, i])
            arc = x * m + i
        else:
            y = int(tab[x, m + i])
            arc = y * m + i
        if not tree[arc]:
            S = S ^ frozenset((arc,))
        return (y, S)

    def apply(self, a, letters):
        for c in letters:
            a = self.step(a, c)
        return a

    def to_word(self, b):
        y, U = b
        out = []
        for arc in sorted(U):
            w = self._word_cache.get(arc)
            if w is None:
                w = self._word_cache[arc] = self.sd.schreier_word(arc)
            out += w
        return out + self.sd.transversal(y)

    def mul(self, a, b):
        return self.apply(a, self.to_word(b))

    def inv(self, a):
        w = self.to_word(a)
        return self.apply(self.identity, [-c for c in reversed(w)])

    def from_word(self, letters):
        return self.apply(self.identity, letters)

    def project(self, a):
        return a[0]

    def describe(self, a):
        return f"({a[0]};{','.join(str(x) for x in sorted(a[1]))})"

    def to_packed(self, a):
        """Row (x, bits) in the packed encoding of the same level."""
        bits = 0
        for arc in a[1]:
            bits |= 1 << int(self.sd.col[arc])
        return (a[0], bits)


def two_cover(base: G.GroupIndex, m: int | None = None, level: int | None = None, lazy: bool | None = None):
    """H_{n+1} from an enumerated H_n; packed when it fits, lazy otherwise."""
    m = base.n_gens if m is None else m
    N = base.order
    bits = rank(N, m) + math.log2(N)
    if lazy is None:
        lazy = bits > 62
    if lazy:
        return LazyTower(base, m, level)
    return TowerGroup(base, m, level)


@dataclass
class Tower:
    m: int
    reps: list
    indices: list = field(default_factory=list)

    @property
    def top(self):
        return self.reps[-1]

    def orders_log2(self):
        return [r.log2_order for r in self.reps]


def build_tower(m: int, levels: int, cap: int = G.DEFAULT_CAP) -> Tower:
    """H_0, ..., H_levels; all but possibly the last are enumerated."""
    if m < 1:
        raise ValidationError("m must be >= 1")
    rep = G.TrivialGroup(m)
    reps = [rep]
    idxs = [G.enumerate_group(rep, cap=cap)]
    for k in range(1, levels + 1):
        base = idxs[-1]
        if base is None:
            raise ResourceLimit(f"H_{k - 1}(m={m}) is not enumerable; cannot build H_{k}",
                                largest_feasible=k - 1)
        rep = two_cover(base, m, level=k)
        reps.append(rep)
        if k < levels:
            if rep.log2_order > math.log2(cap) or isinstance(rep, LazyTower):
                raise ResourceLimit(f"|H_{k}(m={m})| = 2^{rep.log2_order:.0f} exceeds cap {cap}",
                                    largest_feasible=k)
            idx = G.enumerate_group(rep, cap=cap)
            expected = base.order * (1 << rank(base.order, m))
            if idx.order != expected:
                raise G.OrderMismatch(f"|H_{k}| = {idx.order}, order law gives {expected}")
            idxs.append(idx)
        else:
            idxs.append(None)
    return Tower(m, reps, idxs)


def tower_index(m: int, level: int, cap: int = G.DEFAULT_CAP) -> G.GroupIndex:
    """Enumerated H_level (checks the order law)."""
    t = build_tower(m, level, cap)
    rep = t.reps[-1]
    if rep.log2_order > math.log2(cap):
        raise ResourceLimit(f"|H_{level}| = 2^{rep.log2_order:.0f} exceeds cap", largest_feasible=level - 1)
    idx = G.enumerate_group(rep, cap=cap)
    base = t.indices[-2]
    expected = base.order * (1 << rank(base.order, m))
    if idx.order != expected:
        raise G.OrderMismatch(f"|H_{level}| = {idx.order}, order law gives {expected}")
    return idx


# ---------------------------------------------------------------------------
# epimorphisms


def word_images(base: G.GroupIndex, target: G.GroupIndex, s_idx) -> np.ndarray:
    """Image in ``target`` of the BFS word of every element of ``base``."""
    s_idx = np.asarray(s_idx, dtype=np.int64)
    m = s_idx.size
    label_img = np.concatenate([s_idx, target.inv_idx(s_idx)])
    img = np.zeros(base.order, dtype=np.int64)
    level = base.word_length
    for d in range(1, int(level.max()) + 1 if base.order > 1 else 1):
        sel = np.flatnonzero(level == d)
        img[sel] = target.mul_idx(img[base.parent[sel]], label_img[base.parent_label[sel]])
    if label_img.size != 2 * m:
        raise ValidationError("bad generator images")
    return img


@dataclass
class Epimorphism:
    """t_i -> s_i from a tower level onto an enumerated 2-group."""

    source: object
    target: G.GroupIndex
    s_idx: np.ndarray
    table: np.ndarray | None  # images of all source elements (enumerated source)
    tau_img: np.ndarray | None  # images of transversal words (lazy source)
    arc_img: dict | None
    verified: str
    surjective: bool

    def __call__(self, a):
        """Target index of a source element (index for enumerated sources)."""
        if self.table is not None:
            return self.table[a]
        x, S = a
        out = int(self.tau_img[x])
        for arc in S:
            g = self.arc_img.get(arc)
            if g is not None:
                out = int(self.target.mul_idx(g, out))
        return out

    def of_word(self, letters):
        t = self.target
        out = 0
        for c in letters:
            g = int(self.s_idx[abs(c) - 1])
            g = g if c > 0 else int(t.inv_idx(g))
            out = int(t.mul_idx(out, g))
        return out


def tower_epimorphism(source, target: G.GroupIndex, s_idx=None, samples: int = 10_000, seed: int = 0) -> Epimorphism:
    """The map t_i -> s_i; exact check for enumerated or lazy sources.

    ``source`` is a GroupIndex of H_n (exhaustive homomorphism check) or a
    LazyTower (the images of the free Schreier generators must generate an
    elementary abelian subgroup, plus random-word agreement).
    """
    if s_idx is None:
        s_idx = target.index_of(target.gens)
    s_idx = np.asarray(s_idx, dtype=np.int64)
    closure = G.subgroup_closure(target, s_idx)
    surjective = closure.size == target.order
    if isinstance(source, G.GroupIndex):
        m = source.n_gens
        if s_idx.size != m:
            raise ValidationError("need one image per generator")
        img = word_images(source, target, s_idx)
        for i in range(m):
            lhs = img[source.table[:, i]]
            rhs = target.mul_idx(img, np.full(source.order, s_idx[i]))
            if not np.array_equal(lhs, rhs):
                raise NotAQuotient(f"t_{i + 1} relation violated: the target is not a quotient")
        return Epimorphism(source, target, s_idx, img, None, None, "exhaustive", surjective)
    if not isinstance(source, LazyTower):
        raise ValidationError("source must be an enumerated index or a lazy tower level")
    base, m = source.base, source.m
    tau = word_images(base, target, s_idx)
    arcs = source.sd.arcs
    z, i = np.divmod(arcs, m)
    end = base.table[z, i]
    g = target.mul_idx(target.mul_idx(tau[z], s_idx[i]), target.inv_idx(tau[end]))
    vals = np.unique(g)
    # the Schreier generators freely generate Gamma_n; the map factors
    # through Gamma_n / squares iff their images are commuting involutions
    sq = target.mul_idx(vals, vals)
    if np.any(sq != 0):
        raise NotAQuotient("a Schreier generator image is not an involution")
    comm_l = target.mul_idx(vals[:, None], vals[None, :])
    comm_r = target.mul_idx(vals[None, :], vals[:, None])
    if not np.array_equal(comm_l, comm_r):
        raise NotAQuotient("Schreier generator images do not commute")
    arc_img = {int(a): int(v) for a, v in zip(arcs, g) if v != 0}
    phi = Epimorphism(source, target, s_idx, None, tau, arc_img, "exact-schreier", surjective)
    rng = np.random.default_rng(seed)
    for _ in range(min(samples, 200)):
        w = [int(c) for c in rng.choice(np.r_[1:m + 1, -m:0], size=int(rng.integers(1, 40)))]
        if phi(source.from_word(w)) != phi.of_word(w):
            raise NotAQuotient("lazy evaluation disagrees with word evaluation")
    return phi


def nested_square_check(target: G.GroupIndex, depth: int, samples: int = 10_000, seed: int = 0, s_idx=None):
    """Fraction of random depth-``depth`` nested-square words mapping to e."""
    rng = np.random.default_rng(seed)
    if s_idx is None:
        s_idx = target.index_of(target.gens)
    s_idx = np.asarray(s_idx)
    m = s_idx.size
    label = np.concatenate([s_idx, target.inv_idx(s_idx)])
    bad = 0
    for _ in range(samples):
        w = nested_square_word(depth, m, rng)
        cur = 0
        for c in w:
            cur = int(target.mul_idx(cur, label[c - 1] if c > 0 else label[m - c - 1]))
        bad += cur != 0
    return bad


# ---------------------------------------------------------------------------
# families


FAMILIES = ("sl2-semidirect", "sl2-surrogate", "sl3-wreath", "sl3-wreath-surrogate",
            "sl2-wreath-haagerup", "h-tower", "sl2-kernel", "sl3-kernel")


@dataclass
class FamilyInstance:
    family: str
    n: int
    rep: object
    gens: tuple
    gen_names: tuple
    log2_order: float
    normal_gens: tuple = ()
    normal_name: str = ""
    quotient: object = None  # GroupIndex of Q_n when relevant
    surrogate: bool = False
    lamp: str = ""
    notes: list = field(default_factory=list)

    @property
    def order(self):
        if self.log2_order is None or self.log2_order > 1024:
            return None
        return 1 << int(round(self.log2_order))

    @property
    def enumerable(self):
        return isinstance(self.rep, G.ArrayGroup) and self.log2_order is not None

    def enumerate(self, cap: int = G.DEFAULT_CAP) -> G.GroupIndex:
        if not isinstance(self.rep, G.ArrayGroup):
            raise ResourceLimit(f"{self.family} n={self.n} has lazy element algebra only")
        if self.log2_order > math.log2(cap):
            raise ResourceLimit(f"{self.family} n={self.n}: order 2^{self.log2_order:.0f} exceeds cap {cap}",
                                largest_feasible=largest_feasible(self.family, cap))
        idx = G.enumerate_group(self.rep, np.asarray(self.gens, dtype=np.int64), cap=cap, names=self.gen_names)
        if idx.order != self.order:
            raise G.NotGenerating(f"S_n generates {idx.order} of {self.order} elements")
        return idx

    def normal_members(self, idx: G.GroupIndex) -> np.ndarray:
        return G.subgroup_closure(idx, idx.index_of(np.asarray(self.normal_gens, dtype=np.int64)))

    def normal_generator_indices(self, idx: G.GroupIndex) -> np.ndarray:
        return idx.index_of(np.asarray(self.normal_gens, dtype=np.int64))


def _lamp(spec: str, n: int) -> G.ResidueGroup:
    if spec == "z2":
        return G.ResidueGroup(1)
    if spec == "z2n":
        return G.ResidueGroup(n)
    raise ValidationError(f"unknown lamp spec {spec!r} (use 'z2' or 'z2n')")


def _log2_order_formula(family, n, lamp="z2n", m=2):
    a_bits = 1 if lamp == "z2" else n
    if family in ("sl2-kernel",):
        return 3 * n - 3
    if family == "sl3-kernel":
        return 8 * n - 8
    if family == "sl2-surrogate":
        return 2 * n + 3 * n - 3
    if family == "sl2-wreath-haagerup":
        return a_bits * 2 ** (3 * n - 3) + 3 * n - 3
    if family == "sl3-wreath-surrogate":
        return a_bits * 2 ** (8 * n - 8) + 8 * n - 8
    return None


def largest_feasible(family: str, cap: int = G.DEFAULT_CAP, lamp: str = "z2n") -> int:
    limit = math.log2(cap)
    if family in ("sl2-semidirect",):
        return 2
    if family == "sl3-wreath":
        return 1
    if family == "h-tower":
        return 2
    n = 1
    while _log2_order_formula(family, n + 1, lamp) <= limit:
        n += 1
    return n


def box_family(family: str, n: int, lamp: str = "z2n", m: int = 2, cap: int = G.DEFAULT_CAP) -> FamilyInstance:
    """One member (G_n, S_n) of a family; S_n is the projection of a fixed S."""
    if n < 1 and family != "h-tower":
        raise ValidationError("n must be >= 1")
    if family in ("sl2-kernel", "sl3-kernel"):
        d = 2 if family == "sl2-kernel" else 3
        if (8 if d == 3 else 3) * n - (8 if d == 3 else 3) > math.log2(cap):
            raise ResourceLimit(f"{family} n={n} exceeds cap", largest_feasible=G.max_level(d, cap))
        Q = G.congruence_kernel(d, n, cap=cap)
        return FamilyInstance(family, n, Q, Q.gens, Q.gen_names, Q.log2_order)
    if family == "sl2-surrogate":
        return _sl2_surrogate(n, cap)
    if family == "sl2-semidirect":
        return _sl2_semidirect(n, cap)
    if family == "sl2-wreath-haagerup":
        return _wreath_family(family, 2, n, lamp, cap, surrogate=True)
    if family == "sl3-wreath-surrogate":
        return _wreath_family(family, 3, n, lamp, cap, surrogate=True)
    if family == "sl3-wreath":
        return _sl3_wreath(n, lamp, cap)
    if family == "h-tower":
        t = build_tower(m, n, cap)
        rep = t.top
        return FamilyInstance(family, n, rep, rep.gens, rep.gen_names, rep.log2_order)
    raise ValidationError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def _q_index(d, n, cap):
    Q = G.congruence_kernel(d, n, cap=cap)
    return Q, G.enumerate_group(Q, cap=cap)


def _sl2_surrogate(n, cap):
    if 5 * n - 3 > math.log2(cap):
        raise ResourceLimit(f"sl2-surrogate n={n}: order 2^{5 * n - 3} exceeds cap {cap}",
                            largest_feasible=largest_feasible("sl2-surrogate", cap))
    Q, qidx = _q_index(2, n, cap)
    V = G.ResidueGroup(n, 2)
    rep = G.SemidirectProduct(V, Q, G.matrix_action(Q), name=f"(Z/{1 << n})^2 x| Q_{n}")
    normal = tuple(rep.gens[:2])
    return FamilyInstance("sl2-surrogate", n, rep, rep.gens, ("e1", "e2") + Q.gen_names, rep.log2_order,
                          normal, "V", qidx, surrogate=True,
                          notes=["Q_n replaces H_{3n-3} as the acting group"])


class LazySemidirect(G.Group):
    """V x| K for lazy K acting through an epimorphism onto matrices."""

    def __init__(self, V: G.ResidueGroup, K, phi: Epimorphism, Q: G.MatrixGroup, name=None):
        self.V, self.K, self.phi, self.Q = V, K, phi, Q
        self.identity = (tuple(V.identity), K.identity)
        self.gens = tuple((tuple(v), K.identity) for v in V.gens) + tuple((tuple(V.identity), k) for k in K.gens)
        self.gen_names = tuple(V.gen_names) + tuple(K.gen_names)
        self.log2_order = V.log2_order + K.log2_order
        self.name = name or f"{V.name} x| {K.name}"
        self._mats = Q.matrices(phi.target.elements)

    def act(self, k, v):
        M = self._mats[self.phi(k)]
        return tuple(int(x) for x in (M @ np.asarray(v)) % self.V.modulus)

    def mul(self, a, b):
        v1, k1 = a
        v2, k2 = b
        w = self.act(k1, v2)
        return (tuple((x + y) % self.V.modulus for x, y in zip(v1, w)), self.K.mul(k1, k2))

    def inv(self, a):
        v, k = a
        ki = self.K.inv(k)
        return (self.act(ki, tuple((-x) % self.V.modulus for x in v)), ki)

    def describe(self, a):
        return f"({','.join(map(str, a[0]))};{self.K.describe(a[1])})"


def _sl2_semidirect(n, cap):
    level = 3 * n - 3
    V = G.ResidueGroup(n, 2)
    if level == 0:
        K = G.TrivialGroup(3)
        rep = G.SemidirectProduct(V, K, lambda k, v: np.asarray(v) % V.modulus, name="(Z/2)^2 x| H_0")
        return FamilyInstance("sl2-semidirect", n, rep, rep.gens, ("e1", "e2", "t1", "t2", "t3"),
                              rep.log2_order, tuple(rep.gens[:2]), "V", None)
    if level > 3:
        raise ResourceLimit(f"sl2-semidirect n={n} needs H_{level}(m=3), beyond any enumerable base",
                            largest_feasible=2)
    t = build_tower(3, level, cap)
    K = t.top
    Q, qidx = _q_index(2, n, cap)
    phi = tower_epimorphism(K, qidx)
    rep = LazySemidirect(V, K, phi, Q, name=f"(Z/{1 << n})^2 x| H_{level}")
    return FamilyInstance("sl2-semidirect", n, rep, rep.gens, rep.gen_names, rep.log2_order,
                          tuple(rep.gens[:2]), "V", qidx, notes=[f"H_{level} has lazy element algebra"])


def _wreath_family(family, d, n, lamp, cap, surrogate):
    A = _lamp(lamp, n)
    Q, qidx = _q_index(d, n, cap)
    rep = G.WreathProduct(A, qidx, Q, name=f"{A.name} wr_Q{n} Q{n}")
    lamps = rep.y_generators()
    k_id = np.asarray(Q.identity)
    normal = tuple(tuple(int(x) for x in np.concatenate([l, k_id])) for l in lamps)
    inst = FamilyInstance(family, n, rep, rep.gens, rep.gen_names, rep.log2_order, normal, "lamps",
                          qidx, surrogate=surrogate, lamp=lamp,
                          notes=["Q_n replaces the tower group as the acting group"])
    return inst


def _sl3_wreath(n, lamp, cap):
    if n > 1:
        raise ResourceLimit(f"sl3-wreath n={n} needs H_{8 * n - 8}(m=8)", largest_feasible=1)
    A = _lamp(lamp, n)
    Q, qidx = _q_index(3, 1, cap)
    K = G.TrivialGroup(8)
    rep = G.WreathProduct(A, qidx, K, proj=lambda rows: np.zeros(np.shape(rows)[:-1], dtype=np.int64),
                          name="Z/2 wr_Q1 H_0")
    normal = (rep.gens[0],)
    return FamilyInstance("sl3-wreath", n, rep, rep.gens, rep.gen_names, rep.log2_order, normal, "lamps",
                          qidx, lamp=lamp)
