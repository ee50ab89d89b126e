"""Finite groups as vectorised integer arrays.

Every group here stores an element as a fixed-width row of integers, each
coordinate reduced modulo its own radix. Products, inverses and keys are
computed for whole batches of rows at once; the single-element methods
(`mul`, `inv`) simply wrap the batch versions and speak tuples.

Groups that are far too large to enumerate but still need exact element
algebra (the tower levels ``H_k`` for ``k >= 3``) implement only the
tuple-level protocol of :class:`Group`; see ``relex.tower``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ActionNotHomomorphic,
    NotGenerating,
    OrderMismatch,
    ResourceLimit,
    ValidationError,
)

log = logging.getLogger(__name__)

DEFAULT_CAP = 1 << 21


class Group:
    """Tuple-level group protocol shared by array-backed and lazy groups."""

    name = "group"
    identity: tuple = ()
    gens: tuple = ()
    gen_names: tuple = ()
    log2_order: float | None = None

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    @property
    def order(self):
        """Exact order as an int when it is known and loggable, else None."""
        if self.log2_order is None or self.log2_order > 4096:
            return None
        return int(round(2.0 ** self.log2_order)) if float(self.log2_order).is_integer() else None

    def describe(self, a) -> str:
        return "(" + ",".join(str(int(x)) for x in a) + ")"

    def power(self, a, e):
        out = self.identity
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def word(self, letters):
        """Evaluate a word given as signed 1-based generator indices."""
        out = self.identity
        for c in letters:
            g = self.gens[abs(c) - 1]
            out = self.mul(out, g if c > 0 else self.inv(g))
        return out


class ArrayGroup(Group):
    width: int
    radices: np.ndarray

    def bmul(self, X, Y):
        raise NotImplementedError

    def binv(self, X):
        raise NotImplementedError

    @property
    def identity_row(self):
        return np.asarray(self.identity, dtype=np.int64)

    @property
    def gen_rows(self):
        if not self.gens:
            return np.zeros((0, self.width), dtype=np.int64)
        return np.asarray(self.gens, dtype=np.int64).reshape(len(self.gens), self.width)

    def mul(self, a, b):
        A = np.asarray(a, dtype=np.int64)[None]
        B = np.asarray(b, dtype=np.int64)[None]
        return tuple(int(x) for x in self.bmul(A, B)[0])

    def inv(self, a):
        return tuple(int(x) for x in self.binv(np.asarray(a, dtype=np.int64)[None])[0])

    # keys ------------------------------------------------------------
    def key_bits(self) -> float:
        return float(np.sum(np.log2(np.maximum(self.radices, 1))))

    def keys(self, X):
        X = np.asarray(X, dtype=np.int64)
        if self.key_bits() > 62:
            raise ResourceLimit(f"{self.name}: element encoding needs {self.key_bits():.0f} bits (> 62)")
        out = np.zeros(X.shape[:-1], dtype=np.int64)
        for c in range(self.width - 1, -1, -1):
            out = out * int(self.radices[c]) + X[..., c]
        return out

    def rows(self, keys):
        keys = np.asarray(keys, dtype=np.int64).copy()
        out = np.empty(keys.shape + (self.width,), dtype=np.int64)
        for c in range(self.width):
            r = int(self.radices[c])
            out[..., c] = keys % r
            keys //= r
        return out


# ---------------------------------------------------------------------------
# basic groups


class ResidueGroup(ArrayGroup):
    """(Z/2^k)^d written additively, generated by the standard basis."""

    def __init__(self, k: int, d: int = 1):
        if k < 0 or d < 1:
            raise ValidationError("ResidueGroup needs k >= 0 and d >= 1")
        self.k, self.d = k, d
        self.modulus = 1 << k
        self.width = d
        self.radices = np.full(d, self.modulus, dtype=np.int64)
        self.identity = (0,) * d
        self.gens = tuple(tuple(int(i == j) % self.modulus for j in range(d)) for i in range(d))
        self.gen_names = tuple(f"e{i + 1}" for i in range(d))
        self.log2_order = k * d
        self.name = f"(Z/{self.modulus})^{d}" if d > 1 else f"Z/{self.modulus}"

    def bmul(self, X, Y):
        return (np.asarray(X) + np.asarray(Y)) % self.modulus

    def binv(self, X):
        return (-np.asarray(X)) % self.modulus


class TrivialGroup(ResidueGroup):
    """The trivial group, presented with ``m`` generators that all equal e."""

    def __init__(self, m: int = 0):
        super().__init__(0, 1)
        self.gens = ((0,),) * m
        self.gen_names = tuple(f"t{i + 1}" for i in range(m))
        self.name = "1"


class DihedralGroup(ArrayGroup):
    """Dihedral group of order 2^k as pairs (rotation a, reflection bit s)."""

    def __init__(self, k: int):
        if k < 2:
            raise ValidationError("dihedral 2-groups need order >= 4")
        self.k = k
        self.n = 1 << (k - 1)
        self.width = 2
        self.radices = np.array([self.n, 2], dtype=np.int64)
        self.identity = (0, 0)
        self.gens = ((1 % self.n, 0), (0, 1))
        self.gen_names = ("r", "s")
        self.log2_order = k
        self.name = f"D{1 << k}"

    def bmul(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X), np.asarray(Y))
        sign = 1 - 2 * X[..., 1]
        out = np.empty_like(X)
        out[..., 0] = (X[..., 0] + sign * Y[..., 0]) % self.n
        out[..., 1] = (X[..., 1] + Y[..., 1]) % 2
        return out

    def binv(self, X):
        X = np.asarray(X)
        out = X.copy()
        out[..., 0] = np.where(X[..., 1] == 1, X[..., 0], (-X[..., 0]) % self.n)
        return out


class DicyclicGroup(ArrayGroup):
    """Generalised quaternion group of order 2^k (k >= 3): x^a y^s."""

    def __init__(self, k: int):
        if k < 3:
            raise ValidationError("quaternion 2-groups need order >= 8")
        self.k = k
        self.n = 1 << (k - 1)
        self.width = 2
        self.radices = np.array([self.n, 2], dtype=np.int64)
        self.identity = (0, 0)
        self.gens = ((1, 0), (0, 1))
        self.gen_names = ("x", "y")
        self.log2_order = k
        self.name = f"Q{1 << k}"

    def bmul(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X), np.asarray(Y))
        s1, s2 = X[..., 1], Y[..., 1]
        sign = 1 - 2 * s1
        extra = np.where((s1 == 1) & (s2 == 1), self.n // 2, 0)
        out = np.empty_like(X)
        out[..., 0] = (X[..., 0] + sign * Y[..., 0] + extra) % self.n
        out[..., 1] = (s1 + s2) % 2
        return out

    def binv(self, X):
        X = np.asarray(X)
        out = X.copy()
        out[..., 0] = np.where(X[..., 1] == 1, (X[..., 0] + self.n // 2) % self.n, (-X[..., 0]) % self.n)
        return out


class MatrixGroup(ArrayGroup):
    """Subgroup of SL(d, Z/2^k) generated by the given matrices."""

    def __init__(self, d: int, k: int, gens, gen_names=None, name=None):
        if d not in (2, 3):
            raise ValidationError("matrix groups support d in {2, 3}")
        self.d, self.k = d, k
        self.modulus = 1 << k
        self.width = d * d
        self.radices = np.full(d * d, self.modulus, dtype=np.int64)
        self.identity = tuple(int(i == j) % self.modulus for i in range(d) for j in range(d))
        mats = [np.asarray(g, dtype=np.int64).reshape(d, d) % self.modulus for g in gens]
        for m in mats:
            if int(round(np.linalg.det(m))) % self.modulus != 1 % self.modulus:
                raise ValidationError("generator is not in SL(d, Z/2^k)")
        self.gens = tuple(tuple(int(x) for x in m.ravel()) for m in mats)
        self.gen_names = tuple(gen_names or (f"u{i + 1}" for i in range(len(mats))))
        self.name = name or f"<{len(mats)} gens> < SL({d},Z/{self.modulus})"
        self.log2_order = None

    def bmul(self, X, Y):
        X = np.asarray(X)
        Y = np.asarray(Y)
        lead = np.broadcast_shapes(X.shape[:-1], Y.shape[:-1])
        out = np.matmul(X.reshape(X.shape[:-1] + (self.d, self.d)), Y.reshape(Y.shape[:-1] + (self.d, self.d)))
        return (out % self.modulus).reshape(lead + (self.width,))

    def binv(self, X):
        X = np.asarray(X)
        M = X.reshape(X.shape[:-1] + (self.d, self.d))
        if self.d == 2:
            a, b, c, e = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
            out = np.stack([e, -b, -c, a], axis=-1)
        else:
            cof = np.empty_like(M)
            for i in range(3):
                for j in range(3):
                    r = [x for x in range(3) if x != i]
                    c = [x for x in range(3) if x != j]
                    minor = M[..., r[0], c[0]] * M[..., r[1], c[1]] - M[..., r[0], c[1]] * M[..., r[1], c[0]]
                    cof[..., i, j] = (-1) ** (i + j) * minor
            out = np.swapaxes(cof, -1, -2).reshape(X.shape)
        return out % self.modulus

    def matrices(self, X):
        X = np.asarray(X)
        return X.reshape(X.shape[:-1] + (self.d, self.d))

    def describe(self, a):
        m = np.asarray(a).reshape(self.d, self.d)
        return "[" + ",".join("[" + ",".join(str(int(x)) for x in row) + "]" for row in m) + "]"


# ---------------------------------------------------------------------------
# enumeration


@dataclass
class GroupIndex:
    """Bijective BFS index of a finite array group.

    ``table[i, j]`` is the index of ``element_i * label_j`` where the labels
    are the generators followed by their inverses (no deduplication).
    """

    rep: ArrayGroup
    gens: np.ndarray
    elements: np.ndarray
    keys: np.ndarray
    parent: np.ndarray
    parent_label: np.ndarray
    word_length: np.ndarray
    table: np.ndarray
    label_names: tuple
    _sorter: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self._sorter is None:
            self._sorter = np.argsort(self.keys, kind="stable")
        self._sorted = self.keys[self._sorter]

    @property
    def order(self) -> int:
        return int(self.keys.size)

    @property
    def n_gens(self) -> int:
        return int(self.gens.shape[0])

    def index_of_keys(self, keys, strict=True):
        keys = np.asarray(keys, dtype=np.int64)
        pos = np.searchsorted(self._sorted, keys)
        pos = np.minimum(pos, self._sorted.size - 1)
        hit = self._sorted[pos] == keys
        out = np.where(hit, self._sorter[pos], -1)
        if strict and not hit.all():
            raise ValidationError("element outside the enumerated group")
        return out

    def index_of(self, rows, strict=True):
        return self.index_of_keys(self.rep.keys(rows), strict=strict)

    def mul_idx(self, i, j):
        return self.index_of(self.rep.bmul(self.elements[i], self.elements[j]))

    def inv_idx(self, i):
        return self.index_of(self.rep.binv(self.elements[i]))

    def ball_sizes(self):
        return np.cumsum(np.bincount(self.word_length))

    @property
    def diameter(self) -> int:
        return int(self.word_length.max())

    def word(self, i):
        """BFS word of element ``i`` as a list of label indices."""
        out = []
        while self.parent[i] >= 0:
            out.append(int(self.parent_label[i]))
            i = int(self.parent[i])
        return out[::-1]


def symmetrize(gens, rep: ArrayGroup, names=None, dedup=False):
    """Generator labels ``s_1..s_k, s_1^-1..s_k^-1`` (rows, names).

    Without ``dedup`` the multiset is kept, so |labels| = 2k even when a
    generator is an involution or trivial.
    """
    G = np.asarray(gens, dtype=np.int64).reshape(-1, rep.width)
    names = list(names or [f"s{i + 1}" for i in range(len(G))])
    rows = np.concatenate([G, rep.binv(G)]) if len(G) else G
    labels = names + [n + "^-1" for n in names]
    if dedup and len(rows):
        _, first = np.unique(rep.keys(rows), return_index=True)
        first = np.sort(first)
        rows = rows[first]
        labels = [labels[i] for i in first]
        log.info("symmetrize: %d labels after inverse closure and dedup", len(labels))
    return rows, tuple(labels)


def enumerate_group(rep: ArrayGroup, gens=None, cap: int = DEFAULT_CAP, names=None) -> GroupIndex:
    """Canonical BFS closure of ``gens`` (default: the group's generators).

    The discovery order is fixed: level by level, frontier element by
    frontier element, generator labels in order. ``ResourceLimit`` once the
    closure exceeds ``cap`` elements.
    """
    if gens is None:
        gens = rep.gen_rows
        names = names or rep.gen_names
    gens = np.asarray(gens, dtype=np.int64).reshape(-1, rep.width)
    labels, label_names = symmetrize(gens, rep, names)
    e = rep.identity_row[None]
    e_key = rep.keys(e)
    all_keys = [e_key]
    parents = [np.array([-1])]
    plabels = [np.array([-1])]
    levels = [np.array([0])]
    seen = np.sort(e_key)
    frontier = e
    frontier_start = 0
    total = 1
    depth = 0
    L = labels.shape[0]
    while frontier.shape[0] and L:
        depth += 1
        cand = rep.bmul(frontier[:, None, :], labels[None, :, :]).reshape(-1, rep.width)
        ck = rep.keys(cand)
        uniq, first = np.unique(ck, return_index=True)
        pos = np.searchsorted(seen, uniq)
        pos = np.minimum(pos, seen.size - 1)
        fresh = seen[pos] != uniq
        first = np.sort(first[fresh])
        if first.size == 0:
            break
        total += first.size
        if total > cap:
            raise ResourceLimit(f"{rep.name}: enumeration exceeds cap {cap}")
        new_keys = ck[first]
        all_keys.append(new_keys)
        parents.append(frontier_start + first // L)
        plabels.append(first % L)
        levels.append(np.full(first.size, depth))
        frontier_start += frontier.shape[0]
        frontier = cand[first]
        seen = np.sort(np.concatenate([seen, new_keys]))
    keys = np.concatenate(all_keys)
    elements = rep.rows(keys)
    idx = GroupIndex(
        rep=rep,
        gens=gens,
        elements=elements,
        keys=keys,
        parent=np.concatenate(parents).astype(np.int64),
        parent_label=np.concatenate(plabels).astype(np.int64),
        word_length=np.concatenate(levels).astype(np.int32),
        table=np.zeros((keys.size, L), dtype=np.int32),
        label_names=label_names,
    )
    for j in range(L):
        idx.table[:, j] = idx.index_of(rep.bmul(elements, labels[j][None]))
    return idx


def closure_order(rep: ArrayGroup, gens, cap: int = DEFAULT_CAP) -> int:
    return enumerate_group(rep, gens, cap=cap).order


# ---------------------------------------------------------------------------
# congruence kernels


def _sl2_generators(modulus):
    return [
        [[-1 % modulus, 0], [0, -1 % modulus]],
        [[1, 2 % modulus], [0, 1]],
        [[1, 0], [2 % modulus, 1]],
    ]


def _sl3_generators(modulus):
    gens, names = [], []
    for i in range(3):
        for j in range(3):
            if i != j:
                m = np.eye(3, dtype=np.int64)
                m[i, j] = 2
                gens.append(m % modulus)
                names.append(f"e{i + 1}{j + 1}(2)")
    # diagonal sign changes are congruent to I mod 2 but not products of
    # transvections mod 4; without them the closure has order 2^(6n-6)
    for diag, nm in (((-1, -1, 1), "d12"), ((1, -1, -1), "d23")):
        gens.append(np.diag(diag) % modulus)
        names.append(nm)
    return gens, names


def congruence_kernel(d: int, n: int, cap: int = DEFAULT_CAP, check: bool = True) -> MatrixGroup:
    """Q_n: image of ker(SL(d,Z) -> SL(d,Z/2)) in SL(d, Z/2^n).

    d=2 uses -I and the two elementary matrices with off-diagonal 2; d=3
    uses the six transvections e_ij(2) plus two diagonal sign matrices. The
    closure order is compared with 2^(3n-3) (d=2) or 2^(8n-8) (d=3).
    """
    if n < 1:
        raise ValidationError("level exponent n must be >= 1")
    modulus = 1 << n
    if d == 2:
        gens = _sl2_generators(modulus)
        names = ["-I", "u", "l"]
        expected = 3 * n - 3
    elif d == 3:
        gens, names = _sl3_generators(modulus)
        expected = 8 * n - 8
    else:
        raise ValidationError("d must be 2 or 3")
    Q = MatrixGroup(d, n, gens, names, name=f"Q_{n}(SL{d})")
    Q.log2_order = expected
    Q.level = n
    if check:
        if expected > math.log2(cap):
            raise ResourceLimit(f"|Q_{n}(SL{d})| = 2^{expected} exceeds cap {cap}",
                                largest_feasible=max_level(d, cap))
        got = closure_order(Q, Q.gen_rows, cap=cap)
        if got != 1 << expected:
            raise OrderMismatch(f"closure of U_{n} has order {got}, expected 2^{expected}")
    return Q


def max_level(d: int, cap: int = DEFAULT_CAP) -> int:
    per = 3 if d == 2 else 8
    return int(math.log2(cap) // per) + 1


# ---------------------------------------------------------------------------
# products


class SemidirectProduct(ArrayGroup):
    """V x|_H K with law (v1,k1)(v2,k2) = (v1 . k1(v2), k1 k2).

    ``action(K_rows, V_rows)`` must return the image rows; it is assumed to
    factor through a quotient H of K. Generators: those of V, then those of K.
    """

    def __init__(self, V: ArrayGroup, K: ArrayGroup, action, name=None, check=True):
        self.V, self.K, self.action = V, K, action
        self.width = V.width + K.width
        self.radices = np.concatenate([V.radices, K.radices])
        self.identity = tuple(V.identity) + tuple(K.identity)
        gens = [tuple(v) + tuple(K.identity) for v in V.gens]
        gens += [tuple(V.identity) + tuple(k) for k in K.gens]
        self.gens = tuple(gens)
        self.gen_names = tuple(V.gen_names) + tuple(K.gen_names)
        if V.log2_order is not None and K.log2_order is not None:
            self.log2_order = V.log2_order + K.log2_order
        self.name = name or f"{V.name} x| {K.name}"
        if check:
            check_action(V, K, action)

    def split(self, X):
        X = np.asarray(X)
        return X[..., : self.V.width], X[..., self.V.width:]

    def bmul(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X), np.asarray(Y))
        v1, k1 = self.split(X)
        v2, k2 = self.split(Y)
        return np.concatenate([self.V.bmul(v1, self.action(k1, v2)), self.K.bmul(k1, k2)], axis=-1)

    def binv(self, X):
        v, k = self.split(np.asarray(X))
        ki = self.K.binv(k)
        return np.concatenate([self.action(ki, self.V.binv(v)), ki], axis=-1)

    # action of N x| R on N: (n, r) o n0 = n . r(n0)
    def act_on_normal(self, X, n0):
        v, k = self.split(np.asarray(X))
        return self.V.bmul(v, self.action(k, n0))


def check_action(V: ArrayGroup, K: ArrayGroup, action, samples: int = 16, seed: int = 0):
    """Spot-check that ``action`` is a homomorphism K -> Aut(V) on generators."""
    rng = np.random.default_rng(seed)
    kg = np.concatenate([K.gen_rows, K.identity_row[None]])
    vg = np.concatenate([V.gen_rows, V.identity_row[None]])
    # random V elements as products of generators
    vs = [vg[rng.integers(len(vg), size=4)] for _ in range(samples)]
    vr = np.array([_fold(V, w) for w in vs])
    if not np.array_equal(action(K.identity_row[None], vr), vr):
        raise ActionNotHomomorphic("identity of K does not act trivially")
    for a in kg:
        for b in kg:
            lhs = action(K.bmul(a[None], b[None]), vr)
            rhs = action(a[None], action(b[None], vr))
            if not np.array_equal(lhs, rhs):
                raise ActionNotHomomorphic("action(k1 k2) != action(k1) action(k2)")
        x, y = vr[: samples // 2], vr[samples // 2:]
        if not np.array_equal(action(a[None], V.bmul(x, y)), V.bmul(action(a[None], x), action(a[None], y))):
            raise ActionNotHomomorphic("generator does not act by automorphisms")


def _fold(G: ArrayGroup, rows):
    out = G.identity_row
    for r in rows:
        out = G.bmul(out[None], r[None])[0]
    return out


def matrix_action(Q: MatrixGroup, to_matrix=None):
    """Action of K on (Z/2^k)^d through matrices (``to_matrix`` maps K rows)."""

    def act(k_rows, v_rows):
        mats = Q.matrices(k_rows) if to_matrix is None else to_matrix(k_rows)
        v = np.asarray(v_rows)
        out = np.einsum("...ij,...j->...i", mats, v)
        return out % Q.modulus

    return act


class WreathProduct(ArrayGroup):
    """Generalised wreath product A wr_Z K with Z = the elements of ``Q``.

    K acts on Z = Q by left multiplication through ``proj`` (K rows -> Q
    indices). Rows are ``[lamp(z) for z in Z] + [K coordinates]`` and the law
    is (f1,k1)(f2,k2) = (f1 + k1.f2, k1 k2) with (k.f)(z) = f(proj(k)^-1 z).
    Generators: v_e for v in gens(A), then gens(K).
    """

    def __init__(self, A: ArrayGroup, Q: GroupIndex, K: ArrayGroup, proj=None, name=None):
        if A.width != 1:
            raise ValidationError("lamp groups must be cyclic (width 1)")
        self.A, self.Q, self.K = A, Q, K
        self.proj = proj if proj is not None else (lambda rows: Q.index_of(rows))
        self.nz = Q.order
        self.width = self.nz + K.width
        self.radices = np.concatenate([np.full(self.nz, A.radices[0]), K.radices])
        self.identity = (0,) * self.nz + tuple(K.identity)
        # left multiplication table of Q and the inverse map
        nq = Q.order
        self._lmul = np.empty((nq, nq), dtype=np.int64)
        for q in range(nq):
            self._lmul[q] = Q.index_of(Q.rep.bmul(Q.elements[q][None], Q.elements))
        self._qinv = Q.inv_idx(np.arange(nq))
        e_pos = 0  # identity is index 0 in BFS order
        gens = []
        for v in A.gens:
            lamp = [0] * self.nz
            lamp[e_pos] = int(v[0])
            gens.append(tuple(lamp) + tuple(K.identity))
        gens += [(0,) * self.nz + tuple(k) for k in K.gens]
        self.gens = tuple(gens)
        self.gen_names = tuple(f"{n}_e" for n in A.gen_names) + tuple(K.gen_names)
        if A.log2_order is not None and K.log2_order is not None:
            self.log2_order = A.log2_order * self.nz + K.log2_order
        self.name = name or f"{A.name} wr_{Q.rep.name} {K.name}"

    def split(self, X):
        X = np.asarray(X)
        return X[..., : self.nz], X[..., self.nz:]

    def shift(self, k_rows, lamps):
        """(k.f)(z) = f(q^-1 z) with q = proj(k)."""
        q = self.proj(k_rows)
        src = self._lmul[self._qinv[q]]
        return np.take_along_axis(np.asarray(lamps), np.broadcast_to(src, lamps.shape), axis=-1)

    def bmul(self, X, Y):
        X, Y = np.broadcast_arrays(np.asarray(X), np.asarray(Y))
        f1, k1 = self.split(X)
        f2, k2 = self.split(Y)
        m = int(self.A.radices[0])
        return np.concatenate([(f1 + self.shift(k1, f2)) % m, self.K.bmul(k1, k2)], axis=-1)

    def binv(self, X):
        f, k = self.split(np.asarray(X))
        ki = self.K.binv(k)
        m = int(self.A.radices[0])
        return np.concatenate([self.shift(ki, (-f) % m), ki], axis=-1)

    def lamp_rows(self, X):
        return self.split(X)[0]

    def act_on_normal(self, X, n0):
        f, k = self.split(np.asarray(X))
        return (f + self.shift(k, np.asarray(n0))) % int(self.A.radices[0])

    def y_generators(self):
        """Y = {v_g : g in Q, v in gens(A)} as lamp configurations."""
        out = []
        for v in self.A.gens:
            for z in range(self.nz):
                lamp = np.zeros(self.nz, dtype=np.int64)
                lamp[z] = int(v[0])
                out.append(lamp)
        return np.array(out)


def semidirect(V: ArrayGroup, K: ArrayGroup, action, name=None) -> SemidirectProduct:
    return SemidirectProduct(V, K, action, name=name)


def wreath(A: ArrayGroup, Q: GroupIndex, K: ArrayGroup, proj=None, name=None) -> WreathProduct:
    return WreathProduct(A, Q, K, proj=proj, name=name)


def lamp_group(A: ResidueGroup, nz: int) -> ResidueGroup:
    """The base of the wreath product, (+)_Z A, generated by Y = {v_g}."""
    G = ResidueGroup(A.k, nz)
    G.name = f"(+)_{nz} {A.name}"
    return G


def check_group_laws(idx: GroupIndex, samples: int = 10_000, seed: int = 0) -> bool:
    """Associativity, identity and inverse laws on random indexed triples."""
    rep = idx.rep
    rng = np.random.default_rng(seed)
    n = idx.order
    a, b, c = (idx.elements[rng.integers(n, size=samples)] for _ in range(3))
    lhs = rep.bmul(rep.bmul(a, b), c)
    rhs = rep.bmul(a, rep.bmul(b, c))
    e = rep.identity_row[None]
    ok = np.array_equal(lhs, rhs)
    ok &= np.array_equal(rep.bmul(e, a), a) and np.array_equal(rep.bmul(a, e), a)
    ok &= np.array_equal(rep.bmul(idx.elements, rep.binv(idx.elements)), np.broadcast_to(e, idx.elements.shape))
    return bool(ok)


def is_generating(idx: GroupIndex, expected_order: int) -> bool:
    return idx.order == expected_order


def require_generating(idx: GroupIndex, expected_order):
    if expected_order is not None and idx.order != expected_order:
        raise NotGenerating(f"generators reach {idx.order} of {expected_order} elements")


def subgroup_closure(idx: GroupIndex, gen_indices, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Sorted indices of the subgroup generated by the indexed elements.

    Generators are accepted one at a time only when they fall outside the
    current closure, so at most log2|G| closures are computed for 2-groups.
    """
    rep = idx.rep
    members = np.zeros(1, dtype=np.int64)
    accepted = []
    for g in np.unique(np.asarray(gen_indices, dtype=np.int64)):
        if np.searchsorted(members, g) < members.size and members[np.searchsorted(members, g)] == g:
            continue
        accepted.append(int(g))
        sub = enumerate_group(rep, idx.elements[accepted], cap=cap)
        members = np.sort(idx.index_of(sub.elements))
    return members


def is_subgroup(idx: GroupIndex, members) -> bool:
    members = np.unique(np.asarray(members, dtype=np.int64))
    if members.size == 0 or 0 not in members:
        return False
    prod = idx.mul_idx(members[:, None], members[None, :]) if members.size <= 2048 else None
    if prod is None:
        rng = np.random.default_rng(0)
        a = members[rng.integers(members.size, size=20000)]
        b = members[rng.integers(members.size, size=20000)]
        prod = idx.mul_idx(a, b)
    return bool(np.isin(prod, members).all() and np.isin(idx.inv_idx(members), members).all())


def is_normal(idx: GroupIndex, members) -> bool:
    members = np.unique(np.asarray(members, dtype=np.int64))
    rep = idx.rep
    for s in idx.gens:
        s = s[None]
        conj = rep.bmul(rep.bmul(s, idx.elements[members]), rep.binv(s))
        if not np.isin(idx.index_of(conj), members).all():
            return False
    return True
