"""Averaging operators, relative gaps, Poincare constants, Cheeger constants, interpolation."""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import groups as G
from . import kernels
from .cayley import CayleyGraph, Graph, Partition, coset_partition
from .errors import (
    DegenerateDenominator,
    NoConvergence,
    NotNormal,
    NotSymmetric,
    ResourceLimit,
    ValidationError,
)
from .lanczos import lanczos

log = logging.getLogger(__name__)

DENSE_LIMIT = 4096


def vector_hash(v, digits: int = 8) -> str:
    """Hash of a vector rounded to ``digits`` decimals (sign-normalised)."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size:
        i = int(np.argmax(np.abs(v)))
        if v[i] < 0:
            v = -v
    r = np.round(v, digits) + 0.0
    return hashlib.sha256(r.tobytes()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# averaging operators


class AveragingOperator:
    """M_A f(g) = mean over a in A of f(g a)."""

    def __init__(self, n, matrix=None, partition: Partition | None = None, name="M"):
        self.n = n
        self.matrix = matrix
        self.partition = partition
        self.name = name

    @property
    def is_projector(self):
        return self.partition is not None

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        if self.partition is not None:
            lab = self.partition.labels
            counts = np.bincount(lab).astype(float)
            if f.ndim == 1:
                means = np.bincount(lab, weights=f) / counts
                return means[lab]
            means = np.stack([np.bincount(lab, weights=f[:, c]) for c in range(f.shape[1])], axis=1)
            return (means / counts[:, None])[lab]
        return self.matrix @ f

    def dense(self):
        return np.stack([self(e) for e in np.eye(self.n)], axis=1)

    def idempotence_defect(self, samples=4, seed=0):
        rng = np.random.default_rng(seed)
        F = rng.standard_normal((self.n, samples))
        MF = self(F)
        return float(np.abs(self(MF) - MF).max())

    def symmetry_defect(self, samples=4, seed=0):
        rng = np.random.default_rng(seed)
        F = rng.standard_normal((self.n, samples))
        Gm = rng.standard_normal((self.n, samples))
        return float(np.abs(np.sum(self(F) * Gm, axis=0) - np.sum(F * self(Gm), axis=0)).max())


def averaging_operator(idx: G.GroupIndex, A, subgroup: bool | None = None) -> AveragingOperator:
    """Averaging over right translates by the elements (indices) of A."""
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        raise ValidationError("averaging set must be nonempty")
    n = idx.order
    if subgroup is None:
        subgroup = G.is_subgroup(idx, A)
    if subgroup:
        op = AveragingOperator(n, partition=coset_partition(idx, A), name=f"M_H(|H|={A.size})")
        defect = op.idempotence_defect()
        if defect > 1e-12:
            raise ValidationError(f"subgroup projector not idempotent ({defect:.1e})")
        return op
    rows = np.repeat(np.arange(n), A.size)
    cols = idx.mul_idx(rows, np.tile(A, n))
    M = sp.csr_matrix((np.full(rows.size, 1.0 / A.size), (rows, cols)), shape=(n, n))
    M.sum_duplicates()
    return AveragingOperator(n, matrix=M, name=f"M_A(|A|={A.size})")


def generator_average(graph: Graph, lazy: bool = False) -> AveragingOperator:
    """M_S over the symmetrized label multiset (or its lazy version)."""
    A = graph.adjacency
    deg = graph.degree(count_loops=True)
    if deg is None:
        raise ValidationError("generator averaging needs a regular graph")
    M = A / deg
    if lazy:
        M = (sp.identity(graph.n, format="csr") + M) * 0.5
    return AveragingOperator(graph.n, matrix=sp.csr_matrix(M), name="(I+M_S)/2" if lazy else "M_S")


# ---------------------------------------------------------------------------
# relative gap


@dataclass
class GapReport:
    theta: float
    operator: str
    method: str
    residual: float
    commutator: float
    witness_hash: str
    dense_theta: float | None = None
    restarts: int = 0

    def to_dict(self):
        return dict(theta=self.theta, operator=self.operator, method=self.method, residual=self.residual,
                    commutator=self.commutator, witness_hash=self.witness_hash,
                    dense_theta=self.dense_theta, restarts=self.restarts)


def relative_gap(graph: CayleyGraph, H_members, lazy: bool = False, method: str = "auto", tol: float = 1e-8,
                 krylov: int | None = None, max_restarts: int = 3, seed: int = 0) -> GapReport:
    """theta = ||M_S (1 - M_H)|| on real functions of the vertices."""
    idx = graph.idx
    A = graph.adjacency
    if (A - A.T).count_nonzero():
        raise NotSymmetric("generator multiset is not closed under inverses")
    H_members = np.unique(np.asarray(H_members, dtype=np.int64))
    if not G.is_subgroup(idx, H_members) or not G.is_normal(idx, H_members):
        raise NotNormal("H is not a normal subgroup")
    graph.require_connected()
    MS = generator_average(graph, lazy)
    MH = averaging_operator(idx, H_members, subgroup=True)
    n = graph.n

    def op(f):
        return MS(f - MH(f))

    rng = np.random.default_rng(seed)
    F = rng.standard_normal((n, 3))
    comm = float(np.abs(MS(MH(F)) - MH(MS(F))).max())
    if comm > 1e-10:
        raise NotNormal(f"M_S and M_H do not commute ({comm:.1e})")
    dense_theta = None
    if method in ("auto", "dense") and n <= DENSE_LIMIT:
        B = MS.matrix.toarray() @ (np.eye(n) - MH.dense())
        B = (B + B.T) / 2
        w, U = np.linalg.eigh(B)
        i = int(np.argmax(np.abs(w)))
        dense_theta = float(abs(w[i]))
        if method == "dense" or n <= 64:
            res = float(np.linalg.norm(B @ U[:, i] - w[i] * U[:, i]))
            return GapReport(dense_theta, MS.name, "dense", res, comm, vector_hash(U[:, i]), dense_theta)
    if method == "dense":
        raise ResourceLimit(f"dense eigensolve limited to {DENSE_LIMIT} vertices")
    one = np.full((n, 1), 1 / math.sqrt(n))
    r = lanczos(op, n, k=1, which="LM", tol=tol, krylov=krylov, max_restarts=max_restarts, seed=seed,
                deflate=one)
    theta = float(abs(r.values[0]))
    return GapReport(theta, MS.name, "lanczos", float(r.residuals[0]), comm, vector_hash(r.vectors[:, 0]),
                     dense_theta, r.restarts)


# ---------------------------------------------------------------------------
# Poincare constants


@dataclass
class FormSpec:
    """Numerator form against the edge energy.

    kind "element": sum_g ||f(g y) - f(g)||^2 for the element index ``y``;
    kind "partition": sum over blocks of ||f(x) - M_P f||^2;
    kind "measure": sum_{(x,y)} mu(x,y) ||f(x) - f(y)||^2 (``measure`` is an n x n array).
    ``convention`` selects the edge energy (ordered pairs (g,s) or unordered edges).
    """

    kind: str
    y: int | None = None
    partition: Partition | None = None
    measure: np.ndarray | None = None
    convention: str = "ordered"

    def matrix(self, graph: Graph):
        n = graph.n
        if self.kind == "element":
            if not isinstance(graph, CayleyGraph) or self.y is None:
                raise ValidationError("element forms need a Cayley graph and y")
            idx = graph.idx
            tgt = idx.mul_idx(np.arange(n), np.full(n, int(self.y)))
            P = np.zeros((n, n))
            P[np.arange(n), tgt] = 1.0
            return 2 * np.eye(n) - P - P.T
        if self.kind == "partition":
            if self.partition is None:
                raise ValidationError("partition form needs a partition")
            lab = self.partition.labels
            same = (lab[:, None] == lab[None, :]).astype(float)
            return np.eye(n) - same / same.sum(axis=1, keepdims=True)
        if self.kind == "measure":
            mu = np.asarray(self.measure, dtype=float)
            if mu.shape != (n, n) or (mu < 0).any():
                raise ValidationError("measure must be a nonnegative n x n array")
            S = mu + mu.T
            return np.diag(S.sum(axis=1)) - S
        raise ValidationError(f"unknown form kind {self.kind!r}")

    def value(self, graph: Graph, F):
        """Numerator evaluated on F of shape (n,) or (n, k)."""
        F = np.asarray(F, dtype=float)
        F2 = F if F.ndim == 2 else F[:, None]
        N = self.matrix(graph)
        return float(np.einsum("ik,ij,jk->", F2, N, F2))


@dataclass
class PoincareReport:
    C_star: float
    witness: np.ndarray
    residual: float
    convention: str
    kind: str

    def to_dict(self):
        return dict(C_star=self.C_star, residual=self.residual, convention=self.convention, kind=self.kind,
                    witness_hash=vector_hash(self.witness))


def measure_on_far_pairs(D, r):
    """Uniform probability on the pairs at distance >= r."""
    D = np.asarray(D)
    mask = (D >= r).astype(float)
    total = mask.sum()
    if total == 0:
        raise ValidationError(f"no pairs at distance >= {r}")
    return mask / total


def _forms(graph: Graph, spec: FormSpec):
    n = graph.n
    if n > DENSE_LIMIT:
        raise ResourceLimit(f"Poincare constants are computed densely (n <= {DENSE_LIMIT})")
    L = graph.laplacian(spec.convention).toarray()
    N = spec.matrix(graph)
    if np.abs(N.sum(axis=1)).max() > 1e-10:
        raise ValidationError("numerator form does not vanish on constants")
    return L, N


def poincare_constant(graph: Graph, spec: FormSpec) -> PoincareReport:
    """Largest ratio numerator / edge energy over functions orthogonal to constants."""
    L, N = _forms(graph, spec)
    n = graph.n
    lam, U = np.linalg.eigh(L)
    scale = max(1.0, float(lam[-1]))
    zero = lam <= 1e-9 * scale
    if zero.sum() > 1:
        raise DegenerateDenominator(f"edge form has a {int(zero.sum())}-dimensional kernel (disconnected)")
    Uc = U[:, ~zero]
    Sinv = Uc / np.sqrt(lam[~zero])  # L^{+1/2} restricted to the complement
    Mx = Sinv.T @ N @ Sinv
    Mx = (Mx + Mx.T) / 2
    w, Y = np.linalg.eigh(Mx)
    C = max(0.0, float(w[-1]))
    f = Sinv @ Y[:, -1]
    f = f / np.linalg.norm(f)
    num, den = f @ N @ f, f @ L @ f
    residual = float(np.linalg.norm(N @ f - C * (L @ f)))
    if den > 0:
        residual = max(residual, abs(num / den - C))
    i = int(np.argmax(np.abs(f)))
    if f[i] < 0:
        f = -f
    return PoincareReport(C, f, residual, spec.convention, spec.kind)


def poincare_oracle(graph: Graph, spec: FormSpec) -> float:
    """Generalized eigensolve in an explicit basis of the complement of constants."""
    L, N = _forms(graph, spec)
    n = graph.n
    if n == 1:
        return 0.0
    # orthonormal basis of 1-perp from a QR of [1 | I]
    Qf, _ = np.linalg.qr(np.c_[np.ones(n), np.eye(n)[:, : n - 1]])
    B = Qf[:, 1:]
    w = sla.eigh(B.T @ N @ B, B.T @ L @ B, eigvals_only=True)
    return max(0.0, float(w[-1]))


# ---------------------------------------------------------------------------
# Cheeger constants


@dataclass
class CheegerReport:
    h: float | None
    mode: str
    witness: np.ndarray | None
    lower: float | None = None
    upper: float | None = None
    alpha: float | None = None

    def to_dict(self):
        return dict(h=self.h, mode=self.mode, lower=self.lower, upper=self.upper, alpha=self.alpha,
                    witness=None if self.witness is None else [int(x) for x in self.witness])


EXACT_LIMIT = 26


def _edge_arrays(graph: Graph):
    e = graph.edges()
    return e[:, 0].copy(), e[:, 1].copy()


def fiedler(graph: Graph):
    """(lambda_2, eigenvector) of the unordered-edge Laplacian."""
    n = graph.n
    L = graph.laplacian("unordered")
    if n <= DENSE_LIMIT:
        w, U = np.linalg.eigh(L.toarray())
        return float(w[1]), U[:, 1]
    one = np.full((n, 1), 1 / math.sqrt(n))
    r = lanczos(lambda f: L @ f, n, k=1, which="SA", deflate=one, krylov=120, max_restarts=20)
    return float(r.values[0]), r.vectors[:, 0]


def cheeger(graph: Graph, mode: str = "exact", alpha: float | None = None) -> CheegerReport:
    """h = min |dA| / |A| over 1 <= |A| <= n/2 (``alpha-exact``: |A| <= (1-alpha) n)."""
    n = graph.n
    if mode in ("exact", "alpha-exact"):
        if n > EXACT_LIMIT:
            raise ResourceLimit(f"exact Cheeger constants need n <= {EXACT_LIMIT}", largest_feasible=EXACT_LIMIT)
        if mode == "exact":
            hi = n // 2
        else:
            if alpha is None or not 0 < alpha <= 1:
                raise ValidationError("alpha-exact needs alpha in (0, 1]")
            hi = int(math.floor((1 - alpha) * n + 1e-12))
        if hi < 1:
            raise ValidationError("empty feasible set of subsets")
        eu, ev = _edge_arrays(graph)
        b, s, mask = kernels.cheeger_exhaustive(n, eu, ev, 1, hi)
        witness = np.array([i for i in range(n) if (int(mask) >> i) & 1])
        return CheegerReport(b / s, mode, witness, alpha=alpha)
    if mode == "sweep":
        graph.require_connected()
        lam2, v = fiedler(graph)
        order = np.argsort(v, kind="stable")
        best, best_k = np.inf, 0
        eu, ev = _edge_arrays(graph)
        pos = np.empty(n, dtype=np.int64)
        pos[order] = np.arange(n)
        pu, pv = pos[eu], pos[ev]
        lo, hi = np.minimum(pu, pv), np.maximum(pu, pv)
        # edge crosses prefix {0..k-1} iff lo < k <= hi
        cross = np.zeros(n + 1)
        np.add.at(cross, lo + 1, 1)
        np.add.at(cross, hi + 1, -1)
        bnd = np.cumsum(cross)[1:n]  # boundary of prefix of size k = 1..n-1
        ks = np.arange(1, n)
        ratio = bnd / np.minimum(ks, n - ks)
        k = int(np.argmin(ratio))
        best, best_k = float(ratio[k]), k + 1
        side = order[:best_k] if best_k <= n - best_k else order[best_k:]
        return CheegerReport(best, "sweep", np.sort(side), lower=lam2 / 2, upper=best)
    raise ValidationError(f"unknown Cheeger mode {mode!r}")


# ---------------------------------------------------------------------------
# interpolation


@dataclass
class InterpolationResult:
    kind: str
    p: float | None
    theta: float
    c: float
    n0: int
    bound_at_n0: float
    C: float
    bounds: list = field(default_factory=list)

    def to_dict(self):
        return dict(kind=self.kind, p=self.p, theta=self.theta, c=self.c, n0=self.n0,
                    bound_at_n0=self.bound_at_n0, C=self.C)


def interpolation_bound(p: float, theta: float, n: int) -> float:
    if p >= 2:
        return theta ** (2 * n / p) * 2 ** (1 - 2 / p)
    return theta ** (n * (2 - 2 / p)) * 2 ** (2 / p - 1)


def interpolation_n0(p: float, theta: float, c: float = 0.5, max_n: int = 10 ** 7) -> InterpolationResult:
    if not 0 < theta < 1 or not 0 < c < 1 or p < 1:
        raise ValidationError("need p >= 1, 0 < theta < 1, 0 < c < 1")
    if p >= 2:
        rate, const = 2 / p, 2 ** (1 - 2 / p)
    else:
        rate, const = 2 - 2 / p, 2 ** (2 / p - 1)
    if rate == 0:
        raise NoConvergence(f"p = {p}: the interpolated bound is constant {const:g} > 1 - c")
    target = 1 - c
    # bound(n) = const * theta^(rate n) <= target
    guess = math.log(target / const) / (rate * math.log(theta))
    n0 = max(1, math.ceil(guess - 1e-12))
    while n0 > 1 and interpolation_bound(p, theta, n0 - 1) <= target * (1 + 1e-12):
        n0 -= 1
    while interpolation_bound(p, theta, n0) > target * (1 + 1e-12):
        n0 += 1
        if n0 > max_n:
            raise NoConvergence("n0 beyond search limit")
    C = (2 * n0) ** p * (2 / c) ** p
    return InterpolationResult("lp", p, theta, c, n0, interpolation_bound(p, theta, n0), C)


def curved_n0(delta, theta: float, c: float = 0.5, max_n: int = 2000) -> InterpolationResult:
    """n0 = min n with 2 Delta(theta^n / 2) <= 1 - c for a modulus Delta."""
    if not 0 < theta < 1 or not 0 < c < 1:
        raise ValidationError("need 0 < theta < 1, 0 < c < 1")
    bounds = []
    for n in range(1, max_n + 1):
        eps = theta ** n / 2
        if eps == 0.0:
            break
        b = 2 * float(delta(eps))
        bounds.append(b)
        if b <= (1 - c) * (1 + 1e-12):
            C = (2 * n) ** 2 * (2 / c) ** 2
            return InterpolationResult("curved", None, theta, c, n, b, C, bounds)
    raise NoConvergence("the modulus does not tend to 0 along theta^n / 2")
