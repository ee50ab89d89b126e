"""numba versions of the hot loops; signatures mirror ``_numpy``."""
import numpy as np
from numba import njit


@njit(cache=True)
def _bfs(indptr, indices, source, dist, queue):
    dist[:] = -1
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if dist[v] < 0:
                dist[v] = du
                queue[tail] = v
                tail += 1


def bfs_csr(indptr, indices, source):
    n = len(indptr) - 1
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    _bfs(np.asarray(indptr, np.int64), np.asarray(indices, np.int64), source, dist, queue)
    return dist


@njit(cache=True)
def _all_pairs(indptr, indices, out):
    n = out.shape[0]
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        _bfs(indptr, indices, s, out[s], queue)


def all_pairs_csr(indptr, indices):
    n = len(indptr) - 1
    out = np.empty((n, n), dtype=np.int32)
    _all_pairs(np.asarray(indptr, np.int64), np.asarray(indices, np.int64), out)
    return out


@njit(cache=True)
def _cheeger(n, indptr, indices, lo, hi):
    # Gray-code walk over all nonempty subsets; cnt[v] = #arcs from v into A
    in_a = np.zeros(n, dtype=np.bool_)
    cnt = np.zeros(n, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
    bnd = 0
    size = 0
    mask = 0
    best_b, best_s, best_m = -1, 1, -1
    total = 1 << n
    for k in range(1, total):
        v = 0
        t = k
        while (t & 1) == 0:
            t >>= 1
            v += 1
        if in_a[v]:
            in_a[v] = False
            size -= 1
            mask ^= 1 << v
            bnd += 2 * cnt[v] - deg[v]
            for p in range(indptr[v], indptr[v + 1]):
                cnt[indices[p]] -= 1
        else:
            in_a[v] = True
            size += 1
            mask ^= 1 << v
            bnd += deg[v] - 2 * cnt[v]
            for p in range(indptr[v], indptr[v + 1]):
                cnt[indices[p]] += 1
        if size < lo or size > hi:
            continue
        if best_b < 0:
            best_b, best_s, best_m = bnd, size, mask
        else:
            lhs = bnd * best_s
            rhs = best_b * size
            if lhs < rhs or (lhs == rhs and mask < best_m):
                best_b, best_s, best_m = bnd, size, mask
    return best_b, best_s, best_m


def cheeger_exhaustive(n, eu, ev, lo, hi):
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    # adjacency with multiplicity, loops dropped; self-loops never cross a cut
    keep = eu != ev
    src = np.concatenate([eu[keep], ev[keep]])
    dst = np.concatenate([ev[keep], eu[keep]])
    order = np.argsort(src, kind="stable")
    indices = dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    b, s, m = _cheeger(n, indptr, indices, lo, hi)
    return int(b), int(s), int(m)


@njit(cache=True)
def _pair_profile(X, D, tmax, rho, gamma):
    n, k = X.shape
    for i in range(n):
        for j in range(i + 1, n):
            t = D[i, j]
            if t < 0 or t > tmax:
                continue
            acc = 0.0
            for c in range(k):
                d = X[i, c] - X[j, c]
                acc += d * d
            acc = np.sqrt(acc)
            if acc < rho[t]:
                rho[t] = acc
            if acc > gamma[t]:
                gamma[t] = acc


def pair_profile(X, D, tmax):
    rho = np.full(tmax + 1, np.inf)
    gamma = np.full(tmax + 1, -np.inf)
    _pair_profile(np.ascontiguousarray(X, dtype=np.float64), np.ascontiguousarray(D), tmax, rho, gamma)
    return rho, gamma
