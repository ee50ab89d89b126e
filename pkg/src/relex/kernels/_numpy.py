"""Pure numpy versions of the kernels in ``_numba``."""
import numpy as np


def bfs_csr(indptr, indices, source):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        if counts.sum() == 0:
            break
        offs = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(counts.sum())
        nbrs = indices[offs]
        nbrs = np.unique(nbrs[dist[nbrs] < 0])
        dist[nbrs] = level
        frontier = nbrs.astype(np.int64)
    return dist


def all_pairs_csr(indptr, indices):
    n = len(indptr) - 1
    out = np.empty((n, n), dtype=np.int32)
    for s in range(n):
        out[s] = bfs_csr(indptr, indices, s)
    return out


def _popcount(x):
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101) >> 56


def cheeger_exhaustive(n, eu, ev, lo, hi, chunk=1 << 20):
    """Minimise |boundary(A)|/|A| over lo <= |A| <= hi.

    Returns ``(boundary, size, mask)``; ties resolve to the smallest mask.
    """
    best_b, best_s, best_m = -1, 1, -1
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    total = 1 << n
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        size = _popcount(masks)
        keep = (size >= lo) & (size <= hi)
        if not keep.any():
            continue
        masks = masks[keep]
        size = size[keep]
        bnd = np.zeros(masks.size, dtype=np.int64)
        for u, v in zip(eu, ev):
            bnd += ((masks >> u) ^ (masks >> v)) & 1
        # b/s with s <= 62 are distinct rationals far apart: float ties are exact ties
        ratio = bnd / size
        tie = np.flatnonzero(ratio == ratio.min())
        j = tie[np.argmin(masks[tie])]
        b, s, m = int(bnd[j]), int(size[j]), int(masks[j])
        if best_b < 0 or b * best_s < best_b * s or (b * best_s == best_b * s and m < best_m):
            best_b, best_s, best_m = b, s, m
    return best_b, best_s, best_m


def pair_profile(X, D, tmax):
    """Min and max of ||X_i - X_j|| over unordered pairs grouped by D[i, j].

    Entries with no realised pair are ``inf`` (min) and ``-inf`` (max).
    """
    n = X.shape[0]
    chunk = max(1, (1 << 22) // max(1, n * X.shape[1]))
    rho = np.full(tmax + 1, np.inf)
    gamma = np.full(tmax + 1, -np.inf)
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        diff = X[a:b, None, :] - X[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        t = D[a:b]
        rows = np.arange(a, b)[:, None]
        upper = np.arange(n)[None, :] > rows
        t = t[upper]
        dist = dist[upper]
        ok = (t >= 0) & (t <= tmax)
        np.minimum.at(rho, t[ok], dist[ok])
        np.maximum.at(gamma, t[ok], dist[ok])
    return rho, gamma
