"""Thick-restart Lanczos for a few extreme eigenpairs of a symmetric operator.

Every Krylov vector is reorthogonalised twice against the whole basis. The
reported residuals are explicit: ||A x - theta x|| is recomputed from the
stored products A V, not read off the tridiagonal recurrence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, ValidationError


@dataclass
class EigResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    restarts: int
    matvecs: int
    converged: bool


def _select(theta, k, which):
    if which == "LM":
        order = np.argsort(-np.abs(theta), kind="stable")
    elif which == "LA":
        order = np.argsort(-theta, kind="stable")
    elif which == "SA":
        order = np.argsort(theta, kind="stable")
    else:
        raise ValidationError(f"which must be LM, LA or SA, not {which!r}")
    return order[:k]


def _orthogonalize(w, V, j):
    for _ in range(2):
        w = w - V[:, :j] @ (V[:, :j].T @ w)
    return w


def lanczos(matvec, n: int, k: int = 1, which: str = "LM", tol: float = 1e-8, krylov: int | None = None,
            max_restarts: int = 3, seed: int = 0, v0=None, deflate=None, strict: bool = True) -> EigResult:
    """Extreme eigenpairs of the symmetric operator ``matvec`` on R^n.

    ``deflate`` is an optional (n, q) orthonormal block kept out of the
    Krylov space (e.g. the constant vector). Raises ConvergenceError when
    ``strict`` and the residual target is missed after ``max_restarts``.
    """
    if k < 1 or k >= n:
        raise ValidationError("need 1 <= k < n")
    q = 0 if deflate is None else deflate.shape[1]
    m = min(n - q, krylov or max(2 * k + 40, 80))
    keep = min(m - 1, max(k + 8, m // 3))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) if v0 is None else np.asarray(v0, dtype=float).copy()

    def project(w):
        if deflate is not None:
            for _ in range(2):
                w = w - deflate @ (deflate.T @ w)
        return w

    V = np.zeros((n, m))
    AV = np.zeros((n, m))
    v = project(v)
    V[:, 0] = v / np.linalg.norm(v)
    AV[:, 0] = project(matvec(V[:, 0]))
    j = 1
    matvecs = 1
    restarts = 0
    while True:
        while j < m:
            w = _orthogonalize(AV[:, j - 1].copy(), V, j)
            w = project(w)
            nrm = np.linalg.norm(w)
            if nrm < 1e-13:
                # invariant subspace: continue with a fresh random direction
                w = project(_orthogonalize(rng.standard_normal(n), V, j))
                nrm = np.linalg.norm(w)
            V[:, j] = w / nrm
            AV[:, j] = project(matvec(V[:, j]))
            matvecs += 1
            j += 1
        H = V.T @ AV
        H = (H + H.T) / 2
        theta, Y = sla.eigh(H)
        sel = _select(theta, k, which)
        X = V @ Y[:, sel]
        R = AV @ Y[:, sel] - X * theta[sel]
        res = np.linalg.norm(R, axis=0)
        if np.all(res <= tol) or restarts >= max_restarts:
            break
        # thick restart: keep the best Ritz vectors plus the leading residual
        ksel = _select(theta, keep, which)
        Vk = V @ Y[:, ksel]
        AVk = AV @ Y[:, ksel]
        V[:, :keep] = Vk
        AV[:, :keep] = AVk
        r = R[:, int(np.argmax(res))]
        r = project(_orthogonalize(r, V, keep))
        nrm = np.linalg.norm(r)
        if nrm < 1e-13:
            r = project(_orthogonalize(rng.standard_normal(n), V, keep))
            nrm = np.linalg.norm(r)
        V[:, keep] = r / nrm
        AV[:, keep] = project(matvec(V[:, keep]))
        matvecs += 1
        j = keep + 1
        restarts += 1
    converged = bool(np.all(res <= tol))
    if strict and not converged:
        raise ConvergenceError(f"Lanczos residual {res.max():.2e} > {tol:.0e} after {restarts} restarts")
    # sign convention: largest-magnitude entry positive
    for c in range(X.shape[1]):
        i = int(np.argmax(np.abs(X[:, c])))
        if X[i, c] < 0:
            X[:, c] *= -1
    return EigResult(theta[sel], X, res, restarts, matvecs, converged)
