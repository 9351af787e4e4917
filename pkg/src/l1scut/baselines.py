"""L2-norm reference methods: classical LDA and the L2 scaling cut.

Both are trace-ratio maximizers A w = lambda B w solved by a self-contained
symmetric generalized eigensolver: Cholesky reduction of the pencil to a
standard symmetric problem followed by cyclic Jacobi rotations. The
denominator matrix gets a small ridge (delta = 1e-8 Tr(B)/D) instead of the
PCA preprocessing sometimes used to make it invertible; reports carry that
choice so downstream numbers are read accordingly.
"""

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import NotPositiveDefinite
from .projection import ColumnInfo, Projection
from .scatter import scatter_pair

_JACOBI_TOL = 1e-12
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class EigenResult:
    """Generalized eigenpairs, eigenvalues descending, vectors B-orthonormal."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _jacobi_eigh(C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of symmetric C by cyclic Jacobi rotations.

    Sweeps annihilate each off-diagonal entry in turn until the off-diagonal
    Frobenius norm falls below 1e-12 times the (rotation-invariant) Frobenius
    norm of C. Returns (diagonal values, accumulated rotation matrix W) with
    C = W diag W^T, unsorted.
    """
    C = C.copy()
    D = C.shape[0]
    W = np.eye(D)
    norm_c = float(np.linalg.norm(C))
    if norm_c == 0.0 or D == 1:
        return np.diag(C).copy(), W
    for _ in range(_MAX_SWEEPS):
        off = float(np.sqrt(max(np.sum(C * C) - np.sum(np.diag(C) ** 2), 0.0)))
        if off <= _JACOBI_TOL * norm_c:
            break
        for p in range(D - 1):
            for q in range(p + 1, D):
                cpq = C[p, q]
                if abs(cpq) <= _JACOBI_TOL * norm_c / D:
                    continue
                tau = (C[q, q] - C[p, p]) / (2.0 * cpq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot_p = c * C[:, p] - s * C[:, q]
                rot_q = s * C[:, p] + c * C[:, q]
                C[:, p], C[:, q] = rot_p, rot_q
                C[p, :], C[q, :] = c * C[p, :] - s * C[q, :], (
                    s * C[p, :] + c * C[q, :]
                )
                C[p, q] = C[q, p] = 0.0
                rot_p = c * W[:, p] - s * W[:, q]
                rot_q = s * W[:, p] + c * W[:, q]
                W[:, p], W[:, q] = rot_p, rot_q
    return np.diag(C).copy(), W


def sym_geig(A: np.ndarray, B: np.ndarray) -> EigenResult:
    """Solve A w = lambda B w for symmetric A and positive definite B.

    Reduces via B = L L^T to the standard symmetric problem
    L^-1 A L^-T y = lambda y, runs cyclic Jacobi, and maps back
    w = L^-T y, which makes the eigenvectors B-orthonormal. Pairs are
    sorted by descending eigenvalue; each vector's largest-magnitude
    component is made positive so results are sign-deterministic.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A and B must be square matrices of the same shape")
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "denominator matrix is not positive definite"
        ) from None
    C = np.linalg.solve(L, np.linalg.solve(L, A).T).T
    C = 0.5 * (C + C.T)
    vals, W = _jacobi_eigh(C)
    vecs = np.linalg.solve(L.T, W)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    lead = np.abs(vecs).argmax(axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return EigenResult(eigenvalues=vals, eigenvectors=vecs * signs)


def _ridge(B: np.ndarray) -> float:
    return 1e-8 * float(np.trace(B)) / B.shape[0]


def _orthonormal_prefix(V: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt; keeps the first column's direction exact.

    Prefix-stable: the first d output columns depend only on the first d
    input columns, so slicing a wide fit reproduces a narrow one.
    """
    V = V.astype(np.float64, copy=True)
    for j in range(V.shape[1]):
        for i in range(j):
            V[:, j] -= (V[:, i] @ V[:, j]) * V[:, i]
        nv = np.linalg.norm(V[:, j])
        if nv < 1e-12:
            raise np.linalg.LinAlgError(
                f"eigenvector column {j} lies in the span of earlier columns"
            )
        V[:, j] /= nv
    return V


def _eig_projection(
    A: np.ndarray, B: np.ndarray, d: int, method: str, meta: dict
) -> Projection:
    delta = _ridge(B)
    res = sym_geig(A, B + delta * np.eye(B.shape[0]))
    V = _orthonormal_prefix(res.eigenvectors[:, :d])
    cols = tuple(
        ColumnInfo(objective=float(res.eigenvalues[j]), iterations=0,
                   converged=True, restart=0)
        for j in range(d)
    )
    meta = dict(meta)
    meta["d"] = d
    meta["ridge_delta"] = delta
    meta["preprocessing"] = "none"
    return Projection(V, cols, method=method, meta=meta)


def fit_l2sc(ds: LabeledDataset, d: int = 1) -> Projection:
    """Top-d generalized eigenvectors of the (S_B, S_T + delta I) pencil.

    Maximizes the trace ratio Tr(V^T S_B V) / Tr(V^T S_T V) over
    orthonormal-in-the-pencil V; columns are then orthonormalized in the
    ordinary sense for use as a projection.
    """
    if not 1 <= d < ds.D:
        raise ValueError(f"d must satisfy 1 <= d < {ds.D}, got {d}")
    sp = scatter_pair(ds)
    return _eig_projection(sp.s_b, sp.s_t, d, "l2sc", {})


def lda_scatters(ds: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    """Classical mean-based between and within scatters.

    S_b = sum_k n_k (mu_k - mu)(mu_k - mu)^T and
    S_w = sum_k sum_{i in U_k} (x_i - mu_k)(x_i - mu_k)^T.
    Note the pairwise within-class dissimilarity used by the scaling cut
    relates to this one per class by sum_{i,j} (x_i-x_j)(x_i-x_j)^T / n_k^2
    = (2/n_k) S_w,k: same eigenvectors per class, different weighting.
    """
    mu = ds.X.mean(axis=1)
    s_b = np.zeros((ds.D, ds.D))
    s_w = np.zeros((ds.D, ds.D))
    for k in range(1, ds.C + 1):
        Xk = ds.X[:, ds.labels == k]
        n_k = Xk.shape[1]
        mu_k = Xk.mean(axis=1)
        dmu = mu_k - mu
        s_b += n_k * np.outer(dmu, dmu)
        R = Xk - mu_k[:, None]
        s_w += R @ R.T
    return 0.5 * (s_b + s_b.T), 0.5 * (s_w + s_w.T)


def fit_lda(ds: LabeledDataset, d: int = 1) -> Projection:
    """Classical Fisher LDA: top-d eigenvectors of (S_b, S_w + delta I).

    d above C - 1 is allowed but the extra columns carry eigenvalues near
    zero (the between-scatter has rank at most C - 1).
    """
    if not 1 <= d < ds.D:
        raise ValueError(f"d must satisfy 1 <= d < {ds.D}, got {d}")
    s_b, s_w = lda_scatters(ds)
    return _eig_projection(s_b, s_w, d, "lda", {})
