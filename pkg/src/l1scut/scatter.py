"""Class-size-scaled pairwise dissimilarity matrices and ratio objectives.

For every class k with members U_k (size n_k) and complement (size m_k):

    B_k = sum_{i in U_k} sum_{j not in U_k} (x_i - x_j)(x_i - x_j)^T / (n_k m_k)
    W_k = sum_{i in U_k} sum_{j in U_k}     (x_i - x_j)(x_i - x_j)^T / (n_k n_k)

The between/within matrices are S_B = sum_k B_k and S_W = sum_k W_k, and the
total is S_T = S_B + S_W. These are the quantities the L2-norm scaling-cut
and its determinant/trace ratio objectives are built from.
"""

from dataclasses import dataclass

import numpy as np

from .data import ClassPartition, LabeledDataset
from .errors import EmptyClass, SingularDenominator, ZeroTrace


@dataclass(frozen=True)
class ScatterPair:
    """Symmetric PSD between/within dissimilarity matrices."""

    s_b: np.ndarray
    s_w: np.ndarray

    @property
    def s_t(self) -> np.ndarray:
        return self.s_b + self.s_w

    def to_matrix(self) -> np.ndarray:
        """Stacked [S_B | S_W] block, D x 2D, for raw serialization."""
        return np.concatenate([self.s_b, self.s_w], axis=1)

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> "ScatterPair":
        D = M.shape[0]
        if M.shape[1] != 2 * D:
            raise ValueError("expected a D x 2D stacked scatter block")
        return cls(np.ascontiguousarray(M[:, :D]), np.ascontiguousarray(M[:, D:]))


def _pair_sum(
    sum_a: np.ndarray,
    m2_a: np.ndarray,
    size_a: int,
    sum_b: np.ndarray,
    m2_b: np.ndarray,
    size_b: int,
) -> np.ndarray:
    # sum_{i in A, j in B} (x_i-x_j)(x_i-x_j)^T
    #   = |B| M2(A) + |A| M2(B) - s(A)s(B)^T - s(B)s(A)^T
    # with s the set sum and M2 the set second moment; this is what turns the
    # O(n^2 D^2) double loop into O(n D^2).
    return (
        size_b * m2_a
        + size_a * m2_b
        - np.outer(sum_a, sum_b)
        - np.outer(sum_b, sum_a)
    )


def scatter_pair(ds: LabeledDataset, part: ClassPartition | None = None) -> ScatterPair:
    """Between/within dissimilarity matrices of a dataset.

    Uses the second-moment rearrangement (see _pair_sum); tests hold it to
    the literal pairwise double loop within 1e-10 relative.
    """
    if part is None:
        part = ClassPartition.from_dataset(ds)
    X = ds.X
    D = ds.D
    sum_tot = X.sum(axis=1)
    m2_tot = X @ X.T
    s_b = np.zeros((D, D))
    s_w = np.zeros((D, D))
    for k in range(part.C):
        members = part.members[k]
        n_k = int(part.counts[k])
        m_k = int(part.co_counts[k])
        if n_k == 0:
            raise EmptyClass(k + 1)
        Xk = X[:, members]
        sum_k = Xk.sum(axis=1)
        m2_k = Xk @ Xk.T
        s_w += _pair_sum(sum_k, m2_k, n_k, sum_k, m2_k, n_k) / (n_k * n_k)
        if m_k > 0:
            s_b += _pair_sum(
                sum_k, m2_k, n_k, sum_tot - sum_k, m2_tot - m2_k, m_k
            ) / (n_k * m_k)
    s_b = (s_b + s_b.T) / 2.0
    s_w = (s_w + s_w.T) / 2.0
    s_b.setflags(write=False)
    s_w.setflags(write=False)
    return ScatterPair(s_b, s_w)


def _check_projection(V: np.ndarray, D: int) -> np.ndarray:
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != D:
        raise ValueError(f"projection has {V.shape[0]} rows, expected {D}")
    gram = V.T @ V
    if not np.allclose(gram, np.eye(V.shape[1]), atol=1e-8):
        raise ValueError("projection columns must be orthonormal (within 1e-8)")
    return V


def scut_ratio(V: np.ndarray, sp: ScatterPair) -> float:
    """Determinant-ratio objective det(V^T S_B V) / det(V^T S_T V).

    Diagnostic form of the scaling-cut criterion; raises
    SingularDenominator instead of ever returning NaN.
    """
    V = _check_projection(V, sp.s_b.shape[0])
    num = float(np.linalg.det(V.T @ sp.s_b @ V))
    den = float(np.linalg.det(V.T @ sp.s_t @ V))
    if not np.isfinite(den) or den <= 0.0:
        raise SingularDenominator(
            f"det(V^T S_T V) = {den:.3e} is not positive"
        )
    return num / den


def trace_ratio(V: np.ndarray, sp: ScatterPair, denom: str = "total") -> float:
    """Trace-ratio objective Tr(V^T S_B V) / Tr(V^T S_X V).

    denom selects the denominator matrix: "total" uses S_T = S_B + S_W (the
    form the L2 baseline maximizes), "within" uses S_W (the form the L1
    objective mirrors).
    """
    V = _check_projection(V, sp.s_b.shape[0])
    if denom == "total":
        S = sp.s_t
    elif denom == "within":
        S = sp.s_w
    else:
        raise ValueError("denom must be 'total' or 'within'")
    den = float(np.trace(V.T @ S @ V))
    if den <= 0.0:
        raise ZeroTrace(f"Tr(V^T S_{denom} V) = {den:.3e} is not positive")
    return float(np.trace(V.T @ sp.s_b @ V)) / den
