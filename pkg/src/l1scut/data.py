"""Datasets: representation, file I/O, splits, synthesis, noise.

A labeled dataset is a column-major sample matrix ``X`` of shape (D, n)
(features by samples) with one integer class label per column. Labels are
always stored as the contiguous range ``1..C``; loaders remap arbitrary
label values in order of first appearance and keep the originals around.

Two interchange formats are defined:

* ``csv``: first line ``# D=<int> n=<int> C=<int>``, then one sample per
  line as D comma-separated floats followed by the integer label.
* ``rawf64``: 24-byte header of three little-endian u64 (D, n, C), then
  D*n little-endian f64 in column-major order, then n little-endian u32
  labels.

Writers are deterministic: identical inputs produce byte-identical files.

All randomness in this package flows through numpy's PCG64 generator
seeded from explicit 64-bit seeds (optionally extended with stream
indices), so splits, synthetic draws and noise are reproducible across
platforms and runs.
"""

import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyClass,
    InsufficientClassSize,
    InvalidClassCount,
    MalformedHeader,
    MalformedValue,
    MissingLabelColumn,
    NonFiniteValue,
    NonPSDCovariance,
    TruncatedPayload,
)

_HEADER_RE = re.compile(r"^#\s*D=(\d+)\s+n=(\d+)\s+C=(\d+)\s*$")


def _rng(*seed_words: int) -> np.random.Generator:
    """PCG64 generator keyed by one or more integer seed words."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed_words))))


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable sample matrix with per-sample class labels.

    X has shape (D, n): D feature rows, n sample columns. labels has
    length n with values in 1..C and every class occupied. original_labels
    maps class k to the label value it carried before remapping (k itself
    for freshly synthesized data).
    """

    X: np.ndarray
    labels: np.ndarray
    C: int
    original_labels: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D (features x samples) matrix")
        if labels.shape[0] != X.shape[1]:
            raise ValueError(
                f"labels length {labels.shape[0]} != sample count {X.shape[1]}"
            )
        if not np.isfinite(X).all():
            bad = np.argwhere(~np.isfinite(X))[0]
            raise NonFiniteValue(
                "non-finite value in sample matrix", row=int(bad[0]), col=int(bad[1])
            )
        if self.C < 2:
            raise InvalidClassCount(f"need at least 2 classes, got C={self.C}")
        counts = np.bincount(labels, minlength=self.C + 1)
        if labels.min(initial=1) < 1 or labels.max(initial=1) > self.C:
            raise InvalidClassCount(
                f"labels must lie in 1..{self.C}, got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        for k in range(1, self.C + 1):
            if counts[k] == 0:
                raise EmptyClass(k)
        orig = self.original_labels
        if orig is None:
            orig = np.arange(1, self.C + 1, dtype=np.int64)
        else:
            orig = np.asarray(orig, dtype=np.int64).reshape(-1)
            if orig.shape[0] != self.C:
                raise ValueError("original_labels must have one entry per class")
        X.setflags(write=False)
        labels.setflags(write=False)
        orig.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "original_labels", orig)

    @property
    def D(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def take(self, idx: np.ndarray) -> "LabeledDataset":
        """Dataset restricted to the given sample columns (order kept)."""
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(
            self.X[:, idx], self.labels[idx], self.C, self.original_labels
        )


def remap_labels(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary integer labels to 1..C by order of first appearance.

    Returns (labels, original_values) where original_values[k-1] is the raw
    value that became class k.
    """
    raw = np.asarray(raw, dtype=np.int64).reshape(-1)
    order = {}
    for v in raw:
        if int(v) not in order:
            order[int(v)] = len(order) + 1
    mapped = np.array([order[int(v)] for v in raw], dtype=np.int64)
    originals = np.array(sorted(order, key=order.get), dtype=np.int64)
    return mapped, originals


@dataclass(frozen=True)
class ClassPartition:
    """Per-class index lists over a dataset, with their complements.

    members[k-1] holds the column indices of class k (ascending); counts and
    complement counts satisfy co_counts[k-1] = n - counts[k-1].
    """

    members: tuple
    complements: tuple
    counts: np.ndarray
    co_counts: np.ndarray
    n: int

    @classmethod
    def from_dataset(cls, ds: LabeledDataset) -> "ClassPartition":
        members = []
        complements = []
        for k in range(1, ds.C + 1):
            m = np.flatnonzero(ds.labels == k)
            members.append(m)
            complements.append(np.flatnonzero(ds.labels != k))
        counts = np.array([m.size for m in members], dtype=np.int64)
        return cls(
            members=tuple(members),
            complements=tuple(complements),
            counts=counts,
            co_counts=ds.n - counts,
            n=ds.n,
        )

    @property
    def C(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SplitSpec:
    """Stratified split request: samples per class, seed, repetition index."""

    train_per_class: int
    seed: int
    repetition: int = 0


def stratified_split(
    ds: LabeledDataset, spec: SplitSpec
) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded per-class sampling without replacement.

    The train set holds exactly spec.train_per_class columns of every class;
    the test set is the exact complement in original column order. Identical
    (ds, spec) inputs yield identical splits.
    """
    if spec.train_per_class < 1:
        raise ValueError("train_per_class must be positive")
    part = ClassPartition.from_dataset(ds)
    for k in range(1, ds.C + 1):
        if spec.train_per_class >= part.counts[k - 1]:
            raise InsufficientClassSize(
                k, int(part.counts[k - 1]), spec.train_per_class
            )
    rng = _rng(spec.seed, spec.repetition)
    chosen = []
    for k in range(1, ds.C + 1):
        pick = rng.choice(part.members[k - 1], size=spec.train_per_class, replace=False)
        chosen.append(np.sort(pick))
    train_idx = np.concatenate(chosen)
    mask = np.zeros(ds.n, dtype=bool)
    mask[train_idx] = True
    test_idx = np.flatnonzero(~mask)
    return ds.take(train_idx), ds.take(test_idx)


# ---------------------------------------------------------------------------
# Synthetic data


@dataclass(frozen=True)
class GmmComponent:
    """One Gaussian component of a class mixture.

    count samples are drawn from N(mean, cov). weight is the component's
    nominal mixing proportion within its class; it only enters the
    class-level mean/covariance used to place outliers. When weight is None
    it defaults to the component's count.
    """

    mean: np.ndarray
    cov: np.ndarray
    count: int
    weight: float | None = None


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Factor F with F F^T = cov; rejects non-PSD input."""
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise NonPSDCovariance("covariance must be a square matrix")
    if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
        raise NonPSDCovariance("covariance must be symmetric")
    w, q = np.linalg.eigh((cov + cov.T) / 2.0)
    tol = 1e-10 * max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.min(initial=0.0) < -tol:
        raise NonPSDCovariance(f"covariance has negative eigenvalue {w.min():.3e}")
    return q * np.sqrt(np.clip(w, 0.0, None))


def synth_gmm(
    class_specs,
    outlier_fraction: float = 0.0,
    outlier_scale: float = 1.0,
    seed: int = 0,
) -> LabeledDataset:
    """Draw a labeled Gaussian-mixture dataset, optionally with outliers.

    class_specs is a sequence over classes; each entry is a sequence of
    GmmComponent. A seeded outlier_fraction of each class's samples is
    replaced by draws from N(class_mean, outlier_scale * class_cov), where
    the class mean/covariance combine the components by weight. Class k
    (1-based position in class_specs) labels all of its samples.
    """
    if not 0.0 <= outlier_fraction < 1.0:
        raise ValueError("outlier_fraction must lie in [0, 1)")
    if outlier_scale <= 0.0:
        raise ValueError("outlier_scale must be positive")
    rng = _rng(seed)
    cols = []
    labels = []
    for k, comps in enumerate(class_specs, start=1):
        comps = list(comps)
        if not comps:
            raise EmptyClass(k)
        means = [np.asarray(c.mean, dtype=np.float64).reshape(-1) for c in comps]
        factors = [_psd_factor(c.cov) for c in comps]
        dim = means[0].size
        samples = []
        for c, mu, f in zip(comps, means, factors):
            if c.count < 1:
                raise ValueError("component count must be >= 1")
            if mu.size != dim:
                raise ValueError("all components of a class must share a dimension")
            z = rng.standard_normal((dim, c.count))
            samples.append(mu[:, None] + f @ z)
        Xk = np.concatenate(samples, axis=1)
        n_k = Xk.shape[1]
        n_out = int(round(outlier_fraction * n_k))
        if n_out > 0:
            weights = np.array(
                [c.count if c.weight is None else c.weight for c in comps], dtype=float
            )
            weights = weights / weights.sum()
            cls_mean = sum(w * mu for w, mu in zip(weights, means))
            cls_cov = sum(
                w * (f @ f.T + np.outer(mu, mu))
                for w, mu, f in zip(weights, means, factors)
            ) - np.outer(cls_mean, cls_mean)
            out_factor = _psd_factor(outlier_scale * cls_cov)
            idx = rng.choice(n_k, size=n_out, replace=False)
            Xk[:, idx] = cls_mean[:, None] + out_factor @ rng.standard_normal(
                (dim, n_out)
            )
        cols.append(Xk)
        labels.append(np.full(n_k, k, dtype=np.int64))
    X = np.concatenate(cols, axis=1)
    return LabeledDataset(X, np.concatenate(labels), C=len(cols))


def random_blobs(
    n_classes: int,
    dim: int,
    per_class: int,
    separation: float = 4.0,
    components: int = 1,
    outlier_fraction: float = 0.0,
    outlier_scale: float = 1.0,
    seed: int = 0,
) -> LabeledDataset:
    """Convenience mixture: seeded unit-covariance blobs.

    Class means are drawn on a sphere of radius separation/2 around the
    origin; with components > 1 each class splits into that many equally
    sized unit-covariance clusters with means jittered around the class
    mean, giving a multimodal class.
    """
    rng = _rng(seed, 0xB10B5)
    specs = []
    for _ in range(n_classes):
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        center = 0.5 * separation * direction
        comps = []
        base = per_class // components
        counts = [base] * components
        counts[0] += per_class - base * components
        for c in range(components):
            offset = (
                rng.standard_normal(dim) * separation / 3.0 if components > 1 else 0.0
            )
            comps.append(
                GmmComponent(mean=center + offset, cov=np.eye(dim), count=counts[c])
            )
        specs.append(comps)
    return synth_gmm(
        specs,
        outlier_fraction=outlier_fraction,
        outlier_scale=outlier_scale,
        seed=seed,
    )


def inject_noise(ds: LabeledDataset, percent: float, seed: int = 0) -> LabeledDataset:
    """Add zero-mean Gaussian noise per feature row.

    Row i receives i.i.d. noise of variance (percent/100) times the row's
    empirical variance. percent=0 returns a bit-identical copy.
    """
    if percent < 0:
        raise ValueError("noise percent must be non-negative")
    if percent == 0:
        return LabeledDataset(ds.X.copy(), ds.labels, ds.C, ds.original_labels)
    rng = _rng(seed, 0x4015E)
    row_var = ds.X.var(axis=1)
    sd = np.sqrt(percent / 100.0 * row_var)
    noisy = ds.X + sd[:, None] * rng.standard_normal(ds.X.shape)
    return LabeledDataset(noisy, ds.labels, ds.C, ds.original_labels)


# ---------------------------------------------------------------------------
# File I/O


def _format_float(x: float) -> str:
    return repr(float(x))


def save_dataset(ds: LabeledDataset, path: str, format: str = "csv") -> None:
    """Write a dataset in one of the interchange formats (deterministic)."""
    if format == "csv":
        lines = [f"# D={ds.D} n={ds.n} C={ds.C}\n"]
        for j in range(ds.n):
            feats = ",".join(_format_float(v) for v in ds.X[:, j])
            lines.append(f"{feats},{int(ds.labels[j])}\n")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.writelines(lines)
    elif format == "rawf64":
        with open(path, "wb") as fh:
            fh.write(struct.pack("<QQQ", ds.D, ds.n, ds.C))
            fh.write(ds.X.astype("<f8").tobytes(order="F"))
            fh.write(ds.labels.astype("<u4").tobytes())
    else:
        raise ValueError(f"unknown dataset format {format!r}")


def load_dataset(path: str, format: str = "csv") -> LabeledDataset:
    """Read and validate a dataset file.

    Labels are remapped to contiguous 1..C in order of first appearance;
    the original values are kept on the returned dataset.
    """
    if format == "csv":
        return _load_csv(path)
    if format == "rawf64":
        return _load_rawf64(path)
    raise ValueError(f"unknown dataset format {format!r}")


def _load_csv(path: str) -> LabeledDataset:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        m = _HEADER_RE.match(header.strip())
        if not m:
            raise MalformedHeader(f"bad CSV header {header.strip()!r}", row=0)
        D, n, C = (int(g) for g in m.groups())
        X = np.empty((D, n), dtype=np.float64)
        raw_labels = np.empty(n, dtype=np.int64)
        for j in range(n):
            line = fh.readline()
            if not line:
                raise TruncatedPayload(f"expected {n} sample lines", row=j + 1)
            fields = line.strip().split(",")
            if len(fields) < D + 1:
                raise MissingLabelColumn(
                    f"expected {D} features plus a label, got {len(fields)} fields",
                    row=j + 1,
                )
            if len(fields) > D + 1:
                raise MalformedValue(
                    f"expected {D} features plus a label, got {len(fields)} fields",
                    row=j + 1,
                )
            for i in range(D):
                try:
                    v = float(fields[i])
                except ValueError:
                    raise MalformedValue(
                        f"unparsable feature {fields[i]!r}", row=j + 1, col=i
                    ) from None
                if not np.isfinite(v):
                    raise NonFiniteValue("non-finite feature value", row=j + 1, col=i)
                X[i, j] = v
            try:
                raw_labels[j] = int(fields[D])
            except ValueError:
                raise MalformedValue(
                    f"unparsable label {fields[D]!r}", row=j + 1, col=D
                ) from None
    return _assemble(X, raw_labels, C)


def _load_rawf64(path: str) -> LabeledDataset:
    with open(path, "rb") as fh:
        header = fh.read(24)
        if len(header) != 24:
            raise MalformedHeader("rawf64 header must be 24 bytes")
        D, n, C = struct.unpack("<QQQ", header)
        payload = fh.read(8 * D * n)
        if len(payload) != 8 * D * n:
            raise TruncatedPayload(
                f"matrix payload is {len(payload)} bytes, expected {8 * D * n}"
            )
        X = np.frombuffer(payload, dtype="<f8").reshape((D, n), order="F")
        label_bytes = fh.read(4 * n)
        if len(label_bytes) != 4 * n:
            raise TruncatedPayload(
                f"label payload is {len(label_bytes)} bytes, expected {4 * n}"
            )
        raw_labels = np.frombuffer(label_bytes, dtype="<u4").astype(np.int64)
        if fh.read(1):
            raise TruncatedPayload("trailing bytes after label payload")
    if not np.isfinite(X).all():
        bad = np.argwhere(~np.isfinite(X))[0]
        raise NonFiniteValue(
            "non-finite value in matrix payload", row=int(bad[0]), col=int(bad[1])
        )
    return _assemble(np.ascontiguousarray(X), raw_labels, int(C))


def _assemble(X: np.ndarray, raw_labels: np.ndarray, C: int) -> LabeledDataset:
    labels, originals = remap_labels(raw_labels)
    observed = int(labels.max(initial=0))
    if C < 2:
        raise InvalidClassCount(f"header declares C={C}, need at least 2")
    if observed > C:
        raise InvalidClassCount(
            f"header declares C={C} but {observed} distinct labels appear"
        )
    if observed < C:
        raise EmptyClass(observed + 1)
    return LabeledDataset(X, labels, C, originals)


def save_matrix(M: np.ndarray, path: str) -> None:
    """Write a bare matrix: 16-byte header (u64 rows, u64 cols) + f64 payload
    in column-major order. Used for projection blocks and debug dumps."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", M.shape[0], M.shape[1]))
        fh.write(M.astype("<f8").tobytes(order="F"))


def load_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise MalformedHeader("matrix header must be 16 bytes")
        rows, cols = struct.unpack("<QQ", header)
        payload = fh.read(8 * rows * cols)
        if len(payload) != 8 * rows * cols:
            raise TruncatedPayload(
                f"matrix payload is {len(payload)} bytes, expected {8 * rows * cols}"
            )
        return np.ascontiguousarray(
            np.frombuffer(payload, dtype="<f8").reshape((rows, cols), order="F")
        )
