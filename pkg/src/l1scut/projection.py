"""Projection matrices: the common output type of every fit routine.

A Projection is an ordered orthonormal set of direction vectors (columns of
V, shape D x d) plus per-column solver diagnostics. Serialization puts the
matrix first as a raw block (16-byte rows/cols header, f64 column-major)
followed by a plain-text metadata section; writers are byte-deterministic.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .errors import DimensionMismatch, MalformedHeader, MalformedValue, TruncatedPayload

_MAGIC = "l1scut-projection 1"


@dataclass(frozen=True)
class ColumnInfo:
    """Diagnostics for one fitted direction."""

    objective: float
    iterations: int = 0
    converged: bool = True
    restart: int = 0


@dataclass(frozen=True)
class Projection:
    V: np.ndarray
    columns: tuple
    method: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        V = np.ascontiguousarray(self.V, dtype=np.float64)
        if V.ndim != 2:
            raise ValueError("V must be a D x d matrix")
        norms = np.linalg.norm(V, axis=0)
        if not np.allclose(norms, 1.0, atol=1e-10):
            raise ValueError("every projection column must have unit norm")
        gram = V.T @ V
        if not np.allclose(gram, np.eye(V.shape[1]), atol=1e-8):
            raise ValueError("projection columns must be pairwise orthogonal")
        if len(self.columns) != V.shape[1]:
            raise ValueError("need one ColumnInfo per column")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def D(self) -> int:
        return self.V.shape[0]

    @property
    def d(self) -> int:
        return self.V.shape[1]


def transform(P: Projection, ds: LabeledDataset) -> LabeledDataset:
    """Project a dataset: Y = V^T X, labels carried through."""
    if ds.D != P.D:
        raise DimensionMismatch(
            f"dataset has {ds.D} features but projection expects {P.D}"
        )
    return LabeledDataset(P.V.T @ ds.X, ds.labels, ds.C, ds.original_labels)


def _meta_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def save_projection(P: Projection, path: str) -> None:
    lines = [_MAGIC, f"method={P.method}", f"D={P.D}", f"d={P.d}"]
    for j, info in enumerate(P.columns):
        lines.append(f"col{j}.objective={repr(float(info.objective))}")
        lines.append(f"col{j}.iterations={info.iterations}")
        lines.append(f"col{j}.converged={1 if info.converged else 0}")
        lines.append(f"col{j}.restart={info.restart}")
    for key in sorted(P.meta):
        lines.append(f"cfg.{key}={_meta_value(P.meta[key])}")
    text = "\n".join(lines) + "\n"
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", P.D, P.d))
        fh.write(P.V.astype("<f8").tobytes(order="F"))
        fh.write(text.encode("utf-8"))


def load_projection(path: str) -> Projection:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise MalformedHeader("projection header must be 16 bytes")
        D, d = struct.unpack("<QQ", header)
        payload = fh.read(8 * D * d)
        if len(payload) != 8 * D * d:
            raise TruncatedPayload(
                f"matrix payload is {len(payload)} bytes, expected {8 * D * d}"
            )
        V = np.ascontiguousarray(
            np.frombuffer(payload, dtype="<f8").reshape((D, d), order="F")
        )
        text = fh.read().decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != _MAGIC:
        raise MalformedHeader("missing projection metadata magic line")
    fields: dict[str, str] = {}
    for ln in lines[1:]:
        if "=" not in ln:
            raise MalformedValue(f"bad metadata line {ln!r}")
        key, _, value = ln.partition("=")
        fields[key] = value
    method = fields.pop("method", "")
    fields.pop("D", None)
    fields.pop("d", None)
    columns = []
    for j in range(d):
        columns.append(
            ColumnInfo(
                objective=float(fields.pop(f"col{j}.objective", "nan")),
                iterations=int(fields.pop(f"col{j}.iterations", "0")),
                converged=fields.pop(f"col{j}.converged", "1") == "1",
                restart=int(fields.pop(f"col{j}.restart", "0")),
            )
        )
    meta = {k[4:]: v for k, v in fields.items() if k.startswith("cfg.")}
    return Projection(V, tuple(columns), method=method, meta=meta)
