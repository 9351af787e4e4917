"""L1-norm scaling cut: objective, single-direction solver, deflation loop.

The objective for a unit direction v is the ratio of L1 dispersions

    J(v) = [sum_k sum_{i in U_k} sum_{j not in U_k} |v.(x_i - x_j)| / (n_k m_k)]
           ---------------------------------------------------------------------
           [sum_k sum_{i in U_k} sum_{j in U_k}     |v.(x_i - x_j)| / (n_k n_k)]

with U_k the members of class k, n_k its size and m_k = n - n_k. Replacing
each |u| by sign(u) * u at the current iterate makes both sums linear in v,
which yields per-pair sign states, accumulator vectors p and b whose inner
products with v reproduce the numerator and denominator exactly, and the
ascent direction g = p/(v.p) - b/(v.b), the gradient of log J(v) with signs
held fixed. The solver climbs this direction with a learning rate, perturbs
away from zero denominators, and keeps the best iterate seen.

Directions beyond the first come from deflation: once v is accepted the data
loses its component along v (X <- X - v v^T X) and the next direction is
solved on the residual.
"""

from dataclasses import dataclass, replace

import numpy as np

from .data import ClassPartition, LabeledDataset
from .errors import DimensionExhausted, ZeroDenominator, ZeroWithinDispersion
from .projection import ColumnInfo, Projection

_DIRECTION_SEED_STRIDE = 0x9E3779B97F4A7C15  # odd 64-bit stride, decorrelates per-direction streams


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the iterative direction solver.

    gamma is the nominal learning rate; epsilon the convergence threshold on
    the iterate displacement; itmax the per-restart iteration cap;
    perturb_scale the magnitude of the random nudge used to escape zero
    denominators; restarts the number of independent seeded initializations
    (the best-objective direction wins). Restart r draws from a generator
    seeded with seed XOR r.
    """

    gamma: float = 0.1
    epsilon: float = 1e-6
    itmax: int = 500
    perturb_scale: float = 1e-6
    seed: int = 0
    restarts: int = 5

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.itmax < 1:
            raise ValueError("itmax must be at least 1")
        if self.perturb_scale <= 0:
            raise ValueError("perturb_scale must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")

    def echo(self) -> dict:
        return {
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "itmax": self.itmax,
            "perturb_scale": self.perturb_scale,
            "seed": self.seed,
            "restarts": self.restarts,
        }


@dataclass(frozen=True)
class SignState:
    """Per-pair signs of projected differences, one block per class.

    q[k] has shape (n_k, m_k): entry (i, j) is +1 when v.(x_i - x_j) > 0 for
    the i-th member and j-th non-member of class k+1, and -1 otherwise
    (exact zeros count as -1). r[k] is the same over the (n_k, n_k) within
    pairs.
    """

    q: tuple
    r: tuple


@dataclass(frozen=True)
class RestartInfo:
    objective: float
    iterations: int
    converged: bool
    degenerate: bool
    halvings: int
    perturbations: int


@dataclass(frozen=True)
class DirectionInfo:
    objective: float
    iterations: int
    converged: bool
    restart: int
    restarts: tuple


def _unit(v: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / nv


def _dispersions(z: np.ndarray, part: ClassPartition) -> tuple[float, float]:
    """Between and within L1 dispersion of projected samples z."""
    num = 0.0
    den = 0.0
    for k in range(part.C):
        zk = z[part.members[k]]
        n_k = zk.size
        m_k = int(part.co_counts[k])
        if m_k > 0:
            zc = z[part.complements[k]]
            num += np.abs(zk[:, None] - zc[None, :]).sum() / (n_k * m_k)
        den += np.abs(zk[:, None] - zk[None, :]).sum() / (n_k * n_k)
    return num, den


def l1_objective(
    v: np.ndarray,
    ds: LabeledDataset,
    part: ClassPartition | None = None,
    require_unit: bool = True,
) -> float:
    """Evaluate J(v). Raises ZeroWithinDispersion when the denominator is 0.

    The ratio is invariant to positive rescaling of v; require_unit=False
    skips the unit-norm precondition check for callers exploiting that.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if require_unit and abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError("v must have unit norm (within 1e-8)")
    if part is None:
        part = ClassPartition.from_dataset(ds)
    num, den = _dispersions(ds.X.T @ v, part)
    if den == 0.0:
        raise ZeroWithinDispersion(
            "all within-class pairs coincide under this direction"
        )
    return num / den


def sign_state(
    v: np.ndarray, ds: LabeledDataset, part: ClassPartition | None = None
) -> SignState:
    """Signs of every projected pair difference under v (zeros map to -1)."""
    if part is None:
        part = ClassPartition.from_dataset(ds)
    z = ds.X.T @ np.asarray(v, dtype=np.float64).reshape(-1)
    q = []
    r = []
    for k in range(part.C):
        zk = z[part.members[k]]
        zc = z[part.complements[k]]
        q.append(np.where(zk[:, None] - zc[None, :] > 0, 1, -1).astype(np.int8))
        r.append(np.where(zk[:, None] - zk[None, :] > 0, 1, -1).astype(np.int8))
    return SignState(q=tuple(q), r=tuple(r))


def accumulators(
    v: np.ndarray,
    ds: LabeledDataset,
    part: ClassPartition | None = None,
    ss: SignState | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Signed pair-difference sums p (between) and b (within).

    p = sum_k sum_pairs q_ij (x_i - x_j) / (n_k m_k) and b likewise with the
    within signs, so that v.p and v.b equal the numerator and denominator of
    the objective for signs consistent with v. Each class contributes
    per-sample coefficients (row/column sums of its sign block); the final
    matrix-vector product costs O(n D).
    """
    if part is None:
        part = ClassPartition.from_dataset(ds)
    if ss is None:
        ss = sign_state(v, ds, part)
    c_between = np.zeros(ds.n)
    c_within = np.zeros(ds.n)
    for k in range(part.C):
        members = part.members[k]
        n_k = members.size
        m_k = int(part.co_counts[k])
        if m_k > 0:
            w = 1.0 / (n_k * m_k)
            qk = ss.q[k].astype(np.float64)
            c_between[members] += w * qk.sum(axis=1)
            c_between[part.complements[k]] -= w * qk.sum(axis=0)
        rk = ss.r[k].astype(np.float64)
        w_in = 1.0 / (n_k * n_k)
        c_within[members] += w_in * (rk.sum(axis=1) - rk.sum(axis=0))
    return ds.X @ c_between, ds.X @ c_within


def ascent_direction(v: np.ndarray, p: np.ndarray, b: np.ndarray) -> np.ndarray:
    """g = p/(v.p) - b/(v.b): gradient of log J(v) with signs held fixed."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    vp = float(v @ p)
    vb = float(v @ b)
    if vp == 0.0:
        raise ZeroDenominator("v.p is zero")
    if vb == 0.0:
        raise ZeroDenominator("v.b is zero")
    g = p / vp - b / vb
    if not np.isfinite(g).all():
        raise ZeroDenominator("ascent direction overflowed")
    return g


def _objective_or_none(
    v: np.ndarray, ds: LabeledDataset, part: ClassPartition
) -> float | None:
    num, den = _dispersions(ds.X.T @ v, part)
    if den == 0.0:
        return None
    return num / den


def _run_restart(
    ds: LabeledDataset,
    part: ClassPartition,
    cfg: SolverConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray | None, RestartInfo]:
    v = _unit(rng.standard_normal(ds.D))
    gamma = cfg.gamma
    best_v: np.ndarray | None = None
    best_j = -np.inf
    state: tuple[float, np.ndarray] | None = None
    iterations = 0
    converged = False
    halvings = 0
    perturbations = 0

    def perturb(u: np.ndarray) -> np.ndarray:
        dv = rng.standard_normal(ds.D)
        dv *= cfg.perturb_scale / np.linalg.norm(dv)
        return _unit(u + dv)

    while iterations < cfg.itmax:
        iterations += 1
        if state is None:
            ss = sign_state(v, ds, part)
            p, b = accumulators(v, ds, part, ss)
            vp = float(v @ p)
            vb = float(v @ b)
            if vb == 0.0:
                v = perturb(v)
                perturbations += 1
                continue
            j_cur = vp / vb
            if j_cur > best_j:
                best_j, best_v = j_cur, v
            try:
                g = ascent_direction(v, p, b)
            except ZeroDenominator:
                v = perturb(v)
                perturbations += 1
                continue
            state = (j_cur, g)
        j_cur, g = state
        v_new = _unit(v + gamma * g)
        j_new = _objective_or_none(v_new, ds, part)
        if j_new is None or j_new < j_cur:
            # one half-rate retry; if that fails too, back the rate off for
            # the rest of this restart and try again from the same iterate
            halvings += 1
            v_half = _unit(v + 0.5 * gamma * g)
            j_half = _objective_or_none(v_half, ds, part)
            if j_half is None or j_half < j_cur:
                gamma *= 0.5
                if gamma <= 1e-14 * cfg.gamma:
                    converged = True
                    break
                continue
            v_new, j_new = v_half, j_half
        if j_new > best_j:
            best_j, best_v = j_new, v_new
        delta = float(np.linalg.norm(v_new - v))
        v = v_new
        state = None
        if delta <= cfg.epsilon:
            converged = True
            break

    degenerate = best_v is None
    return best_v, RestartInfo(
        objective=float(best_j) if not degenerate else float("nan"),
        iterations=iterations,
        converged=converged,
        degenerate=degenerate,
        halvings=halvings,
        perturbations=perturbations,
    )


def solve_direction(
    ds: LabeledDataset,
    part: ClassPartition | None = None,
    cfg: SolverConfig | None = None,
) -> tuple[np.ndarray, DirectionInfo]:
    """Best single direction over cfg.restarts seeded initializations.

    Each restart runs the sign/accumulator/ascent loop until the iterate
    moves less than epsilon, the rate backoff bottoms out, or itmax; the
    restart's answer is its best-objective iterate. Raises
    ZeroWithinDispersion if every restart stays degenerate.
    """
    if part is None:
        part = ClassPartition.from_dataset(ds)
    if cfg is None:
        cfg = SolverConfig()
    results = []
    for r in range(cfg.restarts):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([cfg.seed ^ r]))
        )
        results.append(_run_restart(ds, part, cfg, rng))
    usable = [(i, v, info) for i, (v, info) in enumerate(results) if v is not None]
    if not usable:
        raise ZeroWithinDispersion(
            "every restart hit zero within-class dispersion; the data is "
            "degenerate in this subspace"
        )
    best_i, best_v, best_info = max(usable, key=lambda t: (t[2].objective, -t[0]))
    return best_v, DirectionInfo(
        objective=best_info.objective,
        iterations=best_info.iterations,
        converged=best_info.converged,
        restart=best_i,
        restarts=tuple(info for _, info in results),
    )


def _direction_seed(seed: int, j: int) -> int:
    return (seed + j * _DIRECTION_SEED_STRIDE) % (1 << 64)


def fit_l1sc(
    ds: LabeledDataset, cfg: SolverConfig | None = None, d: int = 1
) -> Projection:
    """Fit a d-column projection by repeated solve-and-deflate.

    Direction j is solved on data deflated by the accepted directions
    1..j-1, orthogonalized against them, renormalized, and then removed
    from the working data (X <- X - v v^T X). The in-span component of a
    solved direction is objective-neutral on deflated data, so the
    orthogonalization only resolves that tie; the result is an orthonormal
    projection whose residual data has no component along any accepted
    column.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not 1 <= d < ds.D:
        raise ValueError(f"d must satisfy 1 <= d < {ds.D}, got {d}")
    part = ClassPartition.from_dataset(ds)
    X = ds.X.copy()
    scale = float(np.abs(X).max())
    vectors: list[np.ndarray] = []
    columns: list[ColumnInfo] = []
    for j in range(d):
        sub = LabeledDataset(X.copy(), ds.labels, ds.C, ds.original_labels)
        try:
            v, info = solve_direction(
                sub, part, replace(cfg, seed=_direction_seed(cfg.seed, j))
            )
        except ZeroWithinDispersion:
            if j == 0:
                raise
            raise DimensionExhausted(j, d) from None
        if vectors:
            for u in vectors:
                v = v - (u @ v) * u
            nv = float(np.linalg.norm(v))
            if nv < 1e-8:
                raise DimensionExhausted(j, d)
            v = v / nv
        X = X - np.outer(v, v @ X)
        residual = float(np.abs(v @ X).max()) if X.size else 0.0
        if scale > 0 and residual > 1e-10 * scale:
            raise FloatingPointError(
                f"deflation left residual {residual:.3e} along direction {j}"
            )
        vectors.append(v)
        columns.append(
            ColumnInfo(
                objective=info.objective,
                iterations=info.iterations,
                converged=info.converged,
                restart=info.restart,
            )
        )
    meta = dict(cfg.echo())
    meta["d"] = d
    return Projection(
        np.column_stack(vectors), tuple(columns), method="l1sc", meta=meta
    )
