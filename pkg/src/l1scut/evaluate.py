"""Classification back-end and the measurement protocol.

The protocol, per repetition: derive repetition seeds, optionally inject
noise into the full dataset, draw a stratified train/test split, fit the
dimensionality reduction on the training split only, project both splits,
train the classifier on the projected training data, and score the
projected test data. Overall accuracy and macro-F1 are aggregated over
repetitions as mean and population standard deviation.

Classifiers: a one-vs-rest linear SVM trained by deterministic seeded
stochastic subgradient descent on the regularized hinge loss, and a k-NN
voter with fully specified tie rules. Feature standardization (per-feature
z-score using training statistics) is applied before the SVM only, never
before the dimensionality reduction; this and the noise-before-split choice
are echoed in every report.
"""

import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .baselines import fit_l2sc, fit_lda
from .data import LabeledDataset, SplitSpec, inject_noise, stratified_split
from .l1sc import SolverConfig, fit_l1sc
from .projection import Projection, transform

METHODS = ("l1sc", "l2sc", "lda", "none")
CLASSIFIERS = ("svm", "knn")


@dataclass(frozen=True)
class SvmModel:
    """One-vs-rest linear classifiers: row c scores class c+1."""

    weights: np.ndarray  # (C, d)
    biases: np.ndarray  # (C,)

    def decision(self, X: np.ndarray) -> np.ndarray:
        return self.weights @ X + self.biases[:, None]

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax over classes; ties go to the smaller class index
        return np.argmax(self.decision(X), axis=0).astype(np.int64) + 1


def train_linear_svm(
    train: LabeledDataset,
    lam: float = 1e-3,
    epochs: int = 100,
    seed: int = 0,
) -> SvmModel:
    """Hinge-loss subgradient descent, one binary machine per class.

    Step t uses learning rate 1/(lam * t). The per-epoch sample order is a
    seeded permutation drawn once and shared by all classes, so retraining
    with the same seed is bitwise reproducible. The bias is not regularized.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
    orders = [rng.permutation(train.n) for _ in range(epochs)]
    X = train.X
    weights = np.zeros((train.C, train.D))
    biases = np.zeros(train.C)
    for c in range(train.C):
        y = np.where(train.labels == c + 1, 1.0, -1.0)
        w = np.zeros(train.D)
        bias = 0.0
        t = 0
        for order in orders:
            for i in order:
                t += 1
                eta = 1.0 / (lam * t)
                x = X[:, i]
                if y[i] * (w @ x + bias) < 1.0:
                    w = (1.0 - eta * lam) * w + eta * y[i] * x
                    bias += eta * y[i]
                else:
                    w = (1.0 - eta * lam) * w
        weights[c] = w
        biases[c] = bias
    return SvmModel(weights=weights, biases=biases)


def knn_classify(
    train: LabeledDataset, test_X: np.ndarray, k: int = 1
) -> np.ndarray:
    """Euclidean k-NN vote over the training set.

    Deterministic tie handling: neighbor lists use a stable sort of squared
    distances, so equal distances favor the smaller training index; vote
    ties favor the smaller label.
    """
    if not 1 <= k <= train.n:
        raise ValueError(f"k must satisfy 1 <= k <= {train.n}, got {k}")
    test_X = np.asarray(test_X, dtype=np.float64)
    if test_X.ndim != 2 or test_X.shape[0] != train.D:
        raise ValueError("test_X must be a (D, m) matrix matching the train dimension")
    m = test_X.shape[1]
    out = np.empty(m, dtype=np.int64)
    chunk = max(1, int(2_000_000 // max(train.n, 1)))
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        diff = test_X[:, lo:hi].T[:, None, :] - train.X.T[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        near = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = train.labels[near]
        for row in range(hi - lo):
            counts = np.bincount(votes[row], minlength=train.C + 1)
            out[lo + row] = int(np.argmax(counts))
    return out


@dataclass(frozen=True)
class Metrics:
    oa: float
    macro_f1: float
    per_class_f1: tuple


def metrics(predicted: np.ndarray, truth: np.ndarray, n_classes: int | None = None) -> Metrics:
    """Overall accuracy and one-vs-rest F1 from the confusion counts.

    Per class: precision and recall are 0 when their denominators are 0,
    and F1 is 0 when precision + recall is 0; macro-F1 is the unweighted
    class mean.
    """
    predicted = np.asarray(predicted, dtype=np.int64).reshape(-1)
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have equal length")
    if truth.size == 0:
        raise ValueError("empty label vectors")
    if n_classes is None:
        n_classes = int(max(predicted.max(), truth.max()))
    for name, arr in (("predicted", predicted), ("truth", truth)):
        if arr.min() < 1 or arr.max() > n_classes:
            raise ValueError(f"{name} labels outside 1..{n_classes}")
    oa = float(np.mean(predicted == truth))
    f1 = []
    for c in range(1, n_classes + 1):
        tp = int(np.sum((predicted == c) & (truth == c)))
        fp = int(np.sum((predicted == c) & (truth != c)))
        fn = int(np.sum((predicted != c) & (truth == c)))
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1.append(
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
    return Metrics(oa=oa, macro_f1=float(np.mean(f1)), per_class_f1=tuple(f1))


@dataclass(frozen=True)
class EvalReport:
    """Protocol outcome: per-repetition scores plus aggregates."""

    method: str
    d: int
    train_per_class: int
    noise_percent: float
    repetitions: int
    oa: tuple
    macro_f1: tuple
    per_class_f1: tuple  # one tuple per repetition
    mean_oa: float
    std_oa: float
    mean_macro_f1: float
    std_macro_f1: float
    mean_per_class_f1: tuple
    seed: int
    wall_time: float
    config: dict


def _fit_method(
    method: str, train: LabeledDataset, d: int, solver: SolverConfig
) -> Projection | None:
    if method == "l1sc":
        return fit_l1sc(train, solver, d)
    if method == "l2sc":
        return fit_l2sc(train, d)
    if method == "lda":
        return fit_lda(train, d)
    if method == "none":
        return None
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _standardize(train_X: np.ndarray, other_X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = train_X.mean(axis=1, keepdims=True)
    sd = train_X.std(axis=1, keepdims=True)
    sd[sd == 0.0] = 1.0
    return (train_X - mu) / sd, (other_X - mu) / sd


def run_protocol(
    ds: LabeledDataset,
    method: str,
    d: int,
    train_per_class: int,
    repetitions: int = 5,
    noise_percent: float = 0.0,
    seed: int = 0,
    classifier: str = "svm",
    svm_lambda: float = 1e-3,
    svm_epochs: int = 100,
    knn_k: int = 1,
    standardize: bool = True,
    solver: SolverConfig | None = None,
    capture_projections: list | None = None,
) -> EvalReport:
    """Run the repeated split / reduce / classify protocol on one dataset.

    Noise (a per-feature percentage of feature variance) is injected into
    the full dataset before splitting, freshly per repetition. Dimensionality
    reduction sees raw (never standardized) features and is fit on the
    training split only. With method "none" the classifier runs on the raw
    feature space and d is ignored. capture_projections, when given a list,
    receives the fitted Projection of each repetition (diagnostics hook).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if classifier not in CLASSIFIERS:
        raise ValueError(
            f"unknown classifier {classifier!r}; expected one of {CLASSIFIERS}"
        )
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if noise_percent < 0:
        raise ValueError("noise_percent must be non-negative")
    if method != "none" and not 1 <= d < ds.D:
        raise ValueError(f"d must satisfy 1 <= d < {ds.D}, got {d}")
    if solver is None:
        solver = SolverConfig()
    t0 = time.perf_counter()
    oa_list = []
    macro_list = []
    per_class = []
    for r in range(repetitions):
        words = np.random.SeedSequence([seed, r]).generate_state(3, np.uint64)
        noise_seed, solver_seed, svm_seed = (int(w) for w in words)
        working = inject_noise(ds, noise_percent, noise_seed) if noise_percent > 0 else ds
        train, test = stratified_split(
            working, SplitSpec(train_per_class=train_per_class, seed=seed, repetition=r)
        )
        proj = _fit_method(method, train, d, replace(solver, seed=solver_seed))
        if capture_projections is not None:
            capture_projections.append(proj)
        if proj is None:
            train_y, test_y = train, test
        else:
            train_y, test_y = transform(proj, train), transform(proj, test)
        if classifier == "svm":
            Xtr, Xte = train_y.X, test_y.X
            if standardize:
                Xtr, Xte = _standardize(Xtr, Xte)
            svm_train = LabeledDataset(Xtr, train_y.labels, train_y.C)
            model = train_linear_svm(svm_train, svm_lambda, svm_epochs, svm_seed)
            predicted = model.predict(Xte)
        else:
            predicted = knn_classify(train_y, test_y.X, knn_k)
        m = metrics(predicted, test_y.labels, ds.C)
        oa_list.append(m.oa)
        macro_list.append(m.macro_f1)
        per_class.append(m.per_class_f1)
    oa_arr = np.array(oa_list)
    macro_arr = np.array(macro_list)
    config = {
        "classifier": classifier,
        "svm_lambda": svm_lambda,
        "svm_epochs": svm_epochs,
        "knn_k": knn_k,
        "standardize": standardize,
        "noise_injection": "full dataset, before split, per repetition",
        "preprocessing": "none",
        "solver": solver.echo() if method == "l1sc" else None,
    }
    return EvalReport(
        method=method,
        d=d if method != "none" else ds.D,
        train_per_class=train_per_class,
        noise_percent=noise_percent,
        repetitions=repetitions,
        oa=tuple(oa_list),
        macro_f1=tuple(macro_list),
        per_class_f1=tuple(per_class),
        mean_oa=float(oa_arr.mean()),
        std_oa=float(oa_arr.std()),
        mean_macro_f1=float(macro_arr.mean()),
        std_macro_f1=float(macro_arr.std()),
        mean_per_class_f1=tuple(np.array(per_class).mean(axis=0).tolist()),
        seed=seed,
        wall_time=time.perf_counter() - t0,
        config=config,
    )


def report_to_json(report: EvalReport) -> str:
    payload = {
        "method": report.method,
        "d": report.d,
        "train_per_class": report.train_per_class,
        "noise_percent": report.noise_percent,
        "repetitions": report.repetitions,
        "oa": list(report.oa),
        "macro_f1": list(report.macro_f1),
        "per_class_f1": [list(t) for t in report.per_class_f1],
        "mean_oa": report.mean_oa,
        "std_oa": report.std_oa,
        "mean_macro_f1": report.mean_macro_f1,
        "std_macro_f1": report.std_macro_f1,
        "mean_per_class_f1": list(report.mean_per_class_f1),
        "seed": report.seed,
        "wall_time": report.wall_time,
        "config": report.config,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


CSV_FIELDS = (
    "method",
    "d",
    "train_per_class",
    "noise_percent",
    "repetition",
    "oa",
    "oa_std",
    "macro_f1",
    "macro_f1_std",
    "per_class_f1",
)


def report_to_rows(report: EvalReport) -> list[dict]:
    """Flat rows: one per repetition plus one 'mean' aggregate row."""
    rows = []
    for r in range(report.repetitions):
        rows.append(
            {
                "method": report.method,
                "d": report.d,
                "train_per_class": report.train_per_class,
                "noise_percent": report.noise_percent,
                "repetition": r,
                "oa": repr(report.oa[r]),
                "oa_std": "",
                "macro_f1": repr(report.macro_f1[r]),
                "macro_f1_std": "",
                "per_class_f1": " ".join(repr(x) for x in report.per_class_f1[r]),
            }
        )
    rows.append(
        {
            "method": report.method,
            "d": report.d,
            "train_per_class": report.train_per_class,
            "noise_percent": report.noise_percent,
            "repetition": "mean",
            "oa": repr(report.mean_oa),
            "oa_std": repr(report.std_oa),
            "macro_f1": repr(report.mean_macro_f1),
            "macro_f1_std": repr(report.std_macro_f1),
            "per_class_f1": " ".join(repr(x) for x in report.mean_per_class_f1),
        }
    )
    return rows
