"""Command-line front end.

Subcommands: fit, transform, eval, sweep-samples, sweep-noise, table1,
synth, noise. Options come from flags, optionally seeded from a JSON config
file given as --config (explicit flags win). Every emitted CSV starts with
comment lines carrying the master seed and a sha256 hash of the resolved
configuration; rerunning a command with the same configuration reproduces
the numeric payload exactly.

Exit status: 0 success, 2 usage or configuration error, 1 runtime or data
error (the error code is printed to stderr).
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .baselines import fit_l2sc, fit_lda
from .data import (
    LabeledDataset,
    SplitSpec,
    inject_noise,
    load_dataset,
    random_blobs,
    save_dataset,
    stratified_split,
)
from .errors import L1ScutError
from .evaluate import (
    CSV_FIELDS,
    METHODS,
    knn_classify,
    metrics,
    report_to_json,
    report_to_rows,
    run_protocol,
    train_linear_svm,
)
from .l1sc import SolverConfig, fit_l1sc
from .projection import load_projection, save_projection, transform

DEFAULT_DIMS = tuple(range(5, 55, 5))
DEFAULT_NOISE_GRID = (2.0, 4.0, 6.0, 8.0, 10.0)
DEFAULT_SIZES = (10, 20, 30, 40, 50)


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment description; round-trips losslessly via JSON."""

    data: str
    format: str = "csv"
    method: str = "l1sc"
    d: int = 10
    train_per_class: int = 10
    repetitions: int = 5
    noise_percent: float = 0.0
    classifier: str = "svm"
    knn_k: int = 1
    svm_lambda: float = 1e-3
    svm_epochs: int = 100
    standardize: bool = True
    gamma: float = SolverConfig.gamma
    epsilon: float = SolverConfig.epsilon
    itmax: int = SolverConfig.itmax
    perturb_scale: float = SolverConfig.perturb_scale
    restarts: int = SolverConfig.restarts
    out: str = "."
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**payload)

    def save(self, path: str) -> None:
        with open(path, "w", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def solver(self) -> SolverConfig:
        return SolverConfig(
            gamma=self.gamma,
            epsilon=self.epsilon,
            itmax=self.itmax,
            perturb_scale=self.perturb_scale,
            restarts=self.restarts,
            seed=self.seed,
        )


def config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _load_input(spec: str, fmt: str) -> LabeledDataset:
    """Dataset from a file path or an inline 'synth:key=value,...' spec."""
    if not spec.startswith("synth:"):
        return load_dataset(spec, fmt)
    params = {
        "classes": 2,
        "dim": 10,
        "per_class": 100,
        "separation": 4.0,
        "components": 1,
        "outlier_fraction": 0.0,
        "outlier_scale": 1.0,
        "seed": 0,
    }
    body = spec[len("synth:"):]
    for item in filter(None, body.split(",")):
        if "=" not in item:
            raise ValueError(f"bad synth spec item {item!r}; expected key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in params:
            raise ValueError(f"unknown synth spec key {key!r}")
        params[key] = type(params[key])(value)
    return random_blobs(
        params["classes"],
        params["dim"],
        params["per_class"],
        separation=params["separation"],
        components=params["components"],
        outlier_fraction=params["outlier_fraction"],
        outlier_scale=params["outlier_scale"],
        seed=params["seed"],
    )


def _write_csv(path: str, command: str, cfg_payload: dict, seed: int,
               fields: tuple, rows: list) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# l1scut {command}\n")
        fh.write(f"# seed={seed}\n")
        fh.write(f"# config_sha256={config_hash(cfg_payload)}\n")
        writer = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _int_list(text: str) -> list:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return [int(x) for x in items]


def _float_list(text: str) -> list:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return [float(x) for x in items]


def _method_list(text: str) -> list:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    if not methods:
        raise ValueError("empty method list")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    return methods


def _experiment_config(args, method: str | None = None,
                       noise: float | None = None) -> ExperimentConfig:
    return ExperimentConfig(
        data=args.data,
        format=args.format,
        method=method if method is not None else getattr(args, "method", "l1sc"),
        d=args.d,
        train_per_class=args.train_per_class,
        repetitions=args.reps,
        noise_percent=noise if noise is not None else getattr(args, "noise", 0.0),
        classifier=args.classifier,
        knn_k=args.knn_k,
        svm_lambda=args.svm_lambda,
        svm_epochs=args.svm_epochs,
        standardize=not args.no_standardize,
        gamma=args.gamma,
        epsilon=args.epsilon,
        itmax=args.itmax,
        perturb_scale=args.perturb_scale,
        restarts=args.restarts,
        out=args.out,
        seed=args.seed,
    )


def _run_cell(ds: LabeledDataset, cfg: ExperimentConfig):
    return run_protocol(
        ds,
        cfg.method,
        cfg.d,
        cfg.train_per_class,
        repetitions=cfg.repetitions,
        noise_percent=cfg.noise_percent,
        seed=cfg.seed,
        classifier=cfg.classifier,
        svm_lambda=cfg.svm_lambda,
        svm_epochs=cfg.svm_epochs,
        knn_k=cfg.knn_k,
        standardize=cfg.standardize,
        solver=cfg.solver(),
    )


# ---------------------------------------------------------------------------
# Subcommands


def cmd_synth(args) -> int:
    ds = random_blobs(
        args.classes,
        args.dim,
        args.per_class,
        separation=args.separation,
        components=args.components,
        outlier_fraction=args.outlier_fraction,
        outlier_scale=args.outlier_scale,
        seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"dataset.{args.format}")
    save_dataset(ds, path, args.format)
    print(path)
    return 0


def cmd_noise(args) -> int:
    ds = _load_input(args.data, args.format)
    noisy = inject_noise(ds, args.percent, args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"noisy.{args.format}")
    save_dataset(noisy, path, args.format)
    print(path)
    return 0


def _fit_any(ds: LabeledDataset, method: str, d: int, solver: SolverConfig):
    if method == "l1sc":
        return fit_l1sc(ds, solver, d)
    if method == "l2sc":
        return fit_l2sc(ds, d)
    if method == "lda":
        return fit_lda(ds, d)
    raise ValueError(f"method {method!r} does not produce a projection")


def cmd_fit(args) -> int:
    ds = _load_input(args.data, args.format)
    cfg = _experiment_config(args)
    proj = _fit_any(ds, cfg.method, cfg.d, cfg.solver())
    os.makedirs(args.out, exist_ok=True)
    proj_path = os.path.join(args.out, "projection.bin")
    save_projection(proj, proj_path)
    diag = {
        "command": "fit",
        "config": cfg.to_dict(),
        "config_sha256": config_hash(cfg.to_dict()),
        "method": proj.method,
        "D": proj.D,
        "d": proj.d,
        "columns": [
            {
                "objective": c.objective,
                "iterations": c.iterations,
                "converged": c.converged,
                "restart": c.restart,
            }
            for c in proj.columns
        ],
    }
    _write_json(os.path.join(args.out, "fit.json"), diag)
    print(proj_path)
    return 0


def cmd_transform(args) -> int:
    ds = _load_input(args.data, args.format)
    proj = load_projection(args.projection)
    out_ds = transform(proj, ds)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"transformed.{args.output_format}")
    save_dataset(out_ds, path, args.output_format)
    print(path)
    return 0


def cmd_eval(args) -> int:
    ds = _load_input(args.data, args.format)
    cfg = _experiment_config(args)
    report = _run_cell(ds, cfg)
    os.makedirs(args.out, exist_ok=True)
    payload = json.loads(report_to_json(report))
    del payload["wall_time"]
    envelope = {
        "command": "eval",
        "config": cfg.to_dict(),
        "config_sha256": config_hash(cfg.to_dict()),
        "report": payload,
    }
    _write_json(os.path.join(args.out, "eval.json"), envelope)
    _write_csv(
        os.path.join(args.out, "eval.csv"),
        "eval",
        cfg.to_dict(),
        cfg.seed,
        CSV_FIELDS,
        report_to_rows(report),
    )
    print(
        f"{report.method} d={report.d}: "
        f"mean_oa={report.mean_oa:.4f} std={report.std_oa:.4f} "
        f"macro_f1={report.mean_macro_f1:.4f}"
    )
    return 0


def _sweep(args, variable: str, values: list, command: str) -> int:
    ds = _load_input(args.data, args.format)
    methods = args.methods
    cells = []
    for method in sorted(methods):
        for value in sorted(values):
            if variable == "size":
                cfg = replace(_experiment_config(args, method=method),
                              train_per_class=int(value))
            else:
                cfg = _experiment_config(args, method=method, noise=float(value))
            cells.append((method, value, cfg))
    jobs = max(1, args.jobs)
    with ThreadPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
        futures = {
            (method, value): pool.submit(_run_cell, ds, cfg)
            for method, value, cfg in cells
        }
        results = {key: fut.result() for key, fut in futures.items()}
    rows = []
    for method, value, _ in cells:
        rep = results[(method, value)]
        rows.append(
            {
                "method": method,
                variable: value,
                "meanOA": repr(rep.mean_oa),
                "stdOA": repr(rep.std_oa),
                "macroF1": repr(rep.mean_macro_f1),
            }
        )
    master = _experiment_config(args).to_dict()
    master[f"sweep_{variable}s"] = list(values)
    master["methods"] = list(methods)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{command.replace('-', '_')}.csv")
    _write_csv(path, command, master, args.seed,
               ("method", variable, "meanOA", "stdOA", "macroF1"), rows)
    print(path)
    return 0


def cmd_sweep_samples(args) -> int:
    return _sweep(args, "size", args.sizes, "sweep-samples")


def cmd_sweep_noise(args) -> int:
    for p in args.percents:
        if p < 0:
            raise ValueError("noise percents must be non-negative")
    return _sweep(args, "noise_percent", args.percents, "sweep-noise")


def _table1_method(ds: LabeledDataset, cfg: ExperimentConfig, dims: list) -> list:
    """Grid rows for one method: the protocol scored at every dimension.

    The projection for the largest grid dimension is fit once per
    repetition and its column prefixes stand in for the smaller
    dimensions — valid because solver seeding is per column and the
    orthogonalization is prefix-stable, so a narrow fit equals a slice of
    a wide one.
    """
    dims = [d for d in dims if d < ds.D]
    if not dims:
        raise ValueError(f"no grid dimension is below the data dimension {ds.D}")
    d_max = max(dims)
    per_dim_oa = {d: [] for d in dims}
    per_dim_f1 = {d: [] for d in dims}
    for r in range(cfg.repetitions):
        words = np.random.SeedSequence([cfg.seed, r]).generate_state(3, np.uint64)
        noise_seed, solver_seed, svm_seed = (int(w) for w in words)
        working = (
            inject_noise(ds, cfg.noise_percent, noise_seed)
            if cfg.noise_percent > 0
            else ds
        )
        train, test = stratified_split(
            working,
            SplitSpec(train_per_class=cfg.train_per_class, seed=cfg.seed, repetition=r),
        )
        if cfg.method == "none":
            proj = None
        else:
            proj = _fit_any(
                train, cfg.method, d_max, replace(cfg.solver(), seed=solver_seed)
            )
        for d in dims:
            if proj is None:
                train_y, test_y = train, test
            else:
                sliced = replace(
                    proj, V=proj.V[:, :d].copy(), columns=proj.columns[:d]
                )
                train_y, test_y = transform(sliced, train), transform(sliced, test)
            if cfg.classifier == "svm":
                Xtr, Xte = train_y.X, test_y.X
                if cfg.standardize:
                    mu = Xtr.mean(axis=1, keepdims=True)
                    sd = Xtr.std(axis=1, keepdims=True)
                    sd[sd == 0.0] = 1.0
                    Xtr, Xte = (Xtr - mu) / sd, (Xte - mu) / sd
                model = train_linear_svm(
                    LabeledDataset(Xtr, train_y.labels, train_y.C),
                    cfg.svm_lambda,
                    cfg.svm_epochs,
                    svm_seed,
                )
                predicted = model.predict(Xte)
            else:
                predicted = knn_classify(train_y, test_y.X, cfg.knn_k)
            m = metrics(predicted, test_y.labels, ds.C)
            per_dim_oa[d].append(m.oa)
            per_dim_f1[d].append(m.macro_f1)
    rows = []
    for d in dims:
        oa = np.array(per_dim_oa[d])
        f1 = np.array(per_dim_f1[d])
        rows.append(
            {
                "method": cfg.method,
                "dims": d,
                "mean_oa": float(oa.mean()),
                "std_oa": float(oa.std()),
                "macro_f1": float(f1.mean()),
            }
        )
    return rows


def cmd_table1(args) -> int:
    ds = _load_input(args.data, args.format)
    grid_rows = []
    best_rows = []
    for method in sorted(args.methods):
        cfg = _experiment_config(args, method=method)
        rows = _table1_method(ds, cfg, list(args.dims))
        grid_rows.extend(rows)
        best = max(rows, key=lambda row: (row["mean_oa"], -row["dims"]))
        best_rows.append(best)
    master = _experiment_config(args).to_dict()
    master["methods"] = list(args.methods)
    master["dims_grid"] = list(args.dims)
    os.makedirs(args.out, exist_ok=True)

    def fmt(rows):
        return [
            {
                "method": row["method"],
                "dims": row["dims"],
                "meanOA": repr(row["mean_oa"]),
                "stdOA": repr(row["std_oa"]),
                "macroF1": repr(row["macro_f1"]),
            }
            for row in rows
        ]

    fields = ("method", "dims", "meanOA", "stdOA", "macroF1")
    _write_csv(os.path.join(args.out, "table1.csv"), "table1", master,
               args.seed, fields, fmt(best_rows))
    _write_csv(os.path.join(args.out, "table1_grid.csv"), "table1", master,
               args.seed, fields, fmt(grid_rows))
    _write_json(
        os.path.join(args.out, "table1.json"),
        {
            "command": "table1",
            "config": master,
            "config_sha256": config_hash(master),
            "best": best_rows,
            "grid": grid_rows,
        },
    )
    for row in best_rows:
        print(
            f"{row['method']}: dims={row['dims']} "
            f"mean_oa={row['mean_oa']:.4f} std={row['std_oa']:.4f} "
            f"macro_f1={row['macro_f1']:.4f}"
        )
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_common(sp, *, data=True) -> None:
    if data:
        sp.add_argument("--data", required=True,
                        help="dataset path or inline synth:key=value,... spec")
        sp.add_argument("--format", default="csv", choices=("csv", "rawf64"))
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--seed", type=int, default=0, help="master seed")


def _add_solver(sp) -> None:
    sp.add_argument("--gamma", type=float, default=SolverConfig.gamma)
    sp.add_argument("--epsilon", type=float, default=SolverConfig.epsilon)
    sp.add_argument("--itmax", type=int, default=SolverConfig.itmax)
    sp.add_argument("--perturb-scale", type=float, default=SolverConfig.perturb_scale)
    sp.add_argument("--restarts", type=int, default=SolverConfig.restarts)


def _add_protocol(sp) -> None:
    sp.add_argument("--train-per-class", type=int, default=10)
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--classifier", default="svm", choices=("svm", "knn"))
    sp.add_argument("--knn-k", type=int, default=1)
    sp.add_argument("--svm-lambda", type=float, default=1e-3)
    sp.add_argument("--svm-epochs", type=int, default=100)
    sp.add_argument("--no-standardize", action="store_true",
                    help="skip per-feature z-scoring before the SVM")
    _add_solver(sp)


def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1scut",
        description="L1-norm scaling cut dimensionality reduction toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic mixture dataset")
    sp.add_argument("--classes", type=int, default=2)
    sp.add_argument("--dim", type=int, default=10)
    sp.add_argument("--per-class", type=int, default=100)
    sp.add_argument("--separation", type=float, default=4.0)
    sp.add_argument("--components", type=int, default=1)
    sp.add_argument("--outlier-fraction", type=float, default=0.0)
    sp.add_argument("--outlier-scale", type=float, default=1.0)
    sp.add_argument("--format", default="csv", choices=("csv", "rawf64"))
    _add_common(sp, data=False)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("noise", help="inject per-feature Gaussian noise")
    sp.add_argument("--percent", type=float, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_noise)

    sp = sub.add_parser("fit", help="fit a projection on a whole dataset")
    sp.add_argument("--method", default="l1sc", choices=("l1sc", "l2sc", "lda"))
    sp.add_argument("--d", type=int, default=10)
    _add_common(sp)
    _add_protocol(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("transform", help="apply a saved projection")
    sp.add_argument("--projection", required=True)
    sp.add_argument("--output-format", default="csv", choices=("csv", "rawf64"))
    _add_common(sp)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("eval", help="run the split/reduce/classify protocol")
    sp.add_argument("--method", default="l1sc", choices=METHODS)
    sp.add_argument("--d", type=int, default=10)
    sp.add_argument("--noise", type=float, default=0.0)
    _add_common(sp)
    _add_protocol(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep-samples", help="accuracy vs training size")
    sp.add_argument("--sizes", type=_int_list, default=list(DEFAULT_SIZES))
    sp.add_argument("--methods", type=_method_list, default=["l1sc", "l2sc", "lda"])
    sp.add_argument("--d", type=int, default=10)
    sp.add_argument("--jobs", type=int, default=4)
    _add_common(sp)
    _add_protocol(sp)
    sp.set_defaults(func=cmd_sweep_samples)

    sp = sub.add_parser("sweep-noise", help="accuracy vs injected noise level")
    sp.add_argument("--percents", type=_float_list, default=list(DEFAULT_NOISE_GRID))
    sp.add_argument("--methods", type=_method_list, default=["l1sc", "l2sc", "lda"])
    sp.add_argument("--d", type=int, default=10)
    sp.add_argument("--jobs", type=int, default=4)
    _add_common(sp)
    _add_protocol(sp)
    sp.set_defaults(func=cmd_sweep_noise)

    sp = sub.add_parser("table1", help="best accuracy per method over a dimension grid")
    sp.add_argument("--dims", type=_int_list, default=list(DEFAULT_DIMS))
    sp.add_argument("--methods", type=_method_list, default=["l1sc", "l2sc", "lda"])
    sp.add_argument("--d", type=int, default=10, help=argparse.SUPPRESS)
    _add_common(sp)
    _add_protocol(sp)
    sp.set_defaults(func=cmd_table1)

    parser.add_argument("--config", default=None, help=argparse.SUPPRESS)
    all_dests = set()
    for action in sub.choices.values():
        action.add_argument("--config", default=None,
                            help="JSON file with option defaults (flags win)")
        known = {a.dest for a in action._actions}
        all_dests |= known
        if config:
            action.set_defaults(**{k: v for k, v in config.items() if k in known})
    parser.config_keys = frozenset(all_dests - {"help", "func", "config"})
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config = None
    if "--config" in argv:
        try:
            path = argv[argv.index("--config") + 1]
        except IndexError:
            print("error: --config requires a path", file=sys.stderr)
            return 2
        try:
            with open(path) as fh:
                config = json.load(fh)
            if not isinstance(config, dict):
                raise ValueError("config file must hold a JSON object")
        except (OSError, ValueError) as exc:
            print(f"error: bad config file: {exc}", file=sys.stderr)
            return 2
    parser = build_parser(config)
    if config:
        unknown = set(config) - parser.config_keys
        if unknown:
            print(f"error: unknown config keys: {sorted(unknown)}", file=sys.stderr)
            return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except L1ScutError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
