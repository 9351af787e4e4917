"""Acceptance gate: one test per numbered criterion, one line each under -v.

Criterion 11 needs real hyperspectral datasets; point L1SCUT_DATA_DIR at a
directory holding salinas.{rawf64,csv} and pavia_center.{rawf64,csv} to run
it, otherwise it is skipped and criteria 1-10 stand alone.
"""

import itertools
import json
import os
import time

import numpy as np
import pytest

from helpers import (
    accumulators_bruteforce,
    angle_between,
    dispersions_bruteforce,
    grid_best_2d,
    make_outlier_benchmark,
    metrics_bruteforce,
    random_unit,
    scatter_bruteforce,
    two_blob_dataset,
)
from l1scut.baselines import fit_lda, lda_scatters, sym_geig
from l1scut.data import LabeledDataset, random_blobs
from l1scut.errors import ZeroWithinDispersion
from l1scut.evaluate import metrics, run_protocol
from l1scut.l1sc import (
    SolverConfig,
    accumulators,
    ascent_direction,
    fit_l1sc,
    l1_objective,
    solve_direction,
)
from l1scut.scatter import scatter_pair


def test_criterion_01_solver_matches_2d_angle_grid_oracle():
    # Twenty 2-D datasets, 2-3 classes, 30-100 samples per class: the
    # restarted solver must land within 1e-3 relative of the best ratio
    # over a 3600-point direction grid, in under 10 seconds total.
    start = time.monotonic()
    worst = 0.0
    for s in range(20):
        classes = 2 + s % 2
        per_class = 30 + (s * 37) % 71
        separation = 1.5 + 0.5 * (s % 4)
        ds = random_blobs(classes, 2, per_class=per_class,
                          separation=separation, seed=900 + s)
        best, _ = grid_best_2d(ds)
        _, info = solve_direction(ds)
        rel = max(0.0, (best - info.objective) / best)
        worst = max(worst, rel)
        assert rel <= 1e-3
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"grid-oracle sweep took {elapsed:.1f}s"


def test_criterion_02_accumulators_reproduce_dispersion_sums():
    # v.p and v.b must equal the literal pairwise absolute-dispersion
    # sums within 1e-10 relative on 100 seeded (v, dataset) cases.
    for s in range(100):
        rng = np.random.default_rng(1000 + s)
        dim = 2 + s % 5
        ds = random_blobs(2 + s % 3, dim, per_class=5 + s % 11,
                          separation=2.0, seed=1000 + s)
        v = random_unit(rng, dim)
        p, b = accumulators(v, ds)
        num, den = dispersions_bruteforce(v, ds)
        assert abs(float(v @ p) - num) <= 1e-10 * num
        assert abs(float(v @ b) - den) <= 1e-10 * den


def test_criterion_03_ascent_direction_matches_finite_differences():
    # At 100 sign-interior points the fixed-sign ascent direction equals
    # the central-difference gradient of log J within 1e-4 relative.
    rng = np.random.default_rng(6)
    h = 1e-6
    checked = 0
    trial = 0
    while checked < 100 and trial < 1000:
        trial += 1
        dim = 3 + trial % 4
        ds = two_blob_dataset(seed=1100 + trial, n_classes=2 + trial % 2,
                              dim=dim, per_class=5 + trial % 3)
        v = random_unit(rng, dim)
        z = ds.X.T @ v
        gaps = np.abs(z[:, None] - z[None, :])
        if gaps[gaps > 0].min() < 1e-3:
            continue  # too close to a sign boundary for a clean probe
        p, b = accumulators(v, ds)
        g = ascent_direction(v, p, b)
        fd = np.empty(dim)
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            hi = np.log(l1_objective(v + e, ds, require_unit=False))
            lo = np.log(l1_objective(v - e, ds, require_unit=False))
            fd[i] = (hi - lo) / (2.0 * h)
        assert np.linalg.norm(fd - g) <= 1e-4 * max(1.0, np.linalg.norm(g))
        checked += 1
    assert checked == 100, f"only {checked} sign-interior points found"


def test_criterion_04_scatter_matrices_match_double_loop_oracle():
    # The rearranged scatter computation equals the literal double loop
    # entrywise within 1e-10 relative, 50 instances with n <= 30, D <= 6.
    for s in range(50):
        ds = random_blobs(2 + s % 2, 2 + s % 5, per_class=3 + s % 8,
                          separation=2.5, seed=1200 + s)
        assert ds.n <= 30 and ds.D <= 6
        pair = scatter_pair(ds)
        s_b, s_w = scatter_bruteforce(ds)
        for got, want in ((pair.s_b, s_b), (pair.s_w, s_w)):
            tol = 1e-10 * max(np.abs(want).max(), 1e-300)
            assert np.abs(got - want).max() <= tol


def test_criterion_05_deflation_annihilates_accepted_directions():
    # Replaying X <- X - v v^T X with the fitted columns: after step j the
    # residual along v_j is <= 1e-10 * max|X|, and V is orthonormal to 1e-8.
    for s in range(5):
        d = 3
        ds = two_blob_dataset(seed=940 + s, n_classes=2 + s % 2,
                              dim=4 + s % 3, per_class=8)
        proj = fit_l1sc(ds, SolverConfig(seed=s), d=d)
        X = ds.X.copy()
        scale = np.abs(ds.X).max()
        for j in range(d):
            X = X - np.outer(proj.V[:, j], proj.V[:, j] @ X)
            assert np.abs(proj.V[:, j] @ X).max() <= 1e-10 * scale
        assert np.abs(proj.V.T @ proj.V - np.eye(d)).max() <= 1e-8


def test_criterion_06_objective_never_drops_below_start_at_small_rate():
    # 100 seeded runs at rate 1e-3: the reported objective dominates J at
    # every restart's initial iterate.
    cfg = SolverConfig(gamma=1e-3, itmax=200, seed=0)
    for s in range(100):
        ds = two_blob_dataset(seed=500 + s, n_classes=2 + s % 2,
                              dim=2 + s % 4, per_class=6 + s % 5)
        _, info = solve_direction(ds, cfg=cfg)
        for r in range(cfg.restarts):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([cfg.seed ^ r]))
            )
            v0 = rng.standard_normal(ds.D)
            v0 /= np.linalg.norm(v0)
            try:
                j0 = l1_objective(v0, ds)
            except ZeroWithinDispersion:
                continue
            assert info.objective >= j0 - 1e-12 * abs(j0)


def test_criterion_07_l1_beats_l2_on_outliers_and_degrades_less():
    # Outlier benchmark (D=10, 2 classes, 100/class, 10% outliers at 20x
    # scale, d=2, 1-NN, 20 seeds): mean accuracy of the L1 solver >= the
    # L2 baseline, and its drop under 10% added feature noise is <= the
    # L2 baseline's drop. Runtime under 60 seconds.
    start = time.monotonic()
    oa = {("l1sc", 0): [], ("l1sc", 10): [], ("l2sc", 0): [], ("l2sc", 10): []}
    for s in range(20):
        ds = make_outlier_benchmark(seed=2000 + s)
        for method in ("l1sc", "l2sc"):
            for percent in (0, 10):
                report = run_protocol(
                    ds, method, d=2, train_per_class=30, repetitions=1,
                    noise_percent=percent, seed=s, classifier="knn", knn_k=1,
                )
                oa[(method, percent)].append(report.oa[0])
    clean_l1 = float(np.mean(oa[("l1sc", 0)]))
    clean_l2 = float(np.mean(oa[("l2sc", 0)]))
    drop_l1 = clean_l1 - float(np.mean(oa[("l1sc", 10)]))
    drop_l2 = clean_l2 - float(np.mean(oa[("l2sc", 10)]))
    elapsed = time.monotonic() - start
    assert clean_l1 >= clean_l2, f"accuracy {clean_l1:.4f} < {clean_l2:.4f}"
    assert drop_l1 <= drop_l2, f"noise drop {drop_l1:.4f} > {drop_l2:.4f}"
    assert elapsed < 60.0, f"outlier benchmark took {elapsed:.1f}s"


def test_criterion_08_lda_first_direction_matches_fisher_closed_form():
    # Two classes with a shared covariance, 2000 samples each: the fitted
    # first direction is within 1e-3 rad of solve(S_w, mu1 - mu2).
    rng = np.random.default_rng(20)
    dim, n = 4, 2000
    R = rng.standard_normal((dim, dim))
    F = np.linalg.cholesky(R @ R.T + dim * np.eye(dim))
    mu2 = np.array([3.0, 1.0, 0.0, -1.0])
    X1 = F @ rng.standard_normal((dim, n))
    X2 = mu2[:, None] + F @ rng.standard_normal((dim, n))
    ds = LabeledDataset(np.concatenate([X1, X2], axis=1),
                        np.repeat([1, 2], n), C=2)
    proj = fit_lda(ds, d=1)
    _, s_w = lda_scatters(ds)
    m1 = ds.X[:, ds.labels == 1].mean(axis=1)
    m2 = ds.X[:, ds.labels == 2].mean(axis=1)
    fisher = np.linalg.solve(s_w, m1 - m2)
    assert angle_between(proj.V[:, 0], fisher) < 1e-3


def test_criterion_09_eigensolver_residuals_and_b_orthonormality():
    # 50 seeded symmetric/positive-definite pencils up to D=20: residuals
    # within 1e-8 * |A| and eigenvectors B-orthonormal within 1e-8.
    for s in range(50):
        rng = np.random.default_rng(1500 + s)
        dim = 1 + s % 20
        A = rng.standard_normal((dim, dim))
        A = (A + A.T) / 2.0
        R = rng.standard_normal((dim, dim))
        B = R @ R.T + dim * np.eye(dim)
        res = sym_geig(A, B)
        scale = max(np.linalg.norm(A), 1e-300)
        W, lam = res.eigenvectors, res.eigenvalues
        for i in range(dim):
            r = A @ W[:, i] - lam[i] * (B @ W[:, i])
            assert np.linalg.norm(r) <= 1e-8 * scale
        assert np.abs(W.T @ B @ W - np.eye(dim)).max() <= 1e-8


def test_criterion_10_metrics_match_confusion_enumeration_exhaustively():
    # Every 2-class label-vector pair up to length 8, plus a hand-worked
    # 4-sample case, must match the confusion-matrix oracle exactly.
    m = metrics([1, 2, 1, 2], [1, 1, 2, 2])
    assert (m.oa, m.macro_f1, m.per_class_f1) == (0.5, 0.5, (0.5, 0.5))
    for length in range(1, 9):
        for truth in itertools.product((1, 2), repeat=length):
            for predicted in itertools.product((1, 2), repeat=length):
                got = metrics(predicted, truth, n_classes=2)
                oa, macro, per_class = metrics_bruteforce(predicted, truth, 2)
                assert got.oa == oa
                assert got.macro_f1 == macro
                assert got.per_class_f1 == per_class


def _find_converted_datasets():
    root = os.environ.get("L1SCUT_DATA_DIR", "")
    if not root:
        return {}
    found = {}
    for stem, oa_lo, oa_hi in (("salinas", 0.81, 0.87),
                               ("pavia_center", 0.912, 0.972)):
        for ext in ("rawf64", "csv"):
            path = os.path.join(root, f"{stem}.{ext}")
            if os.path.exists(path):
                found[stem] = (path, oa_lo, oa_hi)
                break
    return found


def test_criterion_11_table1_neighborhood_on_converted_datasets(tmp_path):
    # Conditional: with converted hyperspectral datasets available, the
    # table1 pipeline (10 samples/class, 5 reps, linear SVM, dims 5..50)
    # must put the L1 solver's best mean accuracy inside the target
    # window and at no more dimensions than the L2 baseline needs.
    found = _find_converted_datasets()
    if not found:
        pytest.skip("set L1SCUT_DATA_DIR to run the dataset-level check")
    from l1scut.cli import main

    for stem, (path, oa_lo, oa_hi) in sorted(found.items()):
        out = tmp_path / stem
        code = main(["table1", "--data", path, "--methods", "l1sc,l2sc",
                     "--out", str(out), "--seed", "0"])
        assert code == 0
        payload = json.loads((out / "table1.json").read_text())
        best = {row["method"]: row for row in payload["best"]}
        oa = best["l1sc"]["mean_oa"]
        assert oa_lo <= oa <= oa_hi, f"{stem}: mean OA {oa:.4f}"
        assert best["l1sc"]["dims"] <= best["l2sc"]["dims"], (
            f"{stem}: dims {best['l1sc']['dims']} > {best['l2sc']['dims']}"
        )
