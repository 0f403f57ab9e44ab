"""Acceptance suite: eight run-level properties checked over fixed seed suites.

Each criterion is one test that prints a single PASS line on success; on
failure the assertion message carries the criterion number and every seed
that violated it. The 1D and 2D experiment suites run once per session and
are shared by all criteria that need them.
"""

import filecmp
import time

import numpy as np
import pytest

from smobjects.explore import events_to_log, replay
from smobjects.harness import run_sim1, run_sim2, write_artifacts
from smobjects.spectral import (
    cluster_similarity,
    eigendecompose_symmetric,
    estimate_k_eigengap,
    normalized_laplacian,
)

SEEDS = tuple(range(1, 11))
SIM1_TIME_LIMIT = 60.0
SIM2_TIME_LIMIT = 300.0


def split_by_truth(result):
    labels = result.truth
    obj = [i for i, lab in enumerate(labels) if lab.startswith("object")]
    bg = [i for i, lab in enumerate(labels) if lab == "background"]
    return obj, bg


def background_offdiag(result):
    _, bg = split_by_truth(result)
    block = result.experiment.c[np.ix_(bg, bg)]
    return block[~np.eye(len(bg), dtype=bool)]


@pytest.fixture(scope="session")
def sim1_runs():
    runs = {}
    for seed in SEEDS:
        start = time.perf_counter()
        result = run_sim1(seed=seed)
        runs[seed] = (result, time.perf_counter() - start)
    return runs


@pytest.fixture(scope="session")
def sim1_variant_runs():
    return {seed: run_sim1(seed=seed, env_change_prob=0.05) for seed in SEEDS}


@pytest.fixture(scope="session")
def sim2_runs():
    runs = {}
    for seed in SEEDS:
        start = time.perf_counter()
        result = run_sim2(seed=seed)
        runs[seed] = (result, time.perf_counter() - start)
    return runs


def test_criterion_1_object_block_certain_in_1d(sim1_runs):
    failures = []
    for seed, (result, elapsed) in sorted(sim1_runs.items()):
        obj, bg = split_by_truth(result)
        c = result.experiment.c
        if elapsed >= SIM1_TIME_LIMIT:
            failures.append(f"seed {seed}: runtime {elapsed:.1f}s")
        if not obj or not bg:
            failures.append(f"seed {seed}: degenerate labeling ({len(obj)} object states)")
            continue
        block = c[np.ix_(obj, obj)]
        if not (block == 1.0).all():
            failures.append(f"seed {seed}: object pair probability {block.min():.6f} < 1")
        cross = np.concatenate(
            [c[np.ix_(obj, bg)].reshape(-1), c[np.ix_(bg, obj)].reshape(-1)]
        )
        if not (cross < 1.0).all():
            failures.append(f"seed {seed}: object-background pair at 1.0")
    assert not failures, "criterion 1: " + "; ".join(failures)
    print("CRITERION 1 PASS: 1D object block exactly 1.0, cross pairs below 1.0")


def test_criterion_2_background_band_in_1d(sim1_runs):
    failures = []
    for seed, (result, _) in sorted(sim1_runs.items()):
        offd = background_offdiag(result)
        if offd.min() < 0.5:
            failures.append(
                f"seed {seed}: min background probability {offd.min():.3f} < 0.5"
            )
        if not (offd < 1.0).any():
            failures.append(f"seed {seed}: no background pair below 1.0")
    assert not failures, "criterion 2: " + "; ".join(failures)
    print("CRITERION 2 PASS: background pairs high but not all maximal")


def test_criterion_3_changing_environment_lowers_background(
    sim1_runs, sim1_variant_runs
):
    failures = []
    for seed in SEEDS:
        base, _ = sim1_runs[seed]
        variant = sim1_variant_runs[seed]
        obj, _ = split_by_truth(variant)
        block = variant.experiment.c[np.ix_(obj, obj)]
        if not (block == 1.0).all():
            failures.append(f"seed {seed}: variant object block below 1.0")
        base_mean = background_offdiag(base).mean()
        variant_mean = background_offdiag(variant).mean()
        if not variant_mean < base_mean:
            failures.append(
                f"seed {seed}: variant background mean {variant_mean:.3f} "
                f"not below base {base_mean:.3f}"
            )
    assert not failures, "criterion 3: " + "; ".join(failures)
    print("CRITERION 3 PASS: changing environment keeps object certain, lowers background")


def test_criterion_4_2d_clusters_recover_objects(sim2_runs):
    failures = []
    for seed, (result, elapsed) in sorted(sim2_runs.items()):
        if elapsed >= SIM2_TIME_LIMIT:
            failures.append(f"seed {seed}: runtime {elapsed:.1f}s")
        overall = result.purity.overall
        if overall is None or overall < 0.95:
            failures.append(f"seed {seed}: overall purity {overall}")
        majorities = [score.majority_label for score in result.purity.clusters]
        for n in range(3):
            if f"object{n}" not in majorities:
                failures.append(f"seed {seed}: no cluster with majority object{n}")
    assert not failures, "criterion 4: " + "; ".join(failures)
    print("CRITERION 4 PASS: 2D clustering at k=4 reaches 0.95 purity per seed")


def test_criterion_5_threshold_extraction_isolates_object(sim1_runs):
    failures = []
    for seed, (result, _) in sorted(sim1_runs.items()):
        obj, _ = split_by_truth(result)
        full = [
            set(comp)
            for comp, density in zip(
                result.extraction.components, result.extraction.densities
            )
            if density == 1.0
        ]
        if len(full) != 1:
            failures.append(f"seed {seed}: {len(full)} fully interconnected components")
        elif full[0] != set(obj):
            failures.append(f"seed {seed}: component differs from object states")
    assert not failures, "criterion 5: " + "; ".join(failures)
    print("CRITERION 5 PASS: threshold extraction yields exactly the object component")


def test_criterion_6_numerical_suite():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 101))
        m = rng.uniform(-1.0, 1.0, size=(n, n))
        a = (m + m.T) / 2
        values, vectors = eigendecompose_symmetric(a)
        ortho = np.max(np.abs(vectors.T @ vectors - np.eye(n)))
        recon = np.max(np.abs(vectors @ np.diag(values) @ vectors.T - a))
        assert ortho < 1e-9, f"criterion 6: orthonormality error {ortho:.2e} (n={n})"
        assert recon < 1e-9, f"criterion 6: reconstruction error {recon:.2e} (n={n})"
    for m, sizes in ((2, (7, 10)), (3, (6, 9, 5)), (5, (4, 6, 5, 8, 3))):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            n = sum(sizes)
            a = np.zeros((n, n))
            start = 0
            expected = np.empty(n, dtype=int)
            for label, size in enumerate(sizes):
                stop = start + size
                a[start:stop, start:stop] = rng.uniform(0.8, 1.0, size=(size, size))
                expected[start:stop] = label
                start = stop
            a = (a + a.T) / 2
            np.fill_diagonal(a, 0.0)
            lap, _, _ = normalized_laplacian(a)
            values, _ = eigendecompose_symmetric(lap)
            assert estimate_k_eigengap(values) == m, (
                f"criterion 6: eigengap missed m={m} (seed {seed})"
            )
            assignment, _ = cluster_similarity(a, m, rng)
            found = {
                tuple(np.nonzero(assignment.labels == c)[0]) for c in range(m)
            }
            truth = {tuple(np.nonzero(expected == label)[0]) for label in range(m)}
            assert found == truth, f"criterion 6: clusters differ from blocks (m={m}, seed {seed})"
    print("CRITERION 6 PASS: eigensolver within 1e-9, block matrices recovered exactly")


def test_criterion_7_bookkeeping_oracles(sim1_runs, sim2_runs):
    failures = []
    checked = [(f"1d seed {s}", r) for s, (r, _) in sorted(sim1_runs.items())]
    checked.append(("2d seed 1", sim2_runs[1][0]))
    for name, result in checked:
        experiment = result.experiment
        if not np.array_equal(replay(events_to_log(experiment)), experiment.c):
            failures.append(f"{name}: replayed matrix differs")
        if not np.array_equal(experiment.c, experiment.c.T):
            failures.append(f"{name}: C not symmetric")
        t = experiment.t
        if not np.array_equal(t, -t.transpose(1, 0, 2)):
            failures.append(f"{name}: T not antisymmetric")
        base = t[0]
        if not np.array_equal(t, base[None, :, :] - base[:, None, :]):
            failures.append(f"{name}: T not additive over triples")
    small = sim1_runs[SEEDS[0]][0].experiment.t
    total = small[:, :, None, :] + small[None, :, :, :]
    spanned = np.broadcast_to(small[:, None, :, :], total.shape)
    if not np.array_equal(total, spanned):
        failures.append("1d seed 1: direct triple enumeration failed")
    assert not failures, "criterion 7: " + "; ".join(failures)
    print("CRITERION 7 PASS: replay exact, C symmetric, motor deltas additive")


def test_criterion_8_byte_identical_reruns(tmp_path):
    dirs = []
    for name in ("first", "second"):
        result = run_sim1(seed=5, snapshots=(0, 175, 350))
        dirs.append(write_artifacts(result, tmp_path / name))
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir()), (
        "criterion 8: file sets differ"
    )
    match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
    assert mismatch == [] and errors == [], (
        f"criterion 8: differing files {mismatch + errors}"
    )
    print("CRITERION 8 PASS: rerun with equal config and seed is byte-identical")
