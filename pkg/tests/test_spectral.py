"""Eigensolver, spectral clustering, threshold extraction, reordering."""

import numpy as np
import pytest

from smobjects.spectral import (
    build_similarity,
    cluster_similarity,
    eigendecompose_symmetric,
    estimate_k_eigengap,
    extract_objects_by_threshold,
    kmeans,
    normalized_laplacian,
    reorder,
    spectral_embed,
)


def block_similarity(sizes, intra=1.0, inter=0.0, rng=None):
    """Block-structured similarity with zero diagonal, optionally jittered."""
    n = sum(sizes)
    a = np.full((n, n), inter, dtype=np.float64)
    start = 0
    for size in sizes:
        a[start : start + size, start : start + size] = intra
        start += size
    if rng is not None:
        noise = rng.uniform(-0.02, 0.02, size=(n, n))
        a = np.clip(a + (noise + noise.T) / 2, 0.0, 1.0)
    np.fill_diagonal(a, 0.0)
    return a


def components_oracle(a, threshold=1e-9):
    """Connected components of a similarity matrix by plain graph search."""
    n = a.shape[0]
    labels = -np.ones(n, dtype=int)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            node = stack.pop()
            for other in range(n):
                if labels[other] < 0 and a[node, other] > threshold:
                    labels[other] = current
                    stack.append(other)
        current += 1
    return labels


def as_partition(labels):
    groups = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(idx)
    return frozenset(frozenset(g) for g in groups.values())


def test_build_similarity_averages_and_zeroes_diagonal():
    c = np.array([[1.0, 1.0], [0.5, 1.0]])
    a = build_similarity(c)
    assert a[0, 1] == 0.75
    assert a[1, 0] == 0.75
    assert a[0, 0] == 0.0 and a[1, 1] == 0.0
    sym = np.array([[1.0, 0.3], [0.3, 1.0]])
    assert build_similarity(sym)[0, 1] == 0.3


def test_build_similarity_rejects_bad_input():
    with pytest.raises(ValueError):
        build_similarity(np.ones((2, 3)))
    with pytest.raises(ValueError):
        build_similarity(np.array([[1.0, 2.0], [0.5, 1.0]]))


def test_eigen_textbook_2x2():
    values, vectors = eigendecompose_symmetric(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(values, [3.0, 1.0], atol=1e-12)
    assert np.allclose(vectors.T @ vectors, np.eye(2), atol=1e-12)


def test_eigen_identity():
    values, _ = eigendecompose_symmetric(np.eye(5))
    assert np.array_equal(values, np.ones(5))


def test_eigen_random_self_check():
    rng = np.random.default_rng(12)
    m = rng.uniform(-1.0, 1.0, size=(30, 30))
    a = (m + m.T) / 2
    values, vectors = eigendecompose_symmetric(a)
    assert np.max(np.abs(vectors.T @ vectors - np.eye(30))) < 1e-9
    recon = vectors @ np.diag(values) @ vectors.T
    assert np.max(np.abs(a - recon)) < 1e-9
    assert (np.diff(values) <= 1e-12).all()


def test_eigen_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        eigendecompose_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_laplacian_drops_isolated_rows():
    a = block_similarity([3, 2], intra=0.8)
    a[2, :] = 0.0
    a[:, 2] = 0.0
    lap, kept, dropped = normalized_laplacian(a)
    assert list(dropped) == [2]
    assert lap.shape == (4, 4)
    values, _ = eigendecompose_symmetric(lap)
    assert values.max() <= 1.0 + 1e-9
    assert values.min() >= -1.0 - 1e-9


def test_embed_ideal_blocks_collapse_to_points():
    a = block_similarity([4, 3])
    x, kept, dropped = spectral_embed(a, 2)
    assert len(dropped) == 0
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)
    for group in (list(range(0, 4)), list(range(4, 7))):
        base = x[group[0]]
        for i in group:
            assert np.allclose(x[i], base, atol=1e-7)


def test_embed_k_too_large():
    a = block_similarity([3, 3])
    with pytest.raises(ValueError):
        spectral_embed(a, 7)
    with pytest.raises(ValueError):
        spectral_embed(a, 0)


def test_kmeans_separates_obvious_groups():
    points = np.array([[0.0], [0.1], [10.0], [10.1]])
    labels = kmeans(points, 2, np.random.default_rng(0))
    assert labels[0] == labels[1]
    assert labels[2] == labels[3]
    assert labels[0] != labels[2]


def test_kmeans_k_equals_n_gives_singletons():
    points = np.array([[0.0], [1.0], [2.0], [5.0]])
    labels = kmeans(points, 4, np.random.default_rng(3))
    assert sorted(labels) == [0, 1, 2, 3]


def test_kmeans_rejects_excess_k():
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), 4, np.random.default_rng(0))


def test_clustering_matches_components_oracle_on_blocks():
    for m, sizes in ((2, [6, 9]), (3, [5, 7, 6]), (5, [4, 6, 5, 8, 3])):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            a = block_similarity(sizes, intra=0.9, inter=0.0, rng=rng)
            strong = (a > 0.5).astype(float)
            assignment, values = cluster_similarity(a, m, rng)
            assert assignment.k_estimate == m
            oracle = components_oracle(strong)
            assert as_partition(assignment.labels) == as_partition(oracle)


def test_eigengap_examples():
    assert estimate_k_eigengap(np.array([1.0, 0.99, 0.3, 0.2])) == 2
    assert estimate_k_eigengap(np.array([0.7, 0.7, 0.7])) == 1
    assert estimate_k_eigengap(np.array([0.4])) == 1
    assert estimate_k_eigengap(np.array([])) == 1


def test_eigengap_counts_ideal_blocks():
    for sizes in ([4, 4], [3, 5, 4], [3, 3, 4, 5, 3]):
        a = block_similarity(sizes)
        lap, _, _ = normalized_laplacian(a)
        values, _ = eigendecompose_symmetric(lap)
        assert estimate_k_eigengap(values) == len(sizes)


def test_extraction_components_and_densities():
    c = np.eye(6)
    pairs_high = [(0, 1), (1, 2), (0, 2), (3, 4)]
    for i, j in pairs_high:
        c[i, j] = c[j, i] = 0.95
    c[3, 5] = c[5, 3] = 0.2
    result = extract_objects_by_threshold(c, alpha=0.9)
    assert result.components == ((0, 1, 2), (3, 4))
    assert result.densities == (1.0, 1.0)
    assert result.isolated == (5,)
    partial = extract_objects_by_threshold(c, alpha=0.15)
    assert partial.components == ((0, 1, 2), (3, 4, 5))
    assert partial.densities[1] == pytest.approx(2 / 3)


def test_extraction_alpha_zero_equivalent_groups_everything():
    rng = np.random.default_rng(4)
    c = np.clip(rng.uniform(0.01, 1.0, size=(8, 8)), 0, 1)
    c = (c + c.T) / 2
    np.fill_diagonal(c, 1.0)
    result = extract_objects_by_threshold(c, alpha=1e-9)
    assert result.components == (tuple(range(8)),)
    assert result.isolated == ()


def test_extraction_monotone_under_alpha():
    rng = np.random.default_rng(6)
    m = rng.uniform(0, 1, size=(12, 12))
    c = (m + m.T) / 2
    np.fill_diagonal(c, 1.0)
    lower = extract_objects_by_threshold(c, alpha=0.4)
    higher = extract_objects_by_threshold(c, alpha=0.7)
    coarse = {i: n for n, comp in enumerate(lower.components) for i in comp}
    for comp in higher.components:
        assert len({coarse.get(i) for i in comp}) == 1
        assert None not in {coarse.get(i) for i in comp}


def test_reorder_identity_and_blocks():
    rng = np.random.default_rng(42)
    sizes = [3, 4, 2]
    canonical = block_similarity(sizes, intra=0.9, inter=0.1)
    np.fill_diagonal(canonical, 1.0)
    perm = rng.permutation(sum(sizes))
    shuffled = canonical[np.ix_(perm, perm)]
    assignment, _ = cluster_similarity(build_similarity(shuffled), 3, rng)
    restored = reorder(shuffled, assignment)
    start = 0
    sizes_by_cluster = [int((assignment.labels == c).sum()) for c in range(3)]
    for size in sizes_by_cluster:
        block = restored[start : start + size, start : start + size]
        off = block[~np.eye(size, dtype=bool)]
        assert (off == 0.9).all()
        start += size
    outside = restored.copy()
    start = 0
    for size in sizes_by_cluster:
        outside[start : start + size, start : start + size] = 0.1
        start += size
    np.fill_diagonal(outside, 0.1)
    assert (outside == 0.1).all()
    assert sorted(restored.reshape(-1)) == sorted(shuffled.reshape(-1))


def test_reorder_identity_assignment_is_noop():
    from smobjects.spectral import ClusterAssignment

    rng = np.random.default_rng(2)
    c = rng.uniform(0, 1, size=(4, 4))
    identity = ClusterAssignment(
        labels=np.zeros(4, dtype=int),
        permutation=np.arange(4),
        unclustered=(),
        k=1,
        k_estimate=1,
    )
    assert np.array_equal(reorder(c, identity), c)


def test_reorder_rejects_bad_permutation():
    from smobjects.spectral import ClusterAssignment

    c = np.eye(3)
    bad = ClusterAssignment(
        labels=np.array([0, 0, 1]),
        permutation=np.array([0, 0, 2]),
        unclustered=(),
        k=2,
        k_estimate=2,
    )
    with pytest.raises(ValueError):
        reorder(c, bad)


def test_partition_invariant_under_permutation():
    rng = np.random.default_rng(14)
    a = block_similarity([5, 6, 4], intra=0.85, inter=0.05, rng=rng)
    assignment_a, _ = cluster_similarity(a, 3, np.random.default_rng(100))
    perm = rng.permutation(a.shape[0])
    permuted = a[np.ix_(perm, perm)]
    assignment_b, _ = cluster_similarity(permuted, 3, np.random.default_rng(100))
    back = np.empty_like(assignment_b.labels)
    back[perm] = assignment_b.labels
    assert as_partition(assignment_a.labels) == as_partition(back)
