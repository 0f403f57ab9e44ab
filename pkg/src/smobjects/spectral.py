"""Finding state networks in C: threshold extraction and spectral clustering.

The clustering pipeline is the classic normalized-cut recipe: symmetrize C
into a zero-diagonal similarity matrix, drop isolated states, form the
symmetric normalized Laplacian D^(-1/2) A D^(-1/2), embed each state as its
row in the top-k eigenvector matrix (row-normalized), and run k-means on
the embedding. Eigenpairs come from a cyclic Jacobi solver so the full
spectrum is available for the eigengap estimate of k.

Threshold extraction is the direct reading of the object definition: the
connected components of the graph keeping only pairs whose similarity
reaches alpha, with a per-component density saying how close the component
is to a fully interconnected network.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
DEGREE_EPS = 1e-12
KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 300


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """A partition of catalog states with its visualization permutation.

    ``labels`` maps each state to a cluster id, -1 for states excluded as
    isolated. ``permutation`` lists all states with clusters contiguous in
    ascending id (isolated states last), for row/column reordering.
    """

    labels: np.ndarray
    permutation: np.ndarray
    unclustered: tuple[int, ...]
    k: int
    k_estimate: int


@dataclass(frozen=True, eq=False)
class ThresholdExtraction:
    """Connected components above a probability threshold.

    Components hold two or more states; states with no qualifying pair are
    listed as isolated. Each component's density is the fraction of its
    unordered pairs that meet the threshold; density 1 means the component
    is fully interconnected.
    """

    components: tuple[tuple[int, ...], ...]
    densities: tuple[float, ...]
    isolated: tuple[int, ...]


def build_similarity(c: np.ndarray) -> np.ndarray:
    """Symmetrize a probability matrix into a zero-diagonal similarity matrix."""
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {c.shape}")
    if c.size and (c.min() < 0.0 or c.max() > 1.0):
        raise ValueError("probability entries must lie in [0, 1]")
    a = (c + c.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


@njit(cache=True)
def _jacobi_sweeps(a, v, tol, skip_tol, max_sweeps):
    n = a.shape[0]
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                m = abs(a[p, q])
                if m > off:
                    off = m
        if off < tol:
            return sweeps
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_tol:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                cth = 1.0 / math.sqrt(1.0 + t * t)
                sth = t * cth
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = cth * akp - sth * akq
                        a[p, k] = a[k, p]
                        a[k, q] = sth * akp + cth * akq
                        a[q, k] = a[k, q]
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = cth * vkp - sth * vkq
                    v[k, q] = sth * vkp + cth * vkq
        sweeps += 1
    return sweeps


def eigendecompose_symmetric(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Plane rotations are swept cyclically until every off-diagonal magnitude
    falls below 1e-12 (or 100 sweeps pass). Returns eigenvalues in
    descending order and the matching orthonormal eigenvectors as columns.
    Rotations already below a hundredth of the stop tolerance are skipped;
    they cannot hold the sweep above the stopping criterion.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size and float(np.max(np.abs(a - a.T))) > 1e-12:
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    work = np.array((a + a.T) / 2.0, dtype=np.float64)
    vectors = np.eye(n, dtype=np.float64)
    _jacobi_sweeps(work, vectors, JACOBI_TOL, JACOBI_TOL * 1e-2, JACOBI_MAX_SWEEPS)
    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def normalized_laplacian(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetric normalized Laplacian of the non-isolated subgraph.

    Rows whose degree falls below 1e-12 are removed (repeatedly, until all
    remaining degrees are positive). Returns (L, kept, dropped) where kept
    and dropped are ascending original indices.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    kept = np.arange(n)
    sub = a
    while True:
        deg = sub.sum(axis=1)
        low = deg < DEGREE_EPS
        if not low.any():
            break
        kept = kept[~low]
        sub = a[np.ix_(kept, kept)]
    dropped = np.setdiff1d(np.arange(n), kept)
    inv_sqrt = 1.0 / np.sqrt(sub.sum(axis=1)) if len(kept) else np.zeros(0)
    lap = inv_sqrt[:, None] * sub * inv_sqrt[None, :]
    lap = (lap + lap.T) / 2.0
    return lap, kept, dropped


def _row_normalize(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    return x / safe[:, None]


def spectral_embed(a: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Embed non-isolated states into the top-k Laplacian eigenvector rows.

    Returns (embedding, kept, dropped); each embedding row has unit norm.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    lap, kept, dropped = normalized_laplacian(a)
    if k > len(kept):
        raise ValueError(f"k={k} exceeds the {len(kept)} non-isolated states")
    _, vectors = eigendecompose_symmetric(lap)
    return _row_normalize(vectors[:, :k]), kept, dropped


def estimate_k_eigengap(eigenvalues: np.ndarray) -> int:
    """Number of clusters suggested by the largest consecutive spectral gap."""
    w = np.asarray(eigenvalues, dtype=np.float64)
    if w.size < 2:
        return 1
    gaps = w[:-1] - w[1:]
    return int(np.argmax(gaps)) + 1


def _seed_kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[int(rng.integers(n))]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[c] = x[idx]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(x: np.ndarray, k: int, centers: np.ndarray) -> tuple[np.ndarray, float]:
    n = len(x)
    prev = None
    labels = None
    for _ in range(KMEANS_MAX_ITER):
        dist2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(dist2, axis=1)
        counts = np.bincount(labels, minlength=k)
        if (counts == 0).any():
            own = dist2[np.arange(n), labels]
            stolen = set()
            for c in range(k):
                if counts[c] > 0:
                    continue
                for cand in np.argsort(-own, kind="stable"):
                    cand = int(cand)
                    if cand in stolen or counts[labels[cand]] <= 1:
                        continue
                    counts[labels[cand]] -= 1
                    labels[cand] = c
                    counts[c] = 1
                    stolen.add(cand)
                    break
        if prev is not None and np.array_equal(labels, prev):
            break
        prev = labels
        for c in range(k):
            members = x[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    wcss = 0.0
    for c in range(k):
        members = x[labels == c]
        if len(members):
            wcss += float(((members - members.mean(axis=0)) ** 2).sum())
    return labels, wcss


def kmeans(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Cluster points into k groups; deterministic given the generator state.

    Uses distance-weighted seeding, Lloyd iterations to an assignment
    fixpoint (at most 300), empty-cluster repair by stealing the point
    farthest from its own centroid, ties broken toward the lowest cluster
    id, and the best of 10 restarts by within-cluster sum of squares.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if k < 1 or k > len(x):
        raise ValueError(f"k must be in [1, {len(x)}], got {k}")
    best_labels = None
    best_wcss = math.inf
    for _ in range(KMEANS_RESTARTS):
        centers = _seed_kmeanspp(x, k, rng)
        labels, wcss = _lloyd(x, k, centers)
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return best_labels


def cluster_similarity(
    a: np.ndarray, k, rng: np.random.Generator
) -> tuple[ClusterAssignment, np.ndarray]:
    """Full spectral clustering of a similarity matrix.

    ``k`` may be None to use the eigengap estimate. Returns the assignment
    and the Laplacian spectrum (descending) the estimate was read from.
    """
    lap, kept, dropped = normalized_laplacian(a)
    if len(kept) == 0:
        raise ValueError("all states are isolated; nothing to cluster")
    values, vectors = eigendecompose_symmetric(lap)
    k_estimate = estimate_k_eigengap(values)
    k_use = k_estimate if k is None else int(k)
    if k_use < 1 or k_use > len(kept):
        raise ValueError(f"k must be in [1, {len(kept)}], got {k_use}")
    embedding = _row_normalize(vectors[:, :k_use])
    sub_labels = kmeans(embedding, k_use, rng)
    labels = np.full(a.shape[0], -1, dtype=np.int64)
    labels[kept] = sub_labels
    parts = [kept[sub_labels == c] for c in range(k_use)]
    permutation = np.concatenate(parts + [dropped]).astype(np.int64)
    assignment = ClusterAssignment(
        labels=labels,
        permutation=permutation,
        unclustered=tuple(int(i) for i in dropped),
        k=k_use,
        k_estimate=k_estimate,
    )
    return assignment, values


def extract_objects_by_threshold(c: np.ndarray, alpha: float) -> ThresholdExtraction:
    """Connected components of state pairs whose similarity reaches alpha."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    a = build_similarity(c)
    adj = a >= alpha
    np.fill_diagonal(adj, False)
    n = a.shape[0]
    seen = np.zeros(n, dtype=bool)
    components = []
    isolated = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        frontier = [start]
        members = [start]
        while frontier:
            nxt = np.nonzero(adj[frontier].any(axis=0) & ~seen)[0]
            seen[nxt] = True
            members.extend(int(i) for i in nxt)
            frontier = list(nxt)
        if len(members) == 1:
            isolated.append(start)
        else:
            components.append(tuple(sorted(members)))
    densities = []
    for comp in components:
        idx = np.array(comp)
        pairs = len(comp) * (len(comp) - 1) // 2
        edges = int(adj[np.ix_(idx, idx)].sum()) // 2
        densities.append(edges / pairs)
    return ThresholdExtraction(
        components=tuple(components),
        densities=tuple(densities),
        isolated=tuple(isolated),
    )


def reorder(c: np.ndarray, assignment: ClusterAssignment) -> np.ndarray:
    """Permute rows and columns of C so clusters sit contiguously."""
    perm = np.asarray(assignment.permutation)
    if not np.array_equal(np.sort(perm), np.arange(c.shape[0])):
        raise ValueError("assignment permutation does not cover the matrix")
    return c[np.ix_(perm, perm)]
