"""Interest-group formation.

Two ways to answer "which nodes should a message of category k reach":

  * exact filtering: every node whose interest bit k is set;
  * k-means clustering over the binary interest vectors, then the union of
    clusters whose centroid is interested enough in k.

The k-means here is the classic alternating scheme on seeded initial
points, kept deliberately simple and fully deterministic so runs can be
replayed bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .trace_model import InterestProfile

InterestVector = tuple[int, ...]
Centroid = tuple[float, ...]


class LengthMismatch(ValueError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"vector length {got}, expected {expected}")


class UnassignedPoint(ValueError):
    def __init__(self, node_id: int):
        self.node_id = node_id
        super().__init__(f"node {node_id} has no cluster assignment")


class TooFewDistinctPoints(ValueError):
    def __init__(self, k: int, distinct: int):
        self.k = k
        self.distinct = distinct
        super().__init__(f"k={k} but only {distinct} distinct vectors")


class EmptyInput(ValueError):
    pass


class CategoryOutOfRange(ValueError):
    def __init__(self, category: int, n: int):
        self.category = category
        self.n = n
        super().__init__(f"category {category} outside [1, {n}]")


@dataclass
class Clustering:
    """Result of one k-means run: centroids, node assignments and the
    objective value recorded at every iteration."""

    k: int
    centroids: tuple[Centroid, ...]
    assignment: dict[int, int]
    iterations_used: int
    sse_history: tuple[float, ...]
    converged: bool

    def members(self, cluster: int) -> list[int]:
        return sorted(n for n, c in self.assignment.items() if c == cluster)


def squared_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Sum of componentwise squared differences."""
    if len(p) != len(q):
        raise LengthMismatch(len(p), len(q))
    return float(sum((x - y) ** 2 for x, y in zip(p, q)))


def sse(points: Mapping[int, Sequence[int]], clustering: Clustering) -> float:
    """Total squared distance of every point to its assigned centroid."""
    total = 0.0
    for node in sorted(points):
        try:
            cluster = clustering.assignment[node]
        except KeyError:
            raise UnassignedPoint(node) from None
        total += squared_distance(points[node], clustering.centroids[cluster])
    return total


def _assign(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest-centroid assignment; ties go to the lowest cluster index."""
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    err = float(d2[np.arange(len(X)), assign].sum())
    return assign, err


def _means_with_repair(X: np.ndarray, assign: np.ndarray, centroids: np.ndarray,
                       k: int) -> tuple[np.ndarray, np.ndarray]:
    """Cluster means of the current assignment.

    An empty cluster is repaired first by moving into it the point farthest
    from its current centroid, drawn from clusters that can spare a member.
    """
    assign = assign.copy()
    counts = np.bincount(assign, minlength=k)
    empties = np.flatnonzero(counts == 0)
    if empties.size:
        dist_own = ((X - centroids[assign]) ** 2).sum(axis=1)
        for j in empties:
            donors = np.flatnonzero(counts[assign] >= 2)
            pick = donors[int(np.argmax(dist_own[donors]))]
            counts[assign[pick]] -= 1
            assign[pick] = j
            counts[j] += 1
            dist_own[pick] = -1.0  # cannot be picked again
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, assign, X)
    counts = np.bincount(assign, minlength=k)
    return assign, sums / counts[:, None]


def kmeans(points: Mapping[int, Sequence[int]], k: int, seed: int,
           max_iter: int = 100) -> Clustering:
    """Cluster binary interest vectors into k groups.

    Initial centroids are k distinct vectors sampled without replacement by
    a generator seeded with `seed` (candidates ordered by first appearance
    over ascending node id). Each round recomputes centroids as cluster
    means and reassigns every point to its nearest centroid; the loop stops
    when no assignment changes or after max_iter rounds. The objective
    value after every assignment step lands in sse_history.
    """
    if not points:
        raise EmptyInput("no points to cluster")
    if k < 1:
        raise ValueError("k must be at least 1")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")

    ids = sorted(points)
    vectors = [tuple(points[i]) for i in ids]
    n = len(vectors[0])
    for v in vectors:
        if len(v) != n:
            raise LengthMismatch(n, len(v))

    distinct: list[InterestVector] = []
    seen: set[InterestVector] = set()
    for v in vectors:
        if v not in seen:
            seen.add(v)
            distinct.append(v)
    if k > len(distinct):
        raise TooFewDistinctPoints(k, len(distinct))

    rng = random.Random(seed)
    chosen = rng.sample(range(len(distinct)), k)
    centroids = np.array([distinct[i] for i in chosen], dtype=float)
    X = np.array(vectors, dtype=float)

    assign, err = _assign(X, centroids)
    history = [err]
    iterations = 0
    converged = False
    while not converged and iterations < max_iter:
        iterations += 1
        assign, centroids = _means_with_repair(X, assign, centroids, k)
        new_assign, err = _assign(X, centroids)
        history.append(err)
        converged = bool((new_assign == assign).all())
        assign = new_assign
    if not converged:
        # keep the returned centroids consistent with the final assignment
        assign, centroids = _means_with_repair(X, assign, centroids, k)
        history.append(float(((X - centroids[assign]) ** 2).sum()))

    return Clustering(
        k=k,
        centroids=tuple(tuple(float(c) for c in row) for row in centroids),
        assignment={node: int(c) for node, c in zip(ids, assign)},
        iterations_used=iterations,
        sse_history=tuple(history),
        converged=converged,
    )


def _category_index(category: int, n: int) -> int:
    if not 1 <= category <= n:
        raise CategoryOutOfRange(category, n)
    return category - 1


def resolve_group_exact(profiles: Iterable[InterestProfile],
                        category: int) -> list[int]:
    """Node ids whose interest bit for `category` (1-based) is set, ascending."""
    profiles = list(profiles)
    if not profiles:
        return []
    idx = _category_index(category, len(profiles[0].interests))
    return sorted(p.node for p in profiles if p.interests[idx] == 1)


@dataclass(frozen=True)
class GroupResolution:
    """Destination set for one category, with a flag telling whether the
    cluster route came up empty and the exact filter stood in."""

    members: tuple[int, ...]
    fallback: bool


def resolve_group_kmeans(clustering: Clustering,
                         profiles: Iterable[InterestProfile],
                         category: int,
                         threshold: float = 0.5) -> GroupResolution:
    """Union of clusters whose centroid component for `category` reaches
    `threshold`; falls back to the exact filter when that union is empty."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    profiles = list(profiles)
    idx = _category_index(category, len(clustering.centroids[0]))
    interested = {j for j, c in enumerate(clustering.centroids) if c[idx] >= threshold}
    members = sorted(node for node, c in clustering.assignment.items()
                     if c in interested)
    if members:
        return GroupResolution(members=tuple(members), fallback=False)
    exact = resolve_group_exact(profiles, category)
    return GroupResolution(members=tuple(exact), fallback=True)


def dump_clustering(clustering: Clustering) -> str:
    """One line per cluster: `idx: centroid components | member ids`."""
    lines = []
    for j, centroid in enumerate(clustering.centroids):
        comps = " ".join(f"{c:.6f}" for c in centroid)
        members = " ".join(str(n) for n in clustering.members(j))
        lines.append(f"{j}: {comps} | {members}")
    return "\n".join(lines) + "\n"


def points_of(profiles: Iterable[InterestProfile]) -> dict[int, InterestVector]:
    """Clustering input: interest vectors keyed by node id."""
    return {p.node: p.interests for p in profiles}
