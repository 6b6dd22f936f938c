"""Exceptional-configuration certification and enumeration.

A connected marked subgraph H of G is exceptional when it admits a
stationary state of the search walk: H is non-bipartite, or H is bipartite
and the two parts have equal degree sums measured in the FULL graph G.
Order-2 and order-3 configurations are enumerated explicitly: an adjacent
pair with equal degrees, a triangle, or a 3-vertex path whose middle degree
equals the sum of the end degrees.
"""

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .graphs import Graph, ModelParams, derive_seed, sample_connected_graph


class ECKind(str, Enum):
    EC2_PATH = "2ec_path"
    EC3_TRIANGLE = "3ec_triangle"
    EC3_PATH = "3ec_path"


_KIND_SIZE = {ECKind.EC2_PATH: 2, ECKind.EC3_TRIANGLE: 3, ECKind.EC3_PATH: 3}
_KIND_RANK = {ECKind.EC2_PATH: 0, ECKind.EC3_TRIANGLE: 1, ECKind.EC3_PATH: 2}


@dataclass(frozen=True)
class ExceptionalConfiguration:
    """A marked-vertex set certified exceptional, tagged with its shape."""

    vertices: tuple[int, ...]
    kind: ECKind
    anchor: int

    def __post_init__(self):
        if tuple(sorted(self.vertices)) != self.vertices:
            raise ValueError(f"vertices must be a sorted tuple, got {self.vertices}")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError(f"duplicate vertices in {self.vertices}")
        if len(self.vertices) != _KIND_SIZE[self.kind]:
            raise ValueError(f"{self.kind.value} needs {_KIND_SIZE[self.kind]} vertices, got {self.vertices}")
        if self.anchor not in self.vertices:
            raise ValueError(f"anchor {self.anchor} not in {self.vertices}")

    @property
    def order(self) -> int:
        return len(self.vertices)

    def added(self, marked: Iterable[int]) -> tuple[int, ...]:
        """Vertices of the configuration not already in the marked set."""
        return tuple(sorted(set(self.vertices) - set(marked)))


def is_exceptional(graph: Graph, subset: Iterable[int]) -> bool:
    """Certify a connected vertex subset by the stationary-state condition.

    True iff the induced subgraph is non-bipartite, or bipartite with parts
    whose full-graph degree sums are equal. Raises if the induced subgraph
    is disconnected (or the subset is empty).
    """
    verts = sorted({int(v) for v in subset})
    if not verts:
        raise ValueError("subset must be nonempty")
    if not all(0 <= v < graph.n for v in verts):
        raise ValueError(f"subset {verts} out of range for n={graph.n}")
    vset = set(verts)
    # single BFS does connectivity and 2-coloring of the induced subgraph
    color = {verts[0]: 0}
    queue = deque([verts[0]])
    bipartite = True
    while queue:
        u = queue.popleft()
        for w in graph.neighbors(u):
            w = int(w)
            if w not in vset:
                continue
            if w not in color:
                color[w] = color[u] ^ 1
                queue.append(w)
            elif color[w] == color[u]:
                bipartite = False
    if len(color) != len(verts):
        raise ValueError(f"subset {verts} induces a disconnected subgraph")
    if not bipartite:
        return True
    sums = [0, 0]
    for v, c in color.items():
        sums[c] += graph.degree(v)
    return sums[0] == sums[1]


def find_2ec(graph: Graph, v: int) -> list[ExceptionalConfiguration]:
    """All order-2 configurations at v: neighbors w with deg(w) = deg(v), ascending."""
    dv = graph.degree(v)
    return [
        ExceptionalConfiguration(tuple(sorted((v, int(w)))), ECKind.EC2_PATH, v)
        for w in graph.neighbors(v)
        if graph.degree(int(w)) == dv
    ]


def find_3ec(graph: Graph, v: int) -> list[ExceptionalConfiguration]:
    """All order-3 configurations containing v: triangles, then qualifying paths.

    A path a-b-c qualifies when a and c are non-adjacent (so the induced
    subgraph is a path, not a triangle) and deg(b) = deg(a) + deg(c) in the
    full graph. Output is ordered triangles first, each group ascending by
    vertex tuple.
    """
    deg = graph.degree
    found: list[ExceptionalConfiguration] = []
    nbrs = [int(w) for w in graph.neighbors(v)]
    for i, a in enumerate(nbrs):
        for c in nbrs[i + 1 :]:
            if graph.has_edge(a, c):
                found.append(
                    ExceptionalConfiguration(tuple(sorted((v, a, c))), ECKind.EC3_TRIANGLE, v)
                )
            elif deg(a) + deg(c) == deg(v):
                # v is the middle of the induced path a-v-c
                found.append(
                    ExceptionalConfiguration(tuple(sorted((v, a, c))), ECKind.EC3_PATH, v)
                )
    for b in nbrs:
        for c in graph.neighbors(b):
            c = int(c)
            if c == v or graph.has_edge(v, c):
                continue
            if deg(b) == deg(v) + deg(c):
                found.append(
                    ExceptionalConfiguration(tuple(sorted((v, b, c))), ECKind.EC3_PATH, v)
                )
    found.sort(key=lambda ec: (_KIND_RANK[ec.kind], ec.vertices))
    return found


def _hop_distances(graph: Graph, v: int, radius: int) -> dict[int, int]:
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if dist[u] >= radius:
            continue
        for w in graph.neighbors(u):
            w = int(w)
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def find_ec_within_distance(
    graph: Graph,
    v: int,
    d: Optional[int] = None,
    orders: Iterable[int] = (2, 3),
) -> list[ExceptionalConfiguration]:
    """Configurations at v whose other vertices all lie within hop distance d.

    d=None means unrestricted, which for orders {2, 3} coincides with d=2
    since every enumerated configuration sits inside v's 2-neighborhood.
    """
    orders = {int(o) for o in orders}
    if not orders or not orders <= {2, 3}:
        raise ValueError(f"orders must be a nonempty subset of {{2, 3}}, got {sorted(orders)}")
    if d is not None and d not in (1, 2):
        raise ValueError(f"hop distance must be 1, 2, or None, got {d}")
    found: list[ExceptionalConfiguration] = []
    if 2 in orders:
        found.extend(find_2ec(graph, v))
    if 3 in orders:
        found.extend(find_3ec(graph, v))
    if d is not None:
        dist = _hop_distances(graph, v, d)
        found = [ec for ec in found if all(u in dist for u in ec.vertices)]
    found.sort(key=lambda ec: (_KIND_RANK[ec.kind], ec.vertices))
    return found


def wilson_interval(successes: int, total: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if total < 1:
        raise ValueError("total must be positive")
    if not 0 <= successes <= total:
        raise ValueError(f"successes {successes} out of range for total {total}")
    phat = successes / total
    denom = 1.0 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class FormationEstimate:
    """Empirical probability that a random vertex admits a configuration."""

    probability: float
    ci_low: float
    ci_high: float
    samples: int
    successes: int
    regenerations: int


def ec_formation_probability(
    params: ModelParams,
    n: int,
    orders: Iterable[int] = (2, 3),
    d: Optional[int] = None,
    samples: int = 100,
    seed: int = 0,
) -> FormationEstimate:
    """Fraction of (connected graph, uniform vertex) draws with a nonempty EC set.

    Disconnected draws are regenerated with fresh derived seeds and counted.
    A Wilson 95% interval accompanies the point estimate.
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    orders = tuple(sorted({int(o) for o in orders}))
    successes = 0
    regens = 0
    for i in range(samples):
        graph, attempts, attempt_seed = sample_connected_graph(params, n, seed, i)
        regens += attempts
        rng = np.random.default_rng(derive_seed(attempt_seed, 1))
        v = int(rng.integers(n))
        if find_ec_within_distance(graph, v, d, orders):
            successes += 1
    lo, hi = wilson_interval(successes, samples)
    return FormationEstimate(successes / samples, lo, hi, samples, successes, regens)
