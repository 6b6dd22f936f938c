"""Simple undirected graphs: representation, random models, edge-list files.

Vertices are integers 0..n-1. All generators are pure functions of their
parameters and seed; identical inputs yield identical graphs.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

MODELS = ("er", "ws", "ba")

_MAX_REGENERATIONS = 1000


class EdgeListParseError(ValueError):
    """Raised when an edge-list file violates the format contract."""


class Graph:
    """Immutable simple undirected graph.

    Adjacency is stored per vertex as a sorted numpy array of neighbor ids.
    Construction validates simplicity (no self-loops, no duplicate edges)
    and that every endpoint lies in [0, n).
    """

    __slots__ = ("_n", "_adj", "_degrees", "_num_edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 1:
            raise ValueError(f"vertex count must be positive, got {n}")
        neighbor_sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if v in neighbor_sets[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        adj = []
        for s in neighbor_sets:
            a = np.fromiter(sorted(s), dtype=np.int64, count=len(s))
            a.flags.writeable = False
            adj.append(a)
        self._n = n
        self._adj = tuple(adj)
        degrees = np.array([a.size for a in adj], dtype=np.int64)
        degrees.flags.writeable = False
        self._degrees = degrees
        self._num_edges = int(degrees.sum()) // 2

    @property
    def n(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return self._num_edges

    @property
    def degrees(self) -> np.ndarray:
        """Read-only array of vertex degrees."""
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self._degrees[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted read-only array of neighbors of v."""
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        row = self._adj[u]
        i = int(np.searchsorted(row, v))
        return i < row.size and row[i] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield edges as (u, v) with u < v, in ascending order."""
        for u in range(self._n):
            for v in self._adj[u]:
                if u < v:
                    yield u, int(v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and all(
            np.array_equal(a, b) for a, b in zip(self._adj, other._adj)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={self._num_edges})"


def default_er_p(n: int) -> float:
    """Edge probability 2*ln(n)/n used for the Erdos-Renyi experiments."""
    return 2.0 * math.log(n) / n


def default_ws_k(n: int) -> int:
    """Initial Watts-Strogatz degree ceil(2*ln(n)), rounded up to even."""
    k = math.ceil(2.0 * math.log(n))
    return k if k % 2 == 0 else k + 1


def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each of the n(n-1)/2 edges present independently with probability p."""
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n - 1):
        hits = np.flatnonzero(rng.random(n - 1 - u) < p)
        edges.extend((u, u + 1 + int(j)) for j in hits)
    return Graph(n, edges)


def gen_watts_strogatz(n: int, k: int, beta: float, seed: int) -> Graph:
    """Watts-Strogatz ring lattice with independent edge rewiring.

    Starts from a ring where each vertex connects to k/2 nearest neighbors
    on each side; each lattice edge is rewired with probability beta, moving
    its far endpoint to a uniformly random non-neighbor. The edge count is
    exactly n*k/2 for every beta.
    """
    if k % 2 != 0:
        raise ValueError(f"initial degree must be even, got {k}")
    if not 2 <= k < n:
        raise ValueError(f"initial degree must satisfy 2 <= k < n, got k={k}, n={n}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"rewiring probability must be in [0, 1], got {beta}")
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    half = k // 2
    for u in range(n):
        for off in range(1, half + 1):
            v = (u + off) % n
            adj[u].add(v)
            adj[v].add(u)
    for off in range(1, half + 1):
        for u in range(n):
            v = (u + off) % n
            if rng.random() >= beta:
                continue
            if len(adj[u]) >= n - 1:
                continue  # neighborhood full, nothing to rewire to
            mask = np.ones(n, dtype=bool)
            mask[u] = False
            mask[list(adj[u])] = False
            choices = np.flatnonzero(mask)
            w = int(choices[rng.integers(choices.size)])
            adj[u].remove(v)
            adj[v].remove(u)
            adj[u].add(w)
            adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph(n, edges)


def gen_barabasi_albert(n: int, m0: int, seed: int) -> Graph:
    """Preferential attachment starting from a complete graph on m0+1 vertices.

    Each new vertex attaches m0 edges to distinct existing vertices, sampled
    without replacement with probability proportional to current degree.
    """
    if not 1 <= m0 < n:
        raise ValueError(f"attachment count must satisfy 1 <= m0 < n, got m0={m0}, n={n}")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m0 + 1) for j in range(i + 1, m0 + 1)]
    degrees = np.zeros(n, dtype=np.float64)
    degrees[: m0 + 1] = m0
    for v in range(m0 + 1, n):
        weights = degrees[:v] / degrees[:v].sum()
        targets = rng.choice(v, size=m0, replace=False, p=weights)
        for t in targets:
            edges.append((int(t), v))
            degrees[t] += 1
        degrees[v] = m0
    return Graph(n, edges)


@dataclass(frozen=True)
class ModelParams:
    """Random-model choice plus its parameters; None fields fall back to the
    per-model default rules (er_p=2ln(n)/n, ws_k=even ceil(2ln n))."""

    model: str
    er_p: Optional[float] = None
    ws_k: Optional[int] = None
    ws_beta: float = 0.5
    ba_m0: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")


def generate_graph(params: ModelParams, n: int, seed: Optional[int] = None) -> Graph:
    """Draw one graph of order n from the parametrized random model."""
    if seed is None:
        seed = params.seed
    if params.model == "er":
        p = default_er_p(n) if params.er_p is None else params.er_p
        return gen_erdos_renyi(n, p, seed)
    if params.model == "ws":
        k = default_ws_k(n) if params.ws_k is None else params.ws_k
        return gen_watts_strogatz(n, k, params.ws_beta, seed)
    return gen_barabasi_albert(n, params.ba_m0, seed)


def is_connected(graph: Graph) -> bool:
    """True iff the graph has a single connected component."""
    n = graph.n
    if n <= 1:
        return True
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for w in graph.neighbors(u):
            w = int(w)
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def derive_seed(*parts: int) -> int:
    """Collapse an integer tuple into a stable 64-bit seed.

    Uses numpy's SeedSequence hashing, which is platform-independent, so
    per-sample seeds derived from a root seed are reproducible everywhere.
    """
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_connected_graph(
    params: ModelParams, n: int, *seed_parts: int, max_attempts: int = _MAX_REGENERATIONS
) -> tuple[Graph, int, int]:
    """Sample from the model, regenerating disconnected draws with fresh seeds.

    Returns (graph, regenerations, attempt_seed). The attempt seed is the
    value recorded in experiment output; re-deriving from it reproduces the
    graph via generate_graph(params, n, derive_seed(attempt_seed, 0)).
    """
    for attempt in range(max_attempts):
        attempt_seed = derive_seed(*seed_parts, attempt)
        graph = generate_graph(params, n, seed=derive_seed(attempt_seed, 0))
        if is_connected(graph):
            return graph, attempt, attempt_seed
    raise RuntimeError(
        f"no connected {params.model} graph of order {n} after {max_attempts} attempts"
    )


def write_edge_list(graph: Graph, path) -> None:
    """Write the graph as a header line 'n <count>' plus one 'u v' pair per line."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"n {graph.n}\n")
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> Graph:
    """Parse an edge-list file written by write_edge_list.

    Raises EdgeListParseError with the offending line number for malformed
    lines, out-of-range ids, self-loops, and duplicate edges.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.readlines()
    if not lines:
        raise EdgeListParseError("line 1: empty file, expected header 'n <count>'")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "n":
        raise EdgeListParseError(f"line 1: expected header 'n <count>', got {lines[0]!r}")
    try:
        n = int(header[1])
    except ValueError:
        raise EdgeListParseError(f"line 1: vertex count {header[1]!r} is not an integer") from None
    if n < 1:
        raise EdgeListParseError(f"line 1: vertex count must be positive, got {n}")
    edges = []
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise EdgeListParseError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(f"line {lineno}: non-integer vertex id in {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListParseError(f"line {lineno}: edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise EdgeListParseError(f"line {lineno}: self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListParseError(f"line {lineno}: duplicate edge ({u}, {v})")
        seen.add(key)
        edges.append(key)
    return Graph(n, edges)
