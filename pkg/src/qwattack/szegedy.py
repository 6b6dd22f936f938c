"""Szegedy search walk on the ordered-pair space of a graph.

The walk state lives on ordered vertex pairs (v, w) and all amplitudes are
real. One search step applies the two reflections of the quantized chain,
each composed with a phase oracle that negates marked components:

    step = R2 Q2 R1 Q1

where R1 = 2 sum_v |v, phi_v><v, phi_v| - I with phi_v(w) = sqrt(P(w, v))
built from the UNMODIFIED chain P, R2 = Swap R1 Swap, Q1 negates pairs whose
first register is marked, and Q2 = Swap Q1 Swap. Restricted to first-register
blocks this is the Grover diffusion coin at unmarked vertices and its
negation at marked ones, the walk for which marked subgraphs with the
degree-sum property admit stationary states that suppress the search. With
an empty marked set the step reduces to the plain quantized walk R2 R1.
"""

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .graphs import Graph

COLUMN_SUM_TOL = 1e-12
NORM_DRIFT_LIMIT = 1e-8


class NumericalStabilityError(ArithmeticError):
    """Norm drift exceeded the stability budget during evolution."""


class StochasticMatrix:
    """Column-stochastic matrix stored sparsely as per-column (support, weight) arrays."""

    __slots__ = ("_n", "_columns")

    def __init__(self, n: int, columns: Sequence[tuple[np.ndarray, np.ndarray]]):
        if len(columns) != n:
            raise ValueError(f"expected {n} columns, got {len(columns)}")
        stored = []
        for v, (idx, wts) in enumerate(columns):
            idx = np.asarray(idx, dtype=np.int64)
            wts = np.asarray(wts, dtype=np.float64)
            if idx.shape != wts.shape or idx.ndim != 1:
                raise ValueError(f"column {v}: support and weights must be 1-d and equal length")
            if idx.size == 0:
                raise ValueError(f"column {v} is empty; a stochastic column must sum to 1")
            if idx[0] < 0 or idx[-1] >= n or np.any(np.diff(idx) <= 0):
                raise ValueError(f"column {v}: support must be sorted, unique, and in [0, {n})")
            if np.any(wts < 0):
                raise ValueError(f"column {v}: negative weight")
            total = float(wts.sum())
            if abs(total - 1.0) > COLUMN_SUM_TOL:
                raise ValueError(f"column {v} sums to {total}, not 1 within {COLUMN_SUM_TOL}")
            idx = idx.copy()
            wts = wts.copy()
            idx.flags.writeable = False
            wts.flags.writeable = False
            stored.append((idx, wts))
        self._n = n
        self._columns = tuple(stored)

    @property
    def n(self) -> int:
        return self._n

    def column(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Support indices and weights of column v."""
        return self._columns[v]

    def entry(self, w: int, v: int) -> float:
        """Matrix entry P(w, v): the weight of w in column v (0 off support)."""
        idx, wts = self._columns[v]
        i = int(np.searchsorted(idx, w))
        if i < idx.size and idx[i] == w:
            return float(wts[i])
        return 0.0

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self._n, self._n))
        for v, (idx, wts) in enumerate(self._columns):
            out[idx, v] = wts
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return self._n == other._n and all(
            np.array_equal(ia, ib) and np.array_equal(wa, wb)
            for (ia, wa), (ib, wb) in zip(self._columns, other._columns)
        )

    def __repr__(self) -> str:
        nnz = sum(idx.size for idx, _ in self._columns)
        return f"StochasticMatrix(n={self._n}, nnz={nnz})"


def uniform_stochastic(graph: Graph) -> StochasticMatrix:
    """Uniform walk chain: column v puts weight 1/deg(v) on each neighbor of v."""
    cols = []
    for v in range(graph.n):
        nbrs = graph.neighbors(v)
        if nbrs.size == 0:
            raise ValueError(f"vertex {v} is isolated; the uniform chain is undefined")
        cols.append((nbrs, np.full(nbrs.size, 1.0 / nbrs.size)))
    return StochasticMatrix(graph.n, cols)


def absorb_marked(chain: StochasticMatrix, marked: Iterable[int]) -> StochasticMatrix:
    """Replace each marked column by the unit self-column; others unchanged."""
    marked = {int(v) for v in marked}
    if not marked:
        raise ValueError("marked set must be nonempty")
    if not all(0 <= v < chain.n for v in marked):
        raise ValueError(f"marked set {sorted(marked)} out of range for n={chain.n}")
    cols = []
    for v in range(chain.n):
        if v in marked:
            cols.append((np.array([v], dtype=np.int64), np.array([1.0])))
        else:
            cols.append(chain.column(v))
    return StochasticMatrix(chain.n, cols)


class PairSpace:
    """Sparse basis of ordered pairs (v, w), closed under register swap.

    Pairs are kept sorted by flat key v*n + w; `first` and `second` give the
    registers of each basis element and `swap_index` the position of the
    transposed pair.
    """

    __slots__ = ("n", "first", "second", "swap_index", "_keys")

    def __init__(self, n: int, keys: np.ndarray):
        keys = np.unique(np.asarray(keys, dtype=np.int64))
        first = keys // n
        second = keys % n
        swapped = second * n + first
        pos = np.searchsorted(keys, swapped)
        if pos.size and (np.any(pos >= keys.size) or not np.array_equal(keys[pos], swapped)):
            raise ValueError("pair support is not closed under swap")
        self.n = n
        self._keys = keys
        self.first = first
        self.second = second
        self.swap_index = pos
        for a in (self._keys, self.first, self.second, self.swap_index):
            a.flags.writeable = False

    @classmethod
    def from_graph(cls, graph: Graph) -> "PairSpace":
        """Directed edge pairs of the graph plus every self-pair (v, v)."""
        n = graph.n
        firsts = np.repeat(np.arange(n, dtype=np.int64), graph.degrees)
        seconds = (
            np.concatenate([graph.neighbors(v) for v in range(n)])
            if graph.num_edges
            else np.empty(0, dtype=np.int64)
        )
        selfs = np.arange(n, dtype=np.int64)
        keys = np.concatenate([firsts * n + seconds, selfs * n + selfs])
        return cls(n, keys)

    @classmethod
    def from_stochastic(cls, chain: StochasticMatrix) -> "PairSpace":
        """Support pairs of the chain, their transposes, and all self-pairs."""
        n = chain.n
        keys = [np.arange(n, dtype=np.int64) * (n + 1)]
        for v in range(n):
            idx, _ = chain.column(v)
            keys.append(v * n + idx)
            keys.append(idx * n + v)
        return cls(n, np.concatenate(keys))

    @property
    def size(self) -> int:
        return self._keys.size

    def index_of(self, first, second) -> np.ndarray:
        """Positions of the pairs (first, second); raises if any is absent."""
        q = np.asarray(first, dtype=np.int64) * self.n + np.asarray(second, dtype=np.int64)
        pos = np.searchsorted(self._keys, q)
        bad = (pos >= self._keys.size) | (self._keys[np.minimum(pos, self._keys.size - 1)] != q)
        if np.any(bad):
            missing = np.atleast_1d(q)[np.atleast_1d(bad)][0]
            raise KeyError(f"pair ({missing // self.n}, {missing % self.n}) not in pair space")
        return pos

    def __eq__(self, other) -> bool:
        if not isinstance(other, PairSpace):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._keys, other._keys)

    def __repr__(self) -> str:
        return f"PairSpace(n={self.n}, size={self.size})"


class WalkState:
    """Real amplitude vector over a PairSpace."""

    __slots__ = ("space", "amps")

    def __init__(self, space: PairSpace, amps: np.ndarray):
        amps = np.asarray(amps, dtype=np.float64)
        if amps.shape != (space.size,):
            raise ValueError(f"amplitude vector has shape {amps.shape}, expected ({space.size},)")
        self.space = space
        self.amps = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "WalkState":
        return WalkState(self.space, self.amps.copy())

    def __repr__(self) -> str:
        return f"WalkState(n={self.space.n}, size={self.space.size}, norm={self.norm():.6f})"


def _scatter_sqrt_columns(space: PairSpace, chain: StochasticMatrix) -> np.ndarray:
    """Vector a with a[(v, w)] = sqrt(chain(w, v)) over the pair space."""
    out = np.zeros(space.size)
    for v in range(chain.n):
        idx, wts = chain.column(v)
        out[space.index_of(np.full(idx.size, v, dtype=np.int64), idx)] = np.sqrt(wts)
    return out


class WalkOperator:
    """One search-walk step: chain reflections composed with marked-phase oracles.

    Holds the quantized chain P and the marked set S. reflect_first and
    reflect_second expose the bare reflections R1 and R2 = Swap R1 Swap
    (each an involution); apply performs R2 Q2 R1 Q1, the search step whose
    marked-block action is the negated Grover coin.
    """

    def __init__(
        self,
        chain: StochasticMatrix,
        marked: Iterable[int] = (),
        space: Optional[PairSpace] = None,
    ):
        if space is None:
            space = PairSpace.from_stochastic(chain)
        elif space.n != chain.n:
            raise ValueError(f"pair space is on {space.n} vertices, chain on {chain.n}")
        marked = {int(v) for v in marked}
        if not all(0 <= v < chain.n for v in marked):
            raise ValueError(f"marked set {sorted(marked)} out of range for n={chain.n}")
        self.chain = chain
        self.marked = frozenset(marked)
        self.space = space
        self._profile = _scatter_sqrt_columns(space, chain)  # raises if space lacks support
        flags = np.zeros(chain.n, dtype=bool)
        flags[sorted(marked)] = True
        self._sign = np.where(flags[space.first], -1.0, 1.0)
        self._compatible_ids = {id(space)}

    def _check_space(self, state: WalkState) -> None:
        if id(state.space) in self._compatible_ids:
            return
        if state.space == self.space:
            self._compatible_ids.add(id(state.space))
            return
        raise ValueError("state pair space does not match the operator pair space")

    def _reflect(self, amps: np.ndarray) -> np.ndarray:
        overlap = np.bincount(self.space.first, weights=self._profile * amps, minlength=self.space.n)
        return (2.0 * overlap[self.space.first]) * self._profile - amps

    def reflect_first(self, state: WalkState) -> WalkState:
        """Apply the bare reflection R1 only (exposed for involution checks)."""
        self._check_space(state)
        return WalkState(self.space, self._reflect(state.amps))

    def reflect_second(self, state: WalkState) -> WalkState:
        """Apply the bare reflection R2 = Swap R1 Swap only."""
        self._check_space(state)
        sw = self.space.swap_index
        return WalkState(self.space, self._reflect(state.amps[sw])[sw])

    def apply(self, state: WalkState) -> WalkState:
        """One full search step R2 Q2 R1 Q1; raises on norm drift beyond 1e-8."""
        self._check_space(state)
        sw = self.space.swap_index
        # R2 Q2 R1 Q1 = Swap (R1 Q1) Swap (R1 Q1) since Swap is an involution
        amps = state.amps
        for _ in range(2):
            amps = self._reflect(self._sign * amps)[sw]
        norm_in = float(np.linalg.norm(state.amps))
        norm_out = float(np.linalg.norm(amps))
        if abs(norm_out - norm_in) > NORM_DRIFT_LIMIT * max(1.0, norm_in):
            raise NumericalStabilityError(
                f"walk step changed the state norm from {norm_in} to {norm_out}"
            )
        return WalkState(self.space, amps)


def apply_walk(operator: WalkOperator, state: WalkState) -> WalkState:
    """Functional alias for one walk step."""
    return operator.apply(state)


def initial_state(
    chain: StochasticMatrix, n: Optional[int] = None, space: Optional[PairSpace] = None
) -> WalkState:
    """Uniform superposition of column profiles: amp(v, w) = sqrt(P(w, v)) / sqrt(n).

    The first-register marginal is exactly uniform, so any marked set S
    starts at success probability |S|/n.
    """
    if n is not None and n != chain.n:
        raise ValueError(f"chain is on {chain.n} vertices, expected {n}")
    if space is None:
        space = PairSpace.from_stochastic(chain)
    return WalkState(space, _scatter_sqrt_columns(space, chain) / math.sqrt(chain.n))


def success_probability(state: WalkState, marked: Iterable[int]) -> float:
    """Probability that measuring the first register lands in the marked set.

    Clamped to 1.0: a unit state's marked mass can overshoot by float dust.
    """
    flags = np.zeros(state.space.n, dtype=bool)
    flags[[int(v) for v in marked]] = True
    sel = flags[state.space.first]
    return min(float(np.dot(state.amps[sel], state.amps[sel])), 1.0)


def probability_trace(
    graph: Graph,
    marked: Iterable[int],
    t_max: int,
    chain: Optional[StochasticMatrix] = None,
) -> np.ndarray:
    """Success probabilities p(0..t_max) of the search walk for the marked set.

    Builds the search step from the chain (uniform by default) with the
    marked-set oracles and starts from the uniform column superposition,
    so p(0) = |S|/n.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")
    marked = sorted({int(v) for v in marked})
    if not marked:
        raise ValueError("marked set must be nonempty")
    if chain is None:
        chain = uniform_stochastic(graph)
    elif chain.n != graph.n:
        raise ValueError(f"chain is on {chain.n} vertices, graph on {graph.n}")
    space = PairSpace.from_graph(graph)
    operator = WalkOperator(chain, marked, space=space)
    state = initial_state(chain, space=space)
    probs = np.empty(t_max + 1)
    probs[0] = success_probability(state, marked)
    for t in range(1, t_max + 1):
        state = operator.apply(state)
        probs[t] = success_probability(state, marked)
    return probs
