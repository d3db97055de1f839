"""Barabasi-Albert scale-free graphs and topology diagnostics.

Graphs are grown by preferential attachment: a complete seed clique on m0
nodes, then each new node attaches to m distinct existing nodes chosen with
probability proportional to current degree. The grown graph is immutable and
stored in CSR form (indptr/indices) so simulation code can share it read-only
across runs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DisconnectedGraphError, FitError, ParameterError
from .rng import rng_from_seed


@dataclass(frozen=True)
class NetworkParams:
    """Parameters of the preferential-attachment growth process.

    m0 defaults to m + 1, the smallest clique in which every seed node
    already has degree >= m.
    """

    n: int
    m: int
    m0: int = -1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m0 == -1:
            object.__setattr__(self, "m0", self.m + 1)
        if self.n < 2:
            raise ParameterError(f"need n >= 2, got {self.n}")
        if self.m < 1:
            raise ParameterError(f"need m >= 1, got {self.m}")
        if not (self.m <= self.m0 <= self.n):
            raise ParameterError(
                f"need m <= m0 <= n, got m={self.m}, m0={self.m0}, n={self.n}"
            )


class Graph:
    """Immutable simple undirected graph in CSR form.

    adjacency lists are sorted by neighbor id; edges are stored twice
    (once per endpoint).
    """

    __slots__ = ("n", "indptr", "indices")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = n
        self.indptr = indptr
        self.indices = indices

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from an edge list; rejects self-loops and duplicates."""
        pairs = set()
        us, vs = [], []
        for u, v in edges:
            if u == v:
                raise ParameterError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u},{v}) outside 0..{n - 1}")
            key = (u, v) if u < v else (v, u)
            if key in pairs:
                raise ParameterError(f"duplicate edge {key}")
            pairs.add(key)
            us.append(u)
            vs.append(v)
        return cls._from_half_edges(n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))

    @classmethod
    def _from_half_edges(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        a = np.concatenate([u, v])
        b = np.concatenate([v, u])
        order = np.lexsort((b, a))
        indices = b[order]
        degrees = np.bincount(a, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        return cls(n, indptr, indices.astype(np.int64))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (u, v) with u < v, in lexicographic order."""
        out = []
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    out.append((u, int(v)))
        return out

    def check_invariants(self) -> None:
        """Raises AssertionError if the graph is not simple and symmetric."""
        seen = set()
        for u in range(self.n):
            nbrs = self.neighbors(u)
            assert np.all(np.diff(nbrs) > 0), f"unsorted or duplicate neighbors at {u}"
            assert u not in nbrs, f"self-loop at {u}"
            for v in nbrs:
                seen.add((u, int(v)))
        for u, v in seen:
            assert (v, u) in seen, f"asymmetric edge ({u},{v})"


@dataclass(frozen=True)
class DegreeFit:
    """Power-law exponent fitted to the degree CCDF by log-log regression.

    gamma_hat estimates the density exponent (CCDF slope magnitude + 1);
    prefactor_hat is the empirical CCDF amplitude exp(intercept), reported
    but not validated.
    """

    gamma_hat: float
    k_min_used: int
    r2: float
    prefactor_hat: float = field(default=float("nan"))

    def __post_init__(self) -> None:
        if not self.gamma_hat > 1:
            raise FitError(f"fitted exponent must exceed 1, got {self.gamma_hat}")


def generate_ba(params: NetworkParams, rng: np.random.Generator | None = None) -> Graph:
    """Grow a Barabasi-Albert graph.

    Starts from a complete graph on m0 nodes; each subsequent node picks m
    distinct targets by sampling uniformly from a flat multiset in which
    every node id is repeated once per unit of degree (duplicates within one
    node's picks are rejected and redrawn). Deterministic given the seed.
    """
    if rng is None:
        rng = rng_from_seed(params.seed)
    n, m, m0 = params.n, params.m, params.m0

    us: list[int] = []
    vs: list[int] = []
    for i in range(m0):
        for j in range(i + 1, m0):
            us.append(i)
            vs.append(j)
    # One entry per unit of degree keeps picks exactly degree-proportional.
    pool: list[int] = [i for i in range(m0) for _ in range(m0 - 1)]

    for new in range(m0, n):
        chosen: list[int] = []
        taken: set[int] = set()
        while len(chosen) < m:
            t = pool[int(rng.integers(0, len(pool)))]
            if t not in taken:
                taken.add(t)
                chosen.append(t)
        for t in chosen:
            us.append(t)
            vs.append(new)
        pool.extend(chosen)
        pool.extend([new] * m)

    return Graph._from_half_edges(n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))


def expected_edge_count(params: NetworkParams) -> int:
    """Edge count forced by the construction: m0(m0-1)/2 + m(n-m0)."""
    return params.m0 * (params.m0 - 1) // 2 + params.m * (params.n - params.m0)


def degree_ccdf(g: Graph) -> list[tuple[int, float]]:
    """Complementary CDF of the degree sequence: (k, fraction of nodes with degree >= k)."""
    if g.n == 0:
        raise ParameterError("empty graph")
    ks, counts = np.unique(g.degrees, return_counts=True)
    tail = np.cumsum(counts[::-1])[::-1]
    return [(int(k), float(t) / g.n) for k, t in zip(ks, tail)]


def fit_power_law(ccdf: Sequence[tuple[int, float]], k_min: int) -> DegreeFit:
    """Least-squares line through (log k, log CCDF(k)) for k >= k_min.

    gamma_hat = 1 + |slope|, mapping the CCDF slope back to the density
    exponent. Requires at least 5 usable points.
    """
    pts = [(k, f) for k, f in ccdf if k >= k_min and f > 0]
    if len(pts) < 5:
        raise FitError(f"need >= 5 CCDF points with k >= {k_min}, got {len(pts)}")
    logk = np.log(np.array([k for k, _ in pts], dtype=float))
    logf = np.log(np.array([f for _, f in pts], dtype=float))
    slope, intercept = np.polyfit(logk, logf, 1)
    pred = slope * logk + intercept
    ss_res = float(np.sum((logf - pred) ** 2))
    ss_tot = float(np.sum((logf - logf.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return DegreeFit(
        gamma_hat=1.0 + abs(float(slope)),
        k_min_used=k_min,
        r2=r2,
        prefactor_hat=float(np.exp(intercept)),
    )


def _bfs_distances(g: Graph, src: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[src] = 0
    q = deque([src])
    indptr, indices = g.indptr, g.indices
    while q:
        u = q.popleft()
        du = dist[u]
        for v in indices[indptr[u]:indptr[u + 1]]:
            if dist[v] < 0:
                dist[v] = du + 1
                q.append(int(v))
    return dist


def approx_diameter(g: Graph) -> int:
    """Double-sweep BFS diameter estimate.

    BFS from node 0 finds a farthest node u; BFS from u finds a farthest
    node v; a final BFS from v completes the sweep. The result is a lower
    bound on the true diameter, reported as an estimate.
    """
    d0 = _bfs_distances(g, 0)
    if (d0 < 0).any():
        raise DisconnectedGraphError("graph is not connected")
    u = int(np.argmax(d0))
    d1 = _bfs_distances(g, u)
    v = int(np.argmax(d1))
    d2 = _bfs_distances(g, v)
    return int(max(d1.max(), d2.max()))


def write_edge_list(g: Graph, out: TextIO, m: int, seed: int) -> None:
    """Emit the bit-exact edge-list format: header "N m seed", then "u v" rows.

    Rows have u < v and are sorted lexicographically.
    """
    out.write(f"{g.n} {m} {seed}\n")
    for u, v in g.edges():
        out.write(f"{u} {v}\n")


def read_edge_list(inp: TextIO) -> tuple[Graph, NetworkParams]:
    """Parse the edge-list format written by write_edge_list."""
    header = inp.readline().split()
    if len(header) != 3:
        raise ParameterError("edge-list header must be 'N m seed'")
    n, m, seed = int(header[0]), int(header[1]), int(header[2])
    edges = []
    for line in inp:
        line = line.strip()
        if not line:
            continue
        u, v = line.split()
        edges.append((int(u), int(v)))
    return Graph.from_edges(n, edges), NetworkParams(n=n, m=m, seed=seed)
