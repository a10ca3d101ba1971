"""Random DAG ensembles and structural queries.

Three generators are provided, all seeded and deterministic:

* ``gen_er(d, p_e, seed)``      -- dense Erdos-Renyi DAG: a uniformly random
  arrival order, each forward pair kept independently with probability p_e.
* ``gen_sparse_er(d, c, seed)`` -- same construction with p_e = c/d, so the
  expected total degree per node stays near c as d grows.
* ``gen_ba(d, m, kappa, seed)`` -- growth with preferential attachment and
  initial attractiveness kappa; every edge points from older to younger node.

Nodes are labeled 0..d-1.  The generative order is stored separately in
``Dag.arrival`` and is independent of the labels (BA graphs are relabeled by a
uniform permutation after growth), so downstream order optimizers that break
ties by label cannot read the true order out of the labeling.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class ParameterError(ValueError):
    """A generator or evaluator was called with out-of-range parameters."""


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(eq=False)
class Dag:
    """A directed acyclic graph with an explicit generative order.

    ``arrival[t]`` is the label of the node that arrived at step t; every edge
    (i, j) satisfies position(i) < position(j) in that order, which makes
    acyclicity hold by construction.  ``edges`` is an (n_edges, 2) int array
    sorted lexicographically.
    """

    d: int
    arrival: np.ndarray
    edges: np.ndarray
    model_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.arrival = np.asarray(self.arrival, dtype=np.int64)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def positions(self) -> np.ndarray:
        """positions[node] = arrival step of that node."""
        pos = np.empty(self.d, dtype=np.int64)
        pos[self.arrival] = np.arange(self.d)
        return pos

    @cached_property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.d, self.d), dtype=bool)
        if self.edge_count:
            adj[self.edges[:, 0], self.edges[:, 1]] = True
        return adj

    @cached_property
    def parents(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.adjacency[:, j]) for j in range(self.d)]

    @cached_property
    def children(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.adjacency[i, :]) for i in range(self.d)]

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.edges[:, 1], minlength=self.d).astype(np.int64)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=self.d).astype(np.int64)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def validate(self) -> None:
        """Raise if any structural invariant is violated."""
        if sorted(self.arrival.tolist()) != list(range(self.d)):
            raise ValueError("arrival is not a permutation of the nodes")
        if self.edge_count:
            u, v = self.edges[:, 0], self.edges[:, 1]
            if np.any(u == v):
                raise ValueError("self-loop present")
            if np.any(self.positions[u] >= self.positions[v]):
                raise ValueError("edge against the arrival order")
            if len({(int(a), int(b)) for a, b in self.edges}) != self.edge_count:
                raise ValueError("duplicate edge present")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return (
            self.d == other.d
            and np.array_equal(self.arrival, other.arrival)
            and np.array_equal(self.edges, other.edges)
            and self.model_meta == other.model_meta
        )


@dataclass
class GraphStats:
    in_deg: np.ndarray
    out_deg: np.ndarray
    max_total_deg: int
    edge_count: int
    anc_sizes: np.ndarray
    desc_sizes: np.ndarray


def _sorted_edges(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    edges = np.stack([u, v], axis=1).astype(np.int64)
    if edges.shape[0]:
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]
    return edges


def gen_er(d: int, p_e: float, seed) -> Dag:
    """Erdos-Renyi DAG: uniform arrival order, forward pairs kept w.p. p_e."""
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if not 0.0 <= p_e <= 1.0:
        raise ParameterError(f"p_e must lie in [0, 1], got {p_e}")
    rng = _rng(seed)
    arrival = rng.permutation(d)
    a_idx, b_idx = np.triu_indices(d, k=1)  # pairs of arrival steps, a < b
    mask = rng.random(a_idx.size) < p_e
    edges = _sorted_edges(arrival[a_idx[mask]], arrival[b_idx[mask]])
    meta = {"model": "er", "p_e": float(p_e), "seed": seed}
    return Dag(d=d, arrival=arrival, edges=edges, model_meta=meta)


def gen_sparse_er(d: int, c: float, seed) -> Dag:
    """Sparse Erdos-Renyi DAG with p_e = c/d (constant expected degree)."""
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if c <= 0:
        raise ParameterError(f"c must be > 0, got {c}")
    p_e = c / d
    if p_e > 1.0:
        raise ParameterError(f"c/d = {p_e} exceeds 1; lower c or raise d")
    dag = gen_er(d, p_e, seed)
    dag.model_meta = {"model": "sparse_er", "c": float(c), "p_e": p_e, "seed": seed}
    return dag


def gen_ba(d: int, m: int, kappa: float, seed) -> Dag:
    """Preferential-attachment DAG grown from an empty seed.

    Each arriving node attaches to min(m, #existing) distinct existing nodes,
    sampled without replacement with probability proportional to (number of
    times already chosen + kappa); weights are not updated within one node's
    batch.  Counting only received attachments (a node's own birth edges carry
    no attractiveness) gives the degree exponent gamma = 2 + kappa/m; folding
    them in would shift it to 3 + kappa/m.  Edges point old -> new, so
    |E| = m*d - m*(m+1)/2 exactly for d >= m.  Labels are assigned by a
    uniform random permutation after growth.
    """
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if kappa <= 0:
        raise ParameterError(f"kappa must be > 0, got {kappa}")
    rng = _rng(seed)
    labels = rng.permutation(d)  # labels[t] = label of the t-th arrival

    chosen = np.zeros(d, dtype=np.int64)  # attachment counts, by arrival step
    src: list[int] = []
    dst: list[int] = []
    for t in range(1, d):
        k = min(m, t)
        weights = chosen[:t] + kappa
        probs = weights / weights.sum()
        targets = rng.choice(t, size=k, replace=False, p=probs)
        for s in targets:
            src.append(int(s))
            dst.append(t)
        chosen[targets] += 1

    u = labels[np.asarray(src, dtype=np.int64)] if src else np.empty(0, dtype=np.int64)
    v = labels[np.asarray(dst, dtype=np.int64)] if dst else np.empty(0, dtype=np.int64)
    meta = {"model": "ba", "m": int(m), "kappa": float(kappa), "seed": seed}
    return Dag(d=d, arrival=labels, edges=_sorted_edges(u, v), model_meta=meta)


def gamma_of(m: int, kappa: float) -> tuple[float, float]:
    """Degree exponent gamma = 2 + kappa/m and deviation exponent beta = 1/(gamma-1)."""
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if kappa <= 0:
        raise ParameterError(f"kappa must be > 0, got {kappa}")
    gamma = 2.0 + kappa / m
    return gamma, 1.0 / (gamma - 1.0)


def reachability(dag: Dag) -> np.ndarray:
    """Boolean matrix R with R[i, j] = True iff a directed path i ~> j exists.

    Irreflexive (no node reaches itself).  Computed by one sweep over nodes in
    reverse arrival order, OR-ing each node's children rows.
    """
    reach = np.zeros((dag.d, dag.d), dtype=bool)
    adj = dag.adjacency
    for node in dag.arrival[::-1]:
        kids = dag.children[int(node)]
        if kids.size:
            reach[node] = adj[node] | reach[kids].any(axis=0)
    return reach


def stats(dag: Dag) -> GraphStats:
    """Per-node degrees, ancestor/descendant set sizes, max total degree."""
    in_deg = dag.in_degrees()
    out_deg = dag.out_degrees()
    reach = reachability(dag)
    return GraphStats(
        in_deg=in_deg,
        out_deg=out_deg,
        max_total_deg=int((in_deg + out_deg).max()) if dag.d else 0,
        edge_count=dag.edge_count,
        anc_sizes=reach.sum(axis=0).astype(np.int64),
        desc_sizes=reach.sum(axis=1).astype(np.int64),
    )


def estimate_ba_degree_constant(
    m: int, kappa: float, d: int, n_seeds: int = 200, seed: int = 0
) -> float:
    """Empirical 99th percentile of max_total_deg / d**beta over seeded draws.

    The high-probability degree cap max_total_deg <= m + C * d**beta only
    asserts that some constant C exists; this estimate stands in for it.
    """
    _, beta = gamma_of(m, kappa)
    rng = _rng(seed)
    seeds = rng.integers(0, 2**63, size=n_seeds)
    maxdegs = np.empty(n_seeds, dtype=np.float64)
    for i, s in enumerate(seeds):
        dag = gen_ba(d, m, kappa, seed=int(s))
        maxdegs[i] = (dag.in_degrees() + dag.out_degrees()).max()
    return float(np.percentile(maxdegs / d**beta, 99))


def canonical_topo_order(d: int, edges: np.ndarray) -> np.ndarray:
    """Smallest-label-first topological order (Kahn with a min-heap).

    Raises ValueError if the edge set contains a cycle.
    """
    succ: list[list[int]] = [[] for _ in range(d)]
    indeg = [0] * d
    for u, v in np.asarray(edges).reshape(-1, 2):
        succ[int(u)].append(int(v))
        indeg[int(v)] += 1
    ready = [n for n in range(d) if indeg[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for w in succ[n]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(order) != d:
        raise ValueError("edge set contains a cycle; not a DAG")
    return np.asarray(order, dtype=np.int64)


def _format_param(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def graph_text(dag: Dag) -> str:
    """Edge-list text format: one header line, then one "i j" pair per line."""
    meta = dag.model_meta
    model = meta.get("model", "custom")
    parts = [f"d={dag.d}", f"model={model}"]
    for key in ("p_e", "c", "m", "kappa"):
        if key in meta and not (model == "sparse_er" and key == "p_e"):
            parts.append(f"{key}={_format_param(meta[key])}")
    parts.append(f"seed={meta.get('seed', 'none')}")
    lines = [" ".join(parts)]
    lines += [f"{int(u)} {int(v)}" for u, v in dag.edges]
    return "\n".join(lines) + "\n"


def save_graph(dag: Dag, path) -> None:
    Path(path).write_text(graph_text(dag))


def load_graph(path) -> Dag:
    """Read the edge-list format back.  The arrival order is reconstructed as
    the smallest-label-first topological order (the file does not store it)."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or "=" not in lines[0]:
        raise ValueError(f"{path}: missing header line")
    meta: dict = {}
    for token in lines[0].split():
        key, _, val = token.partition("=")
        if key == "d":
            meta["d"] = int(val)
        elif key in ("p_e", "c", "kappa"):
            meta[key] = float(val)
        elif key == "m":
            meta[key] = int(val)
        elif key == "seed":
            meta["seed"] = None if val == "none" else int(val)
        elif key == "model":
            meta["model"] = val
    if "d" not in meta:
        raise ValueError(f"{path}: header does not declare d")
    d = meta.pop("d")
    pairs = []
    for ln, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"{path}:{ln}: expected 'i j', got {line!r}")
        pairs.append((int(fields[0]), int(fields[1])))
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    arrival = canonical_topo_order(d, edges)
    dag = Dag(d=d, arrival=arrival, edges=_sorted_edges(edges[:, 0], edges[:, 1]), model_meta=meta)
    dag.validate()
    return dag
