"""Per-coordinate sensitivity of the misorientation count.

The quantity of interest is how much f = D_top(G, pi_opt(I)) can move when a
single intervention bit flips.  On small graphs this is computed exactly by
re-optimizing over every context (flip-and-reoptimize); for all sizes the
structural bounds apply:

* ancestral mode:  c_k <= |Anc(k)| + |Desc(k)|
* restricted mode: c_k <= in_deg(k) + out_deg(k)
* edge flip:       c_ij = |A_ij| <= in_deg(j),  A_ij = {(k, j) in E : i not in Pa(k)}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Dag, reachability, stats
from .oracle import DEFAULT_DELTA, DEFAULT_EPSILON, default_score_const
from .ordering import (
    EXHAUSTIVE_LIMIT,
    CausalOrder,
    ExhaustiveLimitError,
    d_top,
    search_exact,
)

CONTEXT_LIMIT = 12  # exhaustive context sweep needs 2^(d-1) evaluations


@dataclass
class FlipSensitivity:
    value: int
    exhaustive: bool  # False means sampled contexts: a lower bound only


@dataclass
class LipschitzReport:
    bound_ad: np.ndarray            # |Anc(k)| + |Desc(k)| per node
    bound_io: np.ndarray            # in_deg(k) + out_deg(k) per node
    edge_bound: dict                # (i, j) edge -> in_deg(j)
    max_c_ad: int
    max_c_io: int
    exact_ck: np.ndarray | None = None  # present only when computed exhaustively

    def sum_squares_ad(self) -> float:
        """Denominator fed to the McDiarmid evaluator (ancestral bounds)."""
        return float(np.sum(self.bound_ad.astype(np.float64) ** 2))

    def sum_squares_io(self) -> float:
        return float(np.sum(self.bound_io.astype(np.float64) ** 2))

    def to_json(self) -> str:
        import json

        payload = {
            "nodes": {
                str(k): {
                    "bound_ad": int(self.bound_ad[k]),
                    "bound_io": int(self.bound_io[k]),
                    **({"exact_ck": int(self.exact_ck[k])} if self.exact_ck is not None else {}),
                }
                for k in range(len(self.bound_ad))
            },
            "edges": {f"{i}->{j}": v for (i, j), v in sorted(self.edge_bound.items())},
            "max_c_ad": self.max_c_ad,
            "max_c_io": self.max_c_io,
        }
        return json.dumps(payload, sort_keys=True)


def _weights_int(predicate: np.ndarray, bits: np.ndarray, epsilon: float, delta: float, c: float):
    d = predicate.shape[0]
    w = np.where(predicate, delta + c * d, -epsilon)
    w[~bits.astype(bool), :] = 0.0
    np.fill_diagonal(w, 0.0)
    # Same fixed-point convention as ordering.quantized_weights; magnitudes here
    # are small (d <= CONTEXT_LIMIT), so the full 40-bit shift always fits.
    return np.rint(w * float(2**40)).astype(np.int64)


def f_table(
    dag: Dag,
    mode: str = "ancestral",
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    c: float | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> np.ndarray:
    """f(I) for every intervention vector, indexed by the bitmask sum(I_k 2^k).

    Every entry is an exact re-optimization with the same enumeration order and
    tie-break as the exact search.  One pass over the permutations serves all
    2^d masks at once: the score of a mask is the sum of its intervened nodes'
    row scores, so per-permutation row scores are shared across masks.
    """
    from .ordering import _perm_chunks, _unrank_permutation

    if c is None:
        c = default_score_const(epsilon, delta)
    d = dag.d
    if d > limit:
        raise ExhaustiveLimitError(f"f_table needs exact search; d={d} exceeds {limit}")
    predicate = reachability(dag) if mode == "ancestral" else dag.adjacency
    all_bits = np.ones(d, dtype=np.uint8)
    w_full = _weights_int(predicate, all_bits, epsilon, delta, c)

    n_masks = 2**d
    mask_bits = ((np.arange(n_masks)[None, :] >> np.arange(d)[:, None]) & 1).astype(np.int64)
    best_val = np.full(n_masks, np.iinfo(np.int64).min, dtype=np.int64)
    best_idx = np.zeros(n_masks, dtype=np.int64)

    offset = 0
    for block in _perm_chunks(d, 20_000):
        rows = np.empty((block.shape[0], d), dtype=np.int64)
        for i in range(d):
            forward = block[:, i:i + 1] < block
            rows[:, i] = forward @ w_full[i]
        scores = rows @ mask_bits  # (chunk, n_masks)
        idx = np.argmax(scores, axis=0)
        vals = scores[idx, np.arange(n_masks)]
        better = vals > best_val
        best_val[better] = vals[better]
        best_idx[better] = idx[better] + offset
        offset += block.shape[0]

    out = np.empty(n_masks, dtype=np.int64)
    order_cache: dict[int, int] = {}
    for mask in range(n_masks):
        index = int(best_idx[mask])
        if index not in order_cache:
            perm = _unrank_permutation(d, index)
            order = CausalOrder(perm=perm, provenance="exact")
            order_cache[index] = d_top(dag, order)
        out[mask] = order_cache[index]
    return out


def exact_ck(
    dag: Dag,
    iv,
    k: int,
    mode: str = "ancestral",
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    c: float | None = None,
    context_limit: int = CONTEXT_LIMIT,
    n_samples: int = 128,
    seed: int = 0,
    enum_limit: int = EXHAUSTIVE_LIMIT,
) -> FlipSensitivity:
    """Max change of f when bit k flips, over intervention contexts.

    Exhaustive over all 2^(d-1) contexts when d <= context_limit; otherwise
    falls back to sampled contexts (always including ``iv``'s own context) and
    reports a lower bound.  Needs the exact optimizer, so d must stay within
    the enumeration limit either way.
    """
    if c is None:
        c = default_score_const(epsilon, delta)
    if dag.d > enum_limit:
        raise ExhaustiveLimitError(
            f"exact_ck re-optimizes exactly; unavailable for d={dag.d} > {enum_limit}"
            " (use the structural bounds from bounds_report)"
        )
    if dag.d <= context_limit:
        table = f_table(dag, mode=mode, epsilon=epsilon, delta=delta, c=c, limit=enum_limit)
        masks = np.arange(2**dag.d)
        lo = masks[(masks >> k) & 1 == 0]
        return FlipSensitivity(
            value=int(np.max(np.abs(table[lo] - table[lo | (1 << k)]))),
            exhaustive=True,
        )

    predicate = reachability(dag) if mode == "ancestral" else dag.adjacency
    rng = np.random.default_rng(seed)
    base = iv.bits.astype(np.uint8).copy()
    contexts = [base] + [rng.integers(0, 2, size=dag.d, dtype=np.uint8) for _ in range(n_samples - 1)]
    worst = 0
    for bits in contexts:
        pair = []
        for val in (0, 1):
            b = bits.copy()
            b[k] = val
            w_q = _weights_int(predicate, b, epsilon, delta, c)
            pair.append(d_top(dag, search_exact(w_q, limit=enum_limit)))
        worst = max(worst, abs(pair[0] - pair[1]))
    return FlipSensitivity(value=int(worst), exhaustive=False)


def lipschitz_constants(dag: Dag, mode: str = "ancestral", **kwargs) -> np.ndarray:
    """Exhaustive exact c_k for every node at once (shares one f table)."""
    table = f_table(dag, mode=mode, **kwargs)
    masks = np.arange(2**dag.d)
    out = np.empty(dag.d, dtype=np.int64)
    for k in range(dag.d):
        lo = masks[(masks >> k) & 1 == 0]
        out[k] = np.max(np.abs(table[lo] - table[lo | (1 << k)]))
    return out


def edge_flip_set(dag: Dag, i: int, j: int) -> set[tuple[int, int]]:
    """Edges into j whose orientation evidence can change when edge (i, j) flips."""
    adj = dag.adjacency
    return {(int(k), int(j)) for k in np.flatnonzero(adj[:, j]) if not adj[i, k]}


def affected_edge_count(dag: Dag, k: int, mode: str = "ancestral") -> int:
    """Number of edges whose sufficient orientation condition involves node k:
    edges into k, plus edges (i, j) where k relates to j but not to i (by path
    in ancestral mode, by direct edge in restricted mode).

    In ancestral mode this counts every edge whose orientation the optimizer
    can change when bit k flips, so it caps the exact flip sensitivity.  The
    ancestor/descendant sum |Anc(k)| + |Desc(k)| undercounts when several
    in-edges share one descendant, and in restricted mode reordering among
    unforced descendants can flip edges outside this set entirely.
    """
    rel = reachability(dag) if mode == "ancestral" else dag.adjacency
    count = 0
    for u, v in dag.edges:
        if v == k or (rel[k, v] and not rel[k, u]):
            count += 1
    return count


def bounds_report(dag: Dag, exact: bool = False, mode: str = "ancestral", **kwargs) -> LipschitzReport:
    """Structural per-node and per-edge sensitivity bounds; optionally also the
    exact exhaustive c_k values (small graphs only)."""
    st = stats(dag)
    bound_ad = (st.anc_sizes + st.desc_sizes).astype(np.int64)
    bound_io = (st.in_deg + st.out_deg).astype(np.int64)
    edge_bound = {(int(u), int(v)): int(st.in_deg[v]) for u, v in dag.edges}
    report = LipschitzReport(
        bound_ad=bound_ad,
        bound_io=bound_io,
        edge_bound=edge_bound,
        max_c_ad=int(bound_ad.max()) if dag.d else 0,
        max_c_io=int(bound_io.max()) if dag.d else 0,
    )
    if exact:
        report.exact_ck = lipschitz_constants(dag, mode=mode, **kwargs)
    return report
