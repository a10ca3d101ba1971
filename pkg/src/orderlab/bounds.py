"""Closed-form expectation and tail bounds, as pure functions of parameters.

Every tail evaluator clamps to [0, 1]; a clamped (vacuous) value is exactly
1.0, so callers can flag it.  Expectation bounds for the false-negative rate
are clamped the same way since the rate lives in [0, 1].  The Chernoff slack
defaults to delta_d = d**-0.5 wherever one is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Dag, ParameterError, reachability


def default_delta(d: int) -> float:
    return 1.0 / math.sqrt(d)


def _clamp(x: float) -> float:
    return min(1.0, float(x))


def _check_unit(name: str, x: float, lo_open: bool = True, hi_open: bool = True) -> None:
    lo_bad = x <= 0.0 if lo_open else x < 0.0
    hi_bad = x >= 1.0 if hi_open else x > 1.0
    if lo_bad or hi_bad:
        raise ParameterError(f"{name} must lie in the unit interval, got {x}")


def _check_nonneg(name: str, x: float) -> None:
    if x < 0:
        raise ParameterError(f"{name} must be >= 0, got {x}")


@dataclass
class BoundParams:
    """Inputs shared by the bound table: graph scale, intervention coverage,
    density (exactly one of p_e / c / (m, kappa)), and evaluator knobs."""

    d: int
    p_int: float
    p_e: float | None = None
    c: float | None = None
    m: int | None = None
    kappa: float | None = None
    t: float = 0.1
    delta: float | None = None
    c_e: float = 0.5
    ck_squares: float | None = None

    def resolved_delta(self) -> float:
        return self.delta if self.delta is not None else default_delta(self.d)

    def validate(self) -> None:
        if self.d < 2:
            raise ParameterError("d must be >= 2 for the bound table")
        _check_unit("p_int", self.p_int, lo_open=False, hi_open=False)
        _check_unit("c_e", self.c_e)
        _check_unit("delta", self.resolved_delta())
        _check_nonneg("t", self.t)


def mcdiarmid_tail(t: float, ck_squares: float) -> float:
    """Two-sided bounded-differences tail: 2 exp(-2 t^2 / sum c_k^2), clamped."""
    _check_nonneg("t", t)
    if ck_squares <= 0:
        raise ParameterError(f"ck_squares must be > 0, got {ck_squares}")
    return _clamp(2.0 * math.exp(-2.0 * t * t / ck_squares))


def mcdiarmid_tail_normalized(t: float, ck_squares: float, edge_count: int) -> float:
    """Same tail for the edge-normalized error: the |E|^2 factor sharpens it."""
    if edge_count < 1:
        raise ParameterError(f"edge_count must be >= 1, got {edge_count}")
    return mcdiarmid_tail(t * edge_count, ck_squares)


def _mu_er(d: int, p_e: float) -> float:
    return p_e * d * (d - 1) / 2.0


def er_expectation_fnr(d: int, p_e: float, p_int: float, delta: float | None = None) -> float:
    """Mean-FNR bound for dense ER graphs; decays like 1/d."""
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    delta = default_delta(d) if delta is None else delta
    _check_unit("delta", delta)
    if p_int == 0.0 or p_e == 0.0:
        return 1.0
    lead = 2.0 * (1.0 - p_int) ** 2 / ((1.0 - delta) * p_e * p_int) / (d - 1)
    return _clamp(lead + math.exp(-_mu_er(d, p_e) * delta * delta / 2.0))


def er_dense_g_tail(t: float, d: int, p_e: float, p_int: float, delta: float | None = None) -> float:
    """Chebyshev-type deviation tail for the FNR in dense ER graphs."""
    _check_nonneg("t", t)
    if t == 0.0:
        return 1.0
    delta = default_delta(d) if delta is None else delta
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    _check_unit("delta", delta)
    if p_int == 0.0 or p_e == 0.0:
        return 1.0
    lead = 2.0 * (1.0 - p_int) ** 2 / ((1.0 - delta) * p_e * p_int) / (d - 1)
    return _clamp((lead + math.exp(-_mu_er(d, p_e) * delta * delta / 2.0)) / (t * t))


def sparse_er_expectation_fnr(d: int, c: float, p_int: float, delta: float | None = None) -> float:
    """Mean-FNR bound in the sparse regime p_e = c/d; constant in d."""
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    if c <= 0:
        raise ParameterError(f"c must be > 0, got {c}")
    delta = default_delta(d) if delta is None else delta
    _check_unit("delta", delta)
    if p_int == 0.0:
        return 1.0
    mu = c * (d - 1) / 2.0
    lead = 2.0 * (1.0 - p_int) ** 2 / ((1.0 - delta) * c * p_int) * d / (d - 1)
    return _clamp(lead + math.exp(-mu * delta * delta / 2.0))


def sparse_er_expectation_fnr_limit(c: float, p_int: float) -> float:
    """Large-d limit of the sparse mean-FNR bound, with the refined per-node
    misorientation limit folded in (strictly below the finite-d lead term)."""
    if c <= 0:
        raise ParameterError(f"c must be > 0, got {c}")
    if p_int == 0.0:
        return 1.0
    bracket = 1.0 - (1.0 - math.exp(-p_int * c)) / (p_int * c)
    return _clamp(2.0 * (1.0 - p_int) ** 2 / (c * p_int) * bracket)


def sparse_er_prob_fnr(c_e: float, d: int, c: float, p_int: float, delta: float | None = None) -> float:
    """Tail bound P(FNR >= c_e) in the sparse regime."""
    _check_unit("c_e", c_e)
    if c <= 0:
        raise ParameterError(f"c must be > 0, got {c}")
    delta = default_delta(d) if delta is None else delta
    _check_unit("delta", delta)
    if p_int == 0.0:
        return 1.0
    lead = 2.0 * (1.0 - p_int) ** 2 / ((1.0 - delta) * c_e * c * p_int)
    return _clamp(lead + math.exp(-delta * delta * c * d / 4.0))


@dataclass
class BaBounds:
    f_mean: float  # bound on the expected misorientation count
    g_mean: float  # bound on the expected FNR, clamped to [0, 1]


def ba_expectation_bounds(d: int, m: int, p_int: float) -> BaBounds:
    """Mean bounds for preferential-attachment DAGs: E[f] <= (1-p)^2 m d and
    E[g] <= (1-p)^2."""
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    q = (1.0 - p_int) ** 2
    return BaBounds(f_mean=q * m * d, g_mean=_clamp(q))


def ba_fnr_tail(c_e: float, p_int: float) -> float:
    """Markov tail P(FNR >= c_e) <= (1-p)^2 / c_e for preferential-attachment DAGs."""
    _check_unit("c_e", c_e)
    return _clamp((1.0 - p_int) ** 2 / c_e)


def ba_mcdiarmid_tail(
    t: float, d: int, m: int, beta: float, c_hat: float, normalized: bool = False
) -> float:
    """Deviation tail for preferential-attachment DAGs on the degree-cap event.

    The per-coordinate sensitivity is m + C d^beta with the empirical constant
    ``c_hat`` supplied by the caller (never hard-coded).
    """
    _check_nonneg("t", t)
    if c_hat <= 0:
        raise ParameterError(f"c_hat must be > 0, got {c_hat}")
    cap = m + c_hat * d**beta
    denom = d * (cap / (m * d)) ** 2 if normalized else d * cap**2
    return _clamp(2.0 * math.exp(-2.0 * t * t / denom))


def chernoff_edge_lower(d: int, p_e: float, delta: float) -> float:
    """Lower-tail bound P(|E| < (1-delta) E[|E|]) <= exp(-delta^2 E[|E|] / 2)."""
    _check_unit("delta", delta)
    return _clamp(math.exp(-delta * delta * _mu_er(d, p_e) / 2.0))


def fixed_graph_expectation_fnr(dag: Dag, p_int: float, mode: str = "ancestral") -> float:
    """Mean-FNR bound for one fixed graph under Bernoulli(p_int) interventions.

    Each edge (i, j) stays unforced only if no node in (Anc(j) u {j}) \\ Anc(i)
    is intervened (parent sets instead of ancestor sets in restricted mode).
    Returns NaN for an empty graph.
    """
    _check_unit("p_int", p_int, lo_open=False, hi_open=False)
    if mode not in ("ancestral", "restricted"):
        raise ParameterError(f"unknown mode {mode!r}")
    if dag.edge_count == 0:
        return math.nan
    rel = reachability(dag) if mode == "ancestral" else dag.adjacency
    total = 0.0
    for i, j in dag.edges:
        exponent = 1 + int(np.count_nonzero(rel[:, j] & ~rel[:, i]))
        total += (1.0 - p_int) ** exponent
    return total / dag.edge_count


def warnke_tail(
    t: float, c_list, d_list, gamma_list, p_list, bad_prob: float
) -> tuple[float, float]:
    """Typical bounded-differences tail for 0-1 variables.

    Returns (one-sided tail on the good event, bad-event probability bound):
    with e_k = gamma_k (d_k - c_k), C = max(c_k + e_k), and
    V = sum p_k (1-p_k) (c_k + e_k)^2, the tail is exp(-t^2 / (2V + 2Ct/3))
    and the bad event has probability at most sum bad_prob / gamma_k.
    """
    _check_nonneg("t", t)
    _check_nonneg("bad_prob", bad_prob)
    c_arr = np.asarray(c_list, dtype=float)
    d_arr = np.asarray(d_list, dtype=float)
    g_arr = np.asarray(gamma_list, dtype=float)
    p_arr = np.asarray(p_list, dtype=float)
    if not (c_arr.shape == d_arr.shape == g_arr.shape == p_arr.shape):
        raise ParameterError("coordinate lists must share one length")
    if np.any((g_arr <= 0) | (g_arr > 1)):
        raise ParameterError("every gamma_k must lie in (0, 1]")
    if np.any(d_arr < c_arr):
        raise ParameterError("worst-case constants d_k must dominate typical c_k")
    e_arr = g_arr * (d_arr - c_arr)
    cap = float(np.max(c_arr + e_arr)) if c_arr.size else 0.0
    v = float(np.sum(p_arr * (1.0 - p_arr) * (c_arr + e_arr) ** 2))
    denom = 2.0 * v + 2.0 * cap * t / 3.0
    tail = 1.0 if denom == 0.0 and t == 0.0 else math.exp(-t * t / denom) if denom > 0 else 0.0
    bad = float(np.sum(bad_prob / g_arr)) if g_arr.size else 0.0
    return _clamp(tail), _clamp(bad)


def width_rate_profile(ds, widths) -> np.ndarray:
    """Normalized deviation widths width(d) * sqrt(d) / log(d), used for rate
    checks where the theory fixes the rate but not the constant."""
    ds = np.asarray(ds, dtype=float)
    widths = np.asarray(widths, dtype=float)
    return widths * np.sqrt(ds) / np.log(ds)


def sparse_width_rate_check(ds, widths, slack: float = 1.25) -> bool:
    """True when the normalized widths never exceed ``slack`` times their value
    at the smallest d (nonincreasing up to the slack factor)."""
    prof = width_rate_profile(ds, widths)
    order = np.argsort(np.asarray(ds, dtype=float))
    prof = prof[order]
    return bool(np.all(prof <= slack * prof[0]))
