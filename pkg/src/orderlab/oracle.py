"""Intervention sampling and the synthetic distance oracle.

The oracle replaces interventional data: for every intervened source i and
every other node j it materializes a distance D[i, j] whose comparison with
the threshold epsilon encodes the graph exactly:

* ancestral mode:  D[i, j] > epsilon  iff a directed path i ~> j exists;
* restricted mode: D[i, j] > epsilon  iff (i, j) is an edge.

The default oracle is noiseless (0 below threshold, epsilon + delta above).
An opt-in noise level eta < 1 jitters both sides without ever crossing the
threshold, so the biconditional survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import Dag, ParameterError, reachability

DEFAULT_EPSILON = 0.1
DEFAULT_DELTA = 0.4
MODES = ("ancestral", "restricted")


def default_score_const(epsilon: float = DEFAULT_EPSILON, delta: float = DEFAULT_DELTA) -> float:
    """Default score constant; anything > epsilon is admissible."""
    return epsilon + delta + 0.1


@dataclass
class InterventionVector:
    bits: np.ndarray  # 0/1 per node
    p_int: float

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)

    @property
    def d(self) -> int:
        return int(self.bits.size)

    def targets(self) -> np.ndarray:
        return np.flatnonzero(self.bits)


@dataclass
class DistanceOracle:
    epsilon: float
    delta: float
    mode: str
    matrix: np.ndarray       # (d, d); rows of non-intervened nodes are not part of the contract
    intervened: np.ndarray   # bool per node

    @property
    def d(self) -> int:
        return int(self.matrix.shape[0])

    def supra(self) -> np.ndarray:
        """Boolean (d, d): defined entries strictly above the threshold."""
        out = self.matrix > self.epsilon
        out[~self.intervened, :] = False
        np.fill_diagonal(out, False)
        return out

    def entries(self):
        """Yield (i, j, D_ij) for every defined entry, sorted by (i, j)."""
        for i in np.flatnonzero(self.intervened):
            for j in range(self.d):
                if j != i:
                    yield int(i), int(j), float(self.matrix[i, j])

    def dump_csv(self, path) -> None:
        lines = [f"# epsilon={self.epsilon!r} delta={self.delta!r} mode={self.mode}", "i,j,d_ij"]
        lines += [f"{i},{j},{v!r}" for i, j, v in self.entries()]
        Path(path).write_text("\n".join(lines) + "\n")


def sample_interventions(d: int, p_int: float, seed) -> InterventionVector:
    """Independent Bernoulli(p_int) intervention indicators."""
    if not 0.0 <= p_int <= 1.0:
        raise ParameterError(f"p_int must lie in [0, 1], got {p_int}")
    rng = np.random.default_rng(seed)
    bits = (rng.random(d) < p_int).astype(np.uint8)
    return InterventionVector(bits=bits, p_int=float(p_int))


def build_oracle(
    dag: Dag,
    iv: InterventionVector,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    mode: str = "ancestral",
    eta: float = 0.0,
    seed=None,
) -> DistanceOracle:
    """Materialize the distance oracle for the intervened nodes of ``iv``.

    With eta = 0 every defined entry is exactly 0 or epsilon + delta.  With
    0 < eta < 1, sub-threshold entries are Uniform[0, epsilon*(1-eta)] and
    supra-threshold entries Uniform[epsilon+delta*(1-eta), epsilon+delta*(1+eta)].
    """
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if delta <= 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if not 0.0 <= eta < 1.0:
        raise ParameterError(f"eta must lie in [0, 1), got {eta}")

    predicate = reachability(dag) if mode == "ancestral" else dag.adjacency
    intervened = iv.bits.astype(bool)
    matrix = np.zeros((dag.d, dag.d), dtype=np.float64)
    matrix[predicate] = epsilon + delta
    if eta > 0.0:
        rng = np.random.default_rng(seed)
        noise = rng.random((dag.d, dag.d))
        sub = matrix == 0.0
        matrix[sub] = noise[sub] * epsilon * (1.0 - eta)
        supra = ~sub
        matrix[supra] = epsilon + delta * (1.0 - eta) + noise[supra] * 2.0 * delta * eta
    matrix[~intervened, :] = 0.0
    np.fill_diagonal(matrix, 0.0)
    return DistanceOracle(
        epsilon=float(epsilon), delta=float(delta), mode=mode,
        matrix=matrix, intervened=intervened,
    )
