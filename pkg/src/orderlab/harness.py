"""Seeded Monte Carlo sweeps over (ensemble, d, density, p_int) cells.

Each cell runs ``runs_per_cell`` independent draws; per-run seeds derive from
(master_seed, cell_index, run_index) through numpy's SeedSequence, so results
are reproducible end to end and independent of execution order.  Cells can be
spread over a process pool sized by the ORDERLAB_WORKERS environment variable;
rows are always written in canonical cell/run order, so the CSV is
byte-identical however the work was scheduled.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from .bounds import ba_expectation_bounds, er_expectation_fnr, sparse_er_expectation_fnr
from .graphs import ParameterError, gen_ba, gen_er, gen_sparse_er
from .oracle import build_oracle, default_score_const, sample_interventions
from .ordering import EXHAUSTIVE_LIMIT, evaluate, opt_exact, opt_heuristic

SCHEMA_MARKER = "# orderlab-sweep v1"
ENSEMBLES = ("er", "sparse_er", "ba")
OPTIMIZERS = ("exact", "heuristic", "auto")

_COLUMNS = [
    "ensemble", "d", "density_param", "m", "kappa", "p_int", "mode",
    "run_index", "seed", "edge_count", "f", "g", "score", "optimizer",
    "aggregate", "n_runs",
    "f_mean", "f_std", "f_iqr", "f_min", "f_max",
    "g_mean", "g_std", "g_iqr", "g_min", "g_max",
    "g_bound", "g_bound_vacuous",
]


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from integer parts (order matters)."""
    state = np.random.SeedSequence([int(p) & (2**63 - 1) for p in parts])
    return int(state.generate_state(1, dtype=np.uint64)[0])


@dataclass
class SweepConfig:
    ensemble: str
    d_grid: list[int]
    density_grid: list[float]  # p_e for er, c for sparse_er, kappa for ba
    p_int_grid: list[float]
    m: int = 3
    runs_per_cell: int = 10
    optimizer: str = "auto"
    mode: str = "ancestral"
    master_seed: int = 0

    def validate(self) -> None:
        if self.ensemble not in ENSEMBLES:
            raise ParameterError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ParameterError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.mode not in ("ancestral", "restricted"):
            raise ParameterError(f"mode must be ancestral or restricted, got {self.mode!r}")
        if not self.d_grid or not self.density_grid or not self.p_int_grid:
            raise ParameterError("all sweep grids must be nonempty")
        if self.runs_per_cell < 1:
            raise ParameterError("runs_per_cell must be >= 1")
        if self.optimizer == "exact" and max(self.d_grid) > EXHAUSTIVE_LIMIT:
            raise ParameterError(
                f"exact optimizer requested but d up to {max(self.d_grid)} exceeds the"
                f" exhaustive limit {EXHAUSTIVE_LIMIT}"
            )

    def cells(self) -> list[tuple[int, float, float]]:
        return list(product(self.d_grid, self.density_grid, self.p_int_grid))


@dataclass
class RunResult:
    run_index: int
    seed: int
    edge_count: int
    f: int
    g: float  # NaN when the graph has no edges
    score: float
    optimizer: str


@dataclass
class SummaryStats:
    mean: float
    std: float
    iqr: float
    min: float
    max: float

    @classmethod
    def of(cls, values: np.ndarray) -> "SummaryStats":
        values = np.asarray(values, dtype=float)
        values = values[~np.isnan(values)]
        if values.size == 0:
            return cls(math.nan, math.nan, math.nan, math.nan, math.nan)
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        q1, q3 = np.percentile(values, [25, 75])  # linear interpolation rule
        return cls(
            mean=float(values.mean()), std=std, iqr=float(q3 - q1),
            min=float(values.min()), max=float(values.max()),
        )


@dataclass
class ExperimentRecord:
    ensemble: str
    d: int
    density: float
    m: int | None
    kappa: float | None
    p_int: float
    mode: str
    runs: list[RunResult] = field(default_factory=list)
    f_stats: SummaryStats | None = None
    g_stats: SummaryStats | None = None
    g_bound: float = math.nan
    g_bound_vacuous: bool = False

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    def g_values(self) -> np.ndarray:
        return np.array([r.g for r in self.runs], dtype=float)

    def f_values(self) -> np.ndarray:
        return np.array([r.f for r in self.runs], dtype=float)

    def g_standard_error(self) -> float:
        g = self.g_values()
        g = g[~np.isnan(g)]
        if g.size < 2:
            return 0.0
        return float(np.std(g, ddof=1) / math.sqrt(g.size))

    def recompute_aggregates(self) -> None:
        self.f_stats = SummaryStats.of(self.f_values())
        self.g_stats = SummaryStats.of(self.g_values())


def _cell_bound(config: SweepConfig, d: int, density: float, p_int: float) -> float:
    if config.ensemble == "er":
        return er_expectation_fnr(d, density, p_int)
    if config.ensemble == "sparse_er":
        return sparse_er_expectation_fnr(d, density, p_int)
    return ba_expectation_bounds(d, config.m, p_int).g_mean


def _generate(config: SweepConfig, d: int, density: float, seed: int):
    if config.ensemble == "er":
        return gen_er(d, density, seed)
    if config.ensemble == "sparse_er":
        return gen_sparse_er(d, density, seed)
    return gen_ba(d, config.m, density, seed)


def _run_cell(config: SweepConfig, cell_index: int, cell: tuple[int, float, float]) -> ExperimentRecord:
    d, density, p_int = cell
    record = ExperimentRecord(
        ensemble=config.ensemble,
        d=d,
        density=density,
        m=config.m if config.ensemble == "ba" else None,
        kappa=density if config.ensemble == "ba" else None,
        p_int=p_int,
        mode=config.mode,
    )
    c = default_score_const()
    use_exact = config.optimizer == "exact" or (config.optimizer == "auto" and d <= EXHAUSTIVE_LIMIT)
    for run_index in range(config.runs_per_cell):
        run_seed = derive_seed(config.master_seed, cell_index, run_index)
        dag = _generate(config, d, density, derive_seed(run_seed, 0))
        iv = sample_interventions(d, p_int, derive_seed(run_seed, 1))
        oracle = build_oracle(dag, iv, mode=config.mode)
        if use_exact:
            order = opt_exact(oracle, iv, c)
        else:
            order = opt_heuristic(oracle, iv, c, seed=derive_seed(run_seed, 2))
        ev = evaluate(dag, order, oracle, iv, c)
        record.runs.append(
            RunResult(
                run_index=run_index, seed=run_seed, edge_count=dag.edge_count,
                f=ev.d_top, g=ev.fnr, score=ev.score, optimizer=order.provenance,
            )
        )
    record.recompute_aggregates()
    bound = _cell_bound(config, d, density, p_int)
    record.g_bound = bound
    record.g_bound_vacuous = bound >= 1.0
    return record


def _cell_job(args) -> ExperimentRecord:
    config, cell_index, cell = args
    return _run_cell(config, cell_index, cell)


def run_sweep(config: SweepConfig) -> list[ExperimentRecord]:
    """One record per grid cell, in canonical (d, density, p_int) order."""
    config.validate()
    cells = config.cells()
    jobs = [(config, i, cell) for i, cell in enumerate(cells)]
    workers = int(os.environ.get("ORDERLAB_WORKERS", "1"))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell_job, jobs))
    return [_cell_job(job) for job in jobs]


def deviation_profile(records: list[ExperimentRecord], metric: str = "g", stat: str = "iqr"):
    """Table of (d, stat value) for records sharing ensemble/density/p_int/mode."""
    if metric not in ("f", "g"):
        raise ParameterError(f"metric must be f or g, got {metric!r}")
    if stat not in ("iqr", "std", "mean"):
        raise ParameterError(f"stat must be iqr, std, or mean, got {stat!r}")
    if not records:
        raise ParameterError("no records given")
    key = {(r.ensemble, r.density, r.p_int, r.mode) for r in records}
    if len(key) != 1:
        raise ParameterError("records mix ensembles, densities, coverages, or modes")
    if stat == "iqr" and any(r.n_runs < 4 for r in records):
        raise ParameterError("IQR profile needs at least 4 runs per cell")
    rows = []
    for r in sorted(records, key=lambda r: r.d):
        stats = r.f_stats if metric == "f" else r.g_stats
        rows.append((r.d, getattr(stats, stat)))
    return rows


@dataclass
class FitResult:
    exponent: float
    intercept: float
    r2: float
    n_used: int


def fit_scaling(xs, ys) -> FitResult:
    """Ordinary least squares of log(y) on log(x); nonpositive ys are dropped
    with a warning, and at least 3 usable points are required."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > 0
    if not keep.all():
        warnings.warn(f"dropping {int((~keep).sum())} nonpositive values before log-log fit")
    xs, ys = xs[keep], ys[keep]
    if xs.size < 3:
        raise ParameterError(f"need at least 3 positive points for a fit, have {xs.size}")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return FitResult(exponent=float(slope), intercept=float(intercept), r2=r2, n_used=int(xs.size))


def bound_comparison(records: list[ExperimentRecord]) -> list[dict]:
    """Per cell: empirical mean FNR against the analytic bound plus 3 standard
    errors; vacuous (clamped) bounds pass by definition."""
    rows = []
    for r in records:
        mean_g = r.g_stats.mean if r.g_stats else math.nan
        se = r.g_standard_error()
        passed = r.g_bound_vacuous or math.isnan(mean_g) or mean_g <= r.g_bound + 3 * se
        rows.append(
            {
                "ensemble": r.ensemble, "d": r.d, "density": r.density,
                "p_int": r.p_int, "mode": r.mode, "mean_g": mean_g,
                "bound": r.g_bound, "se": se,
                "margin": r.g_bound + 3 * se - mean_g,
                "vacuous": r.g_bound_vacuous, "passed": passed,
            }
        )
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def persist(records: list[ExperimentRecord], path) -> None:
    """Fixed-schema CSV: per-run rows followed by one aggregate row per cell."""
    lines = [SCHEMA_MARKER, ",".join(_COLUMNS)]
    for r in records:
        cell = [r.ensemble, str(r.d), _fmt(r.density), _fmt(r.m), _fmt(r.kappa),
                _fmt(r.p_int), r.mode]
        for run in r.runs:
            lines.append(",".join(
                cell
                + [str(run.run_index), str(run.seed), str(run.edge_count),
                   str(run.f), _fmt(run.g), _fmt(run.score), run.optimizer, "0"]
                + [""] * 13
            ))
        f, g = r.f_stats, r.g_stats
        lines.append(",".join(
            cell
            + [""] * 7
            + ["1", str(r.n_runs)]
            + [_fmt(v) for v in (f.mean, f.std, f.iqr, f.min, f.max,
                                 g.mean, g.std, g.iqr, g.min, g.max, r.g_bound)]
            + ["1" if r.g_bound_vacuous else "0"]
        ))
    Path(path).write_text("\n".join(lines) + "\n")


class SweepLoadError(ValueError):
    pass


def _parse_float(token: str) -> float:
    return math.nan if token == "" else float(token)


def load(path) -> list[ExperimentRecord]:
    """Read a sweep CSV back into records; any malformed row names its line."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SCHEMA_MARKER:
        raise SweepLoadError(f"{path}: schema-version mismatch (expected {SCHEMA_MARKER!r})")
    if len(lines) < 2 or lines[1] != ",".join(_COLUMNS):
        raise SweepLoadError(f"{path}: unexpected header row")
    records: list[ExperimentRecord] = []
    current: ExperimentRecord | None = None
    for ln, line in enumerate(lines[2:], start=3):
        parts = line.split(",")
        if len(parts) != len(_COLUMNS):
            raise SweepLoadError(f"{path}:{ln}: expected {len(_COLUMNS)} fields, got {len(parts)}")
        row = dict(zip(_COLUMNS, parts))
        try:
            d = int(row["d"])
            density = float(row["density_param"])
            p_int = float(row["p_int"])
            key = (row["ensemble"], d, density, p_int, row["mode"])
            if current is None or (current.ensemble, current.d, current.density,
                                   current.p_int, current.mode) != key:
                current = ExperimentRecord(
                    ensemble=row["ensemble"], d=d, density=density,
                    m=int(row["m"]) if row["m"] else None,
                    kappa=float(row["kappa"]) if row["kappa"] else None,
                    p_int=p_int, mode=row["mode"],
                )
                records.append(current)
            if row["aggregate"] == "0":
                current.runs.append(RunResult(
                    run_index=int(row["run_index"]), seed=int(row["seed"]),
                    edge_count=int(row["edge_count"]), f=int(row["f"]),
                    g=_parse_float(row["g"]), score=float(row["score"]),
                    optimizer=row["optimizer"],
                ))
            elif row["aggregate"] == "1":
                current.f_stats = SummaryStats(*(
                    _parse_float(row[k]) for k in ("f_mean", "f_std", "f_iqr", "f_min", "f_max")
                ))
                current.g_stats = SummaryStats(*(
                    _parse_float(row[k]) for k in ("g_mean", "g_std", "g_iqr", "g_min", "g_max")
                ))
                current.g_bound = _parse_float(row["g_bound"])
                current.g_bound_vacuous = row["g_bound_vacuous"] == "1"
            else:
                raise ValueError(f"bad aggregate flag {row['aggregate']!r}")
        except (ValueError, KeyError) as exc:
            raise SweepLoadError(f"{path}:{ln}: {exc}") from exc
    return records


def parse_config(text: str) -> SweepConfig:
    """Plain key = value sweep configuration; '#' starts a comment and list
    values are comma separated.  Keys match the SweepConfig field names."""
    values: dict = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {ln}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in ("d_grid",):
            values[key] = [int(x) for x in val.split(",") if x.strip()]
        elif key in ("density_grid", "p_int_grid"):
            values[key] = [float(x) for x in val.split(",") if x.strip()]
        elif key in ("m", "runs_per_cell", "master_seed"):
            values[key] = int(val)
        elif key in ("ensemble", "optimizer", "mode"):
            values[key] = val
        else:
            raise ParameterError(f"config line {ln}: unknown key {key!r}")
    for required in ("ensemble", "d_grid", "density_grid", "p_int_grid"):
        if required not in values:
            raise ParameterError(f"config is missing required key {required!r}")
    config = SweepConfig(**values)
    config.validate()
    return config


def with_overrides(config: SweepConfig, **overrides) -> SweepConfig:
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    out = replace(config, **cleaned)
    out.validate()
    return out
