"""
A/σ sweeps.

Every (A/σ point, method) pair is an independent job. Jobs run in a thread pool sized by
`VLC_SHAPER_THREADS`; each point draws its random stream from a seed derived from the base seed and the
point index, so results do not depend on scheduling. A failing job is recorded and the sweep goes on.
"""

import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from packages.config.src.config import worker_count
from packages.constellation.src.constellation import uniform_pmf
from packages.firefly.src.firefly import run_fa
from packages.rate_engine.src.rates import RateProblem, per_user_rates
from packages.utils.src.errors import Errors
from packages.utils.src.data_utils import max_row_l1, verify_probability_rows
from packages.zf_ao.src.ao import run_ao
from .experiment_config import ExperimentConfig
from .reports import gap_report, gap_trend

logger = logging.getLogger(__name__)

SWEEP_FILE = "sweep.csv"
FAILURES_FILE = "failures.csv"
PEAK_TOL = 1e-9


def point_seed(base_seed: int, point_index: int) -> int:
    """Seed of one sweep point, a hash of (base seed, point index)."""
    state = np.random.SeedSequence([int(base_seed), int(point_index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def point_tag(method: str, db: float) -> str:
    return f"{method}_{db:g}dB"


@dataclass
class PointResult:
    method: str
    a_over_sigma_db: float
    point_index: int
    seed: int
    amplitudes: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    sum_rate: float = float("nan")
    user_rates: Optional[np.ndarray] = None
    wall_ms: float = 0.0
    trace: List[dict] = field(default_factory=list)
    warning: bool = False
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def tag(self) -> str:
        return point_tag(self.method, self.a_over_sigma_db)

    @property
    def trace_file(self) -> str:
        return f"trace_{self.tag}.csv"


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: List[PointResult] = field(default_factory=list)

    @property
    def failed(self) -> List[PointResult]:
        return [p for p in self.points if not p.ok]

    def get(self, method: str, db: float) -> PointResult:
        """
        :raises ReportError: If the sweep has no successful point for this method and A/σ.
        """
        for point in self.points:
            if point.ok and point.method == method and np.isclose(point.a_over_sigma_db, db):
                return point
        raise Errors.ReportError(f"No successful {method} point at {db:g} dB in this sweep")


def run_point(cfg: ExperimentConfig, method: str, point_index: int, H=None) -> PointResult:
    """
    Runs one method at the A/σ point `cfg.a_over_sigma_db[point_index]`.

    Library errors are raised; `run_sweep` is the place where they are turned into failed points.
    """
    db = cfg.a_over_sigma_db[point_index]
    H = cfg.channel() if H is None else H
    constellations, noise = cfg.operating_point(db)
    seed = point_seed(cfg.seed, point_index)
    fixed = uniform_pmf(cfg.users, cfg.order) if method.startswith("uniform_baseline") else None

    start = time.perf_counter()
    if method in ("fa", "uniform_baseline_fa"):
        problem = RateProblem(H, constellations, noise, cfg.grid_policy)
        result = run_fa(dataclasses.replace(cfg.fa, seed=seed), problem, fixed)
        w, p, trace, warning = result.w, result.p, result.trace.rows(), False
        rates = per_user_rates(H, w, constellations, p, noise, "general", cfg.grid_policy)
    else:
        result = run_ao(H, constellations, noise, cfg.ao, cfg.grid_policy, fixed)
        w, p, trace, warning = result.w, result.p, result.trace, result.warning
        rates = result.user_rates
    wall_ms = (time.perf_counter() - start) * 1e3

    logger.info("%s at %g dB: sum rate %.6f bits (%.0f ms)", method, db, float(rates.sum()), wall_ms)
    return PointResult(
        method=method,
        a_over_sigma_db=db,
        point_index=point_index,
        seed=seed,
        amplitudes=constellations[0].amplitudes.copy(),
        w=w,
        p=p,
        sum_rate=float(rates.sum()),
        user_rates=np.asarray(rates, dtype=float),
        wall_ms=wall_ms,
        trace=trace,
        warning=warning,
    )


def _guarded_point(cfg: ExperimentConfig, method: str, point_index: int, H) -> PointResult:
    try:
        return run_point(cfg, method, point_index, H)
    except (Errors.ShaperError, np.linalg.LinAlgError, FloatingPointError) as e:
        db = cfg.a_over_sigma_db[point_index]
        logger.error("%s at %g dB failed: %s", method, db, e)
        return PointResult(method, db, point_index, point_seed(cfg.seed, point_index), error=str(e))


def run_sweep(cfg: ExperimentConfig, out_dir: Optional[str] = None, workers: Optional[int] = None) -> SweepResult:
    """
    Runs every configured method at every A/σ point and writes the result files.

    :param cfg: Validated experiment configuration.
    :param out_dir: Output directory; defaults to `cfg.output_dir`. Nothing is written when it is an empty string.
    :param workers: Worker pool size; defaults to the `threads` runtime setting.
    :return: The sweep result, failed points included.
    """
    H = cfg.channel()
    jobs = [(method, index) for index in range(len(cfg.a_over_sigma_db)) for method in cfg.methods]
    workers = workers or worker_count()
    logger.info("Sweeping %d points with %d worker(s)", len(jobs), workers)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda job: _guarded_point(cfg, job[0], job[1], H), jobs))
    else:
        points = [_guarded_point(cfg, method, index, H) for method, index in jobs]

    result = SweepResult(cfg, points)
    target = cfg.output_dir if out_dir is None else out_dir
    if target:
        write_sweep(result, target)
    return result


def verify_feasible(point: PointResult, users: int):
    """
    Re-checks the matrices of a point before they are written.

    :raises ReportError: If a PMF row is not a distribution or a precoder row exceeds the peak constraint.
    """
    try:
        verify_probability_rows(point.p, name=f"P of {point.tag}")
    except Errors.InvalidInputError as e:
        raise Errors.ReportError(str(e))
    if point.p.shape[0] != users or point.w.shape[1] != users:
        raise Errors.ReportError(f"{point.tag}: matrices do not match {users} users")
    peak = max_row_l1(point.w)
    if peak > 1.0 + PEAK_TOL:
        raise Errors.ReportError(f"{point.tag}: precoder row L1 norm {peak:.12g} exceeds 1")


def sweep_table(result: SweepResult) -> pd.DataFrame:
    users = result.config.users
    columns = ["method", "a_over_sigma_db", "seed", "sum_rate_bits"]
    columns += [f"rate_user_{k + 1}" for k in range(users)] + ["wall_ms", "trace_file"]
    rows = []
    for point in result.points:
        if not point.ok:
            continue
        row = [point.method, point.a_over_sigma_db, point.seed, point.sum_rate]
        row += [float(r) for r in point.user_rates] + [round(point.wall_ms, 3), point.trace_file]
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def _pmf_file(point: PointResult, user: int) -> pd.DataFrame:
    return pd.DataFrame({"amplitude": point.amplitudes, "probability": point.p[user]})


def write_point(point: PointResult, out_dir: str, users: int):
    verify_feasible(point, users)
    point_dir = os.path.join(out_dir, point.tag)
    os.makedirs(point_dir, exist_ok=True)
    for k in range(users):
        _pmf_file(point, k).to_csv(os.path.join(point_dir, f"pmf_{k + 1}.csv"), index=False)
    pd.DataFrame(point.trace).to_csv(os.path.join(out_dir, point.trace_file), index=False)


def write_sweep(result: SweepResult, out_dir: str):
    """
    Writes `sweep.csv`, one `<method>_<dB>dB/pmf_<user>.csv` per user and point, one `trace_<point>.csv`
    per point, `gaps.csv` when shaped methods run next to their baselines and `failures.csv` when any point
    failed.
    """
    os.makedirs(out_dir, exist_ok=True)
    users = result.config.users
    for point in result.points:
        if point.ok:
            try:
                write_point(point, out_dir, users)
            except Errors.ReportError as e:
                logger.error("Not writing %s: %s", point.tag, e)
                point.error = str(e)

    sweep_table(result).to_csv(os.path.join(out_dir, SWEEP_FILE), index=False)
    failures = [
        {"method": p.method, "a_over_sigma_db": p.a_over_sigma_db, "seed": p.seed, "error": p.error}
        for p in result.failed
    ]
    if failures:
        pd.DataFrame(failures).to_csv(os.path.join(out_dir, FAILURES_FILE), index=False)

    gaps = gap_report(result)
    if not gaps.empty:
        gaps.to_csv(os.path.join(out_dir, "gaps.csv"), index=False)
        for method, rows in gaps.groupby("method", sort=False):
            rho = gap_trend(rows)
            logger.info("%s gap trend over A/σ: Spearman rho %s", method, "n/a" if np.isnan(rho) else f"{rho:.3f}")
    logger.info("Wrote sweep results to %s", out_dir)


def write_result_json(point: PointResult, path: str):
    """Writes the optimised pair of a single point, with its rates, as JSON."""
    verify_feasible(point, point.p.shape[0])
    payload = {
        "method": point.method,
        "a_over_sigma_db": point.a_over_sigma_db,
        "seed": point.seed,
        "sum_rate_bits": point.sum_rate,
        "user_rates_bits": [float(r) for r in point.user_rates],
        "amplitudes": [float(a) for a in point.amplitudes],
        "W": point.w.tolist(),
        "P": point.p.tolist(),
        "solver_warning": point.warning,
        "trace_file": point.trace_file,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)


def _point_index(cfg: ExperimentConfig, db: float) -> int:
    matches = [i for i, value in enumerate(cfg.a_over_sigma_db) if np.isclose(value, db)]
    return matches[0] if matches else -1


def load_sweep(out_dir: str, cfg: ExperimentConfig) -> SweepResult:
    """
    Reads a written sweep back: rates from `sweep.csv` and PMFs from the per-point files. Precoders and
    traces are not reloaded.

    :raises ReportError: If `sweep.csv` or a PMF file is missing.
    """
    path = os.path.join(out_dir, SWEEP_FILE)
    if not os.path.exists(path):
        raise Errors.ReportError(f"No {SWEEP_FILE} in {out_dir}")
    table = pd.read_csv(path)
    rate_columns = [c for c in table.columns if c.startswith("rate_user_")]
    points = []
    for row in table.itertuples(index=False):
        row = row._asdict()
        tag = point_tag(row["method"], float(row["a_over_sigma_db"]))
        pmfs = []
        for k in range(len(rate_columns)):
            pmf_path = os.path.join(out_dir, tag, f"pmf_{k + 1}.csv")
            if not os.path.exists(pmf_path):
                raise Errors.ReportError(f"Missing {pmf_path}")
            pmfs.append(pd.read_csv(pmf_path))
        points.append(PointResult(
            method=row["method"],
            a_over_sigma_db=float(row["a_over_sigma_db"]),
            point_index=_point_index(cfg, float(row["a_over_sigma_db"])),
            seed=int(row["seed"]),
            amplitudes=pmfs[0]["amplitude"].to_numpy(dtype=float),
            p=np.vstack([t["probability"].to_numpy(dtype=float) for t in pmfs]),
            sum_rate=float(row["sum_rate_bits"]),
            user_rates=np.array([row[c] for c in rate_columns], dtype=float),
            wall_ms=float(row["wall_ms"]),
        ))
    return SweepResult(cfg, points)
