"""
Tables derived from a sweep: optimised symbol distributions and shaping gains over the uniform baselines.
"""

import logging

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from packages.constellation.src.constellation import active_symbols, pmf_entropy, total_variation
from packages.utils.src.errors import Errors

logger = logging.getLogger(__name__)

BASELINES = {
    "fa": "uniform_baseline_fa",
    "zf_ao": "uniform_baseline_zf",
}

# Published shaping gains at 60 dB for the reference room: (bits, percent) keyed by modulation order.
REFERENCE_GAPS = {
    8: (0.48, 19.7),
    16: (0.52, 23.4),
}

ACTIVE_THRESHOLD = 1e-3


def pmf_summary(point) -> pd.DataFrame:
    """
    :return: One row per user with the active-symbol count (p > 1e-3), the total-variation distance to the
             uniform PMF and the PMF entropy in bits.
    """
    rows = []
    for k, row in enumerate(point.p):
        uniform = np.full(row.size, 1.0 / row.size)
        rows.append({
            "user": k + 1,
            "active_symbols": active_symbols(row, ACTIVE_THRESHOLD),
            "tv_to_uniform": total_variation(row, uniform),
            "entropy_bits": pmf_entropy(row),
        })
    return pd.DataFrame(rows)


def pmf_table(point) -> pd.DataFrame:
    table = pd.DataFrame({"amplitude": point.amplitudes})
    for k, row in enumerate(point.p):
        table[f"p_user_{k + 1}"] = row
    return table


def pmf_report(result, db: float, method: str = None) -> str:
    """
    Formats the optimised symbol distributions of one sweep point.

    :param result: A `SweepResult`.
    :param db: The A/σ point in dB.
    :param method: Method name; defaults to the first configured method.
    :return: Amplitude-vs-probability table for every user followed by the per-user summary.
    :raises ReportError: If the point is missing from the result.
    """
    method = method or result.config.methods[0]
    point = result.get(method, db)
    header = f"{method} at A/σ = {db:g} dB ({point.p.shape[1]}-PAM, sum rate {point.sum_rate:.4f} bits)"
    return "\n".join([
        header,
        pmf_table(point).to_string(index=False, float_format=lambda v: f"{v:.6g}"),
        "",
        pmf_summary(point).to_string(index=False, float_format=lambda v: f"{v:.4f}"),
    ])


def gap_report(result) -> pd.DataFrame:
    """
    Shaping gain of every shaped method over its uniform baseline at every A/σ point where both succeeded.

    :return: Columns method, baseline, a_over_sigma_db, gap_bits, gap_percent (relative to the baseline rate).
    """
    rows = []
    by_key = {(p.method, p.a_over_sigma_db): p for p in result.points if p.ok}
    for (method, db), point in by_key.items():
        baseline = BASELINES.get(method)
        reference = by_key.get((baseline, db))
        if reference is None:
            continue
        gap = point.sum_rate - reference.sum_rate
        percent = 100.0 * gap / reference.sum_rate if reference.sum_rate > 0 else float("nan")
        rows.append({
            "method": method,
            "baseline": baseline,
            "a_over_sigma_db": db,
            "gap_bits": gap,
            "gap_percent": percent,
        })
    columns = ["method", "baseline", "a_over_sigma_db", "gap_bits", "gap_percent"]
    gaps = pd.DataFrame(rows, columns=columns)
    return gaps.sort_values(["method", "a_over_sigma_db"], kind="stable").reset_index(drop=True)


def gap_trend(gaps: pd.DataFrame) -> float:
    """
    Spearman rank correlation between A/σ and the gap; negative when the gap narrows as A/σ grows.

    :return: ρ, or NaN with fewer than three points or a constant column.
    """
    if len(gaps) < 3:
        return float("nan")
    x = gaps["a_over_sigma_db"].to_numpy(dtype=float)
    y = gaps["gap_bits"].to_numpy(dtype=float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return float("nan")
    return float(spearmanr(x, y).correlation)


def reference_gap(order: int):
    """
    :return: (bits, percent) of the published 60 dB shaping gain for this modulation order.
    :raises ReportError: If no reference exists for the order.
    """
    if order not in REFERENCE_GAPS:
        raise Errors.ReportError(f"No reference shaping gain for {order}-PAM")
    return REFERENCE_GAPS[order]
