"""
Paired sign-flip permutation test between two runs.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from casecontext.errors import MetricsError
from casecontext.evaluation.metrics import PER_QUERY_KEYS, MetricsReport
from casecontext.utils.helpers import convert_to_dataframe

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairedTestResult:
    metric: str
    mean_a: float
    mean_b: float
    mean_diff: float
    p_value: float
    num_queries: int

    def to_record(self) -> Dict[str, float]:
        return {
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "mean_diff": self.mean_diff,
            "p_value": self.p_value,
            "num_queries": self.num_queries,
        }


def sign_flip_test(
    a: Sequence[float],
    b: Sequence[float],
    resamples: int = 100_000,
    seed: int = 13,
    chunk_size: int = 10_000
) -> float:
    """
    Two-sided p-value that paired values ``a`` and ``b`` share a mean.

    Each resample flips the sign of every paired difference with
    probability one half; the p-value is ``(count + 1) / (resamples + 1)``
    where ``count`` is the number of resamples whose absolute mean
    difference reaches the observed one.

    Args:
        a (Sequence[float]): Per-query values of the first system.
        b (Sequence[float]): Per-query values of the second system.
        resamples (int): Number of sign-flip resamples.
        seed (int): Generator seed.
        chunk_size (int): Resamples drawn at once.

    Returns:
        float: The p-value in (0, 1].
    """
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if diffs.ndim != 1 or diffs.size == 0:
        raise MetricsError("the permutation test needs at least one paired value")
    if resamples < 1:
        raise MetricsError("resamples must be positive")
    observed = abs(diffs.mean())
    rng = np.random.default_rng(seed)
    count = 0
    remaining = resamples
    while remaining:
        n = min(chunk_size, remaining)
        signs = rng.integers(0, 2, size=(n, diffs.size), dtype=np.int8) * 2 - 1
        means = np.abs(signs @ diffs) / diffs.size
        count += int(np.count_nonzero(means >= observed - 1e-12))
        remaining -= n
    return (count + 1) / (resamples + 1)


def compare_reports(
    report_a: MetricsReport,
    report_b: MetricsReport,
    resamples: int = 100_000,
    seed: int = 13
) -> Dict[str, PairedTestResult]:
    """
    Test every per-query metric of two reports on their shared queries.

    Returns:
        Dict[str, PairedTestResult]: Result per metric key.
    """
    queries = sorted(set(report_a.per_query) & set(report_b.per_query))
    if not queries:
        raise MetricsError("the two reports share no query")
    results = {}
    for metric in PER_QUERY_KEYS:
        a = [report_a.per_query[q][metric] for q in queries]
        b = [report_b.per_query[q][metric] for q in queries]
        results[metric] = PairedTestResult(
            metric=metric,
            mean_a=float(np.mean(a)),
            mean_b=float(np.mean(b)),
            mean_diff=float(np.mean(a) - np.mean(b)),
            p_value=sign_flip_test(a, b, resamples, seed),
            num_queries=len(queries)
        )
        logger.debug("%s: diff %.4f p=%.4f", metric, results[metric].mean_diff, results[metric].p_value)
    return results


def results_frame(results: Dict[str, PairedTestResult]) -> pd.DataFrame:
    """
    Paired-test results as a table indexed by metric.
    """
    return convert_to_dataframe(list(results.values())).set_index("metric")
