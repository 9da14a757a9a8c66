"""
Seed-averaged comparison report across the baseline and trained runs.
"""
import logging
from pathlib import Path
from typing import Dict, Mapping, Sequence, Union

import pandas as pd

from casecontext.errors import MetricsError
from casecontext.evaluation.metrics import AGGREGATE_KEYS, MetricsReport
from casecontext.utils.helpers import write_json
from casecontext.visualizations.metrics import metrics_bar_figure
from casecontext.visualizations.training import write_figure

logger = logging.getLogger(__name__)

ADAPTED_ROW = "adapted (mean)"


def average_reports(reports: Sequence[MetricsReport]) -> Dict[str, float]:
    """
    Arithmetic mean of each aggregate metric over several runs.

    Args:
        reports (Sequence[MetricsReport]): Reports of the same cutoff, one per seed.

    Returns:
        Dict[str, float]: Mean value per aggregate key.
    """
    if not reports:
        raise MetricsError("nothing to average: no metric reports given")
    if len({report.k for report in reports}) != 1:
        raise MetricsError("cannot average reports computed at different cutoffs")
    frame = pd.DataFrame([report.aggregate for report in reports], columns=list(AGGREGATE_KEYS))
    return {key: float(value) for key, value in frame.mean(axis=0).items()}


def build_report_table(
    bm25: MetricsReport,
    base: MetricsReport,
    seeds: Mapping[int, MetricsReport]
) -> pd.DataFrame:
    """
    Systems as rows (``bm25``, ``base``, the seed mean), aggregate metrics as columns.
    """
    rows = {
        "bm25": dict(bm25.aggregate),
        "base": dict(base.aggregate),
        ADAPTED_ROW: average_reports([seeds[s] for s in sorted(seeds)]),
    }
    return pd.DataFrame.from_dict(rows, orient="index", columns=list(AGGREGATE_KEYS))


def format_table(table: pd.DataFrame) -> str:
    """
    Aligned plain-text table of percentages with one decimal.
    """
    return (table * 100).to_string(float_format=lambda value: f"{value:.1f}") + "\n"


def write_report(
    directory: Union[str, Path],
    bm25: MetricsReport,
    base: MetricsReport,
    seeds: Mapping[int, MetricsReport]
) -> pd.DataFrame:
    """
    Write ``report.json``, ``report.txt`` and ``report.html``.

    Args:
        directory (Union[str, Path]): Output directory.
        bm25 (MetricsReport): Lexical baseline.
        base (MetricsReport): Backend embeddings without an adapter.
        seeds (Mapping[int, MetricsReport]): Trained runs keyed by seed.

    Returns:
        pd.DataFrame: The report table.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    table = build_report_table(bm25, base, seeds)
    write_json(directory / "report.json", {
        "k": bm25.k,
        "seeds": sorted(seeds),
        "systems": {name: {key: float(v) for key, v in row.items()} for name, row in table.iterrows()},
        "per_seed": {str(s): dict(seeds[s].aggregate) for s in sorted(seeds)},
    })
    (directory / "report.txt").write_text(format_table(table), encoding="utf-8")
    write_figure(metrics_bar_figure(table, bm25.k), directory / "report.html", div_id="casecontext-report")
    logger.info("Report over %d seeds written to %s", len(seeds), directory)
    return table
