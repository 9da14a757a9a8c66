import numpy as np
import pytest

from casecontext.errors import MetricsError
from casecontext.evaluation.metrics import AGGREGATE_KEYS, MetricsReport
from casecontext.evaluation.report import ADAPTED_ROW, average_reports, build_report_table, format_table, write_report
from casecontext.utils.helpers import read_json


def _report(value, k=5):
    return MetricsReport({}, {key: value for key in AGGREGATE_KEYS}, k, "fp")


class TestAverageReports:

    def test_mean_over_seeds(self):
        mean = average_reports([_report(0.2), _report(0.4), _report(0.9)])
        assert list(mean) == list(AGGREGATE_KEYS)
        np.testing.assert_allclose(list(mean.values()), 0.5)

    def test_rejects_mixed_cutoffs(self):
        with pytest.raises(MetricsError, match="different cutoffs"):
            average_reports([_report(0.1, k=5), _report(0.1, k=10)])

    def test_rejects_empty(self):
        with pytest.raises(MetricsError):
            average_reports([])


class TestReportTable:

    def test_rows_and_percentages(self):
        table = build_report_table(_report(0.25), _report(0.5), {2: _report(0.1), 1: _report(0.3)})
        assert list(table.index) == ["bm25", "base", ADAPTED_ROW]
        assert list(table.columns) == list(AGGREGATE_KEYS)
        np.testing.assert_allclose(table.loc[ADAPTED_ROW].to_numpy(), 0.2)
        text = format_table(table)
        assert "25.0" in text and "50.0" in text and "20.0" in text
        assert "0.25" not in text
        assert text.endswith("\n")

    def test_write_report(self, tmp_path):
        seeds = {0: _report(0.4), 1: _report(0.6)}
        write_report(tmp_path / "report", _report(0.25), _report(0.5), seeds)
        data = read_json(tmp_path / "report" / "report.json")
        assert set(data) == {"k", "seeds", "systems", "per_seed"}
        assert data["k"] == 5
        assert data["seeds"] == [0, 1]
        assert data["systems"][ADAPTED_ROW]["MRR@K"] == pytest.approx(0.5)
        assert data["per_seed"]["1"]["MAP"] == 0.6
        assert (tmp_path / "report" / "report.txt").read_text(encoding="utf-8").startswith(" ")
        assert "casecontext-report" in (tmp_path / "report" / "report.html").read_text(encoding="utf-8")
