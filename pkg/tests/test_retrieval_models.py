import pytest

from casecontext.errors import MissingArtifactError, RetrievalError
from casecontext.retrieval.models import RankedList, RetrievalRun, meta_path, rank_scores, read_run, write_run


class TestRankedList:

    def test_invariants(self):
        with pytest.raises(RetrievalError, match="duplicate"):
            RankedList("q", [("a", 1.0), ("a", 0.5)])
        with pytest.raises(RetrievalError, match="retrieved itself"):
            RankedList("q", [("q", 1.0)])
        with pytest.raises(RetrievalError, match="non-increasing"):
            RankedList("q", [("a", 0.1), ("b", 0.2)])

    def test_rank_scores(self):
        ranked = rank_scores("q", {"b": 0.5, "a": 0.5, "c": 0.9, "d": 0.1}, 3)
        assert ranked.entries == [("c", 0.9), ("a", 0.5), ("b", 0.5)]


class TestRunFiles:

    def test_write_and_read(self, tmp_path):
        run = RetrievalRun(
            {"q2": RankedList("q2", [("d1", 0.25)]), "q1": RankedList("q1", [("d3", 0.9), ("d1", 0.123456789)])},
            "fp",
            {"kind": "bm25"}
        )
        path = tmp_path / "runs" / "bm25.run.tsv"
        write_run(path, run)
        assert path.read_text(encoding="utf-8") == "q1\t1\td3\t0.900000\nq1\t2\td1\t0.123457\nq2\t1\td1\t0.250000\n"
        assert meta_path(path).name == "bm25.meta.json"
        loaded = read_run(path, queries=["q1", "q2", "q3"])
        assert loaded.queries() == ["q1", "q2", "q3"]
        assert loaded.get("q1").case_ids() == ["d3", "d1"]
        assert len(loaded.get("q3")) == 0
        assert loaded.config_fingerprint == "fp" and loaded.settings == {"kind": "bm25"}

    def test_missing_run(self, tmp_path):
        with pytest.raises(MissingArtifactError, match="run stage 'retrieve' first"):
            read_run(tmp_path / "seed-13.run.tsv")

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "x.run.tsv"
        path.write_text("q1\t1\td1\n", encoding="utf-8")
        with pytest.raises(RetrievalError, match="line 1"):
            read_run(path)
