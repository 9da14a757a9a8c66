import json

import pytest

from casecontext.errors import CorpusError
from casecontext.evaluation.qrels import Qrels, load_qrels, write_qrels


class TestQrels:

    def test_pairs_collapse_and_sort(self):
        qrels = Qrels.from_pairs([("q2", "d9"), ("q1", "d3"), ("q1", "d1"), ("q1", "d3")])
        assert qrels.queries() == ["q1", "q2"]
        assert qrels.pairs() == [("q1", "d1"), ("q1", "d3"), ("q2", "d9")]
        assert qrels.avg_relevant() == 1.5
        assert qrels.get("q3") == frozenset()

    def test_case_ids_include_queries(self):
        qrels = Qrels.from_pairs([("q1", "d1")])
        assert qrels.case_ids() == frozenset({"q1", "d1"})

    def test_empty(self):
        assert Qrels().avg_relevant() == 0.0
        assert len(Qrels()) == 0


class TestLoadQrels:

    def test_tsv_round_trip(self, tmp_path):
        qrels = Qrels.from_pairs([("q1", "d2"), ("q1", "d3"), ("q2", "d1")])
        write_qrels(tmp_path / "qrels.tsv", qrels)
        assert (tmp_path / "qrels.tsv").read_text(encoding="utf-8") == "q1\td2\nq1\td3\nq2\td1\n"
        assert load_qrels(tmp_path / "qrels.tsv") == qrels

    def test_json_layout_strips_suffix(self, tmp_path):
        path = tmp_path / "train_labels.json"
        path.write_text(json.dumps({"001.txt": ["002.txt", "005.txt"]}), encoding="utf-8")
        assert load_qrels(path, "json").pairs() == [("001", "002"), ("001", "005")]

    def test_malformed_tsv_line(self, tmp_path):
        path = tmp_path / "qrels.tsv"
        path.write_text("q1\td1\nq2 d2\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="line 2"):
            load_qrels(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorpusError, match="not found"):
            load_qrels(tmp_path / "absent.tsv")

    def test_unknown_format(self, tmp_path):
        path = tmp_path / "qrels.csv"
        path.write_text("q1,d1\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="unknown qrels format"):
            load_qrels(path, "csv")
