import json

import pytest

from casecontext.corpus.language import LanguageFilterConfig
from casecontext.corpus.store import CorpusLayout, build_case, ingest_corpus, load_corpus, save_corpus
from casecontext.corpus.synthetic import write_synthetic_corpus
from casecontext.errors import CorpusError


def _write(root, files):
    for name, text in files.items():
        (root / name).write_text(text, encoding="utf-8")


class TestIngest:

    def test_small_corpus_with_qrels(self, tmp_path):
        _write(tmp_path, {
            "q1.txt": "The query case.\nANALYSIS\nIt matters.\n",
            "d1.txt": "Other facts entirely.\n",
            "d2.txt": "Relevant facts here.\n",
            "qrels.tsv": "q1\td2\n",
        })
        handle = ingest_corpus(tmp_path, CorpusLayout(qrels="qrels.tsv"))
        assert handle.case_ids() == ["d1", "d2", "q1"]
        assert handle.stats.num_queries == 1
        assert handle.stats.num_candidates == 2
        assert handle.stats.avg_relevant == 1.0
        assert handle.stats.max_tokens == 6
        assert handle.get("q1").sections.analysis_sentences == ["It matters."]
        assert handle.corpus_id == tmp_path.name
        assert handle.warnings == []

    def test_coliee_shaped_corpus(self, tmp_path):
        cases = {f"{n:06d}.txt": f"Case number {n} concerns an appeal.\nANALYSIS\nThe appeal is considered.\n" for n in range(1, 11)}
        _write(tmp_path, cases)
        labels = {"000001.txt": [f"{n:06d}.txt" for n in range(3, 8)], "000002.txt": ["000008.txt"]}
        (tmp_path / "train_labels.json").write_text(json.dumps(labels), encoding="utf-8")
        handle = ingest_corpus(tmp_path, CorpusLayout(qrels="train_labels.json", qrels_format="json"))
        assert len(handle.case_ids()) == 10
        assert handle.stats.num_queries == 2
        assert handle.stats.num_candidates == 8
        assert handle.stats.avg_relevant == 3.0
        assert handle.qrels.get("000001") == {f"{n:06d}" for n in range(3, 8)}
        assert handle.warnings == []

    def test_empty_directory(self, tmp_path):
        with pytest.raises(CorpusError, match="no case files found"):
            ingest_corpus(tmp_path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(CorpusError, match="does not exist"):
            ingest_corpus(tmp_path / "absent")

    def test_french_only_case_is_skipped_with_warning(self, tmp_path):
        _write(tmp_path, {"a.txt": "English text.\n", "b.txt": "Le juge et la cour.\n"})
        handle = ingest_corpus(tmp_path)
        assert handle.case_ids() == ["a"]
        assert "case 'b' is empty after French removal; skipped" in handle.warnings

    def test_unknown_qrels_ids_are_warnings(self, tmp_path):
        _write(tmp_path, {"q1.txt": "Query.\n", "d1.txt": "Doc.\n", "qrels.tsv": "q1\td1\nq1\td7\n"})
        handle = ingest_corpus(tmp_path, CorpusLayout(qrels="qrels.tsv"))
        assert handle.warnings == ["qrels reference unknown case id 'd7'"]

    def test_french_lines_removed_before_token_count(self):
        case = build_case("c", "One two.\nLe demandeur a déposé un appel.\n", LanguageFilterConfig(threshold=0.4))
        assert case.raw_text == "One two.\n"
        assert case.token_count == 2


class TestPersistence:

    def test_save_and_reload(self, tmp_path, synthetic_corpus):
        save_corpus(tmp_path / "corpus.jsonl", synthetic_corpus)
        reloaded = load_corpus(tmp_path / "corpus.jsonl", qrels=synthetic_corpus.qrels, corpus_id="synthetic")
        assert reloaded.cases == synthetic_corpus.cases
        assert reloaded.stats == synthetic_corpus.stats

    def test_duplicate_records(self, tmp_path, synthetic_corpus):
        path = tmp_path / "corpus.jsonl"
        save_corpus(path, synthetic_corpus)
        first = path.read_text(encoding="utf-8").splitlines()[0]
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(first + "\n")
        with pytest.raises(CorpusError, match="duplicate case_id"):
            load_corpus(path)


class TestSyntheticCorpus:

    def test_shape(self, synthetic_corpus):
        assert len(synthetic_corpus) == 60
        assert synthetic_corpus.stats.num_queries == 12
        assert synthetic_corpus.stats.num_candidates == 48
        assert synthetic_corpus.stats.avg_relevant == 9.0

    def test_french_lines_removed_and_sections_found(self, synthetic_corpus):
        for case in synthetic_corpus.cases.values():
            assert "demandeur" not in case.raw_text and "saisie" not in case.raw_text
            assert len(case.sections.analysis_sentences) == 4
            assert case.sections.conclusion_sentences[0] == "JUDGMENT"

    def test_deterministic(self, tmp_path, synthetic_dir):
        write_synthetic_corpus(tmp_path)
        for path in sorted(synthetic_dir.glob("*")):
            assert (tmp_path / path.name).read_bytes() == path.read_bytes()

    def test_bad_arguments(self, tmp_path):
        with pytest.raises(CorpusError):
            write_synthetic_corpus(tmp_path, n_topics=7)
        with pytest.raises(CorpusError):
            write_synthetic_corpus(tmp_path, per_topic=2, queries_per_topic=2)
