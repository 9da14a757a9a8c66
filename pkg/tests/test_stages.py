import pytest

from casecontext.errors import ConfigError, MissingArtifactError
from casecontext.evaluation.report import ADAPTED_ROW
from casecontext.pipeline.config import parse_config
from casecontext.pipeline.manifest import Manifest
from casecontext.pipeline.stages import STAGES, run_all, run_stage
from casecontext.utils.helpers import read_json, read_jsonl

SMALL = {
    "corpus": {"synthetic": {"n_topics": 2, "per_topic": 6, "queries_per_topic": 2, "seed": 5}},
    "encoding": {"local_dim": 32},
    "mining": {"count": 1, "pool_depth": 3},
    "training": {"steps": 20, "d_out": 8, "log_every": 0},
    "evaluation": {"resamples": 50},
    "seeds": [1, 2],
}

COMPARED = [
    "corpus.jsonl", "elements.jsonl", "triplets.jsonl", "contexts.jsonl", "hard_negatives.tsv",
    "runs/bm25.run.tsv", "runs/base.run.tsv", "runs/seed-1.run.tsv", "runs/seed-2.run.tsv",
    "metrics/seed-1.json", "compare.json", "report.json", "report.txt",
]


@pytest.fixture(scope="module")
def config():
    return parse_config(SMALL)


@pytest.fixture(scope="module")
def workspaces(config, tmp_path_factory):
    first = tmp_path_factory.mktemp("first")
    second = tmp_path_factory.mktemp("second")
    run_all(config, first)
    run_all(config, second)
    return first, second


class TestEndToEnd:

    def test_two_workspaces_agree_byte_for_byte(self, workspaces):
        first, second = workspaces
        for name in COMPARED:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_every_stage_recorded(self, workspaces):
        keys = [entry.stage for entry in Manifest.load(workspaces[0] / "manifest.jsonl").entries]
        assert keys[:8] == list(STAGES[:7]) + ["train[seeds=1,2]"]
        assert keys[-1] == "report[seeds=1,2]"
        assert len(keys) == len(STAGES)

    def test_provenance_chain(self, workspaces):
        manifest = Manifest.load(workspaces[0] / "manifest.jsonl")
        index = manifest.last("index")
        mine = manifest.last("mine")
        assert mine.inputs["bm25.json"] == index.outputs["bm25.json"]
        assert manifest.last("train[seeds=1,2]").inputs["hard_negatives.tsv"] == mine.outputs["hard_negatives.tsv"]
        assert "config:mining" in mine.inputs

    def test_report_is_seed_mean(self, workspaces):
        report = read_json(workspaces[0] / "report.json")
        assert report["seeds"] == [1, 2]
        for metric, value in report["systems"][ADAPTED_ROW].items():
            seeds = [report["per_seed"][s][metric] for s in ("1", "2")]
            assert value == pytest.approx(sum(seeds) / 2)
        assert (workspaces[0] / "report.html").is_file()
        assert (workspaces[0] / "adapters" / "seed-1" / "loss.html").is_file()

    def test_up_to_date_stage_is_skipped(self, config, workspaces):
        assert run_stage("index", config, workspaces[1]) is None
        assert run_stage("index", config, workspaces[1], force=True).stage == "index"

    def test_changed_section_reruns(self, config, workspaces):
        changed = parse_config({**SMALL, "bm25": {"k1": 0.9}})
        assert run_stage("index", changed, workspaces[1]) is not None
        assert run_stage("extract", changed, workspaces[1]) is None


class TestStageErrors:

    def test_missing_upstream_names_its_stage(self, config, tmp_path):
        with pytest.raises(MissingArtifactError, match="run stage 'ingest' first"):
            run_stage("index", config, tmp_path)
        run_stage("ingest", config, tmp_path)
        with pytest.raises(MissingArtifactError, match="run stage 'retrieve' first"):
            run_stage("eval", config, tmp_path)

    def test_unknown_stage(self, config, tmp_path):
        with pytest.raises(ConfigError, match="unknown stage 'serve'"):
            run_stage("serve", config, tmp_path)

    def test_single_seed_key(self, config, tmp_path):
        for name in STAGES[:7]:
            run_stage(name, config, tmp_path)
        entry = run_stage("train", config, tmp_path, seed=2)
        assert entry.stage == "train[seeds=2]"
        assert (tmp_path / "adapters" / "seed-2" / "adapter.ckpt").is_file()
        assert not (tmp_path / "adapters" / "seed-1").exists()


class TestContextVariants:

    def test_reduced_context_reaches_the_store(self, tmp_path):
        config = parse_config({**SMALL, "encoding": {"local_dim": 32, "include_triplets": False}})
        for name in STAGES[:5]:
            run_stage(name, config, tmp_path)
        assert read_json(tmp_path / "embeddings" / "base.json")["variant"] == "no_triplets"
        contexts = list(read_jsonl(tmp_path / "contexts.jsonl"))
        assert {record["variant"] for record in contexts} == {"no_triplets"}
        assert not any("relation triplets" in record["user_text"] for record in contexts)
