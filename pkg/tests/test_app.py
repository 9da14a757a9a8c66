import pytest
import yaml

from casecontext.app import build_parser, main


def _write_config(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


class TestMain:

    def test_validate_prints_defaults(self, tmp_path, capsys):
        config = _write_config(tmp_path / "config.yaml", {"corpus": {"synthetic": {"n_topics": 1}}})
        assert main(["validate", "--config", config]) == 0
        printed = yaml.safe_load(capsys.readouterr().out)
        assert printed["training"]["temperature"] == 0.05
        assert printed["k"] == 5

    def test_bad_config_exits_2(self, tmp_path):
        config = _write_config(tmp_path / "config.yaml", {"corpus": {"synthetic": {}}, "trainig": {}})
        assert main(["validate", "--config", config]) == 2
        assert main(["validate", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_missing_artifact_exits_3(self, tmp_path):
        config = _write_config(tmp_path / "config.yaml", {"corpus": {"synthetic": {"n_topics": 1}}})
        assert main(["eval", "--config", config, "--workspace", str(tmp_path / "ws")]) == 3

    def test_synth(self, tmp_path):
        out = tmp_path / "cases"
        args = ["synth", "--out", str(out), "--topics", "1", "--per-topic", "3", "--queries-per-topic", "1"]
        assert main(args) == 0
        assert sorted(p.name for p in out.iterdir()) == ["000001.txt", "000002.txt", "000003.txt", "qrels.tsv"]

    def test_program_name(self, capsys):
        assert build_parser().prog == "reakase"
        with pytest.raises(SystemExit):
            main(["--help"])
        assert capsys.readouterr().out.startswith("usage: reakase")
