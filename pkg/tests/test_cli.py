"""CLI subcommands, exit codes and the figure-producing report path."""

import json

import pytest

from marketqa import datapipe
from marketqa.cli import main, read_config_file


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """synth -> mine -> split -> train, shared across tests."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--seed", "3", "--listings", "60",
                 "--out-dir", str(root / "corpus")]) == 0
    assert main(["mine", "--chats", str(root / "corpus/chats.jsonl"),
                 "--listings", str(root / "corpus/listings.jsonl"),
                 "--out", str(root / "data.jsonl")]) == 0
    assert main(["split", "--in", str(root / "data.jsonl"),
                 "--train", str(root / "train.jsonl"),
                 "--test", str(root / "test.jsonl"),
                 "--frac", "0.8", "--seed", "1"]) == 0
    config = root / "train.cfg"
    config.write_text(
        "embed_dim = 12\nff_size = 12\nff_layers = 2\nlstm_hidden = 8\n"
        "unigram_cap = 800\nbigram_cap = 1200\n"
        "epochs = 4\nlr = 0.005\nbatch_size = 16\nseed = 0\n",
        encoding="utf-8")
    assert main(["train", "--data", str(root / "train.jsonl"),
                 "--dev", str(root / "test.jsonl"),
                 "--out", str(root / "model.mqar"),
                 "--config", str(config),
                 "--history", str(root / "history.jsonl"),
                 "--vocab-out", str(root / "vocab.tsv")]) == 0
    return root


class TestPipeline:
    def test_synth_outputs(self, workspace):
        for name in ("chats.jsonl", "listings.jsonl", "truth.jsonl", "pairs.jsonl"):
            assert (workspace / "corpus" / name).exists()

    def test_split_disjoint(self, workspace):
        train = datapipe.read_dataset(workspace / "train.jsonl")
        test = datapipe.read_dataset(workspace / "test.jsonl")
        assert train and test
        assert {e.listing_id for e in train}.isdisjoint(
            {e.listing_id for e in test})

    def test_train_artifacts(self, workspace):
        assert (workspace / "model.mqar").exists()
        assert (workspace / "vocab.tsv").exists()
        assert (workspace / "history.jsonl").exists()
        assert (workspace / "history.png").exists()

    def test_eval_writes_report_and_figure(self, workspace, capsys):
        code = main(["eval", "--model", str(workspace / "model.mqar"),
                     "--data", str(workspace / "test.jsonl"),
                     "--report", str(workspace / "report.jsonl")])
        assert code == 0
        out = capsys.readouterr().out
        assert "overall accuracy" in out
        lines = (workspace / "report.jsonl").read_text().splitlines()
        head = json.loads(lines[0])
        assert set(head) >= {"n_total", "overall_acc", "trigger_acc"}
        assert len(lines) == head["n_total"] + 1
        assert (workspace / "metrics.png").exists()

    def test_score_prints_ranked_table(self, workspace, capsys):
        desc = workspace / "desc.txt"
        desc.write_text("The finish is cream white all over. "
                        "Postage to your door is 12 dollars.", encoding="utf-8")
        code = main(["score", "--model", str(workspace / "model.mqar"),
                     "--question", "What colours are available?",
                     "--description-file", str(desc)])
        assert code == 0
        out = capsys.readouterr().out
        assert "(no answer)" in out
        assert "rank" in out

    def test_pretrain_runs(self, workspace, tmp_path):
        config = tmp_path / "pre.cfg"
        config.write_text("embed_dim = 12\nff_size = 12\nlstm_hidden = 8\n"
                          "unigram_cap = 800\nbigram_cap = 1200\n"
                          "epochs = 1\nbatch_size = 16\n", encoding="utf-8")
        code = main(["pretrain", "--pairs", str(workspace / "corpus/pairs.jsonl"),
                     "--out", str(tmp_path / "pre.mqar"),
                     "--config", str(config)])
        assert code == 0
        assert (tmp_path / "pre.mqar").exists()


class TestExitCodes:
    def test_no_args_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 1

    def test_missing_required_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["mine", "--chats", "x"])
        assert excinfo.value.code == 1

    def test_bad_data_is_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{broken\n", encoding="utf-8")
        code = main(["split", "--in", str(bad), "--train", str(tmp_path / "a"),
                     "--test", str(tmp_path / "b")])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_is_exit_2(self, tmp_path):
        code = main(["eval", "--model", str(tmp_path / "nope.mqar"),
                     "--data", str(tmp_path / "nope.jsonl")])
        assert code == 2

    def test_unknown_flag_name_is_exit_2(self, workspace, tmp_path, capsys):
        code = main(["train", "--data", str(workspace / "train.jsonl"),
                     "--out", str(tmp_path / "m.mqar"),
                     "--flags", "transformer"])
        assert code == 2
        assert "unknown variant flags" in capsys.readouterr().err

    def test_bad_config_key_is_exit_2(self, workspace, tmp_path, capsys):
        config = tmp_path / "bad.cfg"
        config.write_text("nonsense_key = 3\n", encoding="utf-8")
        code = main(["train", "--data", str(workspace / "train.jsonl"),
                     "--out", str(tmp_path / "m.mqar"), "--config", str(config)])
        assert code == 2
        assert "unknown config key" in capsys.readouterr().err


class TestConfigFile:
    def test_parse_with_comments(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\nepochs = 3  # trailing\n\nlr = 0.01\n",
                        encoding="utf-8")
        assert read_config_file(path) == {"epochs": "3", "lr": "0.01"}

    def test_ff_size_defaults(self, tmp_path):
        from marketqa.cli import _build_configs
        model_cfg, _ = _build_configs({}, set(), phase="finetune")
        assert model_cfg.ff_size == 500  # plain feed-forward model
        model_cfg, _ = _build_configs({}, {"lstm"}, phase="finetune")
        assert model_cfg.ff_size == 128  # narrower with extra encoders
        model_cfg, _ = _build_configs({}, set(), phase="pretrain")
        assert model_cfg.ff_size == 500
        model_cfg, _ = _build_configs({"ff_size": "64"}, {"lstm"}, phase="finetune")
        assert model_cfg.ff_size == 64
