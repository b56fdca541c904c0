"""Command-line behavior: exit codes, stderr conventions, report files."""
import json

import pytest

from mvsd.cli import run
from mvsd.corpus import save_corpus
from mvsd.model import load_checkpoint

from conftest import make_sample, separable_corpus
from mvsd.corpus import Corpus


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.jsonl"
    save_corpus(separable_corpus(16, 4, 4), path)
    return str(path)


def train_args(corpus_file, extra=()):
    return [
        "train", "--corpus", corpus_file,
        "--epochs", "1", "--batch-size", "8", "--lr-head", "0.01",
        *extra,
    ]


def test_stats_table_output(corpus_file, capsys):
    assert run(["stats", "--corpus", corpus_file]) == 0
    out = capsys.readouterr().out
    assert "Sentences" in out and "Train" in out
    assert "16" in out


def test_stats_json_and_output_file(corpus_file, tmp_path, capsys):
    out_path = tmp_path / "stats.json"
    assert run(["stats", "--corpus", corpus_file, "--output", str(out_path)]) == 0
    payload = json.loads(out_path.read_text())
    assert payload["train"]["sentences"] == 16
    assert payload["train"]["positive"] == 8

    assert run(["stats", "--corpus", corpus_file, "--json"]) == 0
    out = capsys.readouterr().out
    assert '"sentences": 16' in out


def test_stats_rejects_pending_without_flag(tmp_path, capsys):
    path = tmp_path / "pending.jsonl"
    save_corpus(Corpus([make_sample(0, None), make_sample(1, 1)]), path)
    assert run(["stats", "--corpus", str(path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error: validation:")
    assert run(["stats", "--corpus", str(path), "--allow-pending"]) == 0


def test_missing_corpus_file_is_io_error(tmp_path, capsys):
    assert run(["stats", "--corpus", str(tmp_path / "nope.jsonl")]) == 1
    assert capsys.readouterr().err.startswith("error: io:")


def test_debias_writes_output_and_is_idempotent(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    save_corpus(Corpus([
        make_sample(0, 1, text="so funny #sarcasm #irony emoji_1"),
        make_sample(1, 0, text="plain words"),
    ]), raw)
    first = tmp_path / "clean1.jsonl"
    report = tmp_path / "report.json"
    assert run(["debias", "--corpus", str(raw), "--output", str(first),
                "--report", str(report)]) == 0
    out = capsys.readouterr().out
    assert "wrote 2 samples" in out
    stats = json.loads(report.read_text())
    before = stats["before"]["hashtag_means"]["train"]["1"]
    after = stats["after"]["hashtag_means"]["train"]["1"]
    assert before > 0.0 and after == 0.0

    second = tmp_path / "clean2.jsonl"
    assert run(["debias", "--corpus", str(first), "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_kappa_from_label_files(tmp_path, capsys):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text("Sarcasm\nNotSarcasm\nSarcasm\nNotSarcasm\n")
    b.write_text("Sarcasm\nNotSarcasm\nNotSarcasm\nNotSarcasm\n")
    assert run(["kappa", str(a), str(b)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["n_items"] == 4
    assert payload["kappa"] == pytest.approx(0.5)


def test_train_then_evaluate_round_trip(corpus_file, tmp_path, capsys):
    ckpt = tmp_path / "model.ckpt"
    report = tmp_path / "history.json"
    assert run(train_args(corpus_file, ["--checkpoint", str(ckpt),
                                        "--report", str(report)])) == 0
    history = json.loads(report.read_text())
    assert len(history["epochs"]) == 1
    assert history["config"]["train"]["lr_head"] == 0.01
    saved = load_checkpoint(ckpt)
    assert saved.extra["best_epoch"] == 1
    assert "test_metrics" in saved.extra

    eval_report = tmp_path / "eval.json"
    assert run(["evaluate", "--checkpoint", str(ckpt), "--corpus", corpus_file,
                "--split", "test", "--report", str(eval_report)]) == 0
    payload = json.loads(eval_report.read_text())
    assert payload["split"] == "test"
    assert 0.0 <= payload["metrics"]["accuracy"] <= 1.0


def test_train_reports_are_bit_identical(corpus_file, tmp_path):
    reports = []
    for name in ("r1.json", "r2.json"):
        path = tmp_path / name
        assert run(train_args(corpus_file, ["--report", str(path)])) == 0
        reports.append(path.read_bytes())
    assert reports[0] == reports[1]


def test_config_file_precedence(corpus_file, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"epochs": 2, "lr_head": 0.02, "batch_size": 4}))
    report = tmp_path / "history.json"
    # the explicit flag beats the file; the file beats built-in defaults
    assert run(["train", "--corpus", corpus_file, "--config", str(config),
                "--epochs", "1", "--report", str(report)]) == 0
    used = json.loads(report.read_text())["config"]["train"]
    assert used["epochs"] == 1
    assert used["lr_head"] == 0.02
    assert used["batch_size"] == 4
    assert used["lr_backbone"] == 1e-6


def test_config_file_must_be_json_object(corpus_file, tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text("[1, 2]")
    assert run(["train", "--corpus", corpus_file, "--config", str(config)]) == 1
    assert capsys.readouterr().err.startswith("error: configuration:")


def test_gradcheck_passes_and_reports(tmp_path, capsys):
    report = tmp_path / "gradcheck.json"
    assert run(["gradcheck", "--report", str(report)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS gradcheck")
    payload = json.loads(report.read_text())
    assert payload["passed"] is True
    assert payload["max_rel_error"] < payload["tol"]


def test_gradcheck_custom_dims(capsys):
    assert run(["gradcheck", "--dims", "d=8,tokens=3,patches=4,heads=2"]) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_gradcheck_bad_dims(capsys):
    assert run(["gradcheck", "--dims", "nonsense"]) == 1
    assert capsys.readouterr().err.startswith("error: argument:")


def test_viz_attention_from_checkpoint(corpus_file, tmp_path, capsys):
    ckpt = tmp_path / "model.ckpt"
    assert run(train_args(corpus_file, ["--checkpoint", str(ckpt)])) == 0
    out_path = tmp_path / "attn.json"
    assert run(["viz-attention", "--checkpoint", str(ckpt), "--corpus", corpus_file,
                "--output", str(out_path)]) == 0
    payload = json.loads(out_path.read_text())
    assert payload["sample_id"] == "test-0"
    assert len(payload["patch_weights"]) == 4

    missing = run(["viz-attention", "--checkpoint", str(ckpt), "--corpus", corpus_file,
                   "--sample-id", "ghost", "--output", str(out_path)])
    assert missing == 1
    assert capsys.readouterr().err.startswith("error: argument:")


def test_ablate_command(corpus_file, tmp_path, capsys):
    report = tmp_path / "ablation.json"
    assert run(["ablate", "--corpus", corpus_file, "--epochs", "1",
                "--batch-size", "8", "--report", str(report)]) == 0
    out = capsys.readouterr().out
    assert "no_interaction_loss" in out
    payload = json.loads(report.read_text())
    assert [r["setting"] for r in payload["rows"]] == [
        "full", "no_text_loss", "no_image_loss", "no_interaction_loss"
    ]


def test_freeze_sweep_command(corpus_file, tmp_path):
    report = tmp_path / "freeze.json"
    assert run(["freeze-sweep", "--corpus", corpus_file, "--epochs", "1",
                "--batch-size", "8", "--report", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert len(payload["rows"]) == 4


def test_low_resource_command(corpus_file, tmp_path):
    report = tmp_path / "low.json"
    assert run(["low-resource", "--corpus", corpus_file, "--epochs", "1",
                "--batch-size", "8", "--fractions", "0.5,1.0",
                "--report", str(report)]) == 0
    payload = json.loads(report.read_text())
    assert [r["fraction"] for r in payload["rows"]] == [0.5, 1.0]


def test_unknown_flag_exits_with_usage_error(corpus_file):
    with pytest.raises(SystemExit) as exc:
        run(["stats", "--corpus", corpus_file, "--no-such-flag"])
    assert exc.value.code == 2


def test_file_provider_requires_embeddings(corpus_file, capsys):
    assert run(train_args(corpus_file, ["--provider", "file"])) == 1
    assert capsys.readouterr().err.startswith("error: configuration:")
