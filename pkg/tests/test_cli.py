import csv
import hashlib
import json
from pathlib import Path

import pytest

from policylabel.cli import main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_mini_corpus(root: Path):
    """Eight cases (one cluster), four excerpts each: quick to train on."""
    cases = []
    for i in range(8):
        rating = ["good", "bad", "neutral", "blocker"][i % 4]
        cases.append(
            {"id": f"m{i}", "title": f"mini practice {i} about topic{i}", "rating": rating}
        )
    (root / "cases.json").write_text(json.dumps(cases))
    (root / "clusters.json").write_text(
        json.dumps([{"cluster_id": "k0", "case_ids": ["m0", "m1"]}])
    )
    lines = []
    for i in range(8):
        for j in range(4):
            record = {
                "case_id": f"m{i}",
                "service_id": f"svc{j}",
                "excerpt": f"provider {j} writes about topic{i} in section {j} "
                f"with several filler words appended for realism",
                "approved": True,
            }
            lines.append(json.dumps(record))
    (root / "annotations.jsonl").write_text("\n".join(lines) + "\n")


@pytest.fixture()
def mini(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    write_mini_corpus(src)
    return src


@pytest.fixture()
def mini_store(mini, tmp_path, capsys):
    store = tmp_path / "store"
    code, _, _ = run(
        [
            "--seed", "0", "--out-dir", str(store),
            "ingest",
            "--cases", str(mini / "cases.json"),
            "--annotations", str(mini / "annotations.jsonl"),
            "--clusters", str(mini / "clusters.json"),
        ],
        capsys,
    )
    assert code == 0
    return store


def train_args(store, out, training_set):
    return [
        "--out-dir", str(out),
        "train",
        "--training-set", str(training_set),
        "--store", str(store),
        "--base-model", "tiny",
        "--learning-rate", "0.001",
        "--epochs", "2",
        "--max-length", "48",
    ]


@pytest.fixture()
def mini_checkpoint(mini_store, tmp_path, capsys):
    sample_out = tmp_path / "sample"
    code, _, _ = run(
        ["--seed", "1", "--out-dir", str(sample_out),
         "sample", "--store", str(mini_store), "--strategy", "cbs", "--ratio", "1"],
        capsys,
    )
    assert code == 0
    train_out = tmp_path / "train"
    code, _, _ = run(
        train_args(mini_store, train_out, sample_out / "training_set.jsonl"), capsys
    )
    assert code == 0
    return train_out / "checkpoint"


class TestIngest:
    def test_fixture_dir_reports_130_cases(self, data_dir, tmp_path, capsys):
        store = tmp_path / "store"
        code, out, _ = run(
            [
                "--seed", "0", "--out-dir", str(store),
                "ingest",
                "--cases", str(data_dir / "cases.json"),
                "--annotations", str(data_dir / "annotations.jsonl"),
                "--clusters", str(data_dir / "clusters.json"),
            ],
            capsys,
        )
        assert code == 0
        assert "cases: 130" in out
        assert "clusters: 24, standalone: 67" in out
        assert "mean words/excerpt: 32.26" in out
        for name in ("cases.json", "clusters.json", "annotations.jsonl",
                     "splits.json", "stats.json", "ingest.manifest.json"):
            assert (store / name).exists()

    def test_missing_file_is_usage_error(self, tmp_path, capsys):
        code, _, err = run(
            ["--out-dir", str(tmp_path / "s"),
             "ingest", "--cases", "/nope/cases.json", "--annotations", "/nope/a.jsonl"],
            capsys,
        )
        assert code == 1
        assert "not found" in err

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        bad = tmp_path / "cases.json"
        bad.write_text('[{"id": "c1", "title": "x", "rating": "good"},]')
        annotations = tmp_path / "a.jsonl"
        annotations.write_text("")
        code, _, err = run(
            ["--out-dir", str(tmp_path / "s"),
             "ingest", "--cases", str(bad), "--annotations", str(annotations)],
            capsys,
        )
        assert code == 1
        assert "line" in err


class TestSample:
    def test_manifest_records_flags(self, mini_store, tmp_path, capsys):
        out = tmp_path / "out"
        code, stdout, _ = run(
            ["--seed", "3", "--out-dir", str(out),
             "sample", "--store", str(mini_store), "--strategy", "cbs", "--ratio", "3"],
            capsys,
        )
        assert code == 0
        manifest = json.loads(
            (out / "training_set.jsonl.manifest.json").read_text()
        )
        assert manifest["strategy"] == "cbs"
        assert manifest["ratio"] == 3
        assert manifest["seed"] == 3

    def test_zero_ratio_rejected(self, mini_store, tmp_path, capsys):
        code, _, err = run(
            ["--out-dir", str(tmp_path / "o"),
             "sample", "--store", str(mini_store), "--strategy", "rs", "--ratio", "0"],
            capsys,
        )
        assert code == 1
        assert "ratio" in err

    def test_byte_identical_reruns(self, mini_store, tmp_path, capsys):
        digests = []
        for name in ("a", "b"):
            out = tmp_path / name
            code, _, _ = run(
                ["--seed", "7", "--out-dir", str(out),
                 "sample", "--store", str(mini_store), "--strategy", "rs", "--ratio", "2"],
                capsys,
            )
            assert code == 0
            digests.append(
                hashlib.sha256((out / "training_set.jsonl").read_bytes()).hexdigest()
            )
        assert digests[0] == digests[1]


class TestTrainEval:
    def test_train_writes_checkpoint_and_history(self, mini_checkpoint, capsys):
        manifest = json.loads((mini_checkpoint / "manifest.json").read_text())
        assert manifest["train_config"]["epochs"] == 2
        assert len(manifest["history"]["train_loss"]) == 2
        assert manifest["content_hash"]

    def test_eval_emits_results_and_reruns_identically(
        self, mini_store, mini_checkpoint, tmp_path, capsys
    ):
        outputs = []
        for name in ("e1", "e2"):
            out = tmp_path / name
            code, stdout, _ = run(
                ["--out-dir", str(out),
                 "eval", "--store", str(mini_store), "--checkpoint", str(mini_checkpoint)],
                capsys,
            )
            assert code == 0
            outputs.append((out / "results.csv").read_bytes())
            assert (out / "results.json").exists()
        assert outputs[0] == outputs[1]

    def test_eval_writes_scores_jsonl(self, mini_store, mini_checkpoint, tmp_path, capsys):
        out = tmp_path / "scored"
        code, _, _ = run(
            ["--out-dir", str(out),
             "eval", "--store", str(mini_store), "--checkpoint", str(mini_checkpoint)],
            capsys,
        )
        assert code == 0
        lines = (out / "scores.jsonl").read_text().splitlines()
        assert lines
        record = json.loads(lines[0])
        assert set(record) == {"case_id", "excerpt_id", "probability"}
        assert 0 <= record["probability"] <= 1

    def test_eval_on_missing_store(self, mini_checkpoint, tmp_path, capsys):
        code, _, err = run(
            ["--out-dir", str(tmp_path / "o"),
             "eval", "--store", str(tmp_path / "empty"), "--checkpoint", str(mini_checkpoint)],
            capsys,
        )
        assert code == 1
        assert "ingest" in err

    def test_config_file_flags_win(self, mini_store, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"epochs": 9, "learning_rate": 0.5}))
        sample_out = tmp_path / "s"
        run(
            ["--seed", "1", "--out-dir", str(sample_out),
             "sample", "--store", str(mini_store), "--strategy", "rs", "--ratio", "1"],
            capsys,
        )
        train_out = tmp_path / "t"
        code, _, _ = run(
            ["--config", str(config_path), "--out-dir", str(train_out),
             "train",
             "--training-set", str(sample_out / "training_set.jsonl"),
             "--base-model", "tiny", "--epochs", "1",
             "--learning-rate", "0.001", "--max-length", "48"],
            capsys,
        )
        assert code == 0
        manifest = json.loads((train_out / "checkpoint" / "manifest.json").read_text())
        assert manifest["train_config"]["epochs"] == 1  # flag beat config
        assert manifest["train_config"]["learning_rate"] == 0.001

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"nonsense": 1}))
        code, _, err = run(
            ["--config", str(config_path), "--out-dir", str(tmp_path / "o"),
             "ingest", "--cases", "x", "--annotations", "y"],
            capsys,
        )
        assert code == 1
        assert "unknown config keys" in err


class TestSweep:
    def test_grid_rows(self, mini_store, tmp_path, capsys):
        out = tmp_path / "sweep"
        code, stdout, _ = run(
            ["--seed", "0", "--out-dir", str(out),
             "sweep", "--store", str(mini_store),
             "--strategies", "rs,cbs", "--ratios", "1,2", "--runs", "2",
             "--base-model", "tiny", "--epochs", "1",
             "--learning-rate", "0.001", "--max-length", "48"],
            capsys,
        )
        assert code == 0
        with open(out / "results.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 * 2 * 2 * 2
        assert {r["strategy"] for r in rows} == {"rs", "cbs"}
        assert {r["ratio"] for r in rows} == {"1", "2"}


class TestAnalyze:
    def test_label_and_summary(self, mini_store, mini_checkpoint, tmp_path, capsys):
        policy = tmp_path / "policy.txt"
        policy.write_text(
            "provider writes about topic0 here\n\nprovider writes about topic3 today\n"
        )
        out = tmp_path / "label-out"
        code, stdout, _ = run(
            ["--out-dir", str(out),
             "analyze", str(policy),
             "--store", str(mini_store), "--checkpoint", str(mini_checkpoint)],
            capsys,
        )
        assert code == 0
        assert "segments: 2" in stdout
        assert "grade:" in stdout
        payload = json.loads((out / "label.json").read_text())
        from policylabel import schemas
        import jsonschema

        jsonschema.validate(payload, schemas.LABEL_SCHEMA)

    def test_empty_policy_rejected(self, mini_store, mini_checkpoint, tmp_path, capsys):
        policy = tmp_path / "empty.txt"
        policy.write_text("   \n")
        code, _, err = run(
            ["--out-dir", str(tmp_path / "o"),
             "analyze", str(policy),
             "--store", str(mini_store), "--checkpoint", str(mini_checkpoint)],
            capsys,
        )
        assert code == 1
        assert "empty" in err

    def test_high_threshold_fewer_matches(
        self, mini_store, mini_checkpoint, tmp_path, capsys
    ):
        policy = tmp_path / "policy.txt"
        policy.write_text("provider writes about topic0 in section 1\n")

        def match_count(threshold_args, name):
            out = tmp_path / name
            code, _, _ = run(
                ["--out-dir", str(out),
                 "analyze", str(policy),
                 "--store", str(mini_store), "--checkpoint", str(mini_checkpoint)]
                + threshold_args,
                capsys,
            )
            assert code == 0
            payload = json.loads((out / "label.json").read_text())
            return sum(
                len(e["evidence"]) for g in payload["groups"].values() for e in g
            )

        default = match_count([], "d")
        strict = match_count(["--threshold", "0.99"], "s")
        assert strict <= default


class TestServe:
    def test_missing_checkpoint_is_startup_error(self, mini_store, tmp_path, capsys):
        code, _, err = run(
            ["--out-dir", str(tmp_path / "o"),
             "serve", "--store", str(mini_store),
             "--checkpoint", str(tmp_path / "missing-ckpt")],
            capsys,
        )
        assert code == 1
        assert "checkpoint" in err


class TestPerplexityCommand:
    def test_uniform_model_constant_ppl(self, mini_store, tmp_path, capsys):
        out = tmp_path / "ppl"
        code, stdout, _ = run(
            ["--out-dir", str(out),
             "perplexity", "--store", str(mini_store), "--models", "uniform:50"],
            capsys,
        )
        assert code == 0
        with open(out / "perplexity.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        assert all(float(r["pseudo_perplexity"]) == pytest.approx(50.0) for r in rows)

    def test_two_models_two_ids(self, mini_store, tmp_path, capsys):
        out = tmp_path / "ppl2"
        code, _, _ = run(
            ["--out-dir", str(out),
             "perplexity", "--store", str(mini_store),
             "--models", "uniform:50,uniform:10"],
            capsys,
        )
        assert code == 0
        with open(out / "perplexity.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["model_id"] for r in rows} == {"uniform:50", "uniform:10"}

    def test_summary_matches_csv_recount(self, mini_store, tmp_path, capsys):
        out = tmp_path / "ppl3"
        code, _, _ = run(
            ["--out-dir", str(out),
             "perplexity", "--store", str(mini_store), "--models", "uniform:25"],
            capsys,
        )
        assert code == 0
        with open(out / "perplexity.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        by_rating = {}
        for row in rows:
            by_rating.setdefault(row["rating"], []).append(
                float(row["pseudo_perplexity"])
            )
        summary = json.loads((out / "perplexity_summary.json").read_text())
        for rating, values in by_rating.items():
            reported = summary["models"]["uniform:25"][rating]["mean"]
            assert reported == pytest.approx(sum(values) / len(values), abs=1e-4)
