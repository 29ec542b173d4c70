import subprocess
import sys

import pytest

from scdselect.cli import RunConfig, main
from scdselect.corpus import load_label_corpus, save_label_corpus
from scdselect.selection import SelectionConfig

from conftest import make_corpus
from test_discretizer import tone, write_wav


def write_corpus(tmp_path, name, seqs, k, ids=None):
    path = tmp_path / name
    save_label_corpus(make_corpus(seqs, k, ids=ids), path)
    return str(path)


@pytest.fixture
def audio_setup(tmp_path):
    wavs = []
    for i in range(3):
        path = tmp_path / f"w{i}.wav"
        write_wav(path, tone(6000 + 2000 * i, freq=250.0 * (i + 1), seed=i))
        wavs.append(path)
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text(
        "".join(f"utt{i}\t{p}\n" for i, p in enumerate(wavs)), encoding="utf-8"
    )
    return str(manifest)


class TestTrainKmeans:
    def test_deterministic_bytes(self, audio_setup, tmp_path, capsys):
        m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
        argv = [audio_setup, "--k", "4", "--seed", "5", "--output"]
        assert main(["train-kmeans"] + argv + [str(m1)]) == 0
        assert main(["train-kmeans"] + argv + [str(m2)]) == 0
        bytes1 = m1.read_bytes()
        assert bytes1.replace(str(m1).encode(), b"") == m2.read_bytes().replace(str(m2).encode(), b"")

    def test_k_exceeds_frames(self, audio_setup, tmp_path, capsys):
        code = main(
            ["train-kmeans", audio_setup, "--k", "4", "--max-frames", "2",
             "--output", str(tmp_path / "m.json")]
        )
        assert code == 1
        assert "at least k" in capsys.readouterr().err

    def test_max_frames_zero_is_usage_error(self, audio_setup, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["train-kmeans", audio_setup, "--max-frames", "0",
                  "--output", str(tmp_path / "m.json")])
        assert exc.value.code == 2

    def test_model_file_config_echo_parses_back(self, audio_setup, tmp_path):
        import json

        out = tmp_path / "m.json"
        assert main(["train-kmeans", audio_setup, "--k", "3", "--output", str(out)]) == 0
        echo = json.loads(out.read_text(encoding="utf-8"))["config_echo"]
        recovered = RunConfig.from_json(json.dumps(echo["run_config"]))
        assert recovered.subcommand == "train-kmeans"
        assert recovered.options["k"] == 3
        assert echo["mfcc"]["sample_rate_hz"] == 16000


class TestDiscretize:
    @pytest.fixture
    def model_path(self, audio_setup, tmp_path):
        path = tmp_path / "model.json"
        assert main(["train-kmeans", audio_setup, "--k", "4", "--seed", "1",
                     "--output", str(path)]) == 0
        return str(path)

    def test_writes_loadable_corpus(self, audio_setup, model_path, tmp_path, capsys):
        out = tmp_path / "c.labels"
        assert main(["discretize", audio_setup, "--model", model_path,
                     "--output", str(out)]) == 0
        corpus = load_label_corpus(out)
        assert corpus.ids == ("utt0", "utt1", "utt2")
        assert corpus.alphabet_size == 4
        body = [l for l in out.read_text(encoding="utf-8").splitlines() if not l.startswith("#")]
        assert len(body) == 3

    def test_config_echo_parses_back(self, audio_setup, model_path, tmp_path):
        out = tmp_path / "c.labels"
        argv = ["discretize", audio_setup, "--model", model_path, "--output", str(out)]
        assert main(argv) == 0
        echo_line = next(
            l for l in out.read_text(encoding="utf-8").splitlines() if l.startswith("#cfg=")
        )
        recovered = RunConfig.from_json(echo_line[len("#cfg=") :])
        assert recovered.subcommand == "discretize"
        assert recovered.options["model"] == model_path
        assert recovered == RunConfig(subcommand="discretize", options=recovered.options)


class TestNgramStats:
    def test_dump(self, tmp_path, capsys):
        corpus = write_corpus(tmp_path, "c.labels", [[0, 0, 1], [1, 2]], 3)
        out = tmp_path / "stats.tsv"
        assert main(["ngram-stats", corpus, "--order", "1", "--output", str(out)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "#order=1"
        body = [l for l in lines if not l.startswith("#")]
        assert body == ["0\t2", "1\t2", "2\t1"]
        echo_line = next(l for l in lines if l.startswith("#cfg="))
        recovered = RunConfig.from_json(echo_line[len("#cfg=") :])
        assert recovered.subcommand == "ngram-stats"
        assert recovered.options["order"] == 1


class TestScd:
    def test_self_divergence_zero(self, tmp_path, capsys):
        corpus = write_corpus(tmp_path, "c.labels", [[0, 1, 1, 2]], 3)
        assert main(["scd", corpus, corpus]) == 0
        out = capsys.readouterr().out
        assert "SCD = 0.000000 nats" in out
        assert "scd_nats=0.0" in out

    def test_derived_value(self, tmp_path, capsys):
        x = write_corpus(tmp_path, "x.labels", [[0, 0, 0, 1]], 2)
        y = write_corpus(tmp_path, "y.labels", [[0, 0, 1, 1]], 2)
        assert main(["scd", x, y, "--alpha", "0"]) == 0
        out = capsys.readouterr().out
        nats = float(next(l for l in out.splitlines() if l.startswith("scd_nats=")).split("=")[1])
        assert nats == pytest.approx(0.130812, abs=1e-4)

    def test_asymmetry(self, tmp_path, capsys):
        x = write_corpus(tmp_path, "x.labels", [[0, 0, 0, 1]], 2)
        y = write_corpus(tmp_path, "y.labels", [[0, 0, 1, 1]], 2)
        main(["scd", x, y])
        forward = capsys.readouterr().out
        main(["scd", y, x])
        backward = capsys.readouterr().out
        assert forward.splitlines()[1] != backward.splitlines()[1]

    def test_alphabet_mismatch_is_runtime_error(self, tmp_path, capsys):
        x = write_corpus(tmp_path, "x.labels", [[0]], 2)
        y = write_corpus(tmp_path, "y.labels", [[0]], 3)
        assert main(["scd", x, y]) == 1
        assert "alphabet mismatch" in capsys.readouterr().err


class TestSelect:
    @pytest.fixture
    def instance(self, tmp_path):
        universal = write_corpus(
            tmp_path, "u.labels", [[0, 0], [1, 1], [0, 1], [1, 0]], 2,
            ids=["u1", "u2", "u3", "u4"],
        )
        query = write_corpus(tmp_path, "q.labels", [[0, 0]], 2, ids=["q0"])
        return universal, query

    def test_greedy_derived_instance(self, instance, tmp_path, capsys):
        universal, query = instance
        out = tmp_path / "report.tsv"
        assert main(["select", universal, query, "--strategy", "greedy-scd",
                     "--budget-count", "2", "--lambda", "1.0", "--alpha", "0.5",
                     "--output", str(out)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        body = [l.split("\t") for l in lines if not l.startswith("#")]
        assert [row[1] for row in body] == ["u1", "u3"]
        ids_file = (tmp_path / "report.tsv.ids").read_text(encoding="utf-8").splitlines()
        assert [l for l in ids_file if not l.startswith("#")] == ["u1", "u3"]

    def test_report_config_echo_round_trips(self, instance, tmp_path):
        universal, query = instance
        out = tmp_path / "report.tsv"
        main(["select", universal, query, "--budget-count", "1", "--output", str(out)])
        lines = out.read_text(encoding="utf-8").splitlines()
        config_line = next(l for l in lines if l.startswith("#config="))
        assert SelectionConfig.from_json(config_line[len("#config=") :]) == SelectionConfig(
            budget_c=1, order=1, lam=0.5, alpha=0.5, prune_min_count=0, seed=0
        )
        run_line = next(l for l in lines if l.startswith("#run_config="))
        recovered = RunConfig.from_json(run_line[len("#run_config=") :])
        assert recovered.subcommand == "select"
        assert recovered.options["budget_count"] == 1

    def test_random_reproducible(self, instance, tmp_path):
        universal, query = instance
        out = tmp_path / "r.tsv"
        argv = ["select", universal, query, "--strategy", "random",
                "--budget-count", "2", "--seed", "42", "--output", str(out)]
        assert main(argv) == 0
        first = out.read_bytes()
        assert main(argv) == 0
        assert out.read_bytes() == first

    def test_invalid_lambda_usage_error(self, instance, tmp_path):
        universal, query = instance
        with pytest.raises(SystemExit) as exc:
            main(["select", universal, query, "--budget-count", "1",
                  "--lambda", "1.5", "--output", str(tmp_path / "r.tsv")])
        assert exc.value.code == 2

    def test_missing_budget_usage_error(self, instance, tmp_path):
        universal, query = instance
        with pytest.raises(SystemExit) as exc:
            main(["select", universal, query, "--output", str(tmp_path / "r.tsv")])
        assert exc.value.code == 2

    def test_budget_too_large_runtime_error(self, instance, tmp_path, capsys):
        universal, query = instance
        assert main(["select", universal, query, "--budget-count", "9",
                     "--output", str(tmp_path / "r.tsv")]) == 1
        assert "exceeds" in capsys.readouterr().err

    def test_oracle_and_contrastive_run(self, instance, tmp_path):
        universal, query = instance
        for strategy in ("oracle", "contrastive"):
            out = tmp_path / f"{strategy}.tsv"
            assert main(["select", universal, query, "--strategy", strategy,
                         "--budget-count", "2", "--output", str(out)]) == 0
            assert out.exists()


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        corpus = write_corpus(tmp_path, "c.labels", [[0, 1]], 2)
        proc = subprocess.run(
            [sys.executable, "-m", "scdselect", "scd", corpus, corpus],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "scd_nats=0.0" in proc.stdout

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "scdselect", "select", "missing-universal"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2

    def test_missing_file_runtime_error(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "scdselect", "scd", "no-such-file", "no-such-file"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 1
