"""Tests for the framescope command line."""

import json
import logging

import pytest

from src.cli import EXIT_CONFIG, EXIT_OK, EXIT_PIPELINE, FLAG_FIELDS, build_parser, main
from src.export_io import load_snapshot
from src.fixture import WINDOW_A, WINDOW_B, fixture_config
from src.models import RunConfig
from src.textprep import DEFAULT_STOPWORD_FILE, STOPWORDS_ENV


@pytest.fixture(autouse=True)
def _restore_logging(monkeypatch):
    monkeypatch.delenv(STOPWORDS_ENV, raising=False)
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture(scope="module")
def cli_config(tmp_path_factory, fixture_dir):
    directory = tmp_path_factory.mktemp("cli")
    config = fixture_config(fixture_dir, out_dir=directory / "out")
    path = directory / "framescope.json"
    path.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def mapped_out(cli_config):
    assert main(["map", "--config", str(cli_config)]) == EXIT_OK
    return cli_config.parent / "out"


class TestParser:
    def test_map_windows_repeatable(self):
        args = build_parser().parse_args(["map", "--window", "A", "--window", "B", "--min-occurrences", "5"])
        assert args.window == ["A", "B"]
        assert args.min_occurrences == 5
        assert args.binary is None

    def test_every_config_field_has_a_flag(self):
        assert set(FLAG_FIELDS.values()) == set(RunConfig.model_fields)
        parser = build_parser()
        args = parser.parse_args([
            "map", "--layout-max-iter", "5", "--layout-k", "2", "--no-strict-cutoff",
            "--define-window", "early", "1984-01-01", "1984-12-31", "--focal-words", "diet, sugar,",
        ])
        assert args.layout_max_iter == 5
        assert args.layout_k == 2.0
        assert args.strict_cutoff is False
        assert args.define_window == [["early", "1984-01-01", "1984-12-31"]]
        assert args.focal_words == ["diet", "sugar"]

    def test_usage_error_exits_one(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["map", "--seed", "seven"])
        assert exc.value.code == EXIT_CONFIG

    def test_command_required(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_CONFIG


class TestMapCommand:
    def test_every_window(self, mapped_out):
        assert (mapped_out / "A.snapshot").exists()
        assert (mapped_out / "B.net").exists()

    def test_summary_line(self, cli_config, tmp_path, capsys):
        code = main(["map", "--config", str(cli_config), "--window", "A", "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert out.startswith("A: 16 documents, vocabulary 60 (3 excluded), matrix 60x16, threshold 0.4394 derived")
        assert "57 nodes, 736 edges, 3 isolates removed" in out
        assert (tmp_path / "A_report.json").exists()

    def test_min_occurrences_required(self, fixture_dir, capsys):
        assert main(["map", "--input-dir", str(fixture_dir), "--window", "A"]) == EXIT_CONFIG
        assert "min_occurrences is required" in capsys.readouterr().err

    def test_unknown_window(self, cli_config, tmp_path, capsys):
        code = main(["map", "--config", str(cli_config), "--window", "Z", "--out-dir", str(tmp_path)])
        assert code == EXIT_CONFIG
        assert "unknown window 'Z'" in capsys.readouterr().err

    def test_empty_vocabulary(self, cli_config, tmp_path, capsys):
        code = main(["map", "--config", str(cli_config), "--window", "A",
                     "--min-occurrences", "10000", "--out-dir", str(tmp_path)])
        assert code == EXIT_PIPELINE
        assert "[textprep] vocabulary empty; lower min_occurrences" in capsys.readouterr().err

    def test_threshold_out_of_range(self, cli_config, capsys):
        assert main(["map", "--config", str(cli_config), "--threshold", "1.5"]) == EXIT_CONFIG
        assert "threshold_override" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert main(["map", "--config", str(bad)]) == EXIT_CONFIG
        assert "not valid JSON" in capsys.readouterr().err

    def test_missing_input_dir(self, tmp_path, capsys):
        code = main(["map", "--input-dir", str(tmp_path / "nowhere"), "--min-occurrences", "1",
                     "--window", "A"])
        assert code == EXIT_PIPELINE
        assert "input directory not found" in capsys.readouterr().err


class TestVocabCommand:
    def test_top_five(self, cli_config, capsys):
        assert main(["vocab", "--config", str(cli_config), "--window", "A", "--top", "5"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "Vocabulary for 'A' (frequency > 10, cap 100): 60 included, 3 excluded"
        assert lines[2] == "Included"
        assert [line.split() for line in lines[3:8]] == [
            ["aspartame", "56", "8"], ["sweetener", "48", "8"], ["food", "40", "8"],
            ["sugar", "32", "8"], ["product", "24", "8"],
        ]
        assert lines[9] == "Excluded"
        assert [line.split() for line in lines[10:]] == [
            ["saccharin", "10", "10"], ["market", "6", "6"], ["cancer", "4", "4"],
        ]

    def test_top_zero_prints_header_only(self, cli_config, capsys):
        assert main(["vocab", "--config", str(cli_config), "--window", "B", "--top", "0"]) == EXIT_OK
        assert capsys.readouterr().out == "Vocabulary for 'B' (frequency > 10, cap 100): 41 included, 1 excluded\n"

    def test_focal_candidates(self, cli_config, capsys):
        assert main(["vocab", "--config", str(cli_config), "--focal-candidates", "5"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[1] == "Focal-word candidates (top 5 of each window)"
        assert lines[2].split() == ["aspartame", "2", "68"]

    def test_needs_window_or_candidates(self, cli_config, capsys):
        assert main(["vocab", "--config", str(cli_config)]) == EXIT_CONFIG
        assert main(["vocab", "--config", str(cli_config), "--window", "A", "--top", "-1"]) == EXIT_CONFIG

    def test_stopword_env(self, cli_config, tmp_path, monkeypatch, capsys):
        stops = tmp_path / "stops.txt"
        stops.write_text(DEFAULT_STOPWORD_FILE.read_text(encoding="utf-8") + "\naspartame\n", encoding="utf-8")
        monkeypatch.setenv(STOPWORDS_ENV, str(stops))
        assert main(["vocab", "--config", str(cli_config), "--window", "A", "--top", "1"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[3].split() == ["sweetener", "48", "8"]

    def test_stopword_flag_beats_env(self, cli_config, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(STOPWORDS_ENV, str(tmp_path / "missing.txt"))
        code = main(["vocab", "--config", str(cli_config), "--window", "A", "--top", "0",
                     "--stopwords", str(DEFAULT_STOPWORD_FILE)])
        assert code == EXIT_OK

    def test_missing_stopword_file(self, cli_config, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(STOPWORDS_ENV, str(tmp_path / "missing.txt"))
        assert main(["vocab", "--config", str(cli_config), "--window", "A"]) == EXIT_PIPELINE
        assert "cannot read stopword file" in capsys.readouterr().err


class TestCompareCommand:
    def test_drift_report(self, cli_config, mapped_out, tmp_path, capsys):
        code = main(["compare", "--config", str(cli_config), "--out-dir", str(tmp_path),
                     "--before", str(mapped_out / "A.snapshot"), "--after", str(mapped_out / "B.snapshot")])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert out.startswith("Frame drift: A -> B")
        assert "moved-coreward" in out
        assert "aspartame-infused" in out
        assert (tmp_path / "A_B_diff.txt").read_text(encoding="utf-8") == out
        assert (tmp_path / "A_B_trajectories.csv").exists()
        assert (tmp_path / "A_B_emerging.csv").exists()

    def test_focal_word_missing_from_both(self, cli_config, mapped_out, tmp_path, capsys):
        code = main(["compare", "--config", str(cli_config), "--out-dir", str(tmp_path), "--focal", "diet,unicorn",
                     "--before", str(mapped_out / "A.snapshot"), "--after", str(mapped_out / "B.snapshot")])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "'unicorn' is in neither map" in out
        trajectories = (tmp_path / "A_B_trajectories.csv").read_text(encoding="utf-8").splitlines()
        assert trajectories[-1] == "unicorn,,,,,absent"

    def test_fingerprint_mismatch(self, cli_config, mapped_out, tmp_path, capsys):
        other = tmp_path / "reseeded"
        assert main(["map", "--config", str(cli_config), "--window", "B", "--seed", "1",
                     "--out-dir", str(other)]) == EXIT_OK
        code = main(["compare", "--config", str(cli_config), "--out-dir", str(tmp_path),
                     "--before", str(mapped_out / "A.snapshot"), "--after", str(other / "B.snapshot")])
        assert code == EXIT_PIPELINE
        assert "snapshots not comparable" in capsys.readouterr().err

    def test_missing_snapshot(self, cli_config, tmp_path, capsys):
        code = main(["compare", "--config", str(cli_config), "--out-dir", str(tmp_path),
                     "--before", str(tmp_path / "A.snapshot"), "--after", str(tmp_path / "B.snapshot")])
        assert code == EXIT_PIPELINE
        assert "run `framescope map` first" in capsys.readouterr().err

    def test_labels_with_slashes(self, fixture_dir, tmp_path, capsys):
        windows = [WINDOW_A.model_copy(update={"label": "1984/86"}), WINDOW_B.model_copy(update={"label": "2004/06"})]
        config = fixture_config(fixture_dir, out_dir=tmp_path / "out", windows=windows)
        path = tmp_path / "slashes.json"
        path.write_text(config.model_dump_json(), encoding="utf-8")
        assert main(["map", "--config", str(path)]) == EXIT_OK

        out = tmp_path / "out"
        code = main(["compare", "--config", str(path),
                     "--before", str(out / "1984_86.snapshot"), "--after", str(out / "2004_06.snapshot")])
        assert code == EXIT_OK
        assert "Frame drift: 1984/86 -> 2004/06" in capsys.readouterr().out
        for suffix in ("_diff.txt", "_trajectories.csv", "_emerging.csv"):
            assert (out / f"1984_86_2004_06{suffix}").exists()

    def test_before_and_after_required(self):
        with pytest.raises(SystemExit) as exc:
            main(["compare", "--before", "A.snapshot"])
        assert exc.value.code == EXIT_CONFIG


class TestIngestReportCommand:
    def test_counts_and_peaks(self, fixture_dir, capsys):
        assert main(["ingest-report", "--input-dir", str(fixture_dir)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Files seen: 24, ingested: 24, skipped: 0" in out
        assert "  1984     6\n" in out
        assert "  2006     2\n" in out
        assert "Busiest 3-year periods\n  1984-1986    16\n" in out
        assert "Windows" not in out

    def test_windows_listed(self, cli_config, capsys):
        assert main(["ingest-report", "--config", str(cli_config), "--peaks", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "  A: 1984-01-01 to 1986-12-31, 16 documents" in out
        assert "  B: 2004-01-01 to 2006-12-31, 8 documents" in out


class TestConfigFile:
    def test_flags_override_file(self, cli_config, capsys):
        assert json.loads(cli_config.read_text(encoding="utf-8"))["vocab_cap"] == 100
        code = main(["vocab", "--config", str(cli_config), "--window", "B", "--top", "0", "--vocab-cap", "5"])
        assert code == EXIT_OK
        assert capsys.readouterr().out == "Vocabulary for 'B' (frequency > 10, cap 5): 5 included, 37 excluded\n"

    def test_layout_flags_override_file(self, cli_config, tmp_path, capsys):
        code = main(["map", "--config", str(cli_config), "--window", "B", "--layout-max-iter", "5",
                     "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        assert "not converged" in capsys.readouterr().out
        snapshot = load_snapshot(tmp_path / "B.snapshot")
        assert snapshot.config["layout_max_iter"] == 5
        assert snapshot.layout.iterations <= 5

    def test_no_strict_cutoff_flag(self, cli_config, capsys):
        assert main(["vocab", "--config", str(cli_config), "--window", "A", "--top", "0",
                     "--no-strict-cutoff"]) == EXIT_OK
        assert capsys.readouterr().out == "Vocabulary for 'A' (frequency >= 10, cap 100): 61 included, 2 excluded\n"

    def test_define_window_flag(self, fixture_dir, capsys):
        code = main(["ingest-report", "--input-dir", str(fixture_dir),
                     "--define-window", "early", "1984-01-01", "1984-12-31"])
        assert code == EXIT_OK
        assert "  early: 1984-01-01 to 1984-12-31, 6 documents" in capsys.readouterr().out

    def test_non_object_config(self, tmp_path, capsys):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        assert main(["vocab", "--config", str(path), "--window", "A"]) == EXIT_CONFIG
        assert "must hold a JSON object" in capsys.readouterr().err
