import hashlib
import io
import json
import math
import os

import pytest

from ratesplit import InvalidConfigurationError
from ratesplit.cli import CSV_COLUMNS, csv_to_rows, main, rows_to_csv, run_experiment, write_atomic
from ratesplit.config import (
    build_config,
    load_config,
    parse_angle,
    parse_snr_grid,
    preset_catalog,
    preset_config,
    with_overrides,
)
from ratesplit.simulate import ReportRow


class TestParsers:
    @pytest.mark.parametrize(
        "text,value",
        [("pi", math.pi), ("pi/8", math.pi / 8), ("2*pi/3", 2 * math.pi / 3), ("0.5", 0.5), (0.25, 0.25)],
    )
    def test_angles(self, text, value):
        assert parse_angle(text) == pytest.approx(value)

    def test_bad_angle(self):
        with pytest.raises(ValueError):
            parse_angle("tau/2")

    def test_snr_grids(self):
        assert parse_snr_grid("0:35:5") == [0, 5, 10, 15, 20, 25, 30, 35]
        assert parse_snr_grid({"start": 10, "stop": 20, "step": 10}) == [10, 20]
        assert parse_snr_grid([3, 7]) == [3, 7]
        with pytest.raises(ValueError):
            parse_snr_grid("0:10:0")
        with pytest.raises(ValueError):
            parse_snr_grid("0:10")


class TestPresets:
    def test_catalog(self):
        names = preset_catalog()
        assert len(names) >= 7
        for name in names:
            cfg = preset_config(name)
            assert cfg.variants()

    def test_rs_validation(self):
        cfg = preset_config("fig_rs_validation")
        assert cfg.M == 100 and cfg.K == [5]
        assert cfg.tau2 == [0.0, 0.4]
        assert cfg.snr_db == list(range(0, 40, 5))

    def test_hrs(self):
        cfg = preset_config("fig_hrs")
        assert cfg.M == 100 and cfg.G == 4 and sum(cfg.group_sizes) == 12
        assert cfg.b == [15] * 4 and cfg.r_d == [20] * 4
        assert cfg.spread == pytest.approx([math.pi / 8, math.pi / 3])

    def test_unknown_preset(self):
        with pytest.raises(InvalidConfigurationError, match="unknown preset"):
            preset_config("fig_nope")


class TestValidation:
    def test_empty_scheme_list(self):
        with pytest.raises(InvalidConfigurationError, match="schemes"):
            build_config({"schemes": []})

    def test_named_inequality(self):
        raw = {
            "layout": "grouped", "M": 40, "K": 4, "group_sizes": [2, 2], "b": [15, 10],
            "r_d": [30, 30], "schemes": ["TTP"],
        }
        with pytest.raises(InvalidConfigurationError, match=r"b_g exceeds M - sum_\(l!=g\) r\^d_l"):
            build_config(raw)

    def test_errors_are_collected_per_field(self):
        with pytest.raises(InvalidConfigurationError) as info:
            build_config({"tau2": [1.5], "trials": 0, "colour": "red", "snr_db": [5, 0]})
        msg = str(info.value)
        for field in ("tau2", "trials", "colour", "snr_db"):
            assert field in msg

    def test_two_tier_schemes_need_groups(self):
        with pytest.raises(InvalidConfigurationError, match="grouped"):
            build_config({"schemes": ["HRS_CLF"]})

    def test_schema_version(self):
        with pytest.raises(InvalidConfigurationError, match="schema_version"):
            build_config({"schema_version": 99})

    def test_overrides_revalidate(self):
        cfg = preset_config("fig_rs_vs_bc")
        assert with_overrides(cfg, trials=3).trials == 3
        with pytest.raises(InvalidConfigurationError):
            with_overrides(cfg, schemes=[])

    def test_digest_tracks_content(self):
        a = preset_config("fig_rs_vs_bc")
        b = with_overrides(a, seed=a.seed + 1)
        assert a.digest() != b.digest()
        assert a.digest() == preset_config("fig_rs_vs_bc").digest()

    def test_load_from_file_and_stdin(self, tmp_path, monkeypatch):
        raw = {"schema_version": 1, "K": 3, "schemes": ["BC_RZF"], "trials": 2}
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(raw))
        assert load_config(str(p)).K == [3]
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(raw)))
        assert load_config("-").trials == 2
        p.write_text("{not json")
        with pytest.raises(InvalidConfigurationError, match="JSON"):
            load_config(str(p))


def _row(**kw):
    base = dict(
        snr_db=5.0, scheme="RS_CLF", sum_rate_mean=1 / 3, sum_rate_stderr=0.0,
        rate_common_outer=0.1, rate_common_inner=0.0, rate_private=math.pi,
        split_t=float("nan"), split_alpha=0.123456789012345, split_beta=1.0, trials=10, seed=4,
    )
    base.update(kw)
    return ReportRow(**base)


class TestCsv:
    def test_columns_and_precision(self):
        text = rows_to_csv([_row()])
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        fields = dict(zip(CSV_COLUMNS, lines[1].split(",")))
        assert fields["sum_rate_mean"] == "0.333333333333"
        assert fields["rate_private"] == "3.14159265359"
        assert fields["split_t"] == "nan"

    def test_round_trip(self):
        rows = [_row(), _row(scheme="RS_CLF_AS", trials=0, sum_rate_mean=12.5)]
        text = rows_to_csv(rows)
        assert rows_to_csv(csv_to_rows(text)) == text

    def test_bad_header(self):
        with pytest.raises(ValueError):
            csv_to_rows("a,b\n1,2\n")

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        target = tmp_path / "x.csv"
        write_atomic(str(target), "hello\n")
        assert target.read_text() == "hello\n"
        assert os.listdir(tmp_path) == ["x.csv"]


def _tiny(tmp_path):
    raw = {"M": 16, "K": 2, "tau2": [0.3], "snr_db": [0, 10], "schemes": ["BC_RZF", "RS_CLF"],
           "trials": 3, "quadrature_points": 32, "seed": 11}
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(raw))
    return p


class TestRun:
    def test_run_experiment_writes_sealed_outputs(self, tmp_path):
        cfg = load_config(str(_tiny(tmp_path)))
        out = tmp_path / "out"
        manifest = run_experiment(cfg, str(out))
        files = sorted(os.listdir(out))
        assert "manifest.json" in files
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == manifest
        assert on_disk["config_hash"] == cfg.digest()
        for name, digest in manifest["files"].items():
            data = (out / name).read_bytes()
            assert hashlib.sha256(data).hexdigest() == digest
            rows = csv_to_rows(data.decode())
            schemes = {r.scheme for r in rows}
            assert schemes == {"BC_RZF", "BC_RZF_AS", "RS_CLF", "RS_CLF_AS"}
            assert all(r.sum_rate_stderr == 0 for r in rows if r.scheme.endswith("_AS"))
        assert not [f for f in files if f.startswith(".tmp-")]

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = load_config(str(_tiny(tmp_path)))
        a = run_experiment(cfg, str(tmp_path / "a"))
        b = run_experiment(cfg, str(tmp_path / "b"), workers=2)
        assert a["files"] == b["files"]

    def test_cli_run_and_overrides(self, tmp_path, capsys):
        out = tmp_path / "cli"
        code = main(["run", str(_tiny(tmp_path)), "--trials", "2", "--seed", "5",
                     "--out", str(out), "--schemes", "BC_RZF", "--snr", "0:5:5"])
        assert code == 0
        printed = capsys.readouterr().out.split()
        assert len(printed) == 1 and os.path.exists(printed[0])
        rows = csv_to_rows(open(printed[0]).read())
        assert {r.snr_db for r in rows} == {0.0, 5.0}
        assert {r.trials for r in rows if r.scheme == "BC_RZF"} == {2}
        assert {r.seed for r in rows} == {5}

    def test_cli_list_and_validate(self, capsys):
        assert main(["list-presets"]) == 0
        listed = capsys.readouterr().out.splitlines()
        assert len(listed) == len(preset_catalog())
        assert main(["validate", "fig_hrs"]) == 0
        assert "fig_hrs: ok" in capsys.readouterr().out

    def test_cli_bad_config_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"schemes": []}))
        assert main(["validate", str(p)]) == 2
        assert "schemes" in capsys.readouterr().err
        assert main(["run", "fig_rs_vs_bc", "--snr", "a:b"]) == 2

    def test_cli_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["run", str(_tiny(tmp_path)), "--out", str(blocker / "sub")]) == 2
