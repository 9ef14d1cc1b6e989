import json
import subprocess
import sys
from pathlib import Path

import pytest

from hbc_chansim.campaign import MeasuredPoint, read_csv, write_measured_csv
from hbc_chansim.channel import ChannelParams, Scenario, channel_gain_curve
from hbc_chansim.cli import CommandPlan, UsageError, main, parse_args

ROOT = Path(__file__).resolve().parent.parent
CANONICAL = ROOT / "configs" / "canonical.json"
DATA = Path(__file__).parent / "data"


def small_config(tmp_path, **extra):
    doc = {
        "sweep": {"points": 4},
        "scenarios": [{"daq": "classical", "distance_cm": 10}, {"daq": "wireless", "distance_cm": 10}],
        **extra,
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    return path


class TestParseArgs:
    def test_sweep(self):
        plan = parse_args(["sweep", "--config", "c.json", "--out", "r.csv"])
        assert plan == CommandPlan("sweep", {"config": "c.json", "out": "r.csv"}, {"seed": 0})

    def test_missing_out_named(self):
        with pytest.raises(UsageError, match="--out"):
            parse_args(["sweep", "--config", "c.json"])

    def test_safety(self):
        plan = parse_args(["safety-check", "--tx-dbm", "4.33"])
        assert plan.command == "safety-check" and plan.options["tx_dbm"] == 4.33

    def test_analyze_optional_svg(self):
        plan = parse_args(["analyze", "--classical", "a", "--wireless", "b", "--report", "r", "--svg", "s"])
        assert plan.paths == {"classical": "a", "wireless": "b", "report": "r", "svg": "s"}

    def test_calibrate(self):
        plan = parse_args(["calibrate", "--measured", "m", "--config", "c", "--out", "o", "--budget", "5", "--seed", "2"])
        assert plan.options == {"seed": 2, "budget": 5}

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["frobnicate"],
            ["sweep", "--config", "c", "--out", "o", "--bogus"],
            ["sweep", "--config", "", "--out", "o"],
            ["safety-check", "--tx-dbm", "hot"],
            ["calibrate", "--measured", "m", "--config", "c", "--out", "o", "--budget", "-1"],
        ],
    )
    def test_usage_errors(self, argv):
        with pytest.raises(UsageError):
            parse_args(argv)


class TestExitCodes:
    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "sweep" in capsys.readouterr().out
        assert main(["sweep", "--help"]) == 0

    def test_usage(self, capsys):
        assert main(["sweep", "--config", "c.json"]) == 1
        assert "--out" in capsys.readouterr().err

    @pytest.mark.parametrize("tx,code", [("5.0", 0), ("4.33", 0), ("5.01", 3), ("6", 3), ("nan", 3)])
    def test_safety_check(self, tx, code):
        assert main(["safety-check", "--tx-dbm", tx]) == code

    def test_missing_config(self, tmp_path):
        assert main(["sweep", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "r.csv")]) == 2
        assert not (tmp_path / "r.csv").exists()


class TestSweep:
    def test_canonical(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert main(["sweep", "--config", str(CANONICAL), "--out", str(out)]) == 0
        assert len(read_csv(out)) == 366
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 7
        assert lines[0].startswith("classical_10cm: 61 points")

    def test_safety_violation_leaves_nothing(self, tmp_path):
        cfg = small_config(tmp_path, safety={"max_tx_dbm": 2.0})
        out = tmp_path / "r.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 3
        assert sorted(p.name for p in tmp_path.iterdir()) == ["c.json"]

    def test_unknown_key(self, tmp_path):
        cfg = small_config(tmp_path, extra_thing=1)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "r.csv")]) == 2

    def test_unwritable_target(self, tmp_path):
        cfg = small_config(tmp_path)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "no" / "r.csv")]) == 2

    def test_module_entry_point(self, tmp_path):
        cfg = small_config(tmp_path)
        out = tmp_path / "r.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "hbc_chansim", "sweep", "--config", str(cfg), "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert len(read_csv(out)) == 8


class TestAnalyze:
    def test_report_and_svg(self, tmp_path, capsys):
        rep, svg = tmp_path / "r.json", tmp_path / "c.svg"
        argv = ["analyze", "--classical", str(DATA / "classical.csv"), "--wireless", str(DATA / "wireless.csv")]
        assert main(argv + ["--report", str(rep), "--svg", str(svg)]) == 0
        doc = json.loads(rep.read_text())
        assert doc["mean_gap_db"] == {"10": pytest.approx(40 / 3), "30": pytest.approx(71 / 3)}
        assert svg.read_text() == (DATA / "golden_chart.svg").read_text()
        assert "grand mean overestimation 18.50 dB" in capsys.readouterr().out

    def test_grid_mismatch(self, tmp_path, capsys):
        rep, svg = tmp_path / "r.json", tmp_path / "c.svg"
        argv = ["analyze", "--classical", str(DATA / "classical.csv"), "--wireless", str(DATA / "wireless_shifted.csv")]
        assert main(argv + ["--report", str(rep), "--svg", str(svg)]) == 2
        assert "20000000" in capsys.readouterr().err
        assert not rep.exists() and not svg.exists()

    def test_missing_distance(self, tmp_path):
        wl = tmp_path / "w.csv"
        wl.write_text("\n".join((DATA / "wireless.csv").read_text().splitlines()[:4]) + "\n")
        argv = ["analyze", "--classical", str(DATA / "classical.csv"), "--wireless", str(wl)]
        assert main(argv + ["--report", str(tmp_path / "r.json")]) == 2

    def test_malformed_csv(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("daq_mode,distance_cm,freq_hz,gain_db\nwireless,10,1\n")
        argv = ["analyze", "--classical", str(DATA / "classical.csv"), "--wireless", str(bad)]
        assert main(argv + ["--report", str(tmp_path / "r.json")]) == 2
        assert "line 2" in capsys.readouterr().err


class TestCalibrate:
    def measured(self, tmp_path, params):
        pts = []
        freqs = [8e6, 24e6, 40e6, 56e6]
        for mode in ("classical", "wireless"):
            for d in (10.0, 30.0):
                g = channel_gain_curve(Scenario(mode, d), params, freqs)
                pts += [MeasuredPoint(mode, d, f, float(v)) for f, v in zip(freqs, g)]
        path = tmp_path / "m.csv"
        write_measured_csv(pts, path)
        return path

    def test_recovers_k_int(self, tmp_path, capsys):
        planted = ChannelParams().replace(k_int=3 * ChannelParams().k_int)
        m = self.measured(tmp_path, planted)
        cfg = small_config(tmp_path, fit={"free": ["k_int"]})
        out = tmp_path / "fit.json"
        assert main(["calibrate", "--measured", str(m), "--config", str(cfg), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"params"}
        assert doc["params"]["k_int"] == pytest.approx(planted.k_int, rel=0.05)
        assert "converged" in capsys.readouterr().out

    def test_budget_flag(self, tmp_path, capsys):
        m = self.measured(tmp_path, ChannelParams().replace(c_gt=2e-11))
        cfg = small_config(tmp_path)
        out = tmp_path / "fit.json"
        assert main(["calibrate", "--measured", str(m), "--config", str(cfg), "--out", str(out), "--budget", "6"]) == 0
        assert "after 6 evaluations (not converged)" in capsys.readouterr().out

    def test_bad_fit_section(self, tmp_path):
        m = self.measured(tmp_path, ChannelParams())
        cfg = small_config(tmp_path, fit={"free": ["nope"]})
        assert main(["calibrate", "--measured", str(m), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        cfg = small_config(tmp_path, fit={"steps": 3})
        assert main(["calibrate", "--measured", str(m), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert not (tmp_path / "o").exists()

    def test_header_only_measured(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("daq_mode,distance_cm,freq_hz,gain_db\n")
        cfg = small_config(tmp_path)
        assert main(["calibrate", "--measured", str(m), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_identical_runs_identical_bytes(tmp_path):
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        d.mkdir()
        assert main(["sweep", "--config", str(CANONICAL), "--out", str(d / "r.csv")]) == 0
        assert main(["analyze", "--classical", str(d / "r.csv"), "--wireless", str(d / "r.csv"),
                     "--report", str(d / "r.json"), "--svg", str(d / "c.svg")]) == 0
        outs.append([(d / n).read_bytes() for n in ("r.csv", "r.json", "c.svg")])
    assert outs[0] == outs[1]
