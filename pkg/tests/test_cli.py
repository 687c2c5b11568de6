import json

import pytest
from click.testing import CliRunner

from hybrid_ug.cli import main

SMALL_CFG = """\
ai_kind = "samaritan"
betas = [0.1, 1.0]

[m_p]
start = 0
stop = 5
step = 5

[m_r]
start = 0
stop = 5
step = 5

[h]
start = 0.5
stop = 0.5
step = 0.01

[l]
start = 0.1
stop = 0.2
step = 0.1
"""


@pytest.fixture()
def runner():
    return CliRunner()


def _json(result):
    return json.loads(result.output.strip().splitlines()[-1])


class TestStationary:
    def test_baseline_is_unfair(self, runner):
        result = runner.invoke(main, ["stationary", "--beta", "1"])
        assert result.exit_code == 0
        record = _json(result)
        assert record["pi_LL"] > 0.99
        assert record["argmax"] == "LL"

    def test_single_ai_receiver_flips_to_fair(self, runner):
        result = runner.invoke(main, ["stationary", "--beta", "0.1", "--mr", "1"])
        assert _json(result)["argmax"] == "HH"

    def test_invalid_offers_exit_2(self, runner):
        result = runner.invoke(main, ["stationary", "--h", "0.3", "--l", "0.5"])
        assert result.exit_code == 2

    def test_n_sets_both_populations(self, runner):
        result = runner.invoke(main, ["stationary", "--n", "20", "--beta", "1"])
        record = _json(result)
        assert record["N_P"] == record["N_R"] == 20


class TestFixation:
    def test_harmonic_closed_form_edge(self, runner):
        result = runner.invoke(
            main, ["fixation", "--edge", "HL-HH", "--mr", "1", "--beta", "0.1"]
        )
        assert _json(result)["rho"] == pytest.approx(0.1928, abs=5e-4)

    def test_single_ai_proposer_edge(self, runner):
        result = runner.invoke(
            main, ["fixation", "--edge", "LH-HH", "--mp", "1", "--beta", "0.1"]
        )
        assert _json(result)["rho"] == pytest.approx(0.315, abs=1e-3)

    def test_all_edges_report(self, runner):
        result = runner.invoke(main, ["fixation", "--all-edges", "--mr", "1"])
        record = _json(result)
        assert len(record["edges"]) == 8

    def test_edge_and_all_edges_are_exclusive(self, runner):
        assert runner.invoke(main, ["fixation"]).exit_code == 2
        assert (
            runner.invoke(
                main, ["fixation", "--edge", "HL-HH", "--all-edges"]
            ).exit_code
            == 2
        )

    def test_malformed_edge(self, runner):
        assert runner.invoke(main, ["fixation", "--edge", "XX-YY"]).exit_code == 2


class TestSweep:
    def test_grid_run_writes_csv_and_manifest(self, runner, tmp_path):
        cfg = tmp_path / "grid.cfg"
        cfg.write_text(SMALL_CFG)
        out = tmp_path / "out.csv"
        result = runner.invoke(main, ["sweep", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        summary = _json(result)
        assert summary["records"] == 16
        assert summary["skipped"] == 0
        assert out.exists()
        manifest = json.loads((tmp_path / "out.csv.manifest.json").read_text())
        assert manifest["tool"] == "hybrid-ug"
        assert manifest["records"] == 16

    def test_worker_counts_are_byte_identical(self, runner, tmp_path):
        cfg = tmp_path / "grid.cfg"
        cfg.write_text(SMALL_CFG)
        blobs = []
        for workers in ("1", "3"):
            out = tmp_path / f"w{workers}.csv"
            result = runner.invoke(
                main, ["sweep", str(cfg), "--out", str(out), "--workers", workers]
            )
            assert result.exit_code == 0, result.output
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_malformed_config_exits_2(self, runner, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not valid toml [[[")
        out = tmp_path / "out.csv"
        result = runner.invoke(main, ["sweep", str(cfg), "--out", str(out)])
        assert result.exit_code == 2
        assert not out.exists()

    def test_unknown_config_key_exits_2(self, runner, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(SMALL_CFG + "\nmystery = 3\n")
        result = runner.invoke(
            main, ["sweep", str(cfg), "--out", str(tmp_path / "out.csv")]
        )
        assert result.exit_code == 2

    def test_missing_out_exits_2(self, runner, tmp_path):
        cfg = tmp_path / "grid.cfg"
        cfg.write_text(SMALL_CFG)
        assert runner.invoke(main, ["sweep", str(cfg)]).exit_code == 2

    def test_threshold_mode_weak_selection(self, runner):
        result = runner.invoke(main, ["sweep", "--threshold", "mr", "--beta", "0.1"])
        assert result.exit_code == 0
        assert _json(result)["threshold"] == 1

    def test_frontier_mode(self, runner):
        result = runner.invoke(main, ["sweep", "--frontier", "--beta", "0.1"])
        assert result.exit_code == 0
        frontier = _json(result)["frontier"]
        assert frontier[0] == {"M_P": 0, "M_R": 1}


class TestSimulateCommands:
    def test_fixation_requires_seed(self, runner):
        result = runner.invoke(
            main, ["simulate", "fixation", "--n", "20", "--edge", "HL-HH"]
        )
        assert result.exit_code == 2

    def test_fixation_estimate(self, runner):
        result = runner.invoke(
            main,
            [
                "simulate", "fixation", "--n", "20", "--mr", "1", "--beta", "0",
                "--edge", "HL-HH", "--trials", "20000", "--seed", "7",
            ],
        )
        assert result.exit_code == 0, result.output
        record = _json(result)
        assert abs(record["p_hat"] - 0.2775) <= 3 * record["stderr"]
        assert record["generator"]

    def test_fixation_determinism(self, runner):
        args = [
            "simulate", "fixation", "--n", "12", "--edge", "LL-HL",
            "--trials", "2000", "--seed", "9",
        ]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output

    def test_all_timeouts_exit_3(self, runner):
        result = runner.invoke(
            main,
            [
                "simulate", "fixation", "--edge", "HL-HH", "--beta", "0",
                "--trials", "5", "--max-steps", "1", "--seed", "1",
            ],
        )
        assert result.exit_code == 3

    def test_longrun_requires_seed(self, runner):
        result = runner.invoke(main, ["simulate", "longrun", "--n", "20"])
        assert result.exit_code == 2

    def test_longrun_record(self, runner):
        result = runner.invoke(
            main,
            [
                "simulate", "longrun", "--n", "10", "--beta", "1",
                "--mu", "1e-3", "--steps", "2e6", "--seed", "7",
            ],
        )
        assert result.exit_code == 0, result.output
        record = _json(result)
        occ = sum(record[f"occ_{s}"] for s in ("HH", "HL", "LH", "LL"))
        assert occ == pytest.approx(1.0, abs=1e-9)


class TestFigure:
    def test_unknown_id_exits_2(self, runner, tmp_path):
        assert (
            runner.invoke(main, ["figure", "fig2", "--out", str(tmp_path)]).exit_code
            == 2
        )

    def test_fig8_writes_transition_reports(self, runner, tmp_path):
        result = runner.invoke(main, ["figure", "fig8", "--out", str(tmp_path)])
        assert result.exit_code == 0, result.output
        records = json.loads((tmp_path / "fig8.json").read_text())
        assert len(records) == 4
        assert records[3]["M_P"] == 14
        assert all(r["ai_kind"] == "discriminatory" for r in records)

    def test_fig8_rerun_is_byte_identical(self, runner, tmp_path):
        runner.invoke(main, ["figure", "fig8", "--out", str(tmp_path)])
        first = (tmp_path / "fig8.json").read_bytes()
        runner.invoke(main, ["figure", "fig8", "--out", str(tmp_path)])
        assert (tmp_path / "fig8.json").read_bytes() == first

    def test_fig1_curves(self, runner, tmp_path):
        result = runner.invoke(main, ["figure", "fig1", "--out", str(tmp_path)])
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "fig1.csv").read_text().splitlines()
        assert lines[0] == "vary,M,beta,role,fraction"
        # 2 axes x 4 betas x 101 counts x 2 roles
        assert len(lines) == 1 + 2 * 4 * 101 * 2
        # weak selection: a single AI receiver drives receivers to full fairness
        row = next(
            line for line in lines
            if line.startswith("m_r,1,0.1,receiver,")
        )
        assert float(row.rsplit(",", 1)[1]) > 0.98
