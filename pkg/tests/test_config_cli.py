import json
import math
from pathlib import Path

import pytest
import tomli

from wlattack import ConfigError
from wlattack.cli import main
from wlattack.config import RunConfig, config_from_dict, dump_toml, load_config

REPO_ROOT = Path(__file__).resolve().parent.parent


def write_config(tmp_path, body: str) -> str:
    path = tmp_path / "run.toml"
    path.write_text(body)
    return str(path)


class TestConfig:
    def test_defaults(self):
        config = config_from_dict({})
        assert config.protocol.v_a == 10.0
        assert config.protocol.eta == 0.6
        assert config.coupler.f == 1.0
        assert config.attack.t2_policy == "hiding"
        assert config.simulation.seed == 42
        assert config.output.format == "csv"

    def test_example_config_parses_to_defaults(self):
        assert load_config(REPO_ROOT / "config.example.toml") == RunConfig()

    def test_unknown_key_is_named(self):
        with pytest.raises(ConfigError, match="protocol.vv_a"):
            config_from_dict({"protocol": {"vv_a": 3.0}})
        with pytest.raises(ConfigError, match="plot"):
            config_from_dict({"plot": {}})

    def test_type_errors_are_named(self):
        with pytest.raises(ConfigError, match="simulation.n_rounds"):
            config_from_dict({"simulation": {"n_rounds": 2.5}})
        with pytest.raises(ConfigError, match="protocol.eta"):
            config_from_dict({"protocol": {"eta": "high"}})

    def test_invalid_values_carry_section(self):
        with pytest.raises(ConfigError, match="protocol"):
            config_from_dict({"protocol": {"eta": 1.4}})
        with pytest.raises(ConfigError, match="output.format"):
            config_from_dict({"output": {"format": "parquet"}})

    def test_dump_round_trip(self):
        config = config_from_dict(
            {
                "protocol": {"v_a": 8.0, "eta": 0.35, "lo_intensity": 2.5e8},
                "attack": {"t2_policy": "fixed", "t2": 0.3, "forged_lo_intensity": 1e8},
                "simulation": {"n_rounds": 123, "seed": 9},
                "output": {"path": "out/data.csv", "format": "json-lines"},
            }
        )
        assert config_from_dict(tomli.loads(dump_toml(config))) == config

    def test_malformed_toml(self, tmp_path):
        path = write_config(tmp_path, "[protocol\nv_a = 3")
        with pytest.raises(ConfigError):
            load_config(path)


class TestCliSweep:
    def test_writes_table_and_is_deterministic(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--out", str(out)]) == 0
        first = out.read_bytes()
        lines = first.decode().splitlines()
        assert lines[0] == "t2,first_term,second_term,v_be"
        assert len(lines) == 1002
        best = max((line.split(",") for line in lines[1:]), key=lambda r: float(r[3]))
        assert abs(float(best[0]) - 0.3) <= 0.001 + 1e-12
        assert float(best[3]) == pytest.approx(1.2432, abs=1e-4)
        assert main(["sweep", "--out", str(out)]) == 0
        assert out.read_bytes() == first

    def test_two_steps_gives_three_lines(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--out", str(out), "--steps", "2"]) == 0
        assert len(out.read_text().splitlines()) == 3

    def test_unwritable_path_exit_2(self, tmp_path, capsys):
        missing = tmp_path / "no" / "such" / "dir" / "sweep.csv"
        assert main(["sweep", "--out", str(missing)]) == 2


class TestCliSolve:
    def test_same_sign_report(self, capsys):
        assert main(["solve", "3", "1"]) == 0
        out = capsys.readouterr().out
        assert "T1 = 0.25" in out
        assert "T2 = 0.5" in out
        res = [
            abs(float(l.split("=")[1])) for l in out.splitlines() if l.startswith("residual_")
        ]
        assert max(res) < 1e-9 * math.sqrt(0.6) * 1e4 * 3.0
        assert "lambda2 = 1.55" in out

    def test_zero_outcome_canonical(self, capsys):
        assert main(["solve", "0", "0"]) == 0
        out = capsys.readouterr().out
        assert "T1 = 0.5" in out
        assert "signal_intensity = 0" in out

    def test_mixed_sign_solution(self, capsys):
        assert main(["solve", "2", "-1"]) == 0
        out = capsys.readouterr().out
        t2 = float(next(l.split("=")[1] for l in out.splitlines() if l.startswith("T2")))
        assert t2 < 0.5
        res = [
            abs(float(l.split("=")[1]))
            for l in out.splitlines()
            if l.startswith("residual_")
        ]
        assert max(res) < 1e-9 * math.sqrt(0.6) * 1e4 * 2.0

    def test_infeasible_restricted_config_exit_3(self, tmp_path, capsys):
        # same-sign-only sessions surface infeasibility as exit code 3
        cfg = write_config(
            tmp_path,
            '[attack]\nt2_policy = "same-sign-only"\n[simulation]\nn_rounds = 1000\nseed = 21\n'
            f'[output]\npath = "{tmp_path.as_posix()}/d.csv"\n',
        )
        assert main(["simulate", "--config", cfg]) == 3
        assert "round" in capsys.readouterr().err


class TestCliCoupler:
    def test_forward_evaluation(self, capsys):
        assert main(["coupler", "--wavelength", "1.55"]) == 0
        out = capsys.readouterr().out
        assert float(out.split("=")[1]) == pytest.approx(0.5, abs=1e-12)

    def test_inversion_lists_telecom_line(self, capsys):
        assert main(["coupler", "--transmittance", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "1.55" in out

    def test_out_of_range_target_exit_3(self, capsys):
        assert main(["coupler", "--transmittance", "1.1"]) == 3
        assert "infeasible" in capsys.readouterr().err


class TestCliSimulate:
    def test_summary_and_dataset(self, tmp_path, capsys):
        out = tmp_path / "ds.csv"
        cfg = write_config(
            tmp_path,
            "[protocol]\neta = 0.6\n"
            '[attack]\nt2_policy = "hiding"\n'
            "[simulation]\nn_rounds = 20000\nseed = 5\n"
            f'[output]\npath = "{out.as_posix()}"\n',
        )
        assert main(["simulate", "--config", cfg]) == 0
        text = capsys.readouterr().out
        assert "wrote 20000 rounds" in text
        assert "excess_hat" in text
        excess = float(
            next(l for l in text.splitlines() if l.startswith("excess_hat")).split("=")[1].split("N0")[0]
        )
        assert abs(excess) < 0.05
        assert "excess noise above epsilon = 0.01: no" in text
        assert len(out.read_text().splitlines()) == 20001

    def test_fixed_t2_summary_shows_excess(self, tmp_path, capsys):
        out = tmp_path / "ds.csv"
        cfg = write_config(
            tmp_path,
            "[protocol]\neta = 0.6\n"
            '[attack]\nt2_policy = "fixed"\nt2 = 0.3\n'
            "[simulation]\nn_rounds = 50000\nseed = 6\n"
            f'[output]\npath = "{out.as_posix()}"\n',
        )
        assert main(["simulate", "--config", cfg]) == 0
        text = capsys.readouterr().out
        excess_line = next(l for l in text.splitlines() if l.startswith("excess_hat"))
        excess = float(excess_line.split("=")[1].split("N0")[0])
        se = float(excess_line.split("(se")[1].rstrip(")"))
        assert abs(excess - 0.8432) <= 3.0 * se
        assert "excess noise above epsilon = 0.01: yes" in text

    def test_single_round_refuses_estimation(self, tmp_path, capsys):
        out = tmp_path / "ds.csv"
        assert main(["simulate", "--rounds", "1", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "estimation refused" in text
        assert len(out.read_text().splitlines()) == 2

    def test_seed_override_changes_data(self, tmp_path):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--rounds", "200", "--seed", "1", "--out", str(out_a)])
        main(["simulate", "--rounds", "200", "--seed", "2", "--out", str(out_b)])
        assert out_a.read_bytes() != out_b.read_bytes()

    def test_json_lines_format(self, tmp_path):
        out = tmp_path / "ds.jsonl"
        assert main(["simulate", "--rounds", "150", "--out", str(out), "--format", "json-lines"]) == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 150
        assert "x_B" in rows[0]

    def test_bad_config_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[protocol]\nfoo = 1\n")
        assert main(["simulate", "--config", cfg]) == 2
        assert "protocol.foo" in capsys.readouterr().err


class TestEchoConfig:
    def test_echo_round_trips(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            '[attack]\nt2_policy = "fixed"\nt2 = 0.3\n[simulation]\nseed = 11\nn_rounds = 50\n',
        )
        assert main(["simulate", "--config", cfg, "--echo-config", "--seed", "99"]) == 0
        echoed = capsys.readouterr().out
        parsed = config_from_dict(tomli.loads(echoed))
        assert parsed.attack.t2 == 0.3
        assert parsed.simulation.seed == 99  # --seed folded into the echo
        assert parsed.simulation.n_rounds == 50
