"""Command dispatch, scenario parsing, serialization, and exit codes."""

from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from stopgame.cli import (
    EXIT_FAIL,
    EXIT_OK,
    EXIT_PARSE,
    game_value_report_from_dict,
    game_value_report_to_dict,
    load_scenario,
    main,
    parse_rational,
    rational_str,
    scenario_from_dict,
    solution_report_from_dict,
    solution_report_to_dict,
)
from stopgame.randgen import random_scenario_dict

from conftest import classical_dynkin_value

F = Fraction

BUNDLED = [
    "mismatch_T1.json",
    "distance_T2.json",
    "distance_T4.json",
    "distance_T5.json",
    "dynkin_small.json",
    "utility_spread_binomial.json",
    "market_entry.json",
]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--output", "json")
    return code, json.loads(out), err


class TestRationals:
    def test_round_trip(self):
        for text in ("0/1", "-3/7", "22/6"):
            assert rational_str(parse_rational(text)) == rational_str(F(text))

    def test_integers_accepted(self):
        assert parse_rational("5") == F(5)
        assert parse_rational(5) == F(5)

    def test_garbage_rejected(self):
        from stopgame.cli import ScenarioError

        with pytest.raises(ScenarioError):
            parse_rational("1/0")
        with pytest.raises(ScenarioError):
            parse_rational([1, 2])


class TestValidateCommand:
    def test_bundled_mismatch_valid(self, capsys):
        code, out, _ = run(capsys, "validate", "mismatch_T1.json")
        assert code == EXIT_OK
        assert "valid" in out

    def test_non_refining_filtration(self, capsys, tmp_path):
        scenario = {
            "name": "broken",
            "space": {
                "horizon": 1,
                "outcomes": [
                    {"label": "a", "probability": "1/2"},
                    {"label": "b", "probability": "1/2"},
                ],
                "filtration": [[[0], [1]], [[0, 1]]],
            },
            "payoff": {"generator": "distance"},
        }
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(scenario))
        code, out, _ = run(capsys, "validate", str(path))
        assert code == EXIT_FAIL
        lines = [line for line in out.splitlines() if line]
        assert len(lines) == 1
        assert lines[0].startswith("FILTRATION_REFINEMENT")

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "validate", str(path))
        assert code == EXIT_PARSE
        assert "line 1" in err

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "validate", "nope_does_not_exist.json")
        assert code == EXIT_PARSE

    def test_all_bundled_scenarios_valid(self, capsys):
        for name in BUNDLED:
            code, _, _ = run(capsys, "validate", name)
            assert code == EXIT_OK, name

    def test_dynkin_dominance_failure(self, capsys, tmp_path):
        scenario = {
            "name": "bad_dynkin",
            "space": {
                "horizon": 0,
                "outcomes": [{"label": "w", "probability": "1/1"}],
                "filtration": [[[0]]],
            },
            "payoff": {"generator": "dynkin", "f": [["0/1"]], "g": [["1/1"]]},
        }
        path = tmp_path / "bad_dynkin.json"
        path.write_text(json.dumps(scenario))
        code, out, _ = run(capsys, "validate", str(path))
        assert code == EXIT_FAIL
        assert "PAYOFF_CONSTRUCTION" in out


class TestSolveCommand:
    def test_mismatch_solution(self, capsys):
        code, payload, _ = run_json(capsys, "solve", "mismatch_T1.json")
        assert code == EXIT_OK
        assert payload["value"] == "0/1"
        assert payload["tau_d"] == [0]
        assert payload["rho_d"] == [1]

    def test_distance_t5_value(self, capsys):
        code, payload, _ = run_json(capsys, "solve", "distance_T5.json")
        assert code == EXIT_OK
        assert payload["value"] == "0/1"

    def test_dynkin_small_matches_classical_recursion(self, capsys):
        scenario = load_scenario("dynkin_small.json")
        f = scenario.payoff_spec.f
        g = scenario.payoff_spec.g
        expected = classical_dynkin_value(f, g, scenario.space)
        code, payload, _ = run_json(capsys, "solve", "dynkin_small.json")
        assert code == EXIT_OK
        assert parse_rational(payload["value"]) == expected

    def test_invalid_scenario_exits_one(self, capsys, tmp_path):
        scenario = {
            "name": "badmass",
            "space": {
                "horizon": 0,
                "outcomes": [{"label": "w", "probability": "1/3"}],
                "filtration": [[[0]]],
            },
            "payoff": {"generator": "distance"},
        }
        path = tmp_path / "badmass.json"
        path.write_text(json.dumps(scenario))
        code, _, err = run(capsys, "solve", str(path))
        assert code == EXIT_FAIL
        assert "PROBABILITY_MASS" in err


class TestVerifyCommand:
    def test_mismatch_eight_values(self, capsys):
        code, payload, _ = run_json(capsys, "verify", "mismatch_T1.json")
        assert code == EXIT_OK
        values = payload["values"]
        assert values["b_bar"] == "1/1"
        assert values["b_under"] == "0/1"
        assert values["c_bar"] == "0/1"
        assert values["c_under"] == "1/1"
        assert values["v_bar"] == values["v_under"] == values["solver_value"] == "0/1"
        assert payload["checks_passed"] is True

    def test_distance_t4_naive_values(self, capsys):
        code, payload, _ = run_json(capsys, "verify", "distance_T4.json")
        assert code == EXIT_OK
        assert payload["values"]["a_bar"] == "2/1"
        assert payload["values"]["a_under"] == "0/1"

    def test_random_scenario_passes(self, capsys):
        code, payload, _ = run_json(capsys, "verify", "--random", "T=3,outcomes=6,seed=42")
        assert code == EXIT_OK
        assert payload["checks_passed"] is True

    def test_cap_skip_warns_but_passes(self, capsys):
        code, payload, err = run_json(
            capsys, "verify", "distance_T2.json", "--caps", "strategies=5"
        )
        assert code == EXIT_OK
        assert "skipped" in err
        assert payload["values"]["b_bar"] is None


class TestValuesCommand:
    def test_mismatch_table(self, capsys):
        code, out, _ = run(capsys, "values", "mismatch_T1.json")
        assert code == EXIT_OK
        table = dict(
            line.split() for line in out.splitlines() if line and not line.startswith(("|", "skipped"))
        )
        assert table["a_bar"] == "1/1"
        assert table["a_under"] == "0/1"
        assert table["b_bar"] == "1/1"
        assert table["b_under"] == "0/1"
        assert table["c_bar"] == "0/1"
        assert table["c_under"] == "1/1"
        assert table["v_bar"] == "0/1"
        assert table["v_under"] == "0/1"

    def test_constant_payoff_all_equal(self, capsys, tmp_path):
        scenario = {
            "name": "const",
            "space": {
                "horizon": 1,
                "outcomes": [{"label": "w", "probability": "1/1"}],
                "filtration": [[[0]], [[0]]],
            },
            "payoff": {
                "generator": "explicit",
                "table": [[["5/2"], ["5/2"]], [["5/2"], ["5/2"]]],
            },
        }
        path = tmp_path / "const.json"
        path.write_text(json.dumps(scenario))
        code, payload, _ = run_json(capsys, "values", str(path))
        assert code == EXIT_OK
        assert len({payload[k] for k in ("a_bar", "a_under", "b_bar", "c_under", "solver_value")}) == 1

    def test_distance_t2(self, capsys):
        code, payload, _ = run_json(capsys, "values", "distance_T2.json")
        assert code == EXIT_OK
        assert payload["v_bar"] == payload["v_under"] == "0/1"
        assert payload["a_bar"] == "1/1"

    def test_cap_exceeded_partial_table_exit_zero(self, capsys):
        code, payload, err = run_json(
            capsys, "values", "utility_spread_binomial.json"
        )
        assert code == EXIT_OK
        assert payload["b_bar"] is None
        assert payload["skipped"]


class TestSerialization:
    def test_solution_report_round_trip(self, capsys):
        for name in BUNDLED:
            code, payload, _ = run_json(capsys, "verify", name)
            report = solution_report_from_dict(payload)
            assert solution_report_from_dict(solution_report_to_dict(report)) == report

    def test_game_value_report_round_trip(self, capsys):
        code, payload, _ = run_json(capsys, "values", "mismatch_T1.json")
        report = game_value_report_from_dict(payload)
        assert game_value_report_from_dict(game_value_report_to_dict(report)) == report

    def test_random_scenario_round_trip(self, capsys):
        code, payload, _ = run_json(capsys, "verify", "--random", "T=2,outcomes=4,seed=7")
        report = solution_report_from_dict(payload)
        assert solution_report_from_dict(solution_report_to_dict(report)) == report

    def test_timing_excluded_from_equality(self, capsys):
        _, payload, _ = run_json(capsys, "solve", "mismatch_T1.json")
        a = solution_report_from_dict(payload)
        _, payload_timed, _ = run_json(capsys, "solve", "mismatch_T1.json", "--timing")
        b = solution_report_from_dict(payload_timed)
        assert "timing_seconds" in payload_timed
        assert a == b


class TestDeterminism:
    def test_identical_runs_byte_identical(self, capsys):
        runs = []
        for _ in range(2):
            code, out, _ = run(capsys, "verify", "dynkin_small.json", "--output", "json")
            assert code == EXIT_OK
            runs.append(out)
        assert runs[0] == runs[1]

    def test_random_seed_byte_identical(self, capsys):
        runs = []
        for _ in range(2):
            code, out, _ = run(capsys, "verify", "--random", "T=2,outcomes=5,seed=3", "--output", "json")
            assert code == EXIT_OK
            runs.append(out)
        assert runs[0] == runs[1]

    def test_random_scenario_dict_is_pure(self):
        assert random_scenario_dict(3, 6, 42) == random_scenario_dict(3, 6, 42)
        assert random_scenario_dict(3, 6, 42) != random_scenario_dict(3, 6, 43)


class TestArgumentHandling:
    def test_usage_error_exit_two(self, capsys):
        assert main(["frobnicate"]) == EXIT_PARSE or main(["frobnicate"]) == 2

    def test_no_file_no_random(self, capsys):
        code, _, err = run(capsys, "solve")
        assert code == EXIT_PARSE
        assert "scenario" in err

    def test_env_caps_override(self, capsys, monkeypatch):
        monkeypatch.setenv("STOPGAME_CAPS", "strategies=5")
        code, payload, err = run_json(capsys, "values", "distance_T2.json")
        assert code == EXIT_OK
        assert payload["b_bar"] is None

    def test_flag_caps_beat_env(self, capsys, monkeypatch):
        monkeypatch.setenv("STOPGAME_CAPS", "strategies=5")
        code, payload, _ = run_json(
            capsys, "values", "distance_T2.json", "--caps", "strategies=100000"
        )
        assert code == EXIT_OK
        assert payload["b_bar"] == "1/1"

    def test_float_mode_exponential_utility(self, capsys, tmp_path):
        scenario = {
            "name": "float_exp",
            "mode": "float",
            "space": {
                "horizon": 1,
                "outcomes": [
                    {"label": "u", "probability": "1/2"},
                    {"label": "d", "probability": "1/2"},
                ],
                "filtration": [[[0, 1]], [[0], [1]]],
            },
            "payoff": {
                "generator": "utility_spread",
                "f": [["2/1", "2/1"], ["3/1", "1/1"]],
                "g": [["2/1", "2/1"], ["2/1", "2/1"]],
                "utility": {"name": "exponential", "rate": "1/2"},
            },
        }
        path = tmp_path / "float_exp.json"
        path.write_text(json.dumps(scenario))
        code, payload, _ = run_json(capsys, "verify", str(path))
        assert code == EXIT_OK
        assert payload["values"]["approximate"] is True

    def test_exponential_in_exact_mode_fails(self, capsys, tmp_path):
        scenario = {
            "name": "exact_exp",
            "mode": "exact",
            "space": {
                "horizon": 0,
                "outcomes": [{"label": "w", "probability": "1/1"}],
                "filtration": [[[0]]],
            },
            "payoff": {
                "generator": "utility_spread",
                "f": [["1/1"]],
                "g": [["0/1"]],
                "utility": {"name": "exponential", "rate": "1/2"},
            },
        }
        path = tmp_path / "exact_exp.json"
        path.write_text(json.dumps(scenario))
        code, _, err = run(capsys, "verify", str(path))
        assert code == EXIT_FAIL
        assert "float mode" in err

    def test_scenario_from_dict_rejects_bad_mode(self):
        from stopgame.cli import ScenarioError

        raw = random_scenario_dict(1, 2, 1)
        raw["mode"] = "quantum"
        with pytest.raises(ScenarioError):
            scenario_from_dict(raw)
