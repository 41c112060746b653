import json

import numpy as np
import pytest

from slqpg.cli import (
    TRACE_HEADER,
    bundled_benchmark,
    main,
    parse_problem,
    parse_problem_dict,
    write_problem,
)
from slqpg.errors import ParseError, ValidationError


@pytest.fixture()
def benchmark_doc():
    return bundled_benchmark()


@pytest.fixture()
def problem_file(tmp_path, benchmark_doc):
    path = tmp_path / "problem.json"
    write_problem(benchmark_doc, str(path))
    return str(path)


def _write_dict(tmp_path, raw, name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return str(path)


class TestParsing:
    def test_bundled_benchmark_shape(self, benchmark_doc):
        assert (benchmark_doc.n, benchmark_doc.m) == (2, 1)
        assert benchmark_doc.a.shape == (2, 2)
        assert benchmark_doc.k0.shape == (1, 2)

    def test_round_trip(self, tmp_path, benchmark_doc):
        path = tmp_path / "rt.json"
        write_problem(benchmark_doc, str(path))
        doc = parse_problem(str(path))
        assert (doc.n, doc.m) == (benchmark_doc.n, benchmark_doc.m)
        for name in ("a", "b", "c", "d", "q", "r", "sigma0", "k0"):
            assert np.array_equal(getattr(doc, name), getattr(benchmark_doc, name))

    def test_syntax_error_reports_line_and_column(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "n": 2,\n  "m": oops\n}')
        with pytest.raises(ParseError, match=r"line 3 column 8"):
            parse_problem(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            parse_problem(str(tmp_path / "nope.json"))

    def test_missing_field_named(self, benchmark_doc):
        raw = benchmark_doc.to_dict()
        del raw["b"]
        with pytest.raises(ValidationError, match=r"^b: missing"):
            parse_problem_dict(raw)

    def test_shape_mismatch_named(self, benchmark_doc):
        raw = benchmark_doc.to_dict()
        raw["b"] = [[0.2, 0.0]]  # should be (2, 1)
        with pytest.raises(ValidationError, match=r"^b: shape"):
            parse_problem_dict(raw)

    def test_q_not_positive_definite(self, benchmark_doc):
        raw = benchmark_doc.to_dict()
        raw["q"] = [[0.0, 0.0], [0.0, 0.0]]
        with pytest.raises(ValidationError, match="q not positive-definite"):
            parse_problem_dict(raw)

    def test_asymmetric_sigma0(self, benchmark_doc):
        raw = benchmark_doc.to_dict()
        raw["sigma0"] = [[3.0, 0.5], [0.0, 1.0]]
        with pytest.raises(ValidationError, match="sigma0: not symmetric"):
            parse_problem_dict(raw)

    def test_nonfinite_entry(self, benchmark_doc):
        raw = benchmark_doc.to_dict()
        raw["a"][0][0] = 1e400  # json serializes to Infinity-free float? force below
        raw["a"][0][0] = float("nan")
        with pytest.raises(ValidationError, match="a: non-finite"):
            parse_problem_dict(raw)


class TestExitCodes:
    def test_check_ok(self, problem_file, capsys):
        assert main(["check", problem_file]) == 0
        assert "mean-square stabilizing" in capsys.readouterr().out

    def test_check_nonstabilizer(self, tmp_path, benchmark_doc, capsys):
        raw = benchmark_doc.to_dict()
        raw["k0"] = [[0.0, 0.0]]  # open loop is unstable
        assert main(["check", _write_dict(tmp_path, raw)]) == 1
        assert "not mean-square stabilizing" in capsys.readouterr().out

    def test_parse_error_is_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{]")
        assert main(["check", str(path)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_validation_error_is_2(self, tmp_path, benchmark_doc):
        raw = benchmark_doc.to_dict()
        raw["r"] = [[-1.0]]
        assert main(["constants", _write_dict(tmp_path, raw)]) == 2

    def test_step_collapse_is_3(self, problem_file, tmp_path):
        trace = str(tmp_path / "t.csv")
        code = main(["descend", problem_file, "--tol", "1e-18",
                     "--max-iter", "10000", "--trace", trace])
        assert code == 3

    def test_descend_non_convergence_is_1(self, problem_file, tmp_path):
        trace = str(tmp_path / "t.csv")
        code = main(["descend", problem_file, "--tol", "1e-6",
                     "--max-iter", "2", "--trace", trace])
        assert code == 1


class TestDescendCommand:
    def test_trace_format(self, problem_file, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        code = main(["descend", problem_file, "--trace", str(trace)])
        assert code == 0
        out = capsys.readouterr().out
        assert "converged: True" in out
        lines = trace.read_text().strip().splitlines()
        assert lines[0] == TRACE_HEADER
        assert len(lines) >= 3
        first = lines[1].split(",")
        assert first[0] == "0"
        # 17 significant digits via %.16e, all five columns populated
        assert first[1] == f"{float(first[1]):.16e}"
        assert float(first[4]) == pytest.approx(1.0)  # rel_error starts at 1
        last = lines[-1].split(",")
        assert float(last[4]) < 1e-3

    def test_no_oracle_blanks_rel_error(self, problem_file, tmp_path):
        trace = tmp_path / "trace.csv"
        assert main(["descend", problem_file, "--no-oracle", "--trace", str(trace)]) == 0
        rows = trace.read_text().strip().splitlines()[1:]
        assert all(row.endswith(",") for row in rows)

    def test_fixed_step_flag(self, problem_file, tmp_path):
        trace = str(tmp_path / "t.csv")
        code = main(["descend", problem_file, "--step", "fixed",
                     "--alpha", "1e-8", "--max-iter", "5000", "--trace", trace])
        assert code in (0, 1)  # small alpha may not converge in budget


class TestReports:
    def test_constants_six_significant_digits(self, problem_file, capsys):
        assert main(["constants", problem_file]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(": ") for line in out.strip().splitlines())
        assert set(values) == {
            "anchor_cost", "l_smooth", "xi", "mu_tilde", "mu_pl", "gain_bound"
        }
        for text in values.values():
            assert text == f"{float(text):.6g}"

    def test_oracle_report(self, problem_file, capsys):
        assert main(["oracle", problem_file]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(": ", 1) for line in out.strip().splitlines())
        k_star = np.array(json.loads(values["k_star"]))
        assert np.allclose(k_star, [[-8.3854, 4.7642]], atol=5e-4)
        assert float(values["cost_star"]) == pytest.approx(265.0877, abs=5e-3)

    def test_report_file_matches_stdout(self, problem_file, tmp_path, capsys):
        report = tmp_path / "report.txt"
        assert main(["constants", problem_file, "--report", str(report)]) == 0
        assert report.read_text() == capsys.readouterr().out


class TestSimulateCommand:
    FAST = ["--horizon", "0.5", "--dt", "0.01", "--paths", "64"]

    def _mc_mean(self, capsys):
        out = capsys.readouterr().out
        values = dict(line.split(": ", 1) for line in out.strip().splitlines())
        return float(values["mc_cost_mean"])

    def test_runs_and_reports(self, problem_file, capsys):
        assert main(["simulate", problem_file, *self.FAST, "--seed", "5"]) == 0
        out = capsys.readouterr().out
        for key in ("analytic_cost", "mc_cost_mean", "relative_gap",
                    "decay_final_over_initial"):
            assert key in out

    def test_env_seed_overrides_flag(self, problem_file, capsys, monkeypatch):
        assert main(["simulate", problem_file, *self.FAST, "--seed", "5"]) == 0
        mean_seed5 = self._mc_mean(capsys)

        monkeypatch.setenv("SLQ_SEED", "5")
        assert main(["simulate", problem_file, *self.FAST, "--seed", "12345"]) == 0
        assert self._mc_mean(capsys) == mean_seed5

        monkeypatch.setenv("SLQ_SEED", "6")
        assert main(["simulate", problem_file, *self.FAST, "--seed", "5"]) == 0
        assert self._mc_mean(capsys) != mean_seed5


class TestVerifyCommand:
    def test_property_suite_clean(self, problem_file, capsys):
        assert main(["verify", problem_file, "--systems", "10", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "violation:" not in out
        assert "checked 10 randomized systems" in out
