"""Unit tests for the command-line interface."""

import csv
import io
import json
from unittest.mock import patch

import pytest
import typer
from typer.testing import CliRunner

from wishart_mask_lab.cli import app, configure_logging
from wishart_mask_lab.config import config
from wishart_mask_lab.ensembles import masked_goe
from wishart_mask_lab.graphs import complete_graph
from wishart_mask_lab.seeding import Stream, trial_rng
from wishart_mask_lab.statistics import kappa3
from wishart_mask_lab.verification import CheckResult, SuiteReport

runner = CliRunner()


def run_json(tmp_path, *args: str) -> dict:
    out = tmp_path / "out.json"
    result = runner.invoke(app, [*args, "--out", str(out)])
    assert result.exit_code == 0, result.output
    return json.loads(out.read_text())


def census_counts(document: dict) -> dict:
    return {key: value for key, value in document.items() if key.startswith(("num_", "onum_"))}


def run_csv(tmp_path, *args: str) -> list[dict[str, str]]:
    out = tmp_path / "out.csv"
    result = runner.invoke(app, [*args, "--format", "csv", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = [line for line in out.read_text().splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestCensusCommand:
    """Test the census command."""

    def test_complete_graph(self, tmp_path):
        document = run_json(tmp_path, "census", "--graph", "complete:n=4")

        assert document["num_c3"] == 4
        assert document["onum_k13"] is None
        assert "counts" not in document
        assert document["graph"] == {
            "spec": "complete:n=4",
            "n_vertices": 4,
            "num_edges": 6,
            "oriented": False,
        }
        assert document["metadata"]["command"] == "census"

    def test_bipartite_graph_with_ratios(self, tmp_path):
        document = run_json(tmp_path, "census", "--graph", "kbip:n=2,m=4", "--d", "50")

        assert document["num_c3"] == 0
        assert document["onum_k24"] == 1
        assert document["d"] == 50
        names = [ratio["name"] for ratio in document["hypotheses"]]
        assert "r_bip_4cyc" in names

    def test_stdout(self):
        result = runner.invoke(app, ["census", "--graph", "cycle:n=5"])

        assert result.exit_code == 0
        assert '"num_c4": 0' in result.stdout

    @pytest.mark.parametrize("spec", ["er:n=", "torus:n=3", "complete"])
    def test_malformed_spec(self, spec):
        assert runner.invoke(app, ["census", "--graph", spec]).exit_code == 2

    def test_d_must_be_positive(self):
        assert runner.invoke(app, ["census", "--graph", "complete:n=4", "--d", "0"]).exit_code == 2

    def test_seed_range(self):
        result = runner.invoke(app, ["census", "--graph", "complete:n=4", "--seed=-1"])
        assert result.exit_code == 2

    def test_seed_defaults_to_configuration(self, tmp_path):
        with patch.object(config.experiment, "seed", 11):
            default = run_json(tmp_path, "census", "--graph", "er:n=30,p=0.2")
        explicit = run_json(tmp_path, "census", "--graph", "er:n=30,p=0.2", "--seed", "11")

        assert default["metadata"]["seed"] == 11
        assert census_counts(default) == census_counts(explicit)

    def test_er_mask_depends_on_seed_only(self, tmp_path):
        first = run_json(tmp_path, "census", "--graph", "er:n=30,p=0.2", "--seed", "11")
        second = run_json(tmp_path, "census", "--graph", "er:n=30,p=0.2", "--seed", "11")
        assert census_counts(first) == census_counts(second)

    def test_threads_do_not_change_counts(self, tmp_path):
        single = run_json(tmp_path, "census", "--graph", "er:n=40,p=0.3", "--threads", "1")
        several = run_json(tmp_path, "census", "--graph", "er:n=40,p=0.3", "--threads", "4")
        assert census_counts(single) == census_counts(several)

    def test_csv_format(self, tmp_path):
        [row] = run_csv(tmp_path, "census", "--graph", "kbip:n=2,m=4", "--d", "50")

        assert row["graph"] == "kbip:n=2,m=4"
        assert row["num_c4"] == "6"
        assert row["onum_k24"] == "1"
        assert row["d"] == "50"
        assert "r_bip_4cyc" in row

    def test_unknown_format(self):
        result = runner.invoke(app, ["census", "--graph", "complete:n=4", "--format", "xml"])
        assert result.exit_code == 2


class TestMomentsCommand:
    def test_goe_kappa3(self, tmp_path):
        document = run_json(
            tmp_path,
            "moments",
            "--graph",
            "complete:n=5",
            "--ensemble",
            "goe",
            "--trials",
            "200",
            "--seed",
            "3",
            "--statistic",
            "kappa3",
            "--threads",
            "1",
        )

        assert document["n_trials"] == 200
        assert document["d"] is None
        [report] = document["reports"]
        assert report["statistic"] == "kappa3"
        assert report["predicted"]["var"] == 10.0
        assert report["predicted"]["variance_kind"] == "exact"
        assert set(report["z_scores"]) == {"mean", "variance"}

    def test_default_statistics(self, tmp_path):
        document = run_json(
            tmp_path, "moments", "--graph", "complete:n=4", "--d", "30", "--trials", "50"
        )

        assert [r["statistic"] for r in document["reports"]] == [
            "kappa3",
            "kappa4",
            "kappa4_c4",
            "kappa4_p2",
            "kappa4_e",
        ]

    def test_kappa_r_uses_reference_law(self, tmp_path):
        document = run_json(
            tmp_path,
            "moments",
            "--graph",
            "kbip:n=1,m=10",
            "--ensemble",
            "goe",
            "--trials",
            "50",
            "--statistic",
            "kappa_r",
        )

        assert document["reports"][0]["predicted"]["var"] == pytest.approx(0.2)

    def test_wishart_needs_d(self):
        result = runner.invoke(app, ["moments", "--graph", "complete:n=4", "--trials", "5"])
        assert result.exit_code == 2

    @pytest.mark.parametrize(
        "extra",
        [
            ["--ensemble", "gue"],
            ["--statistic", "kappa5"],
            ["--method", "cholesky"],
            ["--trials=-3"],
        ],
    )
    def test_bad_options(self, extra):
        args = ["moments", "--graph", "complete:n=4", "--d", "10", "--trials", "5", *extra]
        assert runner.invoke(app, args).exit_code == 2

    def test_csv_format(self, tmp_path):
        table = run_csv(
            tmp_path, "moments", "--graph", "complete:n=4", "--d", "30", "--trials", "20"
        )

        assert [row["statistic"] for row in table] == [
            "kappa3",
            "kappa4",
            "kappa4_c4",
            "kappa4_p2",
            "kappa4_e",
        ]
        assert all(row["n_trials"] == "20" for row in table)
        assert all(row["d"] == "30" for row in table)


class TestKappaCommand:
    """Test the single-sample kappa command."""

    def test_goe_sample(self, tmp_path):
        document = run_json(
            tmp_path,
            "kappa",
            "--graph",
            "complete:n=5",
            "--ensemble",
            "goe",
            "--seed",
            "3",
            "--d",
            "10",
        )
        expected = kappa3(masked_goe(complete_graph(5), trial_rng(3, Stream.GOE, 0)))

        assert document["kappa3"] == pytest.approx(expected)
        assert set(document["verdicts"]) == {"deg3", "deg4", "maxdeg"}
        assert document["verdicts"]["deg3"]["threshold"] == pytest.approx(5 / 10**0.5)
        assert document["kappa4"]["total"] == pytest.approx(
            document["kappa4"]["c4_part"]
            + document["kappa4"]["p2_part"]
            + document["kappa4"]["e_part"]
        )

    def test_inapplicable_verdicts(self, tmp_path):
        document = run_json(tmp_path, "kappa", "--graph", "kbip:n=2,m=3", "--d", "20")

        assert document["kappa3"] == 0.0
        assert document["verdicts"]["deg3"]["predicted"] == "inapplicable"
        assert document["verdicts"]["deg4"]["predicted"] in ("wishart", "goe")

    def test_no_verdicts_without_d(self, tmp_path):
        document = run_json(tmp_path, "kappa", "--graph", "complete:n=4", "--ensemble", "goe")
        assert document["verdicts"] == {}

    def test_edgeless_mask_has_no_kappa_r(self, tmp_path):
        document = run_json(tmp_path, "kappa", "--graph", "er:n=4,p=0", "--ensemble", "goe")
        assert document["kappa_r"] is None

    def test_threads_do_not_change_verdicts(self, tmp_path):
        args = ("kappa", "--graph", "er:n=30,p=0.4", "--seed", "5", "--d", "10")
        single = run_json(tmp_path, *args, "--threads", "1")
        several = run_json(tmp_path, *args, "--threads", "3")
        assert single["verdicts"] == several["verdicts"]
        assert single["kappa3"] == several["kappa3"]

    def test_csv_format(self, tmp_path):
        [row] = run_csv(
            tmp_path,
            "kappa",
            "--graph",
            "complete:n=5",
            "--ensemble",
            "goe",
            "--seed",
            "3",
            "--d",
            "10",
        )
        expected = kappa3(masked_goe(complete_graph(5), trial_rng(3, Stream.GOE, 0)))

        assert row["ensemble"] == "goe"
        assert float(row["kappa3"]) == pytest.approx(expected, rel=1e-5)
        assert row["deg3_threshold"] != ""
        assert row["maxdeg_predicted"] in ("wishart", "goe", "inapplicable")

    def test_unknown_format(self):
        args = ["kappa", "--graph", "complete:n=4", "--d", "10", "--format", "xml"]
        assert runner.invoke(app, args).exit_code == 2


class TestSweepCommand:
    """Test the sweep command."""

    def test_csv_rows(self, tmp_path):
        out = tmp_path / "sweep.csv"
        args = [
            "sweep",
            "--family",
            "er",
            "--n",
            "8",
            "--p-grid",
            "0.5,0.9",
            "--d-grid",
            "10,100",
            "--trials",
            "20",
            "--threads",
            "2",
            "--out",
            str(out),
            "--emit-gnuplot",
        ]
        result = runner.invoke(app, args)

        assert result.exit_code == 0, result.output
        lines = [line for line in out.read_text().splitlines() if not line.startswith("#")]
        table = list(csv.DictReader(io.StringIO("\n".join(lines))))
        assert len(table) == 4
        assert [(row["p"], row["d"]) for row in table] == [
            ("0.5", "10"),
            ("0.5", "100"),
            ("0.9", "10"),
            ("0.9", "100"),
        ]
        assert out.with_suffix(".gp").exists()

    def test_json_rows(self, tmp_path):
        document = run_json(
            tmp_path,
            "sweep",
            "--family",
            "kbip",
            "--n",
            "3",
            "--m",
            "3",
            "--d-grid",
            "10",
            "--test",
            "deg3",
            "--trials",
            "5",
            "--format",
            "json",
        )

        [row] = document["rows"]
        assert not row["applicable"]
        assert row["tv_lower"] is None

    @pytest.mark.parametrize(
        "extra",
        [
            ["--format", "xml"],
            ["--emit-gnuplot"],
            ["--d-grid", "10,x"],
            ["--d-grid", ","],
            ["--family", "torus"],
            ["--test", "deg5"],
        ],
    )
    def test_bad_options(self, extra):
        args = ["sweep", "--n", "5", "--d-grid", "10", "--trials", "5", *extra]
        assert runner.invoke(app, args).exit_code == 2


class TestVerifyCommand:
    def _report(self, passed: bool) -> SuiteReport:
        check = CheckResult("shape_3", "identity", 0.12, 0.5, 0.01, 38.0, passed)
        return SuiteReport("tables", 1000, 0, 5.0, (check,))

    def test_passing_suite(self, tmp_path):
        with patch("wishart_mask_lab.cli.run_suite", return_value=self._report(True)):
            document = run_json(tmp_path, "verify", "--suite", "tables", "--trials", "1000")

        assert document["passed"]
        assert document["checks"][0]["name"] == "shape_3"

    def test_failing_suite_exits_one(self, tmp_path):
        out = tmp_path / "verify.json"
        with patch("wishart_mask_lab.cli.run_suite", return_value=self._report(False)):
            result = runner.invoke(
                app, ["verify", "--suite", "tables", "--trials", "1000", "--out", str(out)]
            )

        assert result.exit_code == 1
        assert json.loads(out.read_text())["passed"] is False

    def test_unknown_suite(self):
        assert runner.invoke(app, ["verify", "--suite", "tables2"]).exit_code == 2

    def test_too_few_trials(self):
        result = runner.invoke(app, ["verify", "--suite", "tables", "--trials", "10"])
        assert result.exit_code == 2

    def test_csv_format(self, tmp_path):
        with patch("wishart_mask_lab.cli.run_suite", return_value=self._report(True)):
            [row] = run_csv(tmp_path, "verify", "--suite", "tables", "--trials", "1000")

        assert row["name"] == "shape_3"
        assert row["passed"] == "true"

    def test_unknown_format(self):
        result = runner.invoke(app, ["verify", "--suite", "tables", "--format", "xml"])
        assert result.exit_code == 2


class TestLogging:
    def test_unknown_level(self):
        with pytest.raises(typer.BadParameter):
            configure_logging("chatty")

    def test_level_option(self, tmp_path):
        run_json(tmp_path, "census", "--graph", "complete:n=3", "--log-level", "debug")

    def test_no_arguments_shows_help(self):
        result = runner.invoke(app, [])
        assert "census" in result.output
