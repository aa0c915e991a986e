import json
import math

import pytest

import quantshift as qs
from quantshift.cli import main
from quantshift.experiment import (
    DEFAULT_GRID,
    ResultTable,
    density_grid_csv,
    tables_from_json,
    tables_to_json,
)
from quantshift.shift import ShiftKind


class TestParseConfig:
    def test_empty_document_gives_defaults(self):
        assert qs.parse_config("") == qs.ExperimentConfig()

    def test_comments_and_blanks_ignored(self):
        text = "# a comment\n\nscenario = sqrt_ratio  # trailing comment\n"
        assert qs.parse_config(text).scenario is ShiftKind.SQRT_RATIO

    def test_single_cell_grid(self):
        config = qs.parse_config("test_prevalence_grid = 0.5")
        assert config.test_prevalence_grid == (0.5,)

    def test_grid_list(self):
        config = qs.parse_config("test_prevalence_grid = 0.1, 0.5, 0.9")
        assert config.test_prevalence_grid == (0.1, 0.5, 0.9)

    def test_envelope_aliases(self):
        config = qs.parse_config("theta = 0.25\ntau = 2.0")
        assert config.envelope_mean == 0.25
        assert config.envelope_sd == 2.0

    def test_negative_sigma_rejected(self):
        with pytest.raises(qs.ConfigError, match="sigma"):
            qs.parse_config("sigma = -1")

    def test_unknown_key_names_line(self):
        with pytest.raises(qs.ConfigError, match="line 2"):
            qs.parse_config("mu = 0\nbogus = 1\n")

    def test_bad_value_names_line(self):
        with pytest.raises(qs.ConfigError, match="line 1"):
            qs.parse_config("sample_size = ten")

    def test_missing_equals_sign(self):
        with pytest.raises(qs.ConfigError, match="key = value"):
            qs.parse_config("just some words")

    def test_grid_must_increase(self):
        with pytest.raises(qs.ConfigError, match="increasing"):
            qs.parse_config("test_prevalence_grid = 0.5, 0.5")

    def test_panels_and_outputs(self):
        config = qs.parse_config("panels = population\noutputs = prevalence, accuracy")
        assert config.panels == ("population",)
        assert config.outputs == ("prevalence", "accuracy")
        with pytest.raises(qs.ConfigError):
            qs.parse_config("panels = nowhere")


def population_config(**overrides):
    base = dict(panels=("population",), outputs=("prevalence",))
    base.update(overrides)
    return qs.ExperimentConfig(**base)


class TestRunExperiment:
    def test_single_cell_no_shift_fixed_point(self):
        tables = qs.run_experiment(population_config(test_prevalence_grid=(0.5,)))
        table = tables[0]
        for label in table.row_labels:
            assert table.row(label)[0] == pytest.approx(0.5, abs=1e-9)

    def test_csv_first_data_row(self):
        tables = qs.run_experiment(population_config())
        text = qs.emit_table(tables[0], "csv")
        lines = text.splitlines()
        assert lines[0] == "Q[Y=0],0.01,0.05,0.1,0.3,0.5,0.7,0.9,0.95,0.99"
        assert lines[1] == "CDE1,0.1655,0.1928,0.2269,0.3635,0.5000,0.6365,0.7731,0.8072,0.8345"

    def test_nan_cells_render_as_literal(self):
        config = population_config(outputs=("f_measure",), test_prevalence_grid=(0.01, 0.5))
        table = qs.run_experiment(config)[0]
        text = qs.emit_table(table, "csv")
        cde_inf_row = [line for line in text.splitlines() if line.startswith("CDEinf")][0]
        assert cde_inf_row.split(",")[1] == "NaN"

    def test_empty_table_renders_header_only(self):
        table = ResultTable(
            caption="empty", scenario="prior_shift", metric="prevalence",
            panel="population", col_labels=(), row_labels=(), cells=(),
        )
        assert qs.emit_table(table, "csv") == "Q[Y=0]\n"

    def test_markdown_layout(self):
        config = population_config(test_prevalence_grid=(0.5,))
        table = qs.run_experiment(config)[0]
        text = qs.emit_table(table, "markdown")
        assert text.splitlines()[2] == "| Q[Y=0] | 0.5 |"
        assert "| CDE1 | 0.5000 |" in text

    def test_population_panel_is_deterministic_and_panel_independent(self):
        grid = (0.1, 0.5)
        both = qs.ExperimentConfig(
            test_prevalence_grid=grid, sample_size=400, outputs=("prevalence",)
        )
        pop_only = population_config(test_prevalence_grid=grid)
        tables_both = {(t.panel, t.metric): t for t in qs.run_experiment(both)}
        tables_pop = qs.run_experiment(pop_only)
        assert tables_both[("population", "prevalence")].cells == tables_pop[0].cells

    def test_sample_panel_reproducible(self):
        config = qs.ExperimentConfig(
            test_prevalence_grid=(0.3, 0.7), sample_size=400,
            panels=("sample",), outputs=("prevalence", "f_measure"),
        )
        first = qs.run_experiment(config)
        second = qs.run_experiment(config)
        for a, b in zip(first, second):
            assert qs.emit_table(a, "csv", full_precision=True) == qs.emit_table(
                b, "csv", full_precision=True
            )

    def test_seed_changes_sample_panel(self):
        base = dict(test_prevalence_grid=(0.3,), sample_size=400, panels=("sample",), outputs=("prevalence",))
        a = qs.run_experiment(qs.ExperimentConfig(seed=1, **base))[0]
        b = qs.run_experiment(qs.ExperimentConfig(seed=2, **base))[0]
        assert a.cells != b.cells

    def test_repetitions_average(self):
        base = dict(test_prevalence_grid=(0.3,), sample_size=300, panels=("sample",), outputs=("prevalence",))
        single = qs.run_experiment(qs.ExperimentConfig(repetitions=1, **base))[0]
        averaged = qs.run_experiment(qs.ExperimentConfig(repetitions=3, **base))[0]
        assert single.cells != averaged.cells

    def test_json_roundtrip_preserves_nan(self):
        config = population_config(outputs=("prevalence", "f_measure"), test_prevalence_grid=(0.01, 0.5))
        tables = qs.run_experiment(config)
        back = tables_from_json(tables_to_json(tables, config))
        assert len(back) == len(tables)
        for a, b in zip(tables, back):
            for row_a, row_b in zip(a.cells, b.cells):
                for v_a, v_b in zip(row_a, row_b):
                    assert (math.isnan(v_a) and math.isnan(v_b)) or v_a == v_b

    def test_density_grid_export(self):
        text = density_grid_csv(population_config(scenario=ShiftKind.INVARIANT_RATIO))
        lines = text.splitlines()
        assert lines[0] == "x,train_f0,train_f1,test_f0,test_f1"
        assert len(lines) == 1002
        first = [float(v) for v in lines[1].split(",")]
        assert first[0] == -6.0


class TestCli:
    def test_run_with_config_file(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(
            "scenario = prior_shift\n"
            "test_prevalence_grid = 0.3, 0.7\n"
            "sample_size = 300\n"
            "outputs = prevalence\n"
        )
        outdir = tmp_path / "out"
        assert main(["run", str(config_path), "--outdir", str(outdir)]) == 0
        assert (outdir / "prior_shift_prevalence_population.csv").exists()
        assert (outdir / "prior_shift_prevalence_population_full.csv").exists()
        assert (outdir / "prior_shift_prevalence_sample.csv").exists()
        assert (outdir / "prior_shift_densities.csv").exists()
        assert (outdir / "prior_shift_results.json").exists()

    def test_run_markdown_format(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(
            "test_prevalence_grid = 0.5\npanels = population\noutputs = prevalence\n"
        )
        outdir = tmp_path / "out"
        assert main(["run", str(config_path), "--outdir", str(outdir), "--format", "markdown"]) == 0
        assert (outdir / "prior_shift_prevalence_population.md").exists()

    def test_panel_flag_restricts(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text("test_prevalence_grid = 0.5\noutputs = prevalence\n")
        outdir = tmp_path / "out"
        assert main(["run", str(config_path), "--outdir", str(outdir), "--panel", "population"]) == 0
        assert not (outdir / "prior_shift_prevalence_sample.csv").exists()

    def test_bad_config_exit_code(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text("sigma = -1\n")
        assert main(["run", str(config_path), "--outdir", str(tmp_path / "out")]) == 1

    def test_numerical_failure_exit_code(self, tmp_path):
        # an envelope far on the class-1 side admits no interior mixture weight
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(
            "scenario = invariant_ratio\ntheta = -5\ntau = 0.5\n"
            "panels = population\noutputs = prevalence\n"
        )
        assert main(["run", str(config_path), "--outdir", str(tmp_path / "out")]) == 2

    def test_tables_rerender(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(
            "test_prevalence_grid = 0.5\npanels = population\noutputs = prevalence\n"
        )
        outdir = tmp_path / "out"
        main(["run", str(config_path), "--outdir", str(outdir)])
        rerender = tmp_path / "again"
        assert main(
            ["tables", str(outdir / "prior_shift_results.json"), "--outdir", str(rerender)]
        ) == 0
        assert (rerender / "prior_shift_prevalence_population.csv").read_text() == (
            outdir / "prior_shift_prevalence_population.csv"
        ).read_text()

    def test_determinism_across_runs(self, tmp_path):
        config_path = tmp_path / "exp.cfg"
        config_path.write_text(
            "test_prevalence_grid = 0.3\nsample_size = 300\noutputs = prevalence\nseed = 7\n"
        )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", str(config_path), "--outdir", str(out1)])
        main(["run", str(config_path), "--outdir", str(out2)])
        for name in ("prior_shift_prevalence_sample_full.csv", "prior_shift_prevalence_population_full.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
