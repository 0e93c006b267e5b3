"""Tests for the sweep driver, CSV emission and SVG rendering."""

import numpy as np
import pytest

from spikelab import CSV_COLUMNS, InvalidConfig, ModelConfig, SweepSpec
from spikelab.sweep import read_csv, render_svg, run_sweep, write_csv


def base_cfg(**overrides):
    values = dict(d=120, n_trn=240, n_tst=240, theta_trn=1.0, theta_tst=1.0,
                  tau_a_trn=1.0, tau_a_tst=1.0, tau_eps_trn=1.0, mu=1.0,
                  beta_norm_sq=1.0, beta_dot_u=1.0)
    values.update(overrides)
    return ModelConfig(**values)


def c_spec(**overrides):
    values = dict(variable="c", grid=(0.4, 0.6, 0.8), base=base_cfg(),
                  target="so", trials=0, seed_root=11)
    values.update(overrides)
    return SweepSpec(**values)


class TestSpec:
    def test_bad_variable(self):
        with pytest.raises(InvalidConfig):
            c_spec(variable="n_tst").validate()

    def test_non_monotone_grid(self):
        with pytest.raises(InvalidConfig):
            c_spec(grid=(0.4, 0.8, 0.6)).validate()

    def test_empty_grid(self):
        with pytest.raises(InvalidConfig):
            c_spec(grid=()).validate()

    def test_c_variable_sets_counts(self):
        cfg = c_spec().config_at(0.4)
        assert cfg.n_trn == 300
        assert cfg.n_tst == 300

    def test_equal_strength_ties_theta(self):
        cfg = c_spec(equal_strength=True, base=base_cfg(tau_a_trn=2.0)).config_at(0.6)
        assert cfg.theta_trn == pytest.approx(2.0 * np.sqrt(cfg.n_trn))
        assert cfg.theta_tst == pytest.approx(1.0 * np.sqrt(cfg.n_tst))

    def test_untied_n_tst_preserved(self):
        spec = c_spec(base=base_cfg(n_tst=333))
        assert spec.config_at(0.4).n_tst == 333


class TestRunSweep:
    def test_theory_only_rows(self):
        rows = run_sweep(c_spec())
        assert len(rows) == 3
        for row in rows:
            assert row.empirical_mean is None
            assert row.empirical_stderr is None
            assert row.correction_term is None  # so target
            total = (row.theory_bias + row.theory_var_a + row.theory_var_a_eps
                     + row.theory_adjustment)
            assert row.theory_total == pytest.approx(total, rel=1e-12)

    def test_spn_rows_carry_correction_columns(self):
        spec = c_spec(target="spn", base=base_cfg(mu=0.0), grid=(1.5, 2.0))
        rows = run_sweep(spec)
        for row in rows:
            assert row.correction_term is not None
            assert row.asymptotic_no_correction is not None

    def test_empirical_deterministic(self):
        spec = c_spec(trials=4, grid=(0.5, 2.0))
        a = run_sweep(spec, workers=1)
        b = run_sweep(spec, workers=2)
        assert a == b


class TestArtifacts:
    def test_csv_roundtrip_and_determinism(self, tmp_path):
        spec = c_spec(trials=3, grid=(0.5, 1.5))
        rows = run_sweep(spec)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(rows, str(p1))
        write_csv(run_sweep(spec), str(p2))
        assert p1.read_bytes() == p2.read_bytes()
        header = p1.read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)
        assert read_csv(str(p1)) == rows

    def test_empty_cells_for_theory_only(self, tmp_path):
        rows = run_sweep(c_spec())
        path = tmp_path / "t.csv"
        write_csv(rows, str(path))
        first_row = path.read_text().splitlines()[1]
        assert first_row.endswith(",,,,")  # empirical + correction columns empty

    def test_svg_regenerates_identically_from_csv(self, tmp_path):
        spec = c_spec(trials=3, grid=(0.5, 1.5), target="spn",
                      base=base_cfg(mu=0.0))
        rows = run_sweep(spec)
        csv_path = tmp_path / "rows.csv"
        write_csv(rows, str(csv_path))
        svg1 = tmp_path / "direct.svg"
        svg2 = tmp_path / "from_csv.svg"
        render_svg(rows, str(svg1), title="t")
        render_svg(read_csv(str(csv_path)), str(svg2), title="t")
        assert svg1.read_bytes() == svg2.read_bytes()
        text = svg1.read_text()
        assert 'viewBox="0 0 800 500"' in text
        assert "<script" not in text and "@font-face" not in text
