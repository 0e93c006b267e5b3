"""Batch experiment driver: theory curves plus Monte Carlo sweeps over one
parameter, emitted as CSV rows and an optional static SVG line plot.

CSV cells use the shortest round-trip decimal representation (Python repr);
empty empirical cells are literal empty strings.  The SVG is regenerated
purely from row values, so rebuilding it from the CSV gives identical
geometry.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import InvalidConfig
from .risk import (ModelConfig, RiskBreakdown, risk_so, risk_spn,
                   spn_asymptotic_no_correction, spn_spike_correction)
from .simulate import map_trials, _risk_trial
import numpy as np

SWEEP_VARIABLES = ("n_trn", "c", "mu", "theta_trn", "tau_a_trn")

CSV_COLUMNS = ("grid_value", "theory_total", "theory_bias", "theory_var_a",
               "theory_var_a_eps", "theory_adjustment", "empirical_mean",
               "empirical_stderr", "correction_term", "asymptotic_no_correction")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: which scalar varies, over which grid, on which base config.

    equal_strength re-ties the spike scales theta = tau_a * sqrt(count) at
    every grid point (the equal-expected-norm normalization used by the
    finite-size correction experiments).
    """

    variable: str
    grid: tuple[float, ...]
    base: ModelConfig
    target: str
    trials: int
    seed_root: int
    equal_strength: bool = False

    def validate(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise InvalidConfig(f"variable must be one of {SWEEP_VARIABLES}")
        if self.target not in ("so", "spn"):
            raise InvalidConfig("target must be 'so' or 'spn'")
        if len(self.grid) == 0:
            raise InvalidConfig("grid must be nonempty")
        diffs = np.diff(self.grid)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise InvalidConfig("grid must be strictly monotone")
        if self.trials < 0:
            raise InvalidConfig("trials must be >= 0")
        for value in self.grid:
            self.config_at(value).validate()

    def config_at(self, value: float) -> ModelConfig:
        base = self.base
        tie_tst = base.n_tst == base.n_trn
        if self.variable == "n_trn":
            n = int(round(value))
            cfg = base.with_updates(n_trn=n, n_tst=n if tie_tst else base.n_tst)
        elif self.variable == "c":
            n = max(1, int(round(base.d / value)))
            cfg = base.with_updates(n_trn=n, n_tst=n if tie_tst else base.n_tst)
        else:
            cfg = base.with_updates(**{self.variable: float(value)})
        if self.equal_strength:
            cfg = cfg.with_updates(
                theta_trn=cfg.tau_a_trn * np.sqrt(cfg.n_trn),
                theta_tst=cfg.tau_a_tst * np.sqrt(cfg.n_tst))
        return cfg


@dataclass(frozen=True)
class ResultRow:
    """One CSV row; empirical and correction fields are None when absent."""

    grid_value: float
    theory_total: float
    theory_bias: float
    theory_var_a: float
    theory_var_a_eps: float
    theory_adjustment: float
    empirical_mean: float | None
    empirical_stderr: float | None
    correction_term: float | None
    asymptotic_no_correction: float | None

    def cells(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            out.append("" if value is None else repr(float(value)))
        return out


def _theory(cfg: ModelConfig, target: str) -> RiskBreakdown:
    return risk_so(cfg) if target == "so" else risk_spn(cfg)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[ResultRow]:
    """Evaluate theory at every grid point and, when trials > 0, the
    matching Monte Carlo estimate with per-point derived seeds.

    All (point, trial) pairs share a single worker pool; per-trial seeds
    depend only on (seed_root, point index, trial), so results match a
    point-by-point serial run exactly.
    """
    spec.validate()
    configs = [spec.config_at(value) for value in spec.grid]
    trial_sums = {}
    if spec.trials > 0:
        args = [(cfg, spec.target, cfg.mu, (spec.seed_root, index), t)
                for index, cfg in enumerate(configs)
                for t in range(spec.trials)]
        flat = np.asarray(map_trials(_risk_trial, args, workers))
        for index in range(len(configs)):
            vals = flat[index * spec.trials:(index + 1) * spec.trials]
            trial_sums[index] = (float(vals.mean()),
                                 float(vals.std(ddof=1) / np.sqrt(len(vals)))
                                 if len(vals) > 1 else 0.0)
    rows = []
    for index, (value, cfg) in enumerate(zip(spec.grid, configs)):
        breakdown = _theory(cfg, spec.target)
        emp_mean, emp_se = trial_sums.get(index, (None, None))
        corr = no_corr = None
        if spec.target == "spn":
            corr = spn_spike_correction(cfg.theta_trn, cfg.tau_a_trn, cfg.tau_eps_trn)
            no_corr = spn_asymptotic_no_correction(cfg)
        rows.append(ResultRow(
            grid_value=float(value), theory_total=breakdown.total,
            theory_bias=breakdown.bias, theory_var_a=breakdown.variance_a,
            theory_var_a_eps=breakdown.variance_a_eps,
            theory_adjustment=breakdown.adjustment,
            empirical_mean=emp_mean, empirical_stderr=emp_se,
            correction_term=corr, asymptotic_no_correction=no_corr))
    return rows


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.cells())


def read_csv(path: str) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise InvalidConfig(f"unexpected CSV header {header}")
        rows = []
        for cells in reader:
            values = [None if cell == "" else float(cell) for cell in cells]
            rows.append(ResultRow(*values))
    return rows


# --- SVG rendering -------------------------------------------------------

_VIEW_W, _VIEW_H = 800, 500
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62, 16, 34, 44

_SERIES = (
    ("theory_total", "#1f77b4", "theory"),
    ("asymptotic_no_correction", "#d62728", "no-correction"),
    ("correction_term", "#2ca02c", "correction"),
)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(rows: list[ResultRow], path: str, title: str = "risk sweep") -> None:
    """Static 800x500 line plot: theory line, empirical points with +-2 SE
    bars, and (when present) the correction / no-correction reference lines.
    No scripting, no external fonts; geometry depends only on row values."""
    xs = [r.grid_value for r in rows]
    ys: list[float] = []
    for name, _, _ in _SERIES:
        ys += [getattr(r, name) for r in rows if getattr(r, name) is not None]
    for r in rows:
        if r.empirical_mean is not None:
            ys.append(r.empirical_mean + 2 * (r.empirical_stderr or 0.0))
            ys.append(r.empirical_mean - 2 * (r.empirical_stderr or 0.0))
    if not ys:
        ys = [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pad = 0.05 * (y_hi - y_lo) or 1.0
    y_lo, y_hi = y_lo - pad, y_hi + pad
    plot_w = _VIEW_W - _MARGIN_L - _MARGIN_R
    plot_h = _VIEW_H - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_VIEW_W} {_VIEW_H}">',
        f'<rect x="0" y="0" width="{_VIEW_W}" height="{_VIEW_H}" fill="white"/>',
        f'<text x="{_VIEW_W / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#888" stroke-width="1"/>',
    ]
    for i in range(5):
        gx = x_lo + i * (x_hi - x_lo) / 4
        gy = y_lo + i * (y_hi - y_lo) / 4
        parts.append(f'<line x1="{_fmt(sx(gx))}" y1="{_MARGIN_T + plot_h}" '
                     f'x2="{_fmt(sx(gx))}" y2="{_MARGIN_T + plot_h + 5}" stroke="#444"/>')
        parts.append(f'<text x="{_fmt(sx(gx))}" y="{_MARGIN_T + plot_h + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="11">{gx:.4g}</text>')
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{_fmt(sy(gy))}" '
                     f'x2="{_MARGIN_L}" y2="{_fmt(sy(gy))}" stroke="#444"/>')
        parts.append(f'<text x="{_MARGIN_L - 8}" y="{_fmt(sy(gy) + 4)}" '
                     f'text-anchor="end" font-family="sans-serif" font-size="11">{gy:.4g}</text>')
    for name, color, label in _SERIES:
        pts = [(r.grid_value, getattr(r, name)) for r in rows if getattr(r, name) is not None]
        if not pts:
            continue
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    for r in rows:
        if r.empirical_mean is None:
            continue
        cx, cy = sx(r.grid_value), sy(r.empirical_mean)
        se = r.empirical_stderr or 0.0
        parts.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(sy(r.empirical_mean - 2 * se))}" '
                     f'x2="{_fmt(cx)}" y2="{_fmt(sy(r.empirical_mean + 2 * se))}" '
                     'stroke="#333" stroke-width="1"/>')
        parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2.5" fill="#333"/>')
    legend_y = _MARGIN_T + 14
    for name, color, label in _SERIES:
        if any(getattr(r, name) is not None for r in rows):
            parts.append(f'<line x1="{_MARGIN_L + 10}" y1="{legend_y - 4}" '
                         f'x2="{_MARGIN_L + 34}" y2="{legend_y - 4}" stroke="{color}" stroke-width="1.5"/>')
            parts.append(f'<text x="{_MARGIN_L + 40}" y="{legend_y}" '
                         f'font-family="sans-serif" font-size="11">{label}</text>')
            legend_y += 16
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
