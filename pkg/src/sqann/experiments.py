"""Reproducible generators and runners for the desk-scale experiments.

Every experiment is driven by an :class:`ExperimentSpec` and a seed;
identical specs produce byte-identical CSV reports (and SVG plots).
Plots are derived artifacts: every figure has a sibling CSV holding
exactly the plotted numbers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .absorption import AbsorptionConfig, OodCriterion, SqannBuilder, absorb_loop, predict_batch
from .activations import DsaParams
from .dataset import Dataset, min_max_scale
from .errors import DataError, SqannError
from .model_io import load_csv
from .network import Interpolated, SqannConfig, build_sqann, sqann_predict
from .tnn import build_tnn, tnn_predict_batch

EXPERIMENT_KINDS = ("tnn_curve", "sqann_ring", "sqann_spread", "regression_absorb")

DEFAULT_SPREAD_LEVELS = (0.02, 0.05, 0.1, 0.2, 0.4)


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one experiment run.

    ``a1``/``a2`` default per experiment kind when left as None: the
    ring classification uses (1.0, 1.0), everything else (0.001, 0.5).
    """

    kind: str
    seed: int = 0
    output_dir: str = "experiment_out"
    # synthetic data
    n_fit: int = 128
    dataset: str = "line"                  # line | ring | two_ring
    noise_sigma: float = 0.05              # gaussian jitter of the line dataset
    spread: float = 0.05                   # external perturbation magnitude s
    spread_levels: tuple[float, ...] = DEFAULT_SPREAD_LEVELS
    trials: int = 20
    # model configuration
    a1: float | None = None
    a2: float | None = None
    r: float = 0.5
    tau_ad: float = 0.1
    tau_act: float = 0.9
    interpolation: str = "top_two_weighted"
    tnn_a_values: tuple[float, ...] = (3.0, 5.0, 9.0)
    # regression absorption
    dataset_path: str | None = None
    target_columns: tuple = (-1,)
    has_header: bool = False
    n_fit_rows: int = 100
    tau_list: tuple[float, ...] = ()
    scale_inputs: bool = True
    max_rounds: int = 1   # the tabulated procedure absorbs once; raise to loop further

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {EXPERIMENT_KINDS}")

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise DataError("experiment spec must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"unknown experiment spec keys: {sorted(unknown)}")
        for key in ("spread_levels", "tau_list", "tnn_a_values", "target_columns"):
            if key in raw and isinstance(raw[key], list):
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def sqann_config(self, default_a1: float = 0.001, default_a2: float = 0.5) -> SqannConfig:
        return SqannConfig(
            dsa=DsaParams(
                a1=self.a1 if self.a1 is not None else default_a1,
                a2=self.a2 if self.a2 is not None else default_a2,
                r=self.r,
            ),
            tau_ad=self.tau_ad,
            tau_act=self.tau_act,
            interpolation=_interp_rule(self.interpolation),
        )


def _interp_rule(name: str):
    from .network import InterpolationRule

    return InterpolationRule(name)


# ---------------------------------------------------------------------------
# Synthetic data


def _gen_arrays(dataset: str, n: int, noise_sigma: float, spread: float, rng: np.random.Generator):
    if dataset == "line":
        t = rng.uniform(-1.0, 1.0, n)
        X = np.column_stack([t, t]) + rng.normal(0.0, noise_sigma, (n, 2))
        Y = np.linalg.norm(X, axis=1)
        Xe = X + rng.uniform(-spread, spread, (n, 2))
        Ye = np.linalg.norm(Xe, axis=1)
    elif dataset == "ring":
        t = rng.uniform(0.0, 2.0 * np.pi, n)
        R = rng.uniform(0.8, 1.2, n)
        X = np.column_stack([R * np.cos(t), R * np.sin(t)])
        Y = np.cos(t)
        Xe = X + rng.uniform(-spread, spread, (n, 2))
        Ye = Xe[:, 0] / np.linalg.norm(Xe, axis=1)
    elif dataset == "two_ring":
        n_outer = n // 2
        t = rng.uniform(0.0, 2.0 * np.pi, n)
        R = np.concatenate([rng.uniform(0.9, 1.1, n_outer), rng.uniform(0.4, 0.6, n - n_outer)])
        X = np.column_stack([R * np.cos(t), R * np.sin(t)])
        Y = np.concatenate([np.full(n_outer, 0.5), np.full(n - n_outer, 1.0)])
        Xe = X + rng.uniform(-spread, spread, (n, 2))
        Ye = Y.copy()   # class labels survive the perturbation
    else:
        raise ValueError(f"unknown synthetic dataset {dataset!r}")
    return X, Y, Xe, Ye


def gen_synthetic(spec: ExperimentSpec) -> tuple[Dataset, Dataset]:
    """Seeded (fitting, external) pair; external perturbs fitting by U(-s, s)."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    X, Y, Xe, Ye = _gen_arrays(spec.dataset, spec.n_fit, spec.noise_sigma, spec.spread, rng)
    return Dataset.from_arrays(X, Y), Dataset.from_arrays(Xe, Ye)


# ---------------------------------------------------------------------------
# Spread experiment


@dataclass(frozen=True)
class SpreadTrial:
    spread: float
    trial: int
    n_interp: int
    fitting_max_error: float
    abs_errors: np.ndarray
    frac_errors: np.ndarray
    interpolated: np.ndarray


@dataclass(frozen=True)
class SpreadReport:
    levels: tuple[float, ...]
    trials: tuple[SpreadTrial, ...]
    samples_csv: str
    summary_csv: str
    plot_svg: str

    def pooled_abs_errors(self, level: float) -> np.ndarray:
        return np.concatenate([t.abs_errors for t in self.trials if t.spread == level])

    def median_abs_error(self, level: float) -> float:
        return float(np.median(self.pooled_abs_errors(level)))

    def mean_n_interp(self, level: float) -> float:
        return float(np.mean([t.n_interp for t in self.trials if t.spread == level]))


def _frac_error(abs_err: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    # |err| / max(|y|, 1e-8): fractional error diverges near y = 0, hence the floor
    return abs_err / np.maximum(np.abs(y_true), 1e-8)


def run_spread_experiment(spec: ExperimentSpec) -> SpreadReport:
    """External-error distributions as the perturbation magnitude grows.

    For every spread level, ``spec.trials`` independently seeded datasets
    are fitted and evaluated.  Fitting errors are asserted to be exactly
    zero in every trial.  Emits a per-sample CSV, a per-trial summary
    CSV, and a box-plot SVG.
    """
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = spec.sqann_config()
    trials: list[SpreadTrial] = []

    for li, level in enumerate(spec.spread_levels):
        for ti in range(spec.trials):
            rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(li, ti)))
            X, Y, Xe, Ye = _gen_arrays(spec.dataset, spec.n_fit, spec.noise_sigma, level, rng)
            model, _ = build_sqann(Dataset.from_arrays(X, Y), cfg)

            fit_preds = np.array([sqann_predict(model, x).y[0] for x in X])
            fit_max = float(np.max(np.abs(fit_preds - Y)))
            if fit_max != 0.0:
                raise SqannError(
                    f"nonzero fitting error {fit_max} at spread={level} trial={ti}; "
                    "exact recall of fitted samples is broken"
                )

            outcomes = [sqann_predict(model, x) for x in Xe]
            preds = np.array([o.y[0] for o in outcomes])
            interp = np.array([isinstance(o.provenance, Interpolated) for o in outcomes], dtype=bool)
            abs_err = np.abs(preds - Ye)
            trials.append(SpreadTrial(
                spread=level, trial=ti, n_interp=int(interp.sum()),
                fitting_max_error=fit_max,
                abs_errors=abs_err, frac_errors=_frac_error(abs_err, Ye), interpolated=interp,
            ))

    samples_csv = str(outdir / "spread_samples.csv")
    with open(samples_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["spread", "trial", "sample", "abs_error", "frac_error", "interpolated"])
        for t in trials:
            for i, (ae, fe, flag) in enumerate(zip(t.abs_errors, t.frac_errors, t.interpolated)):
                w.writerow([repr(t.spread), t.trial, i, repr(float(ae)), repr(float(fe)), int(flag)])

    summary_csv = str(outdir / "spread_summary.csv")
    with open(summary_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["spread", "trial", "n_interp", "fitting_max_error",
                    "median_abs_error", "mean_abs_error"])
        for t in trials:
            w.writerow([repr(t.spread), t.trial, t.n_interp, repr(t.fitting_max_error),
                        repr(float(np.median(t.abs_errors))), repr(float(np.mean(t.abs_errors)))])

    plot_svg = str(outdir / "spread_boxplots.svg")
    report = SpreadReport(
        levels=tuple(spec.spread_levels), trials=tuple(trials),
        samples_csv=samples_csv, summary_csv=summary_csv, plot_svg=plot_svg,
    )
    from .plotting import spread_boxplots

    spread_boxplots(report, plot_svg)
    return report


# ---------------------------------------------------------------------------
# Ring classification with interpolation provenance


@dataclass(frozen=True)
class RingReport:
    fitting_max_error: float
    external_max_error: float
    n_interpolated: int
    points_csv: str
    plot_svg: str


def run_ring_experiment(spec: ExperimentSpec) -> RingReport:
    """Two concentric rings classified by stored-sample retrieval.

    Interpolated external points are recorded with the two fitting
    samples that produced their output, which is exactly what the plot
    draws (open circles with segments to their references).  The default
    activation widths are sized to the unit-scale rings so that both
    provenance kinds (strong retrieval and interpolation) occur; wider
    settings such as a1 = a2 = 1 make the strong basin cover the whole
    geometry and every prediction becomes a strong retrieval.
    """
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = spec.sqann_config(default_a1=0.02, default_a2=0.18)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    X, Y, Xe, Ye = _gen_arrays("two_ring", spec.n_fit, spec.noise_sigma, spec.spread, rng)
    fitting = Dataset.from_arrays(X, Y)
    model, _ = build_sqann(fitting, cfg)

    fit_preds = np.array([sqann_predict(model, x).y[0] for x in X])
    fit_max = float(np.max(np.abs(fit_preds - Y)))

    rows = []
    ext_max = 0.0
    n_interp = 0
    for i, (x, y_true) in enumerate(zip(Xe, Ye)):
        out = sqann_predict(model, x)
        err = abs(float(out.y[0]) - y_true)
        ext_max = max(ext_max, err)
        if isinstance(out.provenance, Interpolated):
            n_interp += 1
            refs = out.provenance.neurons
            ref_ids = [r.sample_index for r in refs] + [-1] * (2 - len(refs))
            weights = list(out.provenance.weights) + [0.0] * (2 - len(refs))
        else:
            ref_ids = [out.provenance.sample_index, -1]
            weights = [1.0, 0.0]
        rows.append([i, repr(float(x[0])), repr(float(x[1])), repr(float(y_true)),
                     repr(float(out.y[0])), repr(err),
                     int(isinstance(out.provenance, Interpolated)),
                     ref_ids[0], ref_ids[1], repr(float(weights[0])), repr(float(weights[1]))])

    points_csv = str(outdir / "ring_points.csv")
    with open(points_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "x1", "x2", "y_true", "y_pred", "abs_error",
                    "interpolated", "ref_sample_1", "ref_sample_2", "weight_1", "weight_2"])
        w.writerows(rows)

    plot_svg = str(outdir / "ring_classification.svg")
    from .plotting import ring_plot

    ring_plot(X, Y, Xe, Ye, rows, plot_svg)
    return RingReport(
        fitting_max_error=fit_max, external_max_error=ext_max,
        n_interpolated=n_interp, points_csv=points_csv, plot_svg=plot_svg,
    )


# ---------------------------------------------------------------------------
# TNN curve demonstration


def _curve_target(x: np.ndarray) -> np.ndarray:
    # damped oscillation: rich enough to show the staircase flattening as a grows
    return np.exp(-x) * np.cos(10.0 * x)


@dataclass(frozen=True)
class TnnCurveReport:
    max_fit_error: dict
    curve_csv: str
    samples_csv: str
    plot_svg: str


def run_tnn_curve(spec: ExperimentSpec) -> TnnCurveReport:
    """Fit one scalar dataset at several sharpness values, tabulate the curves."""
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n = min(spec.n_fit, 64)
    xs = np.sort(rng.uniform(0.0, 1.0, n))
    ys = _curve_target(xs)
    fitting = Dataset.from_arrays(xs.reshape(-1, 1), ys)

    grid = np.linspace(0.0, 1.0, 1001)
    curves = {}
    max_fit_error = {}
    for a in spec.tnn_a_values:
        model = build_tnn(fitting, a=a)
        curves[a] = tnn_predict_batch(model, grid)[:, 0]
        fit_preds = tnn_predict_batch(model, xs)[:, 0]
        max_fit_error[a] = float(np.max(np.abs(fit_preds - ys)))

    samples_csv = str(outdir / "tnn_curve_samples.csv")
    with open(samples_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])

    curve_csv = str(outdir / "tnn_curve.csv")
    with open(curve_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "f_true"] + [f"tnn_a{a:g}" for a in spec.tnn_a_values])
        truth = _curve_target(grid)
        for i, x in enumerate(grid):
            w.writerow([repr(float(x)), repr(float(truth[i]))] +
                       [repr(float(curves[a][i])) for a in spec.tnn_a_values])

    plot_svg = str(outdir / "tnn_curve.svg")
    from .plotting import tnn_curve_plot

    tnn_curve_plot(xs, ys, grid, curves, plot_svg)
    return TnnCurveReport(
        max_fit_error=max_fit_error, curve_csv=curve_csv,
        samples_csv=samples_csv, plot_svg=plot_svg,
    )


# ---------------------------------------------------------------------------
# Regression absorption on CSV datasets


@dataclass(frozen=True)
class RegressionRow:
    label: str
    tau: float | None
    external_mse: float
    absorbed_total: int
    fitting_size: int
    rounds: int
    converged: bool


@dataclass(frozen=True)
class AbsorptionTable:
    rows: tuple[RegressionRow, ...]
    csv_path: str | None = None

    def row(self, label: str) -> RegressionRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "tau", "external_mse", "absorbed_total",
                        "fitting_size", "rounds", "converged"])
            for r in self.rows:
                w.writerow([r.label, "" if r.tau is None else repr(r.tau), repr(r.external_mse),
                            r.absorbed_total, r.fitting_size, r.rounds, int(r.converged)])


def run_regression_absorb(
    dataset_path,
    n_fit: int,
    tau_list,
    *,
    target_columns=(-1,),
    has_header: bool = False,
    scale_inputs: bool = True,
    config: SqannConfig = SqannConfig(),
    max_rounds: int = 1,
    criterion: OodCriterion = OodCriterion.ERROR_ONLY,
    output_dir=None,
) -> AbsorptionTable:
    """Fit on the first ``n_fit`` rows, absorb ood externals per tolerance.

    The external MSE is always measured over the full original external
    split (absorbed samples included), before absorption ("o.") and
    after absorption at each tolerance ("e<tau>").  The default single
    round is the tabulated procedure (collect every sample with error
    above the tolerance once, rebuild once); raise ``max_rounds`` to
    iterate until nothing is out of tolerance.  Inputs are scaled by
    fitting-split min/max when ``scale_inputs`` is set; targets keep
    their original units so tolerances stay interpretable.
    """
    full = load_csv(dataset_path, list(target_columns), has_header=has_header)
    if not 0 < n_fit < len(full):
        raise DataError(f"n_fit={n_fit} must split a dataset of {len(full)} rows")
    fitting = full.subset(range(n_fit))
    external = full.subset(range(n_fit, len(full)))
    if scale_inputs:
        fitting, params = min_max_scale(fitting)
        external = params.apply_dataset(external)

    builder = SqannBuilder(config)
    base = builder.fit(fitting)
    Xe, Ye = external.inputs(), external.outputs()
    base_mse = float(np.mean((predict_batch(base, Xe) - Ye) ** 2))
    rows = [RegressionRow("o.", None, base_mse, 0, len(fitting), 0, True)]

    for tau in tau_list:
        acfg = AbsorptionConfig(epsilon=float(tau), max_rounds=max_rounds, criterion=criterion)
        model, report = absorb_loop(builder, fitting, external, acfg)
        mse = float(np.mean((predict_batch(model, Xe) - Ye) ** 2))
        rows.append(RegressionRow(
            label=f"e{tau:g}", tau=float(tau), external_mse=mse,
            absorbed_total=report.total_absorbed(),
            fitting_size=len(fitting) + report.total_absorbed(),
            rounds=len(report.rounds), converged=report.converged,
        ))

    csv_path = None
    if output_dir is not None:
        outdir = Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = str(outdir / "regression_absorb.csv")
    table = AbsorptionTable(rows=tuple(rows), csv_path=csv_path)
    if csv_path:
        table.to_csv(csv_path)
    return table


def run_experiment(spec: ExperimentSpec):
    """Dispatch a spec to its runner."""
    if spec.kind == "sqann_spread":
        return run_spread_experiment(spec)
    if spec.kind == "sqann_ring":
        return run_ring_experiment(spec)
    if spec.kind == "tnn_curve":
        return run_tnn_curve(spec)
    if spec.dataset_path is None:
        raise DataError("regression_absorb requires dataset_path")
    return run_regression_absorb(
        spec.dataset_path, spec.n_fit_rows, spec.tau_list,
        target_columns=spec.target_columns, has_header=spec.has_header,
        scale_inputs=spec.scale_inputs, config=spec.sqann_config(),
        max_rounds=spec.max_rounds, output_dir=spec.output_dir,
    )
