"""Command-line front end: fit, predict, explain, absorb, experiment.

Exit codes: 0 success, 1 usage, 2 data problem, 3 construction failure.
Human-readable diagnostics go to stderr; machine-readable reports are
only ever written to files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .absorption import AbsorptionConfig, SqannBuilder, TnnBuilder, absorb_loop
from .activations import DsaParams
from .dataset import Dataset
from .errors import ConstructionError, DataError, ModelFileError, SqannError
from .model_io import load_csv, load_model, save_model
from .network import SqannConfig, StrongActivation, build_sqann, explain
from .tnn import TnnModel, build_tnn


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="sqann", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_data_opts(sp):
        sp.add_argument("--data", required=True, help="CSV file with inputs and targets")
        sp.add_argument("--target-col", required=True,
                        help="comma-separated target column indices or names")
        sp.add_argument("--header", action="store_true",
                        help="first CSV row is a header (required for named columns)")

    def add_sqann_opts(sp):
        sp.add_argument("--tau-ad", type=float, default=0.1)
        sp.add_argument("--tau-act", type=float, default=0.9)
        sp.add_argument("--a1", type=float, default=0.001)
        sp.add_argument("--a2", type=float, default=0.5)
        sp.add_argument("--r", type=float, default=0.5)

    fit = sub.add_parser("fit", help="construct a model from a CSV dataset")
    fit.add_argument("--model", choices=["tnn", "sqann"], required=True)
    add_data_opts(fit)
    fit.add_argument("--a", type=float, default=5.0, help="TNN sharpness")
    add_sqann_opts(fit)
    fit.add_argument("--out", required=True, help="where to write the model JSON")

    pred = sub.add_parser("predict", help="evaluate a stored model")
    pred.add_argument("--model-file", required=True)
    pred.add_argument("--input",
                      help="comma-separated input vector (use --input=-1,2 for leading minus)")
    pred.add_argument("--data", help="CSV of feature rows (no targets)")

    expl = sub.add_parser("explain", help="prediction with provenance and regimes")
    expl.add_argument("--model-file", required=True)
    expl.add_argument("--input", required=True,
                      help="comma-separated input vector (use --input=-1,2 for leading minus)")

    absorb = sub.add_parser("absorb", help="absorb out-of-distribution external samples")
    absorb.add_argument("--model", choices=["tnn", "sqann"], default="sqann")
    absorb.add_argument("--data", help="fitting CSV (or use --model-file for a stored TNN)")
    absorb.add_argument("--model-file", help="stored TNN model to take the fitting data from")
    absorb.add_argument("--external", required=True, help="external CSV")
    absorb.add_argument("--target-col", required=True)
    absorb.add_argument("--header", action="store_true")
    absorb.add_argument("--epsilon", type=float, required=True)
    absorb.add_argument("--max-rounds", type=int, default=1000)
    absorb.add_argument("--a", type=float, default=5.0)
    add_sqann_opts(absorb)
    absorb.add_argument("--report", help="write the per-round absorption CSV here")
    absorb.add_argument("--out", help="write the final model JSON here")

    exp = sub.add_parser("experiment", help="run a spec-driven experiment")
    exp.add_argument("--spec", required=True, help="experiment spec JSON file")
    return p


def _parse_target_cols(raw: str):
    cols = []
    for part in raw.split(","):
        part = part.strip()
        try:
            cols.append(int(part))
        except ValueError:
            cols.append(part)
    return cols


def _parse_input(raw: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in raw.split(",")], dtype=float)
    except ValueError:
        raise DataError(f"could not parse input vector {raw!r}") from None


def _sqann_config(args) -> SqannConfig:
    return SqannConfig(
        dsa=DsaParams(a1=args.a1, a2=args.a2, r=args.r),
        tau_ad=args.tau_ad, tau_act=args.tau_act,
    )


def _cmd_fit(args) -> int:
    data = load_csv(args.data, _parse_target_cols(args.target_col), has_header=args.header)
    if args.model == "tnn":
        model = build_tnn(data, a=args.a)
    else:
        model, trace = build_sqann(data, _sqann_config(args))
        print(f"constructed {model.n_layers} layer(s) in {trace.steps} steps", file=sys.stderr)
    save_model(model, args.out)
    print(f"model written to {args.out}", file=sys.stderr)
    return 0


def _apply_scaling(loaded, x: np.ndarray) -> np.ndarray:
    return loaded.scaling.apply(x) if loaded.scaling is not None else x


def _cmd_predict(args) -> int:
    if (args.input is None) == (args.data is None):
        raise _UsageError("predict needs exactly one of --input or --data")
    loaded = load_model(args.model_file)
    if args.input is not None:
        rows = [_parse_input(args.input)]
    else:
        with open(args.data, newline="") as fh:
            import csv as _csv

            rows = []
            for r, line in enumerate(_csv.reader(fh)):
                try:
                    rows.append(np.array([float(c) for c in line], dtype=float))
                except ValueError:
                    raise DataError(f"non-numeric cell at row {r}") from None
    for x in rows:
        y = loaded.model.predict(_apply_scaling(loaded, x))
        print(",".join(repr(float(v)) for v in np.atleast_1d(y)))
    return 0


def _cmd_explain(args) -> int:
    loaded = load_model(args.model_file)
    x = _apply_scaling(loaded, _parse_input(args.input))
    if isinstance(loaded.model, TnnModel):
        return _explain_tnn(loaded.model, x)
    report = explain(loaded.model, x)
    out = report.outcome
    print("prediction:", ",".join(repr(float(v)) for v in out.y))
    if isinstance(out.provenance, StrongActivation):
        p = out.provenance
        print(f"strong activation: layer {p.layer}, node index {p.node_index}, "
              f"sample index {p.sample_index}, activation {p.activation:.6g}, "
              f"alpha {report.references[0].stored_y.tolist()}")
    else:
        print("no strong activation (ood-suspect): interpolated from")
        for ref, w in zip(out.provenance.neurons, out.provenance.weights):
            print(f"  layer {ref.layer}, node index {ref.node_index}, "
                  f"sample index {ref.sample_index}, activation {ref.activation:.6g}, "
                  f"weight {w:.6g}")
    print("ood-suspect:", "yes" if report.ood_suspect else "no")
    for li, layer_regimes in enumerate(report.regimes, start=1):
        counts = {k: layer_regimes.count(k) for k in ("strong", "moderate", "weak")}
        print(f"layer {li}: {counts['strong']} strong, {counts['moderate']} moderate, "
              f"{counts['weak']} weak")
    return 0


def _explain_tnn(model: TnnModel, x) -> int:
    from .tnn import tnn_activation_pattern, tnn_predict

    y = tnn_predict(model, x)
    pattern, _ = tnn_activation_pattern(model, x)
    print("prediction:", ",".join(repr(float(v)) for v in y))
    print("activation pattern:", "".join(
        "1" if p == 1.0 else ("0" if p == 0.0 else "h") for p in pattern))
    n_on = int((pattern == 1.0).sum())
    if n_on:
        pos = model.n_samples - n_on      # 0-based position in the descending order
        print(f"last fully-on neuron {n_on - 1} identifies ordered sample {pos} "
              f"(x={float(model.ordered_x[pos])!r}, y={model.ordered_y[:, pos].tolist()})")
    else:
        print("no fully-on neuron: input lies below the fitted range")
    if (pattern == 0.5).any():
        print("half-activated neurons:", np.flatnonzero(pattern == 0.5).tolist())
    return 0


def _cmd_absorb(args) -> int:
    if (args.data is None) == (args.model_file is None):
        raise _UsageError("absorb needs exactly one of --data or --model-file")
    targets = _parse_target_cols(args.target_col)
    external = load_csv(args.external, targets, has_header=args.header)

    if args.model_file is not None:
        loaded = load_model(args.model_file)
        if not isinstance(loaded.model, TnnModel):
            raise DataError(
                "absorb from a model file works for tnn only; sqann files do not "
                "embed raw fitting samples, pass the fitting CSV via --data"
            )
        m = loaded.model
        fitting = Dataset.from_arrays(m.ordered_x.reshape(-1, 1), m.ordered_y.T)
        builder = TnnBuilder(epsilon=args.epsilon, a=m.a)
    else:
        fitting = load_csv(args.data, targets, has_header=args.header)
        if args.model == "tnn":
            builder = TnnBuilder(epsilon=args.epsilon, a=args.a)
        else:
            builder = SqannBuilder(_sqann_config(args))

    cfg = AbsorptionConfig(epsilon=args.epsilon, max_rounds=args.max_rounds)
    model, report = absorb_loop(builder, fitting, external, cfg)
    print(f"absorbed {report.total_absorbed()} sample(s) over {len(report.rounds)} round(s); "
          f"converged: {report.converged}", file=sys.stderr)
    if args.report:
        report.to_csv(args.report)
        print(f"round report written to {args.report}", file=sys.stderr)
    if args.out:
        save_model(model, args.out)
        print(f"final model written to {args.out}", file=sys.stderr)
    return 0


def _cmd_experiment(args) -> int:
    from .experiments import ExperimentSpec, run_experiment

    spec = ExperimentSpec.from_json(args.spec)
    result = run_experiment(spec)
    for attr in ("samples_csv", "summary_csv", "points_csv", "curve_csv", "csv_path", "plot_svg"):
        path = getattr(result, attr, None)
        if path:
            print(path)
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "explain": _cmd_explain,
    "absorb": _cmd_absorb,
    "experiment": _cmd_experiment,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return 0 if code in (None, 0) else int(code)
    except ConstructionError as exc:
        print(f"construction error: {exc}", file=sys.stderr)
        return 3
    except (DataError, ModelFileError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SqannError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
