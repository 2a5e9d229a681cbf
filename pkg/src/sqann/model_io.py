"""Dataset ingestion and versioned model serialization.

Model files are UTF-8 JSON with top-level keys exactly
{format_version, model_kind, params, payload, scaling, dataset_fingerprint}.
Floats are written with full round-trip precision, so a save/load cycle
reproduces bitwise-identical predictions.
"""

from __future__ import annotations

import csv as _csv
import json
from dataclasses import dataclass

import numpy as np

from .activations import DsaParams
from .dataset import Dataset, Sample, ScalingParams
from .errors import (
    CsvParseError,
    ModelFileError,
    NonNumericCellError,
    RaggedRowsError,
    SchemaError,
    VersionMismatchError,
)
from .network import InterpolationRule, SqannConfig, SqannLayer, SqannModel
from .tnn import TnnModel

FORMAT_VERSION = 1

_TOP_LEVEL_KEYS = {
    "format_version", "model_kind", "params", "payload", "scaling", "dataset_fingerprint",
}


# ---------------------------------------------------------------------------
# CSV ingestion


def load_csv(path, target_columns, has_header: bool = False) -> Dataset:
    """Read a rectangular numeric CSV into a dataset, rows in file order.

    ``target_columns`` selects the y columns by 0-based index or, when
    ``has_header`` is set, by name; every other column becomes part of x.
    A single index/name or a list of them is accepted.
    """
    if isinstance(target_columns, (int, str)):
        target_columns = [target_columns]
    target_columns = list(target_columns)
    if not target_columns:
        raise CsvParseError("at least one target column is required")

    with open(path, newline="") as fh:
        try:
            rows = list(_csv.reader(fh))
        except _csv.Error as exc:
            raise CsvParseError(f"CSV parsing failed: {exc}") from exc
    if not rows:
        raise CsvParseError("file is empty")

    header = None
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise CsvParseError("file has a header but no data rows")

    n_cols = len(rows[0])
    targets: list[int] = []
    for tc in target_columns:
        if isinstance(tc, str):
            if header is None:
                raise CsvParseError(f"target column {tc!r} given by name but file has no header")
            if tc not in header:
                raise CsvParseError(f"target column {tc!r} not found in header {header}")
            targets.append(header.index(tc))
        else:
            idx = int(tc)
            if not -n_cols <= idx < n_cols:
                raise CsvParseError(f"target column index {idx} out of range for {n_cols} columns")
            targets.append(idx % n_cols)
    if len(set(targets)) != len(targets):
        raise CsvParseError(f"target columns resolve to duplicates: {targets}")
    feature_cols = [c for c in range(n_cols) if c not in targets]
    if not feature_cols:
        raise CsvParseError("no feature columns left after removing targets")

    samples = []
    header_offset = 1 if has_header else 0
    for r, row in enumerate(rows):
        if len(row) != n_cols:
            raise RaggedRowsError(
                f"expected {n_cols} columns, found {len(row)}", row=r + header_offset)
        values = []
        for c, cell in enumerate(row):
            try:
                values.append(float(cell))
            except ValueError:
                raise NonNumericCellError(
                    f"cell {cell!r} is not numeric", row=r + header_offset, col=c) from None
        x = [values[c] for c in feature_cols]
        y = [values[c] for c in targets]
        samples.append(Sample.of(x, y, r))
    return Dataset(tuple(samples), len(feature_cols), len(targets))


# ---------------------------------------------------------------------------
# Model serialization


@dataclass(frozen=True)
class LoadedModel:
    """Deserialized model file: the model plus its bundled metadata."""

    model: TnnModel | SqannModel
    scaling: ScalingParams | None
    model_kind: str
    format_version: int
    dataset_fingerprint: str


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def save_model(model, path, scaling: ScalingParams | None = None) -> None:
    """Write a model (and optional input scaling) as versioned JSON."""
    if isinstance(model, TnnModel):
        kind = "tnn"
        params = {"a": model.a}
        payload = {
            "W": _floats(model.W),
            "b": _floats(model.b),
            "alpha": _floats(model.alpha),
            "ordered_x": _floats(model.ordered_x),
            "ordered_y": _floats(model.ordered_y),
            "delta_dummy": model.delta_dummy,
        }
    elif isinstance(model, SqannModel):
        kind = "sqann"
        cfg = model.config
        params = {
            "a1": cfg.dsa.a1, "a2": cfg.dsa.a2, "r": cfg.dsa.r,
            "tau_ad": cfg.tau_ad, "tau_act": cfg.tau_act,
            "max_construction_steps": cfg.max_construction_steps,
            "interpolation": cfg.interpolation.value,
        }
        payload = {
            "input_dim": model.input_dim,
            "output_dim": model.output_dim,
            "layers": [
                {
                    "nodes": _floats(layer.nodes),
                    "alphas": _floats(layer.alphas),
                    "sample_indices": list(layer.sample_indices),
                }
                for layer in model.layers
            ],
        }
    else:
        raise ModelFileError(f"cannot serialize object of type {type(model).__name__}")

    doc = {
        "format_version": FORMAT_VERSION,
        "model_kind": kind,
        "params": params,
        "payload": payload,
        "scaling": None if scaling is None else {"mins": list(scaling.mins), "maxs": list(scaling.maxs)},
        "dataset_fingerprint": model.dataset_fingerprint,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _require(mapping, key, kind, where):
    if key not in mapping:
        raise SchemaError(f"missing key {key!r} in {where}")
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"{where}.{key} has type {type(value).__name__}, expected {kind}")
    return value


def _readonly(a) -> np.ndarray:
    try:
        a = np.ascontiguousarray(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"payload array is not numeric: {exc}") from exc
    a.setflags(write=False)
    return a


def load_model(path) -> LoadedModel:
    """Read a model file written by :func:`save_model`, checking version and schema."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a valid JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level is not a JSON object")
    if set(doc) != _TOP_LEVEL_KEYS:
        raise SchemaError(
            f"top-level keys {sorted(doc)} do not match required {sorted(_TOP_LEVEL_KEYS)}")
    version = doc["format_version"]
    if version != FORMAT_VERSION:
        raise VersionMismatchError(version, FORMAT_VERSION)
    kind = doc["model_kind"]
    params = _require(doc, "params", dict, "document")
    payload = _require(doc, "payload", dict, "document")
    fingerprint = doc["dataset_fingerprint"] or ""

    scaling = None
    if doc["scaling"] is not None:
        sc = _require(doc, "scaling", dict, "document")
        scaling = ScalingParams(
            tuple(float(v) for v in _require(sc, "mins", list, "scaling")),
            tuple(float(v) for v in _require(sc, "maxs", list, "scaling")),
        )

    if kind == "tnn":
        model = TnnModel(
            W=_readonly(_require(payload, "W", list, "payload")),
            b=_readonly(_require(payload, "b", list, "payload")),
            alpha=_readonly(_require(payload, "alpha", list, "payload")),
            a=float(_require(params, "a", (int, float), "params")),
            ordered_x=_readonly(_require(payload, "ordered_x", list, "payload")),
            ordered_y=_readonly(_require(payload, "ordered_y", list, "payload")),
            delta_dummy=float(_require(payload, "delta_dummy", (int, float), "payload")),
            dataset_fingerprint=fingerprint,
        )
    elif kind == "sqann":
        steps = params.get("max_construction_steps")
        cfg = SqannConfig(
            dsa=DsaParams(
                a1=float(_require(params, "a1", (int, float), "params")),
                a2=float(_require(params, "a2", (int, float), "params")),
                r=float(_require(params, "r", (int, float), "params")),
            ),
            tau_ad=float(_require(params, "tau_ad", (int, float), "params")),
            tau_act=float(_require(params, "tau_act", (int, float), "params")),
            max_construction_steps=None if steps is None else int(steps),
            interpolation=InterpolationRule(_require(params, "interpolation", str, "params")),
        )
        layers = []
        for i, entry in enumerate(_require(payload, "layers", list, "payload")):
            if not isinstance(entry, dict):
                raise SchemaError(f"payload.layers[{i}] is not an object")
            layers.append(SqannLayer(
                nodes=_readonly(_require(entry, "nodes", list, f"layers[{i}]")),
                alphas=_readonly(_require(entry, "alphas", list, f"layers[{i}]")),
                sample_indices=tuple(int(s) for s in _require(entry, "sample_indices", list, f"layers[{i}]")),
            ))
        model = SqannModel(
            layers=tuple(layers),
            config=cfg,
            input_dim=int(_require(payload, "input_dim", int, "payload")),
            output_dim=int(_require(payload, "output_dim", int, "payload")),
            dataset_fingerprint=fingerprint,
        )
    else:
        raise SchemaError(f"unknown model_kind {kind!r}")

    return LoadedModel(
        model=model,
        scaling=scaling,
        model_kind=kind,
        format_version=int(version),
        dataset_fingerprint=fingerprint,
    )
