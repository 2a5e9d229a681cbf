import json

import numpy as np
import pytest

from sqann import (
    CsvParseError,
    Dataset,
    NonNumericCellError,
    RaggedRowsError,
    SchemaError,
    ScalingParams,
    SqannConfig,
    VersionMismatchError,
    build_sqann,
    build_tnn,
    load_csv,
    load_model,
    save_model,
    sqann_predict,
    tnn_predict_batch,
)


class TestLoadCsv:
    def test_small_file(self, write_csv):
        path = write_csv("d.csv", "0.1,1.0\n0.2,2.0\n0.3,3.0\n")
        d = load_csv(path, target_columns=1)
        assert (len(d), d.input_dim, d.output_dim) == (3, 1, 1)
        assert d.inputs()[:, 0].tolist() == [0.1, 0.2, 0.3]
        assert d.outputs()[:, 0].tolist() == [1.0, 2.0, 3.0]

    def test_rows_keep_file_order(self, write_csv):
        path = write_csv("d.csv", "5,1\n1,2\n3,3\n")
        d = load_csv(path, target_columns=1)
        assert [s.index for s in d.samples] == [0, 1, 2]
        assert d.inputs()[:, 0].tolist() == [5.0, 1.0, 3.0]

    def test_header_and_named_target(self, write_csv):
        path = write_csv("d.csv", "f1,f2,goal\n1,2,3\n4,5,6\n")
        d = load_csv(path, target_columns="goal", has_header=True)
        assert (d.input_dim, d.output_dim) == (2, 1)
        assert d.outputs()[:, 0].tolist() == [3.0, 6.0]

    def test_negative_index_counts_from_end(self, write_csv):
        path = write_csv("d.csv", "1,2,3\n4,5,6\n")
        d = load_csv(path, target_columns=-1)
        assert d.outputs()[:, 0].tolist() == [3.0, 6.0]

    def test_multiple_targets(self, write_csv):
        path = write_csv("d.csv", "1,2,3\n4,5,6\n")
        d = load_csv(path, target_columns=[1, 2])
        assert (d.input_dim, d.output_dim) == (1, 2)

    def test_ragged_rows(self, write_csv):
        path = write_csv("d.csv", "1,2\n3\n")
        with pytest.raises(RaggedRowsError) as exc:
            load_csv(path, target_columns=1)
        assert exc.value.row == 1

    def test_non_numeric_cell(self, write_csv):
        path = write_csv("d.csv", "1,2\nx,4\n")
        with pytest.raises(NonNumericCellError) as exc:
            load_csv(path, target_columns=1)
        assert (exc.value.row, exc.value.col) == (1, 0)

    def test_named_target_without_header(self, write_csv):
        path = write_csv("d.csv", "1,2\n")
        with pytest.raises(CsvParseError):
            load_csv(path, target_columns="y")

    def test_empty_file(self, write_csv):
        with pytest.raises(CsvParseError):
            load_csv(write_csv("d.csv", ""), target_columns=0)


class TestModelRoundTrip:
    def test_tnn_bitwise(self, c3_dataset, tmp_path):
        model = build_tnn(c3_dataset, a=5.0)
        path = tmp_path / "tnn.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.model_kind == "tnn"
        assert loaded.model.W.tolist() == [20.0, 20.0, 20.0]
        assert loaded.model.W.tobytes() == model.W.tobytes()
        assert loaded.model.b.tobytes() == model.b.tobytes()
        assert loaded.model.alpha.tobytes() == model.alpha.tobytes()
        assert loaded.dataset_fingerprint == c3_dataset.content_fingerprint()

    def test_tnn_probe_grid_predictions_identical(self, c3_dataset, tmp_path):
        model = build_tnn(c3_dataset, a=5.0)
        path = tmp_path / "tnn.json"
        save_model(model, path)
        loaded = load_model(path).model
        grid = np.linspace(-0.5, 1.5, 1000)
        assert tnn_predict_batch(model, grid).tobytes() == tnn_predict_batch(loaded, grid).tobytes()

    def test_sqann_bitwise(self, quad_dataset, tmp_path):
        model, _ = build_sqann(quad_dataset)
        path = tmp_path / "sq.json"
        save_model(model, path)
        loaded = load_model(path).model
        assert loaded.config == model.config
        for a, b in zip(loaded.layers, model.layers):
            assert a.nodes.tobytes() == b.nodes.tobytes()
            assert a.alphas.tobytes() == b.alphas.tobytes()
            assert a.sample_indices == b.sample_indices

    def test_sqann_probe_grid_predictions_identical(self, quad_dataset, tmp_path):
        model, _ = build_sqann(quad_dataset)
        path = tmp_path / "sq.json"
        save_model(model, path)
        loaded = load_model(path).model
        rng = np.random.default_rng(0)
        grid = rng.uniform(-2, 2, (1000, 2))
        for x in grid:
            a = sqann_predict(model, x)
            b = sqann_predict(loaded, x)
            assert a.y.tobytes() == b.y.tobytes()
            assert a.provenance == b.provenance

    def test_scaling_round_trip(self, c3_dataset, tmp_path):
        model = build_tnn(c3_dataset, a=5.0)
        scaling = ScalingParams((1.0, 2.0), (3.0, 8.0))
        path = tmp_path / "m.json"
        save_model(model, path, scaling=scaling)
        loaded = load_model(path)
        assert loaded.scaling == scaling

    def test_top_level_keys(self, c3_dataset, tmp_path):
        path = tmp_path / "m.json"
        save_model(build_tnn(c3_dataset, a=5.0), path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"format_version", "model_kind", "params", "payload",
                            "scaling", "dataset_fingerprint"}


class TestModelFileErrors:
    def _write(self, tmp_path, mutate):
        model = build_tnn(Dataset.from_arrays([[0.0], [1.0]], [1.0, 2.0]), a=5.0)
        path = tmp_path / "m.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        mutate(doc)
        path.write_text(json.dumps(doc))
        return path

    def test_version_mismatch(self, tmp_path):
        path = self._write(tmp_path, lambda d: d.update(format_version=999))
        with pytest.raises(VersionMismatchError):
            load_model(path)

    def test_missing_key(self, tmp_path):
        path = self._write(tmp_path, lambda d: d.pop("payload"))
        with pytest.raises(SchemaError):
            load_model(path)

    def test_extra_key(self, tmp_path):
        path = self._write(tmp_path, lambda d: d.update(surprise=1))
        with pytest.raises(SchemaError):
            load_model(path)

    def test_unknown_kind(self, tmp_path):
        path = self._write(tmp_path, lambda d: d.update(model_kind="forest"))
        with pytest.raises(SchemaError):
            load_model(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("not json at all {")
        with pytest.raises(SchemaError):
            load_model(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_model(tmp_path / "absent.json")

    def test_non_numeric_payload(self, tmp_path):
        path = self._write(tmp_path, lambda d: d["payload"].update(W=["a", "b"]))
        with pytest.raises(SchemaError):
            load_model(path)

    def test_ragged_payload_matrix(self, tmp_path):
        path = self._write(tmp_path, lambda d: d["payload"].update(alpha=[[1.0], [2.0, 3.0]]))
        with pytest.raises(SchemaError):
            load_model(path)

