import numpy as np
import pytest

from sqann import (
    AbsorptionConfig,
    ContractViolationError,
    Dataset,
    OodCriterion,
    SqannBuilder,
    SqannConfig,
    TnnBuilder,
    absorb_loop,
    cf_check,
    find_ood,
    sqann_predict,
    tnn_predict_batch,
)
from sqann.absorption import ActivationEnsemble, predict_batch


def scalar_dataset(xs, ys):
    return Dataset.from_arrays(np.asarray(xs).reshape(-1, 1), ys)


class TestFindOod:
    def test_fitting_samples_are_never_ood_for_sqann(self, quad_dataset):
        model = SqannBuilder().fit(quad_dataset)
        cfg = AbsorptionConfig(epsilon=0.5)
        assert find_ood(model, quad_dataset, cfg) == []

    def test_error_threshold(self):
        fitting = scalar_dataset([0.0, 1.0], [0.0, 0.0])
        model = TnnBuilder(a=8.0).fit(fitting)
        external = scalar_dataset([0.5, 0.6], [3.0, 0.0])
        cfg = AbsorptionConfig(epsilon=1.0)
        assert find_ood(model, external, cfg) == [0]

    def test_weak_activation_criterion(self, quad_dataset):
        model = SqannBuilder().fit(quad_dataset)
        # midway point: prediction is interpolated (weak) though its error is small
        external = Dataset.from_arrays([[1.25, 1.25]], [1.0])
        strict = AbsorptionConfig(epsilon=0.5, criterion=OodCriterion.ERROR_OR_WEAK_ACTIVATION)
        lax = AbsorptionConfig(epsilon=0.5, criterion=OodCriterion.ERROR_ONLY)
        assert find_ood(model, external, lax) == []
        assert find_ood(model, external, strict) == [0]


class TestAbsorbLoopSqann:
    def test_absorbed_samples_become_exact(self, quad_dataset):
        # targets far from anything interpolation could produce
        external = Dataset.from_arrays([[0.5, 0.5], [2.0, 2.0]], [5.0, -3.0])
        cfg = AbsorptionConfig(epsilon=0.05)
        model, report = absorb_loop(SqannBuilder(), quad_dataset, external, cfg)
        assert report.converged
        assert report.total_absorbed() == 2
        for x, y in zip(external.inputs(), external.outputs()):
            assert sqann_predict(model, x).y.tolist() == y.tolist()

    def test_zero_rounds_when_externals_fit(self, quad_dataset):
        # externals equal to fitting samples are recalled exactly
        cfg = AbsorptionConfig(epsilon=0.25)
        model, report = absorb_loop(SqannBuilder(), quad_dataset, quad_dataset, cfg)
        assert report.rounds == ()
        assert report.converged

    def test_old_samples_survive_absorption(self, quad_dataset):
        external = Dataset.from_arrays([[0.9, 1.3], [3.0, -2.0]], [0.4, 0.9])
        cfg = AbsorptionConfig(epsilon=0.01)
        builder = SqannBuilder()
        before = builder.fit(quad_dataset)
        model, _ = absorb_loop(builder, quad_dataset, external, cfg)
        assert cf_check(before, model, quad_dataset, cfg.epsilon)

    def test_max_rounds_caps_the_loop(self, quad_dataset):
        external = Dataset.from_arrays([[0.5, 0.5], [9.0, 9.0]], [5.0, -5.0])
        cfg = AbsorptionConfig(epsilon=1e-6, max_rounds=1)
        _, report = absorb_loop(SqannBuilder(), quad_dataset, external, cfg)
        assert len(report.rounds) == 1


class TestAbsorbLoopTnn:
    # Frozen two-round case (seeded search): absorbing the first batch
    # reshapes the curve enough to push external sample 1 out of tolerance,
    # so convergence takes a second round.
    XF = [0.5203618432664476, 0.2974590341025223, 0.8260465501176705]
    YF = [0.48, 0.663, 0.369]
    XE = [0.7689098572044246, 0.11328373882876808, 0.06483915257869044,
          0.25070183805596724, 0.5217037674551749, 0.05451418946715747,
          0.3687078837084449]
    YE = [-0.145, 0.102, 0.963, 0.198, 0.917, 0.737, 0.194]
    EPS = 0.21

    def test_two_round_absorption(self):
        fitting = scalar_dataset(self.XF, self.YF)
        external = scalar_dataset(self.XE, self.YE)
        builder = TnnBuilder(epsilon=self.EPS)
        model, report = absorb_loop(
            builder, fitting, external, AbsorptionConfig(epsilon=self.EPS, max_rounds=50))
        assert [r.absorbed_indices for r in report.rounds] == [(0, 2, 3, 4, 5, 6), (1,)]
        assert report.converged

    def test_converged_loop_meets_tolerance_everywhere(self):
        fitting = scalar_dataset(self.XF, self.YF)
        external = scalar_dataset(self.XE, self.YE)
        builder = TnnBuilder(epsilon=self.EPS)
        model, report = absorb_loop(
            builder, fitting, external, AbsorptionConfig(epsilon=self.EPS, max_rounds=50))
        for d in (fitting, external):
            preds = tnn_predict_batch(model, d.inputs()[:, 0])
            assert np.max(np.abs(preds - d.outputs())) <= self.EPS

    def test_cf_check_with_rederived_sharpness(self):
        fitting = scalar_dataset(self.XF, self.YF)
        external = scalar_dataset(self.XE, self.YE)
        builder = TnnBuilder(epsilon=self.EPS)
        before = builder.fit(fitting)
        model, _ = absorb_loop(
            builder, fitting, external, AbsorptionConfig(epsilon=self.EPS, max_rounds=50))
        assert cf_check(before, model, fitting, self.EPS)

    def test_report_sizes_monotone(self):
        fitting = scalar_dataset(self.XF, self.YF)
        external = scalar_dataset(self.XE, self.YE)
        _, report = absorb_loop(TnnBuilder(epsilon=self.EPS), fitting, external,
                                AbsorptionConfig(epsilon=self.EPS, max_rounds=50))
        sizes = [r.fitting_size_after for r in report.rounds]
        assert sizes == sorted(sizes)
        absorbed = [set(r.absorbed_indices) for r in report.rounds]
        assert not set.intersection(*absorbed) if len(absorbed) > 1 else True

    def test_report_csv(self, tmp_path):
        fitting = scalar_dataset(self.XF, self.YF)
        external = scalar_dataset(self.XE, self.YE)
        _, report = absorb_loop(TnnBuilder(epsilon=self.EPS), fitting, external,
                                AbsorptionConfig(epsilon=self.EPS, max_rounds=50))
        out = tmp_path / "rounds.csv"
        report.to_csv(out)
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("round,n_absorbed,absorbed_indices")
        assert len(lines) == 1 + len(report.rounds)


class TestCfCheck:
    def test_detects_non_superset_for_tnn(self):
        a = TnnBuilder(a=6.0).fit(scalar_dataset([0.0, 0.5, 1.0], [1.0, 2.0, 3.0]))
        b = TnnBuilder(a=6.0).fit(scalar_dataset([0.0, 1.0], [1.0, 3.0]))
        with pytest.raises(ContractViolationError):
            cf_check(a, b, scalar_dataset([0.0, 0.5, 1.0], [1.0, 2.0, 3.0]), 0.1)

    def test_sqann_requires_exact_recall(self, quad_dataset):
        model = SqannBuilder().fit(quad_dataset)
        shifted = Dataset.from_arrays(quad_dataset.inputs(), quad_dataset.outputs() + 0.25)
        assert cf_check(model, model, quad_dataset, 1.0)
        assert not cf_check(model, model, shifted, 1.0)


class TestBatchAndBuilders:
    def test_predict_batch_dispatch(self, quad_dataset):
        sq = SqannBuilder().fit(quad_dataset)
        assert predict_batch(sq, quad_dataset.inputs()).shape == (4, 1)
        tn = TnnBuilder(a=5.0).fit(scalar_dataset([0.0, 1.0], [1.0, 2.0]))
        assert predict_batch(tn, np.array([[0.0], [1.0]])).shape == (2, 1)

    def test_tnn_builder_rederives_sharpness(self):
        builder = TnnBuilder(epsilon=0.05)
        small = scalar_dataset([0.0, 1.0], [1.0, 2.0])
        large = scalar_dataset(np.linspace(0, 1, 30), np.linspace(-3, 3, 30))
        assert builder.sharpness_for(large) > builder.sharpness_for(small)

    def test_tnn_builder_floor_on_loose_tolerance(self):
        builder = TnnBuilder(epsilon=100.0, floor_a=5.0)
        assert builder.sharpness_for(scalar_dataset([0.0, 1.0], [1.0, 2.0])) == 5.0

    def test_activation_ensemble_prefers_stronger_model(self, quad_dataset):
        cfg = AbsorptionConfig(epsilon=0.05)
        external = Dataset.from_arrays([[0.5, 0.5]], [5.0])
        builder = SqannBuilder()
        initial = builder.fit(quad_dataset)
        updated, report = absorb_loop(builder, quad_dataset, external, cfg)
        assert report.total_absorbed() == 1
        ens = ActivationEnsemble([initial, updated])
        # the absorbed point activates the updated model at exactly 1
        assert ens.predict([0.5, 0.5])[0] == 5.0
        with pytest.raises(ValueError):
            ActivationEnsemble([])
