import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from sodeval import (
    DimensionMismatchError,
    EmptyGroundTruthError,
    ImageRecord,
    MetricConfig,
    Prediction,
    ValidationError,
    conventional_csv,
    conventional_eval,
    e_measure_mean,
    f_curve,
    f_max,
    f_mean,
    mae,
    match_score,
    s_measure,
)
from sodeval.metrics import FCurve

from conftest import disk_mask, make_binary_mask, make_soft_mask
from oracles import naive_e_measure, naive_f_curve

CFG = MetricConfig()

soft_arrays = hnp.arrays(
    np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=10),
    elements=st.integers(0, 255),
).map(lambda a: a.astype(np.float64) / 255.0)


# ---------------------------------------------------------------------------
# MAE


def test_mae_identity_and_complement():
    m = disk_mask(12, 12)
    assert mae(m, m) == 0.0
    assert mae(1.0 - m, m) == 1.0


def test_mae_hand_example():
    pred = np.array([[1.0, 0.0, 0.5, 0.5]])
    gt = np.array([[1.0, 0.0, 0.0, 1.0]])
    assert mae(pred, gt) == pytest.approx(0.25, abs=1e-15)


def test_mae_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        mae(np.zeros((2, 2)), np.zeros((3, 3)))


@given(soft_arrays, st.data())
def test_mae_symmetric_and_bounded(a, data):
    b = data.draw(
        hnp.arrays(np.uint8, a.shape, elements=st.integers(0, 255))
    ).astype(np.float64) / 255.0
    assert mae(a, b) == mae(b, a)
    assert 0.0 <= mae(a, b) <= 1.0


def test_mae_single_pixel_flip_delta(rng):
    gt = make_binary_mask(rng, 8, 8)
    pred = gt.copy()
    pred[3, 4] = 1.0 - gt[3, 4]
    assert mae(pred, gt) == pytest.approx(1.0 / 64.0, abs=1e-16)


# ---------------------------------------------------------------------------
# F-measure curve


def test_f_curve_identity_is_all_ones():
    m = disk_mask(16, 16)
    curve = f_curve(m, m, CFG)
    assert np.all(curve.precision == 1.0)
    assert np.all(curve.recall == 1.0)
    assert np.all(curve.fbeta == 1.0)
    assert f_mean(curve) == 1.0 and f_max(curve) == 1.0


def test_f_curve_all_ones_vs_half_foreground():
    gt = np.zeros((4, 4))
    gt[:2] = 1.0
    curve = f_curve(np.ones((4, 4)), gt, CFG)
    expected = 1.3 * 0.5 / (0.3 * 0.5 + 1.0)
    assert np.allclose(curve.precision, 0.5)
    assert np.allclose(curve.recall, 1.0)
    assert np.allclose(curve.fbeta, expected)
    # a constant curve reduces to the same value under both mean and max
    assert f_mean(curve) == pytest.approx(expected, abs=1e-12)
    assert f_max(curve) == pytest.approx(f_mean(curve), abs=1e-12)


def test_f_curve_empty_prediction_scores_zero():
    gt = disk_mask(8, 8)
    curve = f_curve(np.zeros((8, 8)), gt, CFG)
    assert np.all(curve.fbeta == 0.0) and np.all(curve.precision == 0.0)


def test_f_curve_empty_gt_raises():
    with pytest.raises(EmptyGroundTruthError):
        f_curve(np.ones((4, 4)), np.zeros((4, 4)), CFG)


def test_f_curve_requires_binary_gt():
    with pytest.raises(ValidationError):
        f_curve(np.zeros((2, 2)), np.full((2, 2), 0.5), CFG)


def test_f_curve_matches_naive_recount(rng):
    for _ in range(25):
        pred = make_soft_mask(rng)
        gt = make_binary_mask(rng).astype(bool)
        curve = f_curve(pred, gt.astype(np.float64), CFG)
        n_p, n_r, n_f = naive_f_curve(pred, gt, CFG.thresholds, CFG.beta2)
        np.testing.assert_allclose(curve.precision, n_p, atol=1e-12, rtol=0)
        np.testing.assert_allclose(curve.recall, n_r, atol=1e-12, rtol=0)
        np.testing.assert_allclose(curve.fbeta, n_f, atol=1e-12, rtol=0)


def test_f_curve_exact_threshold_values_match_naive(rng):
    # pixels sitting exactly on threshold values pin the strict-> convention;
    # 8-bit-quantized masks can never land on the midpoints, so this case
    # is the only one that separates > from >= at the boundary
    pred = rng.choice(CFG.thresholds, size=(16, 16))
    gt = make_binary_mask(rng).astype(bool)
    curve = f_curve(pred, gt.astype(np.float64), CFG)
    n_p, n_r, n_f = naive_f_curve(pred, gt, CFG.thresholds, CFG.beta2)
    np.testing.assert_allclose(curve.precision, n_p, atol=1e-12, rtol=0)
    np.testing.assert_allclose(curve.recall, n_r, atol=1e-12, rtol=0)
    np.testing.assert_allclose(curve.fbeta, n_f, atol=1e-12, rtol=0)
    fast = e_measure_mean(pred, gt.astype(np.float64), CFG)
    slow = naive_e_measure(pred, gt, CFG.thresholds, CFG.eps)
    assert fast == pytest.approx(slow, abs=1e-10)


def test_f_mean_f_max_reductions():
    curve = FCurve(
        precision=np.array([0.0, 0.0]), recall=np.array([0.0, 0.0]),
        fbeta=np.array([0.2, 0.8]),
    )
    assert f_mean(curve) == pytest.approx(0.5)
    assert f_max(curve) == pytest.approx(0.8)


@given(soft_arrays, st.data())
def test_f_max_dominates_f_mean(pred, data):
    gt = data.draw(
        hnp.arrays(np.uint8, pred.shape, elements=st.integers(0, 1))
    ).astype(np.float64)
    if not gt.any():
        gt.flat[0] = 1.0
    curve = f_curve(pred, gt, CFG)
    # up to one ulp of slack: on a constant curve, pairwise summation inside
    # the mean can round a hair above the constant itself
    assert f_max(curve) >= f_mean(curve) - 1e-12
    assert np.all((curve.fbeta >= 0.0) & (curve.fbeta <= 1.0))


def test_pixelwise_metrics_permutation_invariant(rng):
    pred, gt = make_soft_mask(rng), make_binary_mask(rng)
    order = rng.permutation(pred.size)
    pred_s = pred.ravel()[order].reshape(pred.shape)
    gt_s = gt.ravel()[order].reshape(gt.shape)
    assert mae(pred_s, gt_s) == mae(pred, gt)
    np.testing.assert_array_equal(
        f_curve(pred_s, gt_s, CFG).fbeta, f_curve(pred, gt, CFG).fbeta
    )
    assert e_measure_mean(pred_s, gt_s, CFG) == e_measure_mean(pred, gt, CFG)


# ---------------------------------------------------------------------------
# Structure measure


def test_s_measure_identity_close_to_one():
    m = disk_mask(32, 32)
    assert s_measure(m, m, CFG) >= 1.0 - 1e-6


def test_s_measure_degenerate_conventions():
    zeros = np.zeros((8, 8))
    assert s_measure(np.full((8, 8), 0.3), zeros, CFG) == pytest.approx(0.7, abs=1e-15)
    ones = np.ones((8, 8))
    assert s_measure(ones, ones, CFG) == 1.0
    assert s_measure(np.full((8, 8), 0.2), ones, CFG) == pytest.approx(0.2, abs=1e-15)


def test_s_measure_range_and_sensitivity(rng):
    gt = disk_mask(24, 24)
    for _ in range(10):
        pred = make_soft_mask(rng, 24, 24)
        s = s_measure(pred, gt, CFG)
        assert 0.0 <= s <= 1.0
    # region structure matters: scrambling both maps the same way changes S
    order = rng.permutation(gt.size)
    gt_s = gt.ravel()[order].reshape(gt.shape)
    pred = np.clip(gt + 0.2 * rng.random(gt.shape), 0, 1)
    pred_s = pred.ravel()[order].reshape(pred.shape)
    assert s_measure(pred_s, gt_s, CFG) != pytest.approx(s_measure(pred, gt, CFG), abs=1e-6)


def test_s_measure_beats_worse_prediction():
    gt = disk_mask(32, 32)
    near = disk_mask(32, 32, r=9)
    far = disk_mask(32, 32, cy=8, cx=8, r=4)
    assert s_measure(near, gt, CFG) > s_measure(far, gt, CFG)


# ---------------------------------------------------------------------------
# Mean E-measure


def test_e_measure_identity():
    m = disk_mask(32, 32)
    assert e_measure_mean(m, m, CFG) >= 1.0 - 1e-4


def test_e_measure_degenerate_conventions():
    zeros = np.zeros((8, 8))
    assert e_measure_mean(zeros, zeros, CFG) == pytest.approx(1.0, abs=1e-4)
    assert e_measure_mean(np.ones((8, 8)), zeros, CFG) == pytest.approx(0.0, abs=1e-4)


def test_e_measure_matches_pixelwise_construction(rng):
    for _ in range(15):
        pred = make_soft_mask(rng, 12, 12)
        gt = make_binary_mask(rng, 12, 12, non_degenerate=False).astype(bool)
        fast = e_measure_mean(pred, gt.astype(np.float64), CFG)
        slow = naive_e_measure(pred, gt, CFG.thresholds, CFG.eps)
        assert fast == pytest.approx(slow, abs=1e-10)


# ---------------------------------------------------------------------------
# Match score


def test_match_identity():
    m = disk_mask(32, 32)
    assert match_score(m, m, CFG) >= 1.0 - 1e-6


def test_match_is_average_of_f_and_s(rng):
    pred = make_soft_mask(rng, 20, 20)
    gt = make_binary_mask(rng, 20, 20)
    f = f_mean(f_curve(pred, gt, CFG))
    s = s_measure(pred, gt, CFG)
    assert match_score(pred, gt, CFG) == pytest.approx((f + s) / 2.0, abs=1e-15)


def test_match_empty_gt_falls_back_to_s():
    zeros = np.zeros((8, 8))
    assert match_score(zeros, zeros, CFG) == 1.0
    assert match_score(np.full((8, 8), 0.25), zeros, CFG) == pytest.approx(0.75, abs=1e-15)


def test_match_binarizes_soft_gt_at_half():
    pred = disk_mask(16, 16)
    soft_gt = pred * 0.8  # binarizes back to pred
    assert match_score(pred, soft_gt, CFG) == match_score(pred, pred, CFG)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_match_identity_on_realistic_masks(seed):
    # moderately dense masks: every centroid block keeps enough foreground
    # that its statistics stay far above the eps floor
    rng = np.random.default_rng(seed)
    m = make_binary_mask(rng, 16, 16, density=float(rng.uniform(0.3, 0.7)))
    assert match_score(m, m, CFG) >= 1.0 - 1e-6


def test_fixed_pair_frozen_values():
    """Regression anchor: every number below was derived by an independent
    step-by-step evaluation of the documented formulas on this fixed pair."""
    pred = np.array([
        [0.8, 0.6, 0.2, 0.0],
        [1.0, 0.4, 0.0, 0.0],
        [0.0, 0.2, 0.1, 0.0],
        [0.0, 0.0, 0.0, 0.3],
    ])
    gt = np.array([
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ])
    assert s_measure(pred, gt, CFG) == pytest.approx(0.8662052329834702, abs=1e-12)
    assert e_measure_mean(pred, gt, CFG) == pytest.approx(0.8045508455424873, abs=1e-12)
    curve = f_curve(pred, gt, CFG)
    assert f_mean(curve) == pytest.approx(0.7706548552535215, abs=1e-12)
    assert f_max(curve) == 1.0
    assert mae(pred, gt) == pytest.approx(2.0 / 16.0, abs=1e-15)
    assert match_score(pred, gt, CFG) == pytest.approx(0.8184300441184956, abs=1e-12)


def test_all_metrics_stay_in_unit_interval(rng):
    # includes thin and tiny shapes, where the N-1 normalizations degenerate
    for h, w in [(1, 8), (8, 1), (1, 1), (2, 2), (5, 13), (16, 16)]:
        pred = make_soft_mask(rng, h, w)
        gt = make_binary_mask(rng, h, w, non_degenerate=False)
        if not gt.any():
            gt.flat[0] = 1.0
        curve = f_curve(pred, gt, CFG)
        for values in (curve.precision, curve.recall, curve.fbeta):
            assert values.min() >= 0.0 and values.max() <= 1.0
        for value in (
            s_measure(pred, gt, CFG),
            e_measure_mean(pred, gt, CFG),
            match_score(pred, gt, CFG),
            mae(pred, gt),
        ):
            assert 0.0 <= value <= 1.0


# ---------------------------------------------------------------------------
# Conventional table


def _record(pred, gt, rec_id="r"):
    return ImageRecord(id=rec_id, gts=(gt,), preds=(Prediction(mask=pred),))


def test_conventional_identity_dataset():
    m = disk_mask(16, 16)
    report = conventional_eval([_record(m, m, "a"), _record(m, m, "b")], CFG)
    assert report.mean.f_max == 1.0
    assert report.mean.f_avg == 1.0
    assert report.mean.s_measure >= 1.0 - 1e-6
    assert report.mean.mae == 0.0


def test_conventional_single_image_mean_equals_row(rng):
    pred, gt = make_soft_mask(rng), make_binary_mask(rng)
    report = conventional_eval([_record(pred, gt)], CFG)
    row, mean = report.rows[0], report.mean
    assert (row.f_max, row.f_avg, row.s_measure, row.mae) == (
        mean.f_max, mean.f_avg, mean.s_measure, mean.mae,
    )


def test_conventional_mae_averages():
    gt = disk_mask(10, 10)
    report = conventional_eval([_record(np.abs(gt - 0.1), gt, "a"), _record(np.abs(gt - 0.3), gt, "b")], CFG)
    assert report.rows[0].mae == pytest.approx(0.1, abs=1e-12)
    assert report.rows[1].mae == pytest.approx(0.3, abs=1e-12)
    assert report.mean.mae == pytest.approx(0.2, abs=1e-12)


def test_conventional_csv_layout():
    m = disk_mask(8, 8)
    report = conventional_eval([_record(m, m, "x")], CFG)
    lines = conventional_csv(report).strip().split("\n")
    assert lines[0] == "id,f_max,f_avg,s_measure,mae"
    assert lines[1].startswith("x,1.0000,1.0000,")
    assert lines[-1].startswith("MEAN,")
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# Config validation


def test_metric_config_validation():
    with pytest.raises(ValidationError):
        MetricConfig(beta2=0.0)
    with pytest.raises(ValidationError):
        MetricConfig(s_alpha=1.5)
    with pytest.raises(ValidationError):
        MetricConfig(eps=0.0)
    with pytest.raises(ValidationError):
        MetricConfig(thresholds=np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):
        MetricConfig(thresholds=np.array([0.0, 0.5]))
    cfg = MetricConfig()
    assert len(cfg.thresholds) == 255
    assert cfg.thresholds[0] == pytest.approx(0.5 / 255)
    assert cfg.thresholds[-1] == pytest.approx(254.5 / 255)
