"""Single-mask saliency metrics and the composite match score.

Implements MAE, the thresholded F-measure curve (Achanta et al., CVPR 2009
convention, beta^2 = 0.3), the structure measure (Fan et al., ICCV 2017) and
the mean enhanced-alignment measure (Fan et al., IJCAI 2018), plus the match
score used to compare one predicted mask against one ground truth: the
average of the mean F-measure and the structure measure.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGroundTruthError, ValidationError
from .masks import Mask, binarize, require_same_shape


def _default_thresholds() -> np.ndarray:
    # 255 midpoints (k - 0.5) / 255: identical binary masks stay a fixed point
    # of the sweep (0 and 1 never sit on a threshold).
    return (np.arange(1, 256, dtype=np.float64) - 0.5) / 255.0


@dataclass(frozen=True)
class MetricConfig:
    """Constants shared by the metric family.

    beta2      F-measure beta^2 weighting of precision vs recall.
    s_alpha    structure-measure mix of object vs region similarity.
    eps        guard against division by zero.
    thresholds strictly increasing binarization levels in (0, 1).
    """

    beta2: float = 0.3
    s_alpha: float = 0.5
    eps: float = 1e-8
    thresholds: np.ndarray = field(default_factory=_default_thresholds)

    def __post_init__(self):
        object.__setattr__(self, "thresholds", np.asarray(self.thresholds, dtype=np.float64))
        t = self.thresholds
        if self.beta2 <= 0:
            raise ValidationError(f"beta2 must be positive, got {self.beta2}")
        if not 0.0 <= self.s_alpha <= 1.0:
            raise ValidationError(f"s_alpha must lie in [0, 1], got {self.s_alpha}")
        if self.eps <= 0:
            raise ValidationError(f"eps must be positive, got {self.eps}")
        if t.ndim != 1 or t.size == 0:
            raise ValidationError("thresholds must be a non-empty 1-D sequence")
        if t.min() <= 0.0 or t.max() >= 1.0 or np.any(np.diff(t) <= 0):
            raise ValidationError("thresholds must be strictly increasing, all in (0, 1)")


DEFAULT_CONFIG = MetricConfig()


@dataclass(frozen=True)
class FCurve:
    """Per-threshold precision / recall / F-beta triples."""

    precision: np.ndarray
    recall: np.ndarray
    fbeta: np.ndarray

    def __len__(self) -> int:
        return len(self.fbeta)


def _check_binary(gt: Mask, name: str = "gt") -> np.ndarray:
    g = np.asarray(gt, dtype=np.float64)
    fg = g > 0.5
    if not np.all((g == 0.0) | (g == 1.0)):
        raise ValidationError(f"{name} must be binary (values in {{0, 1}})")
    return fg


def mae(pred: Mask, gt: Mask) -> float:
    """Mean absolute pixel error between two soft masks."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    require_same_shape(pred, gt)
    return float(np.abs(pred - gt).mean())


# ---------------------------------------------------------------------------
# F-measure curve


def threshold_counts(
    pred: Mask, fg: np.ndarray, thresholds: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """TP and FP pixel counts of `pred > t` against boolean foreground `fg`,
    for every t in `thresholds`, via one histogram pass instead of one
    recount per threshold.

    Bucketing a value by how many thresholds lie strictly below it makes the
    suffix sums of the two histograms reproduce the per-threshold recount
    bit for bit.
    """
    flat = pred.ravel()
    fg_flat = fg.ravel()
    nbins = len(thresholds) + 1
    bucket = np.searchsorted(thresholds, flat, side="left")
    total_hist = np.bincount(bucket, minlength=nbins)
    tp_hist = np.bincount(bucket[fg_flat], minlength=nbins)
    fp_hist = total_hist - tp_hist
    # suffix[b] = number of pixels whose value exceeds at least b thresholds
    tp = np.cumsum(tp_hist[::-1])[::-1][1:]
    fp = np.cumsum(fp_hist[::-1])[::-1][1:]
    return tp, fp


def f_curve(pred: Mask, gt_bin: Mask, cfg: MetricConfig = DEFAULT_CONFIG) -> FCurve:
    """Precision/recall/F-beta of `pred` swept over cfg.thresholds.

    Conventions: an empty binarized prediction scores precision 0, and F is 0
    whenever both precision and recall vanish. An empty ground truth is
    rejected (see EmptyGroundTruthError).
    """
    pred = np.asarray(pred, dtype=np.float64)
    require_same_shape(pred, np.asarray(gt_bin))
    fg = _check_binary(gt_bin, "gt_bin")
    n_fg = int(fg.sum())
    if n_fg == 0:
        raise EmptyGroundTruthError("ground truth has no foreground pixels")
    tp, fp = threshold_counts(pred, fg, cfg.thresholds)
    pred_area = tp + fp
    precision = np.divide(tp, pred_area, out=np.zeros(len(tp)), where=pred_area > 0)
    recall = tp / n_fg
    denom = cfg.beta2 * precision + recall
    fbeta = np.divide(
        (1.0 + cfg.beta2) * precision * recall,
        denom,
        out=np.zeros(len(tp)),
        where=denom > 0,
    )
    return FCurve(precision=precision, recall=recall, fbeta=fbeta)


def f_mean(curve: FCurve) -> float:
    """Arithmetic mean of the F-beta entries."""
    if len(curve) == 0:
        raise ValidationError("empty F curve")
    return float(curve.fbeta.mean())


def f_max(curve: FCurve) -> float:
    """Maximum of the F-beta entries."""
    if len(curve) == 0:
        raise ValidationError("empty F curve")
    return float(curve.fbeta.max())


# ---------------------------------------------------------------------------
# Structure measure


def _object_similarity(values: np.ndarray, eps: float) -> float:
    # 2*x / (x^2 + 1 + sigma_x): high when the region is bright and uniform.
    x = float(values.mean())
    sigma = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return 2.0 * x / (x * x + 1.0 + sigma + eps)


def _centroid_cut(fg: np.ndarray) -> tuple[int, int]:
    # Foreground centroid, rounded, as exclusive upper bounds of the
    # top/left blocks (so the centroid pixel lands in the top-left block).
    h, w = fg.shape
    total = fg.sum()
    cy = int(np.round((fg.sum(axis=1) * np.arange(h)).sum() / total)) + 1
    cx = int(np.round((fg.sum(axis=0) * np.arange(w)).sum() / total)) + 1
    return cy, cx


def _block_similarity(p: np.ndarray, g: np.ndarray, eps: float) -> float:
    n = p.size
    x = float(p.mean())
    y = float(g.mean())
    d = max(n - 1, 1)
    sigma_x = float(((p - x) ** 2).sum()) / d
    sigma_y = float(((g - y) ** 2).sum()) / d
    sigma_xy = float(((p - x) * (g - y)).sum()) / d
    numerator = 4.0 * x * y * sigma_xy
    denominator = (x * x + y * y) * (sigma_x + sigma_y)
    if numerator != 0.0:
        return numerator / (denominator + eps)
    return 1.0 if denominator == 0.0 else 0.0


def _region_similarity(pred: np.ndarray, fg: np.ndarray, eps: float) -> float:
    h, w = fg.shape
    cy, cx = _centroid_cut(fg)
    total = float(fg.sum())
    score = 0.0
    for rows, cols in (
        (slice(0, cy), slice(0, cx)),
        (slice(0, cy), slice(cx, w)),
        (slice(cy, h), slice(0, cx)),
        (slice(cy, h), slice(cx, w)),
    ):
        g_block = fg[rows, cols]
        if g_block.size == 0:
            continue
        weight = float(g_block.sum()) / total
        if weight == 0.0:
            continue
        score += weight * _block_similarity(
            pred[rows, cols], g_block.astype(np.float64), eps
        )
    return score


def s_measure(pred: Mask, gt_bin: Mask, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    """Structure measure: alpha * object similarity + (1-alpha) * region
    similarity, with the usual degenerate conventions for empty / full
    ground truths.

    The region term splits both maps into four blocks at the ground-truth
    centroid and weights each block's similarity by its share of foreground
    pixels.
    """
    pred = np.asarray(pred, dtype=np.float64)
    require_same_shape(pred, np.asarray(gt_bin))
    fg = _check_binary(gt_bin, "gt_bin")
    y = fg.mean()
    if y == 0.0:
        return 1.0 - float(pred.mean())
    if y == 1.0:
        return float(pred.mean())
    mu = float(y)
    so = mu * _object_similarity(pred[fg], cfg.eps) + (1.0 - mu) * _object_similarity(
        1.0 - pred[~fg], cfg.eps
    )
    sr = _region_similarity(pred, fg, cfg.eps)
    return max(0.0, cfg.s_alpha * so + (1.0 - cfg.s_alpha) * sr)


# ---------------------------------------------------------------------------
# Mean E-measure


def e_measure_mean(pred: Mask, gt_bin: Mask, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    """Mean enhanced-alignment measure over cfg.thresholds.

    With a binary ground truth the per-pixel enhanced-alignment map takes
    only four values (one per TP/FP/FN/TN class), so each threshold costs
    O(1) once the TP/FP counts are known. Scores are clipped into [0, 1]
    (the raw normalization by N - 1 can exceed 1 by ~1/N on near-perfect
    masks).
    """
    pred = np.asarray(pred, dtype=np.float64)
    require_same_shape(pred, np.asarray(gt_bin))
    fg = _check_binary(gt_bin, "gt_bin")
    n = fg.size
    n_fg = int(fg.sum())
    eps = cfg.eps
    tp, fp = threshold_counts(pred, fg, cfg.thresholds)
    pred_area = (tp + fp).astype(np.float64)
    if n_fg == 0:
        total = n - pred_area
    elif n_fg == n:
        total = pred_area
    else:
        mu_gt = n_fg / n
        mu_b = pred_area / n
        phi_fg, phi_bg = 1.0 - mu_gt, -mu_gt

        def enhanced(phi_g: float, b: float) -> np.ndarray:
            phi_b = b - mu_b
            align = 2.0 * phi_g * phi_b / (phi_g * phi_g + phi_b * phi_b + eps)
            return (align + 1.0) ** 2 / 4.0

        fn = n_fg - tp
        tn = n - n_fg - fp
        total = (
            tp * enhanced(phi_fg, 1.0)
            + fp * enhanced(phi_bg, 1.0)
            + fn * enhanced(phi_fg, 0.0)
            + tn * enhanced(phi_bg, 0.0)
        )
    scores = np.clip(total / (n - 1.0 + eps), 0.0, 1.0)
    return float(scores.mean())


# ---------------------------------------------------------------------------
# Match score


def match_score(pred: Mask, gt: Mask, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    """Agreement between a predicted mask and one ground truth: the average
    of the mean F-measure and the structure measure, after binarizing the
    ground truth at 0.5.

    When the binarized ground truth is empty the F-measure is undefined and
    the structure measure alone is returned.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt_bin = binarize(gt, 0.5)
    require_same_shape(pred, gt_bin)
    s = s_measure(pred, gt_bin, cfg)
    if not gt_bin.any():
        return s
    f = f_mean(f_curve(pred, gt_bin, cfg))
    return (f + s) / 2.0


# ---------------------------------------------------------------------------
# Conventional single-mask benchmark table


@dataclass(frozen=True)
class ConventionalRow:
    id: str
    f_max: float
    f_avg: float
    s_measure: float
    mae: float


@dataclass(frozen=True)
class ConventionalReport:
    rows: tuple[ConventionalRow, ...]
    mean: ConventionalRow


def conventional_eval(records, cfg: MetricConfig = DEFAULT_CONFIG) -> ConventionalReport:
    """Single-mask benchmark columns (Fmax, Favg, S, MAE) per record plus the
    dataset mean. Each record is scored first prediction against first
    ground truth."""
    rows = []
    for rec in records:
        pred = rec.preds[0].mask
        gt = rec.gts[0]
        gt_bin = binarize(gt, 0.5)
        curve = f_curve(pred, gt_bin, cfg)
        rows.append(
            ConventionalRow(
                id=rec.id,
                f_max=f_max(curve),
                f_avg=f_mean(curve),
                s_measure=s_measure(pred, gt_bin, cfg),
                mae=mae(pred, gt),
            )
        )
    if not rows:
        raise ValidationError("conventional_eval needs at least one record")
    mean = ConventionalRow(
        id="MEAN",
        f_max=float(np.mean([r.f_max for r in rows])),
        f_avg=float(np.mean([r.f_avg for r in rows])),
        s_measure=float(np.mean([r.s_measure for r in rows])),
        mae=float(np.mean([r.mae for r in rows])),
    )
    return ConventionalReport(rows=tuple(rows), mean=mean)


def conventional_csv(report: ConventionalReport) -> str:
    """CSV rendering: one row per image, a final MEAN row, 4 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "f_max", "f_avg", "s_measure", "mae"])
    for row in list(report.rows) + [report.mean]:
        writer.writerow(
            [row.id]
            + [f"{v:.4f}" for v in (row.f_max, row.f_avg, row.s_measure, row.mae)]
        )
    return buf.getvalue()
