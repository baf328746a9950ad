"""Training-signal losses as pure functions: soft cross-entropy, Dice, their
weighted combination, minimum-loss pair selection over multiple masks, and
the MSE objective for quality-score regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .masks import Mask, require_same_shape

QUALITY_LEVEL_SCORES = {1: 0.0, 2: 0.33, 3: 0.67, 4: 1.0}


@dataclass(frozen=True)
class LossConfig:
    """lambda_ce weights the cross-entropy term against Dice; dice_smooth
    keeps all-empty pairs at loss 0; prob_clamp bounds probabilities away
    from 0 and 1 before taking logs."""

    lambda_ce: float = 2.5
    dice_smooth: float = 1.0
    prob_clamp: float = 1e-7

    def __post_init__(self):
        if self.lambda_ce <= 0:
            raise ValidationError(f"lambda_ce must be positive, got {self.lambda_ce}")
        if self.dice_smooth < 0:
            raise ValidationError(f"dice_smooth must be non-negative, got {self.dice_smooth}")
        if not 0.0 < self.prob_clamp < 0.5:
            raise ValidationError(f"prob_clamp must lie in (0, 0.5), got {self.prob_clamp}")


DEFAULT_LOSS_CONFIG = LossConfig()


@dataclass(frozen=True)
class LossBreakdown:
    ce: float
    dice: float
    total: float


def _as_pair(pred: Mask, gt: Mask) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(gt, dtype=np.float64)
    require_same_shape(p, t)
    return p, t


def ce_loss(pred: Mask, gt: Mask, cfg: LossConfig = DEFAULT_LOSS_CONFIG) -> float:
    """Soft-target cross entropy, probabilities clamped before the logs."""
    p, t = _as_pair(pred, gt)
    p = np.clip(p, cfg.prob_clamp, 1.0 - cfg.prob_clamp)
    return float(-(t * np.log(p) + (1.0 - t) * np.log1p(-p)).mean())


def dice_loss(pred: Mask, gt: Mask, cfg: LossConfig = DEFAULT_LOSS_CONFIG) -> float:
    """1 - (2*sum(p*t) + s) / (sum(p^2) + sum(t^2) + s)."""
    p, t = _as_pair(pred, gt)
    s = cfg.dice_smooth
    overlap = 2.0 * float((p * t).sum()) + s
    norm = float((p * p).sum()) + float((t * t).sum()) + s
    if norm == 0.0:
        # only reachable with s = 0 and two all-zero masks
        return 0.0
    return 1.0 - overlap / norm


def mask_loss(pred: Mask, gt: Mask, cfg: LossConfig = DEFAULT_LOSS_CONFIG) -> LossBreakdown:
    """Combined mask objective lambda_ce * CE + Dice."""
    ce = ce_loss(pred, gt, cfg)
    dice = dice_loss(pred, gt, cfg)
    return LossBreakdown(ce=ce, dice=dice, total=cfg.lambda_ce * ce + dice)


@dataclass(frozen=True)
class MinLossSelection:
    pred_index: int
    gt_index: int
    loss: LossBreakdown
    table: tuple[tuple[LossBreakdown, ...], ...]


def min_loss_select(
    preds,
    gts,
    cfg: LossConfig = DEFAULT_LOSS_CONFIG,
) -> MinLossSelection:
    """Mask loss for every (prediction, ground truth) pair, plus the pair with
    the minimum total. Ties go to the lexicographically smallest (k, j)."""
    if not len(preds) or not len(gts):
        raise ValidationError("min_loss_select needs at least one prediction and one ground truth")
    table = tuple(
        tuple(mask_loss(pred, gt, cfg) for gt in gts) for pred in preds
    )
    best_k, best_j = 0, 0
    for k, row in enumerate(table):
        for j, cell in enumerate(row):
            if cell.total < table[best_k][best_j].total:
                best_k, best_j = k, j
    return MinLossSelection(
        pred_index=best_k, gt_index=best_j, loss=table[best_k][best_j], table=table
    )


def normalize_quality_level(level: int) -> float:
    """Map the 4-point quality annotation to a score: 1 -> 0.0, 2 -> 0.33,
    3 -> 0.67, 4 -> 1.0."""
    try:
        return QUALITY_LEVEL_SCORES[level]
    except (KeyError, TypeError):
        raise ValidationError(f"quality level must be one of 1..4, got {level!r}") from None


def mse_quality_loss(pred_scores, gt_scores) -> float:
    """Mean squared error between predicted and annotated quality scores."""
    p = np.asarray(pred_scores, dtype=np.float64)
    t = np.asarray(gt_scores, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1 or p.size == 0:
        raise ValidationError(
            f"score lists must be non-empty and of equal length, got {p.shape} vs {t.shape}"
        )
    return float(((p - t) ** 2).mean())
