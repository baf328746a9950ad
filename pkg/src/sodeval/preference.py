"""Pairwise preference alignment: how often a score function ranks the
human-preferred mask of a pair above the other one."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .errors import ValidationError
from .masks import Mask, binarize, load_mask
from .metrics import (
    DEFAULT_CONFIG,
    MetricConfig,
    e_measure_mean,
    f_curve,
    f_max,
    f_mean,
    mae,
    match_score,
    s_measure,
)

TIE_POLICIES = ("half", "wrong")


@dataclass(frozen=True)
class PreferencePair:
    """Two scores for the same image plus the label of the superior mask."""

    id: str
    score_a: float
    score_b: float
    label: str  # "A" or "B"

    def __post_init__(self):
        if self.label not in ("A", "B"):
            raise ValidationError(f"pair {self.id!r}: label must be 'A' or 'B', got {self.label!r}")
        if not (math.isfinite(self.score_a) and math.isfinite(self.score_b)):
            raise ValidationError(f"pair {self.id!r}: scores must be finite")


def alignment_accuracy(pairs: Sequence[PreferencePair], tie_policy: str = "half") -> float:
    """Fraction of pairs whose higher score lands on the labeled superior
    mask. Exact ties count 0.5 under policy "half" (default) or 0 under
    policy "wrong"."""
    if tie_policy not in TIE_POLICIES:
        raise ValidationError(f"tie_policy must be one of {TIE_POLICIES}, got {tie_policy!r}")
    if not pairs:
        raise ValidationError("alignment_accuracy needs at least one pair")
    credit = 0.0
    for pair in pairs:
        superior, inferior = (
            (pair.score_a, pair.score_b) if pair.label == "A" else (pair.score_b, pair.score_a)
        )
        if superior > inferior:
            credit += 1.0
        elif superior == inferior and tie_policy == "half":
            credit += 0.5
    return credit / len(pairs)


# ---------------------------------------------------------------------------
# Scoring candidate masks with a named metric


def _score_mae(pred: Mask, gt: Mask, cfg: MetricConfig) -> float:
    # negated so that "higher is better" holds for every metric name
    return -mae(pred, gt)


def _score_f_max(pred: Mask, gt: Mask, cfg: MetricConfig) -> float:
    return f_max(f_curve(pred, binarize(gt, 0.5), cfg))


def _score_f_avg(pred: Mask, gt: Mask, cfg: MetricConfig) -> float:
    return f_mean(f_curve(pred, binarize(gt, 0.5), cfg))


def _score_e_mean(pred: Mask, gt: Mask, cfg: MetricConfig) -> float:
    return e_measure_mean(pred, binarize(gt, 0.5), cfg)


def _score_s_measure(pred: Mask, gt: Mask, cfg: MetricConfig) -> float:
    return s_measure(pred, binarize(gt, 0.5), cfg)


METRIC_SCORERS: dict[str, Callable[[Mask, Mask, MetricConfig], float]] = {
    "mae": _score_mae,
    "f_max": _score_f_max,
    "f_avg": _score_f_avg,
    "e_mean": _score_e_mean,
    "s_measure": _score_s_measure,
    "match": match_score,
}


@dataclass(frozen=True)
class CandidatePair:
    """Two candidate masks for one image, the shared ground truth, and the
    human label of the superior candidate."""

    id: str
    mask_a: Mask
    mask_b: Mask
    gt: Mask
    label: str


def score_pairs_with_metric(
    candidate_pairs: Sequence[CandidatePair],
    metric: str,
    cfg: MetricConfig = DEFAULT_CONFIG,
) -> list[PreferencePair]:
    """Score each candidate mask against the ground truth with a named metric
    (mae is negated so higher is always better)."""
    try:
        scorer = METRIC_SCORERS[metric]
    except KeyError:
        raise ValidationError(
            f"unknown metric {metric!r}; choose from {sorted(METRIC_SCORERS)}"
        ) from None
    return [
        PreferencePair(
            id=cp.id,
            score_a=scorer(cp.mask_a, cp.gt, cfg),
            score_b=scorer(cp.mask_b, cp.gt, cfg),
            label=cp.label,
        )
        for cp in candidate_pairs
    ]


# ---------------------------------------------------------------------------
# Pairs file


def load_pairs(
    path: str | os.PathLike,
    metric: str = "match",
    cfg: MetricConfig = DEFAULT_CONFIG,
) -> list[PreferencePair]:
    """Read a pairs file: a JSON array of {"id", "a", "b", "gt"?, "label"}.

    "a" / "b" may be numbers (used directly as scores) or mask paths, in
    which case "gt" is required and both masks are scored with `metric`.
    Paths are resolved relative to the file's directory.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed pairs JSON: {exc}") from exc
    if not isinstance(doc, list) or not doc:
        raise ValidationError(f"{path}: pairs file must be a non-empty JSON array")

    base = path.parent
    pairs: list[PreferencePair] = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise ValidationError(f"{path}: pairs[{i}] must be an object")
        pair_id = str(entry.get("id", i))
        label = entry.get("label")
        a, b = entry.get("a"), entry.get("b")
        if isinstance(a, (int, float)) and isinstance(b, (int, float)):
            pairs.append(
                PreferencePair(id=pair_id, score_a=float(a), score_b=float(b), label=label)
            )
        elif isinstance(a, str) and isinstance(b, str):
            gt = entry.get("gt")
            if not isinstance(gt, str):
                raise ValidationError(f"pair {pair_id!r}: mask-valued pairs need a 'gt' path")
            candidate = CandidatePair(
                id=pair_id,
                mask_a=load_mask(base / a),
                mask_b=load_mask(base / b),
                gt=load_mask(base / gt),
                label=label,
            )
            pairs.extend(score_pairs_with_metric([candidate], metric, cfg))
        else:
            raise ValidationError(
                f"pair {pair_id!r}: 'a' and 'b' must both be numbers or both be paths"
            )
    return pairs
