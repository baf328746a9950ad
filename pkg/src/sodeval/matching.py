"""Best-match evaluation of multiple predictions against multiple ground truths.

Per image, every prediction is paired with its best-matching ground truth and
every ground truth with its best-matching prediction:

    precision_i = (1/K) * sum_k  max_j  M(pred_k, gt_j)
    recall_i    = (1/J) * sum_j  max_k  M(pred_k, gt_j)

where M is the match score from `sodeval.metrics`. Dataset AP / AR are the
unweighted means over images and F1 their harmonic mean. Predictions can be
filtered by their quality score before matching; sweeping the filter
threshold yields a precision/recall curve.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .manifest import ImageRecord
from .metrics import DEFAULT_CONFIG, MetricConfig, match_score

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "SODEVAL_THREADS"

DEFAULT_TAUS: tuple[float, ...] = tuple(k / 10.0 for k in range(10))


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else SODEVAL_THREADS, else CPU count.
    Thread count never changes numeric results, only wall time."""
    if threads is None:
        env = os.environ.get(THREADS_ENV_VAR)
        if env is not None:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ValidationError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from exc
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ValidationError(f"thread count must be positive, got {threads}")
    return threads


def _ordered_map(fn: Callable, items: Iterable, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Per-image pieces


@dataclass(frozen=True)
class ImageScore:
    image_id: str
    precision: float
    recall: float
    kept_pred_indices: tuple[int, ...]


@dataclass(frozen=True)
class EvalReport:
    per_image: tuple[ImageScore, ...]
    ap: float
    ar: float
    f1: float
    threshold: float


def match_matrix(rec: ImageRecord, cfg: MetricConfig = DEFAULT_CONFIG) -> np.ndarray:
    """K x J grid of match scores, scores[k, j] = M(pred_k, gt_j)."""
    scores = np.empty((len(rec.preds), len(rec.gts)), dtype=np.float64)
    for k, pred in enumerate(rec.preds):
        for j, gt in enumerate(rec.gts):
            scores[k, j] = match_score(pred.mask, gt, cfg)
    return scores


def _check_matrix(mm: np.ndarray) -> np.ndarray:
    mm = np.asarray(mm, dtype=np.float64)
    if mm.ndim != 2 or mm.shape[0] < 1 or mm.shape[1] < 1:
        raise ValidationError(f"match matrix must be K x J with K, J >= 1, got {mm.shape}")
    return mm


def image_precision(mm: np.ndarray) -> float:
    """Mean over predictions of each prediction's best ground-truth match."""
    return float(_check_matrix(mm).max(axis=1).mean())


def image_recall(mm: np.ndarray) -> float:
    """Mean over ground truths of each ground truth's best prediction match."""
    return float(_check_matrix(mm).max(axis=0).mean())


def f1_harmonic(ap: float, ar: float) -> float:
    """Harmonic mean of AP and AR; zero when both vanish."""
    if ap + ar == 0.0:
        return 0.0
    return 2.0 * ap * ar / (ap + ar)


def kept_indices(scores: Sequence[float | None], tau: float) -> tuple[int, ...]:
    """Indices of predictions whose quality score passes the filter.

    Keeps score >= tau; when nothing qualifies, falls back to the single
    highest-scoring prediction (lowest index on ties) so an image never ends
    up with zero predictions. tau = 0 keeps everything and needs no scores.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValidationError(f"quality threshold must lie in [0, 1], got {tau}")
    if tau == 0.0:
        return tuple(range(len(scores)))
    if any(s is None for s in scores):
        raise ValidationError("quality filtering with tau > 0 requires a score on every prediction")
    kept = tuple(i for i, s in enumerate(scores) if s >= tau)
    if kept:
        return kept
    return (int(np.argmax(np.asarray(scores, dtype=np.float64))),)


def _log_fallback(rec: ImageRecord, tau: float, kept: tuple[int, ...]) -> None:
    if tau > 0.0 and len(kept) == 1 and rec.preds[kept[0]].score < tau:
        logger.debug(
            "record %s: no prediction scored >= %.3g; kept top scorer %d",
            rec.id, tau, kept[0],
        )


def filter_by_quality(rec: ImageRecord, tau: float) -> ImageRecord:
    """Record restricted to the predictions passing the quality filter."""
    kept = kept_indices(rec.scores, tau)
    _log_fallback(rec, tau, kept)
    return ImageRecord(id=rec.id, gts=rec.gts, preds=tuple(rec.preds[i] for i in kept))


def _score_image(rec: ImageRecord, tau: float, cfg: MetricConfig) -> ImageScore:
    kept = kept_indices(rec.scores, tau)
    mm = match_matrix(filter_by_quality(rec, tau), cfg)
    return ImageScore(
        image_id=rec.id,
        precision=image_precision(mm),
        recall=image_recall(mm),
        kept_pred_indices=kept,
    )


def _aggregate(per_image: Sequence[ImageScore], tau: float) -> EvalReport:
    if not per_image:
        raise ValidationError("evaluation needs at least one record")
    ap = float(np.mean([s.precision for s in per_image]))
    ar = float(np.mean([s.recall for s in per_image]))
    return EvalReport(
        per_image=tuple(per_image), ap=ap, ar=ar, f1=f1_harmonic(ap, ar), threshold=tau
    )


def evaluate(
    records: Iterable[ImageRecord],
    tau: float = 0.0,
    cfg: MetricConfig = DEFAULT_CONFIG,
    threads: int | None = None,
) -> EvalReport:
    """Filter each record at `tau`, score it, and aggregate AP / AR / F1.

    Images are processed independently (possibly in parallel) and aggregated
    in record order, so results do not depend on the worker count.
    """
    n = resolve_threads(threads)
    per_image = _ordered_map(lambda rec: _score_image(rec, tau, cfg), records, n)
    return _aggregate(per_image, tau)


# ---------------------------------------------------------------------------
# Threshold sweep


def pr_curve(
    records: Iterable[ImageRecord],
    taus: Sequence[float] = DEFAULT_TAUS,
    cfg: MetricConfig = DEFAULT_CONFIG,
    threads: int | None = None,
) -> list[EvalReport]:
    """One evaluation per quality threshold, reusing each image's full match
    matrix across thresholds (filtering only selects rows, so the matrix
    never changes)."""
    if len(taus) == 0:
        raise ValidationError("pr_curve needs at least one threshold")
    n = resolve_threads(threads)

    def score_all_taus(rec: ImageRecord) -> list[ImageScore]:
        mm = match_matrix(rec, cfg)
        out = []
        for tau in taus:
            kept = kept_indices(rec.scores, tau)
            _log_fallback(rec, tau, kept)
            sub = mm[list(kept), :]
            out.append(
                ImageScore(
                    image_id=rec.id,
                    precision=image_precision(sub),
                    recall=image_recall(sub),
                    kept_pred_indices=kept,
                )
            )
        return out

    per_image_all = _ordered_map(score_all_taus, records, n)
    return [
        _aggregate([scores[t] for scores in per_image_all], tau)
        for t, tau in enumerate(taus)
    ]


def best_f1_point(curve: Sequence[EvalReport]) -> EvalReport:
    """Sweep point with the highest F1; ties go to the lowest threshold."""
    if not curve:
        raise ValidationError("empty sweep curve")
    return min(curve, key=lambda r: (-r.f1, r.threshold))


def select_best_masks(candidates_per_image: Sequence[Sequence[tuple]]) -> list[int]:
    """Per image, the index of the highest-scoring (mask, score) candidate;
    ties go to the lowest index."""
    chosen = []
    for i, candidates in enumerate(candidates_per_image):
        if not candidates:
            raise ValidationError(f"image {i}: empty candidate list")
        scores = [score for _, score in candidates]
        if any(s is None for s in scores):
            raise ValidationError(f"image {i}: every candidate needs a score")
        chosen.append(int(np.argmax(np.asarray(scores, dtype=np.float64))))
    return chosen


# ---------------------------------------------------------------------------
# Serialization


def report_to_dict(report: EvalReport) -> dict:
    return {
        "threshold": report.threshold,
        "ap": report.ap,
        "ar": report.ar,
        "f1": report.f1,
        "per_image": [
            {
                "id": s.image_id,
                "precision": s.precision,
                "recall": s.recall,
                "kept_pred_indices": list(s.kept_pred_indices),
            }
            for s in report.per_image
        ],
    }


def report_to_json(report: EvalReport) -> str:
    """Full-precision JSON with per-image detail."""
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def curve_to_csv(curve: Sequence[EvalReport]) -> str:
    """Sweep summary, one `tau,ap,ar,f1` row per threshold, 4 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tau", "ap", "ar", "f1"])
    for rep in curve:
        writer.writerow([f"{v:.4f}" for v in (rep.threshold, rep.ap, rep.ar, rep.f1)])
    return buf.getvalue()
