"""Dataset manifest: image records with 1..J ground truths and 1..K predictions.

Manifest file format (JSON):

    {
      "root": "optional/base/dir",
      "images": [
        {
          "id": "img_0000",
          "gts": ["gts/img_0000_gt0.png", "..."],
          "preds": [{"path": "preds/img_0000_pred0.png", "score": 0.97}, ...]
        }
      ]
    }

Paths are resolved against "root" (itself resolved against the manifest's
directory when relative), or against the manifest's directory when "root" is
absent.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .masks import Mask, load_mask

# ---------------------------------------------------------------------------
# In-memory records (masks loaded)


@dataclass(frozen=True)
class Prediction:
    """A predicted mask with an optional quality score in [0, 1]."""

    mask: Mask
    score: float | None = None

    def __post_init__(self):
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"quality score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class ImageRecord:
    """One evaluation unit: J >= 1 ground truths and K >= 1 predictions,
    all sharing the same width and height."""

    id: str
    gts: tuple[Mask, ...]
    preds: tuple[Prediction, ...]

    def __post_init__(self):
        object.__setattr__(self, "gts", tuple(self.gts))
        object.__setattr__(self, "preds", tuple(self.preds))
        if not self.gts:
            raise ValidationError(f"record {self.id!r}: needs at least one ground truth")
        if not self.preds:
            raise ValidationError(f"record {self.id!r}: needs at least one prediction")
        shape = self.gts[0].shape
        for m in list(self.gts) + [p.mask for p in self.preds]:
            if m.shape != shape:
                raise DimensionMismatchError(
                    f"record {self.id!r}: mask shapes differ ({shape} vs {m.shape})"
                )

    @property
    def scores(self) -> tuple[float | None, ...]:
        return tuple(p.score for p in self.preds)


# ---------------------------------------------------------------------------
# On-disk references (paths + scores, masks not yet loaded)


@dataclass(frozen=True)
class PredictionRef:
    path: str
    score: float | None = None


@dataclass(frozen=True)
class RecordRef:
    id: str
    gts: tuple[str, ...]
    preds: tuple[PredictionRef, ...]


@dataclass(frozen=True)
class Manifest:
    root: Path
    records: tuple[RecordRef, ...] = field(default_factory=tuple)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.root / p


def _parse_record(entry, index: int) -> RecordRef:
    if not isinstance(entry, dict):
        raise ValidationError(f"images[{index}]: expected an object")
    rec_id = entry.get("id")
    if not isinstance(rec_id, str) or not rec_id:
        raise ValidationError(f"images[{index}]: missing or invalid 'id'")
    gts = entry.get("gts")
    if not isinstance(gts, list) or not gts or not all(isinstance(g, str) for g in gts):
        raise ValidationError(f"record {rec_id!r}: 'gts' must be a non-empty list of paths")
    raw_preds = entry.get("preds")
    if not isinstance(raw_preds, list) or not raw_preds:
        raise ValidationError(f"record {rec_id!r}: 'preds' must be a non-empty list")
    preds = []
    for i, p in enumerate(raw_preds):
        if not isinstance(p, dict) or not isinstance(p.get("path"), str):
            raise ValidationError(f"record {rec_id!r}: preds[{i}] needs a 'path'")
        score = p.get("score")
        if score is not None:
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise ValidationError(f"record {rec_id!r}: preds[{i}] score must be a number")
            if not 0.0 <= score <= 1.0:
                raise ValidationError(
                    f"record {rec_id!r}: preds[{i}] score {score} outside [0, 1]"
                )
            score = float(score)
        preds.append(PredictionRef(path=p["path"], score=score))
    return RecordRef(id=rec_id, gts=tuple(gts), preds=tuple(preds))


def parse_manifest(path: str | os.PathLike) -> Manifest:
    """Parse and validate a manifest document (no mask decoding).

    Checks structure, id uniqueness, and that every referenced file exists.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed manifest JSON: {exc}") from exc

    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: manifest must be a JSON object")
    root = doc.get("root")
    if root is not None and not isinstance(root, str):
        raise ValidationError(f"{path}: 'root' must be a string")
    base = path.parent
    root_dir = base if root is None else (base / root if not Path(root).is_absolute() else Path(root))

    images = doc.get("images")
    if not isinstance(images, list) or not images:
        raise ValidationError(f"{path}: 'images' must be a non-empty array")

    records = [_parse_record(e, i) for i, e in enumerate(images)]
    seen: set[str] = set()
    for rec in records:
        if rec.id in seen:
            raise ValidationError(f"{path}: duplicate record id {rec.id!r}")
        seen.add(rec.id)

    manifest = Manifest(root=root_dir, records=tuple(records))
    for rec in records:
        for p in list(rec.gts) + [pr.path for pr in rec.preds]:
            if not manifest.resolve(p).is_file():
                raise ValidationError(f"record {rec.id!r}: missing mask file {p!r}")
    return manifest


def load_record(manifest: Manifest, ref: RecordRef) -> ImageRecord:
    gts = tuple(load_mask(manifest.resolve(p)) for p in ref.gts)
    preds = tuple(
        Prediction(mask=load_mask(manifest.resolve(p.path)), score=p.score)
        for p in ref.preds
    )
    return ImageRecord(id=ref.id, gts=gts, preds=preds)


def iter_records(manifest: Manifest) -> Iterator[ImageRecord]:
    """Load records one by one, in file order (memory stays bounded)."""
    for ref in manifest.records:
        yield load_record(manifest, ref)


def load_manifest(path: str | os.PathLike) -> tuple[Manifest, list[ImageRecord]]:
    """Parse a manifest and load every record into memory."""
    manifest = parse_manifest(path)
    return manifest, list(iter_records(manifest))


def save_manifest(path: str | os.PathLike, records, root: str | None = None) -> None:
    """Write a manifest document; paths are stored exactly as given."""
    doc: dict = {}
    if root is not None:
        doc["root"] = root
    doc["images"] = [
        {
            "id": rec.id,
            "gts": list(rec.gts),
            "preds": [
                {"path": p.path} if p.score is None else {"path": p.path, "score": p.score}
                for p in rec.preds
            ],
        }
        for rec in records
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


def record_to_arrays(rec: ImageRecord) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Convenience split of a record into (gts, pred masks)."""
    return list(rec.gts), [p.mask for p in rec.preds]
