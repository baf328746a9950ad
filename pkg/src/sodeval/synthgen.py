"""Deterministic synthetic multi-ground-truth benchmarks.

Scenes contain 2 or 3 non-overlapping shapes; the ground-truth set enumerates
plausible "which objects are salient" readings (single objects, the largest
pair, the full union). Predictions are near-perfect copies of each ground
truth plus controlled degradations, each carrying an oracle quality score
(its match score against the source ground truth), so filtering and sweep
behavior is analytically predictable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ValidationError
from .manifest import Manifest, PredictionRef, RecordRef, save_manifest
from .masks import Mask, save_mask
from .matching import _ordered_map, resolve_threads
from .metrics import DEFAULT_CONFIG, MetricConfig, match_score
from .preference import CandidatePair

SHAPE_KINDS = ("disk", "rectangle", "ring")
DEGRADATION_KINDS = ("erode", "dilate", "holes", "gray_wash", "drop_component")

# 4-neighborhood structuring element, for exact pixel-count reasoning
_CROSS = ndimage.generate_binary_structure(2, 1)

_PLACEMENT_ATTEMPTS = 100
_MIN_AREA_FRAC = 0.01


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    n_objects: int
    shapes: tuple[str, ...]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "shapes", tuple(self.shapes))
        if self.width < 8 or self.height < 8:
            raise ValidationError("scene must be at least 8 x 8 pixels")
        if self.n_objects not in (2, 3):
            raise ValidationError(f"n_objects must be 2 or 3, got {self.n_objects}")
        if len(self.shapes) != self.n_objects:
            raise ValidationError("one shape kind is required per object")
        for s in self.shapes:
            if s not in SHAPE_KINDS:
                raise ValidationError(f"unknown shape {s!r}; choose from {SHAPE_KINDS}")


@dataclass(frozen=True)
class Degradation:
    kind: str
    severity: int

    def __post_init__(self):
        if self.kind not in DEGRADATION_KINDS:
            raise ValidationError(f"unknown degradation {self.kind!r}; choose from {DEGRADATION_KINDS}")
        if self.severity < 0:
            raise ValidationError(f"severity must be >= 0, got {self.severity}")


DEFAULT_SCHEDULE: tuple[Degradation, ...] = (
    Degradation("erode", 8),
    Degradation("dilate", 12),
)


# ---------------------------------------------------------------------------
# Scene construction


def _rasterize(kind: str, h: int, w: int, rng: np.random.Generator, min_area: int) -> np.ndarray | None:
    yy, xx = np.ogrid[:h, :w]
    if kind == "disk":
        r_min = max(1, math.ceil(math.sqrt(min_area / math.pi)))
        r_max = max(r_min, min(h, w) // 4)
        r = int(rng.integers(r_min, r_max + 1))
        if h - 2 - r < r + 1 or w - 2 - r < r + 1:
            return None
        cy = int(rng.integers(r + 1, h - 1 - r))
        cx = int(rng.integers(r + 1, w - 1 - r))
        shape = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    elif kind == "rectangle":
        area = min_area * rng.uniform(1.0, 3.0)
        aspect = rng.uniform(0.5, 2.0)
        rh = max(2, round(math.sqrt(area / aspect)))
        rw = max(2, round(math.sqrt(area * aspect)))
        rh, rw = min(rh, h - 4), min(rw, w - 4)
        if rh < 1 or rw < 1:
            return None
        top = int(rng.integers(1, h - 1 - rh))
        left = int(rng.integers(1, w - 1 - rw))
        shape = np.zeros((h, w), dtype=bool)
        shape[top : top + rh, left : left + rw] = True
    else:  # ring
        rho = rng.uniform(0.35, 0.6)
        r_min = max(2, math.ceil(math.sqrt(min_area / (math.pi * (1.0 - rho * rho)))))
        r_max = max(r_min, min(h, w) // 4)
        r = int(rng.integers(r_min, r_max + 1))
        if h - 2 - r < r + 1 or w - 2 - r < r + 1:
            return None
        cy = int(rng.integers(r + 1, h - 1 - r))
        cx = int(rng.integers(r + 1, w - 1 - r))
        inner = max(1, math.floor(r * rho))
        d2 = (yy - cy) ** 2 + (xx - cx) ** 2
        shape = (d2 <= r * r) & (d2 > inner * inner)
    if int(shape.sum()) < min_area:
        return None
    return shape


def generate_scene(spec: SceneSpec, cap_gts: bool = True) -> tuple[list[Mask], list[Mask]]:
    """Place the scene's objects and derive its ground-truth set.

    Two objects yield [obj0, obj1, union]. Three objects yield the full
    family [each object, largest pair, union]; with the default cap of three
    ground truths this collapses to [largest object, largest pair, union].
    Deterministic in spec.seed; objects keep a >= 2 px margin from each other
    and each covers at least 1% of the image.
    """
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    min_area = math.ceil(_MIN_AREA_FRAC * h * w)
    objects: list[np.ndarray] = []
    occupied = np.zeros((h, w), dtype=bool)
    for kind in spec.shapes:
        placed = None
        for _ in range(_PLACEMENT_ATTEMPTS):
            candidate = _rasterize(kind, h, w, rng, min_area)
            if candidate is None:
                continue
            padded = ndimage.binary_dilation(candidate, structure=_CROSS, iterations=2)
            if not (padded & occupied).any():
                placed = candidate
                break
        if placed is None:
            raise ValidationError(
                f"could not place a {kind!r} of >= {min_area} px in a "
                f"{w}x{h} scene after {_PLACEMENT_ATTEMPTS} attempts"
            )
        objects.append(placed)
        occupied |= placed

    masks = [o.astype(np.float64) for o in objects]
    union = np.maximum.reduce(masks)
    if spec.n_objects == 2:
        gts = [masks[0], masks[1], union]
    else:
        by_area = sorted(range(3), key=lambda i: (-objects[i].sum(), i))
        largest_pair = np.maximum(masks[by_area[0]], masks[by_area[1]])
        if cap_gts:
            gts = [masks[by_area[0]], largest_pair, union]
        else:
            gts = masks + [largest_pair, union]
    return gts, masks


# ---------------------------------------------------------------------------
# Degradations


def _patch_stamp(mask: np.ndarray, rng: np.random.Generator, count: int, value: float) -> np.ndarray:
    out = mask.copy()
    fg_flat = np.flatnonzero(mask > 0.5)
    if fg_flat.size == 0:
        return out
    w = mask.shape[1]
    for _ in range(count):
        # centers drawn from the original foreground so that severity s draws
        # a prefix of severity s+1's draws (nested degradations)
        center = int(fg_flat[rng.integers(fg_flat.size)])
        r, c = divmod(center, w)
        out[max(0, r - 1) : r + 2, max(0, c - 1) : c + 2] = value
    return out


def degrade(mask: Mask, d: Degradation, seed: int = 0) -> Mask:
    """Apply a degradation of the given severity to a binary mask.

    Severity 0 is the identity for every kind. Degradations that cannot
    apply further (eroding an empty mask, dropping more components than
    exist) saturate instead of failing.
    """
    m = np.asarray(mask, dtype=np.float64)
    if not np.all((m == 0.0) | (m == 1.0)):
        raise ValidationError("degrade expects a binary mask")
    if d.severity == 0:
        return m.copy()
    fg = m > 0.5
    if d.kind == "erode":
        return ndimage.binary_erosion(fg, structure=_CROSS, iterations=d.severity).astype(np.float64)
    if d.kind == "dilate":
        return ndimage.binary_dilation(fg, structure=_CROSS, iterations=d.severity).astype(np.float64)
    rng = np.random.default_rng(seed)
    if d.kind == "holes":
        return _patch_stamp(m, rng, d.severity, 0.0)
    if d.kind == "gray_wash":
        return _patch_stamp(m, rng, d.severity, 0.5)
    # drop_component: remove the smallest components first
    labels, n_comp = ndimage.label(fg, structure=_CROSS)
    if n_comp == 0:
        return m.copy()
    sizes = np.bincount(labels.ravel())[1:]
    order = sorted(range(1, n_comp + 1), key=lambda lab: (sizes[lab - 1], lab))
    out = m.copy()
    for lab in order[: d.severity]:
        out[labels == lab] = 0.0
    return out


# ---------------------------------------------------------------------------
# Benchmark on disk


def generate_benchmark(
    out_dir: str | os.PathLike,
    n_images: int = 100,
    width: int = 512,
    height: int = 512,
    n_objects: int = 2,
    schedule: tuple[Degradation, ...] = DEFAULT_SCHEDULE,
    seed: int = 42,
    cap_gts: bool = True,
    cfg: MetricConfig = DEFAULT_CONFIG,
    threads: int | None = None,
) -> Manifest:
    """Write a benchmark (PNG masks + manifest.json) under `out_dir`.

    Each image gets one near-perfect prediction per ground truth plus one
    degraded prediction per schedule entry (sources cycle through the ground
    truths). Every prediction's quality score is its match score against its
    source ground truth, so score order follows construction severity.
    Same seed, same benchmark, bit for bit, regardless of thread count.
    """
    if n_images < 1:
        raise ValidationError(f"n_images must be >= 1, got {n_images}")
    out = Path(out_dir)
    (out / "gts").mkdir(parents=True, exist_ok=True)
    (out / "preds").mkdir(parents=True, exist_ok=True)

    slots = 2 + len(schedule)
    states = np.random.SeedSequence(seed).generate_state(n_images * slots, dtype=np.uint64)

    def build_image(i: int) -> RecordRef:
        image_id = f"img_{i:04d}"
        shape_rng = np.random.default_rng(int(states[i * slots]))
        shapes = tuple(shape_rng.choice(SHAPE_KINDS) for _ in range(n_objects))
        spec = SceneSpec(
            width=width, height=height, n_objects=n_objects, shapes=shapes,
            seed=int(states[i * slots + 1]),
        )
        gts, _ = generate_scene(spec, cap_gts=cap_gts)

        preds: list[tuple[np.ndarray, np.ndarray]] = [(gt.copy(), gt) for gt in gts]
        for e, deg in enumerate(schedule):
            source = gts[e % len(gts)]
            preds.append((degrade(source, deg, seed=int(states[i * slots + 2 + e])), source))

        gt_paths = []
        for j, gt in enumerate(gts):
            rel = f"gts/{image_id}_gt{j}.png"
            save_mask(gt, out / rel)
            gt_paths.append(rel)
        pred_refs = []
        for k, (pred, source) in enumerate(preds):
            rel = f"preds/{image_id}_pred{k}.png"
            save_mask(pred, out / rel)
            pred_refs.append(PredictionRef(path=rel, score=match_score(pred, source, cfg)))
        return RecordRef(id=image_id, gts=tuple(gt_paths), preds=tuple(pred_refs))

    records = _ordered_map(build_image, range(n_images), resolve_threads(threads))
    save_manifest(out / "manifest.json", records, root=".")
    return Manifest(root=out, records=tuple(records))


# ---------------------------------------------------------------------------
# Ordered degradation pairs (preference-protocol fixtures)


def degradation_alignment_pairs(
    n_scenes: int = 4,
    width: int = 128,
    height: int = 128,
    kinds: tuple[str, ...] = ("erode", "dilate"),
    severity_steps: tuple[tuple[int, int], ...] = ((0, 2), (1, 3), (2, 4)),
    seed: int = 7,
) -> list[CandidatePair]:
    """Candidate-mask pairs whose quality order is known by construction: for
    each scene and degradation kind, the lighter degradation (labeled 'A')
    beats the heavier one. Feed to `score_pairs_with_metric` to check how
    well a metric recovers the construction order."""
    pairs: list[CandidatePair] = []
    states = np.random.SeedSequence(seed).generate_state(n_scenes, dtype=np.uint64)
    for s in range(n_scenes):
        spec = SceneSpec(
            width=width, height=height, n_objects=2,
            shapes=("disk", "rectangle"), seed=int(states[s]),
        )
        gts, _ = generate_scene(spec)
        gt = gts[2]  # union: the largest, most stable target
        for kind in kinds:
            for lo, hi in severity_steps:
                pairs.append(
                    CandidatePair(
                        id=f"scene{s}_{kind}_{lo}v{hi}",
                        mask_a=degrade(gt, Degradation(kind, lo), seed=int(states[s])),
                        mask_b=degrade(gt, Degradation(kind, hi), seed=int(states[s])),
                        gt=gt,
                        label="A",
                    )
                )
    return pairs
