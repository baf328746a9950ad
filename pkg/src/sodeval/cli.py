"""Command-line interface.

Subcommands: eval, metrics, losses, align, gen, select. Exit codes: 0 on
success, 1 on validation failures, 2 on I/O failures. Outputs are
deterministic for fixed inputs and seeds, regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import EmptyGroundTruthError, ValidationError
from .manifest import (
    PredictionRef,
    RecordRef,
    iter_records,
    parse_manifest,
    save_manifest,
)
from .masks import binarize, load_mask
from .matching import (
    DEFAULT_TAUS,
    best_f1_point,
    curve_to_csv,
    evaluate,
    pr_curve,
    report_to_dict,
    report_to_json,
)
from .metrics import MetricConfig, e_measure_mean, f_curve, f_max, f_mean, mae, match_score, s_measure
from .losses import min_loss_select
from .preference import TIE_POLICIES, METRIC_SCORERS, alignment_accuracy, load_pairs
from .synthgen import DEGRADATION_KINDS, DEFAULT_SCHEDULE, Degradation, generate_benchmark


class _Parser(argparse.ArgumentParser):
    # usage problems are validation failures (exit 1), not argparse's exit 2
    def error(self, message):
        raise ValidationError(message)


def _emit(payload: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(payload)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(payload)


def _cmd_eval(args) -> int:
    if args.sweep and args.tau is not None:
        raise ValidationError("--sweep scans its own threshold grid; drop --tau")
    manifest = parse_manifest(args.manifest)
    cfg = MetricConfig()
    records = iter_records(manifest)
    if args.sweep:
        curve = pr_curve(records, DEFAULT_TAUS, cfg, threads=args.threads)
        best = best_f1_point(curve)
        if args.format == "csv":
            payload = curve_to_csv(curve)
        else:
            payload = json.dumps(
                {"curve": [report_to_dict(r) for r in curve], "best": report_to_dict(best)},
                indent=2,
            ) + "\n"
        _emit(payload, args.out)
        if args.out is not None:
            print(
                f"best_f1,tau={best.threshold:.4f},ap={best.ap:.4f},"
                f"ar={best.ar:.4f},f1={best.f1:.4f}"
            )
    else:
        tau = 0.0 if args.tau is None else args.tau
        report = evaluate(records, tau, cfg, threads=args.threads)
        if args.format == "csv":
            payload = "tau,ap,ar,f1\n" + (
                f"{report.threshold:.4f},{report.ap:.4f},{report.ar:.4f},{report.f1:.4f}\n"
            )
        else:
            payload = report_to_json(report)
        _emit(payload, args.out)
    return 0


def _cmd_metrics(args) -> int:
    pred = load_mask(args.pred)
    gt = load_mask(args.gt)
    cfg = MetricConfig()
    gt_bin = binarize(gt, 0.5)
    try:
        curve = f_curve(pred, gt_bin, cfg)
        fmax, favg = f_max(curve), f_mean(curve)
    except EmptyGroundTruthError:
        raise ValidationError(
            "ground truth has no foreground pixels; F-measures are undefined"
        ) from None
    values = {
        "f_max": fmax,
        "f_avg": favg,
        "s_measure": s_measure(pred, gt_bin, cfg),
        "e_mean": e_measure_mean(pred, gt_bin, cfg),
        "mae": mae(pred, gt),
        "match": match_score(pred, gt, cfg),
    }
    if args.format == "csv":
        payload = ",".join(values) + "\n" + ",".join(f"{v:.4f}" for v in values.values()) + "\n"
    else:
        payload = json.dumps(values, indent=2) + "\n"
    _emit(payload, args.out)
    return 0


def _cmd_losses(args) -> int:
    preds = [load_mask(p) for p in args.preds]
    gts = [load_mask(p) for p in args.gts]
    selection = min_loss_select(preds, gts)
    header = "pred \\ gt " + "".join(f"{f'gt{j}':>10}" for j in range(len(gts)))
    print(header)
    for k, row in enumerate(selection.table):
        print(f"{f'pred{k}':<10}" + "".join(f"{cell.total:>10.4f}" for cell in row))
    best = selection.loss
    print(
        f"selected: pred {selection.pred_index}, gt {selection.gt_index} "
        f"(ce {best.ce:.4f}, dice {best.dice:.4f}, total {best.total:.4f})"
    )
    return 0


def _cmd_align(args) -> int:
    pairs = load_pairs(args.pairs, metric=args.metric)
    print(f"{alignment_accuracy(pairs, args.tie_policy):.4f}")
    return 0


def _parse_schedule(text: str) -> tuple[Degradation, ...]:
    if not text.strip():
        return ()
    entries = []
    for chunk in text.split(","):
        kind, sep, severity = chunk.partition(":")
        if not sep:
            raise ValidationError(f"degradation {chunk!r} must look like kind:severity")
        try:
            entries.append(Degradation(kind.strip(), int(severity)))
        except ValueError as exc:
            raise ValidationError(f"bad degradation {chunk!r}: {exc}") from exc
    return tuple(entries)


def _cmd_gen(args) -> int:
    schedule = DEFAULT_SCHEDULE if args.degradations is None else _parse_schedule(args.degradations)
    generate_benchmark(
        args.out,
        n_images=args.n,
        n_objects=args.objects,
        schedule=schedule,
        seed=args.seed,
        threads=args.threads,
    )
    manifest_path = Path(args.out) / "manifest.json"
    print(manifest_path)
    return 0


def _cmd_select(args) -> int:
    manifests = [parse_manifest(p) for p in args.manifests]
    first = manifests[0]
    ids = [rec.id for rec in first.records]
    for m, manifest in zip(args.manifests[1:], manifests[1:]):
        if [rec.id for rec in manifest.records] != ids:
            raise ValidationError(f"manifest {m!r} lists different image ids than {args.manifests[0]!r}")

    merged: list[RecordRef] = []
    for i, rec in enumerate(first.records):
        candidates: list[PredictionRef] = []
        for manifest in manifests:
            for pred in manifest.records[i].preds:
                if pred.score is None:
                    raise ValidationError(f"record {rec.id!r}: selection requires a score on every prediction")
                candidates.append(
                    PredictionRef(path=str(manifest.resolve(pred.path)), score=pred.score)
                )
        best = max(range(len(candidates)), key=lambda c: (candidates[c].score, -c))
        merged.append(
            RecordRef(
                id=rec.id,
                gts=tuple(str(first.resolve(g)) for g in rec.gts),
                preds=(candidates[best],),
            )
        )
    save_manifest(args.out, merged)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sodeval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a manifest of multi-mask predictions")
    p.add_argument("--manifest", required=True)
    p.add_argument("--tau", type=float, default=None,
                   help="quality-score filter threshold (default 0.0; incompatible with --sweep)")
    p.add_argument("--sweep", action="store_true", help="sweep tau over 0.0..0.9 and report the best F1")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("metrics", help="single-mask metrics for one pred/gt pair")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("losses", help="pairwise mask losses and the minimum-loss pair")
    p.add_argument("--preds", nargs="+", required=True)
    p.add_argument("--gts", nargs="+", required=True)
    p.set_defaults(func=_cmd_losses)

    p = sub.add_parser("align", help="pairwise preference alignment accuracy")
    p.add_argument("--pairs", required=True)
    p.add_argument("--tie-policy", choices=TIE_POLICIES, default="half")
    p.add_argument("--metric", choices=sorted(METRIC_SCORERS), default="match",
                   help="scoring metric when pairs reference mask files")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("gen", help="generate a synthetic multi-ground-truth benchmark")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--objects", type=int, choices=(2, 3), default=2)
    p.add_argument("--degradations", default=None,
                   help=f"comma-separated kind:severity (kinds: {', '.join(DEGRADATION_KINDS)})")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("select", help="keep the best-scored prediction per image across manifests")
    p.add_argument("--manifests", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
