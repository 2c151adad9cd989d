"""Detection-quality metrics: precision, recall, F1, AP, mAP, confusion matrix.

Matching is class-wise and greedy in descending confidence: each prediction
takes the unmatched ground truth with the highest IoU at or above the
threshold. AP integrates the monotone precision envelope at 101 evenly
spaced recall points; mAP averages over the classes that actually appear in
the ground truth. mAP@0.5:0.95 averages over IoU thresholds 0.50 to 0.95 in
steps of 0.05. Degenerate ratios (0/0) are defined as 0 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import ClassLabel, PixelBox, Timeline, iou, to_pixels

__all__ = [
    "BoxRecord",
    "MatchResult",
    "F1Sweep",
    "ConfusionMatrix",
    "ClassMetrics",
    "EvalReport",
    "MAP_IOU_THRESHOLDS",
    "match",
    "precision_recall_f1",
    "average_precision",
    "mean_ap",
    "map_range",
    "f1_sweep",
    "confusion_matrix",
    "evaluate",
    "records_from_timeline",
]

MAP_IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
_RECALL_SAMPLES = np.linspace(0.0, 1.0, 101)
_BACKGROUND = len(ClassLabel)


@dataclass(frozen=True)
class BoxRecord:
    """One predicted or ground-truth box, keyed by image (clip stem + frame)."""

    image: str | int
    label: ClassLabel
    box: PixelBox
    confidence: float = 1.0


def records_from_timeline(
    timeline: Timeline, prefix: str | None = None
) -> list[BoxRecord]:
    """Flatten a Timeline into evaluation records, boxes in pixel space."""
    geom = timeline.geometry
    records = []
    for det in timeline.all_detections():
        image = det.frame if prefix is None else f"{prefix}:{det.frame}"
        records.append(BoxRecord(image, det.label, to_pixels(det.box, geom), det.confidence))
    return records


@dataclass
class MatchResult:
    """Outcome of matching one image's predictions of one class to its ground truths."""

    pred_matched_gt: list[int | None]
    gt_matched_pred: list[int | None]

    @property
    def tp(self) -> int:
        return sum(1 for g in self.pred_matched_gt if g is not None)

    @property
    def fp(self) -> int:
        return sum(1 for g in self.pred_matched_gt if g is None)

    @property
    def fn(self) -> int:
        return sum(1 for p in self.gt_matched_pred if p is None)


def match(
    pred_boxes: Sequence[PixelBox],
    confidences: Sequence[float],
    gt_boxes: Sequence[PixelBox],
    iou_threshold: float,
) -> MatchResult:
    """Greedy confidence-ordered matching for one image and one class.

    Predictions are visited in descending confidence (stable on ties); each
    takes the unmatched ground truth with the highest IoU >= threshold, the
    lowest index winning IoU ties.
    """
    order = sorted(range(len(pred_boxes)), key=lambda i: -confidences[i])
    pred_matched: list[int | None] = [None] * len(pred_boxes)
    gt_matched: list[int | None] = [None] * len(gt_boxes)
    for i in order:
        best_j = None
        best_iou = 0.0
        for j, gt in enumerate(gt_boxes):
            if gt_matched[j] is not None:
                continue
            overlap = iou(pred_boxes[i], gt)
            if overlap >= iou_threshold and overlap > best_iou:
                best_j, best_iou = j, overlap
        if best_j is not None:
            pred_matched[i] = best_j
            gt_matched[best_j] = i
    return MatchResult(pred_matched, gt_matched)


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall and F1 from counts; 0/0 ratios are 0 by convention."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _group_by_image(records: Sequence[BoxRecord]) -> dict[str | int, list[BoxRecord]]:
    groups: dict[str | int, list[BoxRecord]] = {}
    for rec in records:
        groups.setdefault(rec.image, []).append(rec)
    return groups


def _tag_class_predictions(
    preds: Sequence[BoxRecord],
    gts_by_image: Mapping[str | int, list[BoxRecord]],
    iou_threshold: float,
) -> tuple[list[BoxRecord], np.ndarray]:
    """Sort one class's predictions by descending confidence and tag TP/FP."""
    ordered = sorted(preds, key=lambda r: -r.confidence)
    taken: dict[str | int, list[bool]] = {
        image: [False] * len(gts) for image, gts in gts_by_image.items()
    }
    tags = np.zeros(len(ordered), dtype=bool)
    for i, pred in enumerate(ordered):
        gts = gts_by_image.get(pred.image, [])
        flags = taken.get(pred.image, [])
        best_j = None
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if flags[j]:
                continue
            overlap = iou(pred.box, gt.box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_j, best_iou = j, overlap
        if best_j is not None:
            flags[best_j] = True
            tags[i] = True
    return ordered, tags


def average_precision(
    preds: Sequence[BoxRecord],
    gts: Sequence[BoxRecord],
    iou_threshold: float,
) -> float | None:
    """101-point interpolated AP for one class across the dataset.

    None when the class has no ground truth (undefined); 0.0 when it has
    ground truth but no predictions.
    """
    if not gts:
        return None
    if not preds:
        return 0.0
    _, tags = _tag_class_predictions(preds, _group_by_image(gts), iou_threshold)
    tp = np.cumsum(tags)
    fp = np.cumsum(~tags)
    precision = tp / (tp + fp)
    recall = tp / len(gts)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, _RECALL_SAMPLES, side="left")
    sampled = np.where(idx < len(envelope), envelope[np.minimum(idx, len(envelope) - 1)], 0.0)
    return float(sampled.mean())


def mean_ap(class_aps: Mapping[ClassLabel, float | None]) -> float | None:
    """Mean AP over classes that have a defined AP; None when none do."""
    defined = [ap for ap in class_aps.values() if ap is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def _split_by_class(
    records: Sequence[BoxRecord],
) -> dict[ClassLabel, list[BoxRecord]]:
    split: dict[ClassLabel, list[BoxRecord]] = {label: [] for label in ClassLabel}
    for rec in records:
        split[rec.label].append(rec)
    return split


def map_range(
    preds: Sequence[BoxRecord],
    gts: Sequence[BoxRecord],
    iou_thresholds: Sequence[float] = MAP_IOU_THRESHOLDS,
) -> float | None:
    """Mean AP over classes and a range of IoU thresholds (mAP@0.5:0.95)."""
    preds_by_class = _split_by_class(preds)
    gts_by_class = _split_by_class(gts)
    per_threshold = []
    for threshold in iou_thresholds:
        aps = {
            label: average_precision(preds_by_class[label], gts_by_class[label], threshold)
            for label in ClassLabel
        }
        per_threshold.append(mean_ap(aps))
    defined = [m for m in per_threshold if m is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


@dataclass(frozen=True)
class F1Sweep:
    """Best F1 over confidence cuts plus the cheapest cut with perfect precision."""

    max_f1: float
    max_f1_confidence: float | None
    full_precision_confidence: float | None


def f1_sweep(
    preds: Sequence[BoxRecord],
    gts: Sequence[BoxRecord],
    iou_threshold: float,
) -> F1Sweep:
    """Evaluate P/R/F1 at every distinct confidence cut over pooled classes.

    Reports the maximum F1 (lowest threshold on ties) and the lowest
    threshold at which precision reaches 1.0, if any.
    """
    preds_by_class = _split_by_class(preds)
    gts_by_class = _split_by_class(gts)
    tagged: list[tuple[float, bool]] = []
    for label in ClassLabel:
        ordered, tags = _tag_class_predictions(
            preds_by_class[label], _group_by_image(gts_by_class[label]), iou_threshold
        )
        tagged.extend((rec.confidence, bool(tag)) for rec, tag in zip(ordered, tags))
    total_gts = len(gts)
    if not tagged:
        return F1Sweep(0.0, None, None)
    tagged.sort(key=lambda pair: -pair[0])
    cuts = sorted({conf for conf, _ in tagged}, reverse=True)
    best_f1 = 0.0
    best_conf: float | None = None
    full_precision: float | None = None
    tp = fp = 0
    i = 0
    for cut in cuts:
        while i < len(tagged) and tagged[i][0] >= cut:
            if tagged[i][1]:
                tp += 1
            else:
                fp += 1
            i += 1
        precision, _, f1 = precision_recall_f1(tp, fp, total_gts - tp)
        if best_conf is None or f1 >= best_f1:
            best_f1, best_conf = f1, cut
        if precision == 1.0:
            full_precision = cut
    return F1Sweep(best_f1, best_conf, full_precision)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-normalised confusion over the classes plus a background bucket.

    Rows are predicted classes, columns ground-truth classes; each column
    sums to 1 unless that class never appears. ``counts`` keeps the raw
    tallies.
    """

    order: tuple[str, ...]
    counts: np.ndarray
    normalized: np.ndarray

    def __eq__(self, other: object) -> bool:  # ndarray fields need explicit eq
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return (
            self.order == other.order
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.normalized, other.normalized)
        )


def confusion_matrix(
    preds: Sequence[BoxRecord],
    gts: Sequence[BoxRecord],
    confidence_threshold: float,
    iou_threshold: float,
) -> ConfusionMatrix:
    """Cross-class confusion with a background row and column.

    Predictions below the confidence threshold are dropped. Within each
    image, candidate pairs at IoU >= threshold are matched greedily by
    descending IoU regardless of class. Unmatched predictions land in the
    background column, unmatched ground truths in the background row.
    """
    kept = [p for p in preds if p.confidence >= confidence_threshold]
    n = len(ClassLabel)
    counts = np.zeros((n + 1, n + 1), dtype=float)
    preds_by_image = _group_by_image(kept)
    gts_by_image = _group_by_image(gts)
    for image in sorted(set(preds_by_image) | set(gts_by_image), key=str):
        ipreds = preds_by_image.get(image, [])
        igts = gts_by_image.get(image, [])
        pairs = []
        for pi, pred in enumerate(ipreds):
            for gi, gt in enumerate(igts):
                overlap = iou(pred.box, gt.box)
                if overlap >= iou_threshold:
                    pairs.append((-overlap, pi, gi))
        pairs.sort()
        matched_p: set[int] = set()
        matched_g: set[int] = set()
        for _, pi, gi in pairs:
            if pi in matched_p or gi in matched_g:
                continue
            matched_p.add(pi)
            matched_g.add(gi)
            counts[int(ipreds[pi].label), int(igts[gi].label)] += 1
        for pi, pred in enumerate(ipreds):
            if pi not in matched_p:
                counts[int(pred.label), _BACKGROUND] += 1
        for gi, gt in enumerate(igts):
            if gi not in matched_g:
                counts[_BACKGROUND, int(gt.label)] += 1
    col_sums = counts.sum(axis=0)
    normalized = np.divide(
        counts, col_sums, out=np.zeros_like(counts), where=col_sums > 0
    )
    order = tuple(label.display_name for label in ClassLabel) + ("background",)
    return ConfusionMatrix(order=order, counts=counts, normalized=normalized)


@dataclass(frozen=True)
class ClassMetrics:
    label: ClassLabel
    ground_truths: int
    predictions: int
    precision: float
    recall: float
    f1: float
    ap_50: float | None
    ap_range: float | None


@dataclass(frozen=True)
class EvalReport:
    """Full evaluation: per-class metrics, aggregates and the confusion matrix."""

    iou_threshold: float
    confusion_confidence: float
    per_class: dict[ClassLabel, ClassMetrics]
    map_50: float | None
    map_range: float | None
    max_f1: float
    max_f1_confidence: float | None
    full_precision_confidence: float | None
    confusion: ConfusionMatrix

    def to_json_dict(self) -> dict:
        return {
            "settings": {
                "iou_threshold": self.iou_threshold,
                "confusion_confidence_threshold": self.confusion_confidence,
                "map_iou_thresholds": list(MAP_IOU_THRESHOLDS),
            },
            "classes": {
                metrics.label.display_name: {
                    "ground_truths": metrics.ground_truths,
                    "predictions": metrics.predictions,
                    "precision": metrics.precision,
                    "recall": metrics.recall,
                    "f1": metrics.f1,
                    "ap_50": metrics.ap_50,
                    "ap_50_95": metrics.ap_range,
                }
                for metrics in self.per_class.values()
            },
            "map_50": self.map_50,
            "map_50_95": self.map_range,
            "max_f1": self.max_f1,
            "max_f1_confidence": self.max_f1_confidence,
            "precision_at_full_confidence": self.full_precision_confidence,
            "confusion_matrix": {
                "order": list(self.confusion.order),
                "columns_are_ground_truth": True,
                "normalized": [[float(v) for v in row] for row in self.confusion.normalized],
                "counts": [[float(v) for v in row] for row in self.confusion.counts],
            },
        }

    def to_table(self) -> str:
        def fmt(value: float | None) -> str:
            return "–" if value is None else f"{value:.3f}"

        rows = [f"{'Class':<15} {'P':>7} {'R':>7} {'F1':>7} {'mAP@0.5':>9} {'mAP@0.5:0.95':>13}"]
        for metrics in self.per_class.values():
            rows.append(
                f"{metrics.label.display_name:<15} {metrics.precision:>7.3f}"
                f" {metrics.recall:>7.3f} {metrics.f1:>7.3f}"
                f" {fmt(metrics.ap_50):>9} {fmt(metrics.ap_range):>13}"
            )
        with_gt = [m for m in self.per_class.values() if m.ground_truths > 0]
        if with_gt:
            mp = sum(m.precision for m in with_gt) / len(with_gt)
            mr = sum(m.recall for m in with_gt) / len(with_gt)
            mf = sum(m.f1 for m in with_gt) / len(with_gt)
            rows.append(
                f"{'All':<15} {mp:>7.3f} {mr:>7.3f} {mf:>7.3f}"
                f" {fmt(self.map_50):>9} {fmt(self.map_range):>13}"
            )
        rows.append("")
        rows.append(f"{'Metric':<20} {'Peak':>7} {'Confidence':>12}")
        rows.append(
            f"{'Max F1':<20} {self.max_f1:>7.3f} {fmt(self.max_f1_confidence):>12}"
        )
        peak = "–" if self.full_precision_confidence is None else f"{1.0:.3f}"
        rows.append(
            f"{'Precision at 100%':<20} {peak:>7} {fmt(self.full_precision_confidence):>12}"
        )
        return "\n".join(rows) + "\n"


def evaluate(
    preds: Sequence[BoxRecord],
    gts: Sequence[BoxRecord],
    iou_threshold: float = 0.5,
    confusion_confidence: float = 0.25,
) -> EvalReport:
    """Evaluate a prediction set against ground truth at one IoU threshold.

    Per-class precision/recall/F1 use all predictions (no confidence cut);
    threshold-swept figures are reported separately by the F1 sweep.
    """
    preds_by_class = _split_by_class(preds)
    gts_by_class = _split_by_class(gts)
    per_class: dict[ClassLabel, ClassMetrics] = {}
    ap50: dict[ClassLabel, float | None] = {}
    for label in ClassLabel:
        cls_preds = preds_by_class[label]
        cls_gts = gts_by_class[label]
        _, tags = _tag_class_predictions(cls_preds, _group_by_image(cls_gts), iou_threshold)
        tp = int(tags.sum())
        precision, recall, f1 = precision_recall_f1(tp, len(cls_preds) - tp, len(cls_gts) - tp)
        ap50[label] = average_precision(cls_preds, cls_gts, 0.5)
        ap_range_values = [
            average_precision(cls_preds, cls_gts, threshold) for threshold in MAP_IOU_THRESHOLDS
        ]
        defined = [v for v in ap_range_values if v is not None]
        per_class[label] = ClassMetrics(
            label=label,
            ground_truths=len(cls_gts),
            predictions=len(cls_preds),
            precision=precision,
            recall=recall,
            f1=f1,
            ap_50=ap50[label],
            ap_range=sum(defined) / len(defined) if defined else None,
        )
    sweep = f1_sweep(preds, gts, iou_threshold)
    return EvalReport(
        iou_threshold=iou_threshold,
        confusion_confidence=confusion_confidence,
        per_class=per_class,
        map_50=mean_ap(ap50),
        map_range=map_range(preds, gts),
        max_f1=sweep.max_f1,
        max_f1_confidence=sweep.max_f1_confidence,
        full_precision_confidence=sweep.full_precision_confidence,
        confusion=confusion_matrix(preds, gts, confusion_confidence, iou_threshold),
    )
