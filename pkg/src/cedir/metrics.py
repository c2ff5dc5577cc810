"""Counting and localization metrics.

Predictions and ground truths are matched one-to-one by minimum total
Euclidean distance (linear sum assignment); a matched pair counts as a true
positive only when its distance is strictly below tau. Precision, recall
and F1 are averaged per image; on images where a ratio is 0/0 it counts
as 1 (an empty image predicted empty is correct).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import hungarian_assign
from .fields import PointSet
from .localizer import Detection

DEFAULT_TAUS = (5.0, 15.0, 20.0, 30.0, 40.0)


class MetricsError(ValueError):
    pass


@dataclass
class MatchResult:
    tau: float
    tp_pairs: list[tuple[int, int, float]] = field(default_factory=list)
    fp_indices: list[int] = field(default_factory=list)
    fn_indices: list[int] = field(default_factory=list)

    @property
    def tp(self) -> int:
        return len(self.tp_pairs)

    @property
    def fp(self) -> int:
        return len(self.fp_indices)

    @property
    def fn(self) -> int:
        return len(self.fn_indices)


@dataclass
class MetricsReport:
    n_images: int
    mae: float
    rmse: float
    per_tau: dict[float, tuple[float, float, float]]  # tau -> (prec, recall, f1)

    def to_dict(self) -> dict:
        def tau_key(t: float) -> str:
            return str(int(t)) if float(t).is_integer() else repr(float(t))

        return {
            "n_images": self.n_images,
            "mae": self.mae,
            "rmse": self.rmse,
            "per_tau": {
                tau_key(t): {"precision": p, "recall": r, "f1": f}
                for t, (p, r, f) in self.per_tau.items()
            },
        }


def match_at_tau(preds: PointSet, gts: PointSet, tau: float) -> MatchResult:
    """Match predictions to ground truths and classify TP/FP/FN at tau.

    The assignment minimizes total distance over all pairs; assigned pairs
    at distance >= tau dissolve into one FP plus one FN.
    """
    if tau <= 0:
        raise MetricsError("tau must be positive")
    p, g = preds.points, gts.points
    result = MatchResult(tau=float(tau))
    if len(p) == 0 or len(g) == 0:
        result.fp_indices = list(range(len(p)))
        result.fn_indices = list(range(len(g)))
        return result
    diff = p[:, None, :] - g[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    pairs = hungarian_assign(dist)
    matched_p, matched_g = set(), set()
    for i, j in pairs:
        d = float(dist[i, j])
        if d < tau:
            result.tp_pairs.append((i, j, d))
            matched_p.add(i)
            matched_g.add(j)
    result.fp_indices = [i for i in range(len(p)) if i not in matched_p]
    result.fn_indices = [j for j in range(len(g)) if j not in matched_g]
    return result


def image_metrics(match: MatchResult) -> tuple[float, float, float]:
    """(precision, recall, f1) for one image, 0/0 ratios counting as 1."""
    tp, fp, fn = match.tp, match.fp, match.fn
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 1.0
    return precision, recall, f1


def count_errors(gt_counts, pred_counts) -> tuple[float, float]:
    """(MAE, RMSE) between per-image ground-truth and predicted counts."""
    gt = np.asarray(gt_counts, dtype=np.float64)
    pred = np.asarray(pred_counts, dtype=np.float64)
    if gt.shape != pred.shape:
        raise MetricsError("count lists must have equal length")
    if gt.size == 0:
        raise MetricsError("count lists must be non-empty")
    err = gt - pred
    return float(np.mean(np.abs(err))), float(np.sqrt(np.mean(err * err)))


def _as_pointset(points: np.ndarray) -> PointSet:
    """Point set for matching only; bounds are inferred, not meaningful."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.size == 0:
        return PointSet(1, 1, pts)
    h = int(np.floor(pts[:, 0].max())) + 1
    w = int(np.floor(pts[:, 1].max())) + 1
    return PointSet(max(1, h), max(1, w), pts)


def evaluate_detections(preds_by_image: dict[str, list[Detection]],
                        gts_by_image: dict[str, np.ndarray],
                        taus=DEFAULT_TAUS) -> MetricsReport:
    """Aggregate counting and localization metrics over a set of images.

    Images are the union of both id sets, in sorted order; an id missing on
    one side contributes an empty point list there.
    """
    ids = sorted(set(preds_by_image) | set(gts_by_image))
    if not ids:
        raise MetricsError("no images to evaluate")
    gt_counts, pred_counts = [], []
    per_tau: dict[float, list[tuple[float, float, float]]] = {float(t): [] for t in taus}
    for image_id in ids:
        dets = preds_by_image.get(image_id, [])
        pred_pts = np.asarray([(d.row, d.col) for d in dets], dtype=np.float64)
        gt_pts = np.asarray(gts_by_image.get(image_id, np.zeros((0, 2))), dtype=np.float64)
        gt_counts.append(len(gt_pts))
        pred_counts.append(len(pred_pts))
        pset, gset = _as_pointset(pred_pts), _as_pointset(gt_pts)
        for t in per_tau:
            per_tau[t].append(image_metrics(match_at_tau(pset, gset, t)))
    mae, rmse = count_errors(gt_counts, pred_counts)
    summary = {
        t: tuple(float(np.mean([m[k] for m in triples])) for k in range(3))
        for t, triples in per_tau.items()
    }
    return MetricsReport(len(ids), mae, rmse, summary)


def threshold_sweep(preds_by_image: dict[str, list[Detection]],
                    gts_by_image: dict[str, np.ndarray],
                    tau: float) -> tuple[float, float]:
    """Best detection-score threshold by mean F1 at the given tau.

    Every distinct detection score is tried as a threshold (detections kept
    when score >= threshold), plus one threshold above the maximum score
    (keeping nothing). Ties prefer the higher threshold, then the lower MAE.
    Returns (best_threshold, best_f1).
    """
    scores = sorted({d.score for dets in preds_by_image.values() for d in dets})
    if not scores:
        raise MetricsError("no detections to sweep")
    candidates = scores + [scores[-1] + 1.0]
    best = None
    for theta in candidates:
        kept = {img: [d for d in dets if d.score >= theta]
                for img, dets in preds_by_image.items()}
        report = evaluate_detections(kept, gts_by_image, taus=(tau,))
        f1 = report.per_tau[float(tau)][2]
        key = (f1, theta, -report.mae)
        if best is None or key > best[0]:
            best = (key, theta, f1)
    return best[1], best[2]
