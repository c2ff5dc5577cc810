"""Loss kernels for direction regression and center localization.

All loss math runs in double precision regardless of how the fields are
stored. Gradients are analytic (L1 subgradient at 0 is taken as 0) and are
verified against central finite differences by `finite_difference_check`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DirectionField, PointSet, ScoreMap, WeightMap, nearest_center

DEFAULT_SIGMA = 2.5
DEFAULT_XI = 1.0
DEFAULT_W_FG = 50.0
FOCAL_EPS = 1e-6

LOSS_KINDS = ("regression", "localization_l1", "focal")


class LossError(ValueError):
    """Invalid loss inputs (shape mismatch, non-finite values)."""


@dataclass
class LossResult:
    value: float
    grad: np.ndarray  # (2, H, W) for direction fields, (H, W) for score maps


@dataclass
class FocalParams:
    w_cent: float = 1.0
    amp: float = 1.0 / 16.0  # A
    delta: float = 4.0
    gamma: float = 5.0


def regression_loss(pred: DirectionField, gt: DirectionField, weights: WeightMap) -> LossResult:
    """Weighted per-pixel L1 distance over both direction channels.

    value = sum w*|pred_sin - gt_sin| + sum w*|pred_cos - gt_cos|
    grad per channel = w * sign(pred - gt)
    """
    if pred.sin_plane.shape != gt.sin_plane.shape or pred.sin_plane.shape != weights.w.shape:
        raise LossError("prediction, target and weights must share one shape")
    w = np.asarray(weights.w, dtype=np.float64)
    d_sin = pred.sin_plane.astype(np.float64) - gt.sin_plane.astype(np.float64)
    d_cos = pred.cos_plane.astype(np.float64) - gt.cos_plane.astype(np.float64)
    value = float(np.sum(w * np.abs(d_sin)) + np.sum(w * np.abs(d_cos)))
    grad = np.stack([w * np.sign(d_sin), w * np.sign(d_cos)])
    return LossResult(value, grad)


def localization_target(points: PointSet, sigma: float = DEFAULT_SIGMA,
                        xi: float = DEFAULT_XI) -> ScoreMap:
    """Localization training target: clamped Gaussian of center distance.

    O(x) = min(1, exp(-(d(x) - xi) / (2 sigma^2))) with d the distance to the
    nearest center, so every pixel within xi of a center is exactly 1.
    """
    if sigma <= 0:
        raise LossError("sigma must be positive")
    _, dist = nearest_center(points)  # raises "no centers" on empty input
    return ScoreMap(np.minimum(1.0, np.exp(-(dist - xi) / (2.0 * sigma * sigma))))


def localization_l1_loss(pred: ScoreMap, target: ScoreMap,
                         w_fg: float = DEFAULT_W_FG) -> LossResult:
    """Mean L1 distance with non-background pixels up-weighted by w_fg.

    A pixel counts as non-background whenever its target value is > 0.
    """
    if pred.values.shape != target.values.shape:
        raise LossError("prediction and target shapes differ")
    p = pred.values.astype(np.float64)
    t = target.values.astype(np.float64)
    n = p.size
    w = np.where(t > 0.0, float(w_fg), 1.0)
    diff = p - t
    value = float(np.sum(w * np.abs(diff)) / n)
    grad = w * np.sign(diff) / n
    return LossResult(value, grad)


def focal_loss(pred: ScoreMap, target: ScoreMap,
               params: FocalParams | None = None) -> LossResult:
    """Focal-loss variant of the localization loss.

    Predictions are clamped to [FOCAL_EPS, 1 - FOCAL_EPS] before evaluation;
    the positive branch fires on target == 1 exactly (the target construction
    produces exact ones via its min clamp). The returned gradient is zero at
    coordinates whose raw prediction lies outside the clamp interval.
    """
    if params is None:
        params = FocalParams()
    if pred.values.shape != target.values.shape:
        raise LossError("prediction and target shapes differ")
    p_raw = pred.values.astype(np.float64)
    t = target.values.astype(np.float64)
    if not (np.all(np.isfinite(p_raw)) and np.all(np.isfinite(t))):
        raise LossError("focal loss inputs must be finite")
    lo, hi = FOCAL_EPS, 1.0 - FOCAL_EPS
    p = np.clip(p_raw, lo, hi)
    n = p.size
    pos = t == 1.0

    one_m_p = 1.0 - p
    log_p = np.log(p)
    log_1mp = np.log1p(-p)
    g = params.gamma

    pos_term = one_m_p ** g * log_p
    neg_term = params.amp * (1.0 - t) ** params.delta * p ** g * log_1mp
    total = np.where(pos, pos_term, neg_term)
    value = float(-params.w_cent / n * np.sum(total))

    d_pos = -g * one_m_p ** (g - 1.0) * log_p + one_m_p ** g / p
    d_neg = params.amp * (1.0 - t) ** params.delta * (
        g * p ** (g - 1.0) * log_1mp - p ** g / one_m_p)
    grad = -params.w_cent / n * np.where(pos, d_pos, d_neg)
    grad[(p_raw < lo) | (p_raw > hi)] = 0.0  # clamp is flat outside
    return LossResult(value, grad)


@dataclass
class LossInstance:
    """One concrete loss evaluation: a prediction plus its fixed context."""

    kind: str
    pred: np.ndarray          # (2, H, W) for regression, (H, W) otherwise
    target: np.ndarray        # same layout as pred
    weights: np.ndarray | None = None  # regression only
    w_fg: float = DEFAULT_W_FG
    params: FocalParams | None = None

    def evaluate(self, pred: np.ndarray | None = None) -> LossResult:
        p = self.pred if pred is None else pred
        if self.kind == "regression":
            return regression_loss(DirectionField(p[0], p[1]),
                                   DirectionField(self.target[0], self.target[1]),
                                   WeightMap(self.weights))
        if self.kind == "localization_l1":
            return localization_l1_loss(ScoreMap(p), ScoreMap(self.target), self.w_fg)
        if self.kind == "focal":
            return focal_loss(ScoreMap(p), ScoreMap(self.target), self.params)
        raise LossError(f"unknown loss kind: {self.kind}")


def random_instance(kind: str, seed: int, shape: tuple[int, int] = (8, 8)) -> LossInstance:
    """Random loss instance for gradient checking.

    Focal predictions are drawn inside the clamp interval and localization
    targets include exact ones and zeros so both focal branches are hit.
    """
    rng = np.random.default_rng(seed)
    h, w = shape
    if kind == "regression":
        pred = rng.uniform(-1.2, 1.2, size=(2, h, w))
        target = rng.uniform(-1.0, 1.0, size=(2, h, w))
        weights = rng.uniform(0.1, 2.0, size=(h, w))
        return LossInstance(kind, pred, target, weights=weights)
    if kind == "localization_l1":
        pred = rng.uniform(0.0, 1.0, size=(h, w))
        target = rng.uniform(0.0, 1.0, size=(h, w))
        return LossInstance(kind, pred, target)
    if kind == "focal":
        pred = rng.uniform(0.05, 0.95, size=(h, w))
        target = rng.uniform(0.0, 1.0, size=(h, w))
        target[rng.uniform(size=(h, w)) < 0.3] = 1.0
        target[rng.uniform(size=(h, w)) < 0.2] = 0.0
        return LossInstance(kind, pred, target)
    raise LossError(f"unknown loss kind: {kind}")


def finite_difference_check(kind_or_instance, seed: int = 0, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Perturbs every prediction coordinate by +-step (skipping coordinates
    within 4*step of an L1 kink or the focal clamp bounds) and returns
    max |analytic - central| / max(1, |central|).
    """
    if isinstance(kind_or_instance, LossInstance):
        inst = kind_or_instance
    else:
        inst = random_instance(kind_or_instance, seed)
    analytic = inst.evaluate().grad
    pred = inst.pred.astype(np.float64)
    margin = 4.0 * step

    if inst.kind in ("regression", "localization_l1"):
        skip = np.abs(pred - inst.target) <= margin
    else:
        lo, hi = FOCAL_EPS, 1.0 - FOCAL_EPS
        skip = (pred <= lo + margin) | (pred >= hi - margin)

    worst = 0.0
    flat_pred = pred.ravel()
    flat_skip = skip.ravel()
    flat_grad = analytic.ravel()
    for i in range(flat_pred.size):
        if flat_skip[i]:
            continue
        orig = flat_pred[i]
        flat_pred[i] = orig + step
        f_plus = inst.evaluate(pred).value
        flat_pred[i] = orig - step
        f_minus = inst.evaluate(pred).value
        flat_pred[i] = orig
        central = (f_plus - f_minus) / (2.0 * step)
        err = abs(flat_grad[i] - central) / max(1.0, abs(central))
        worst = max(worst, err)
    return worst
