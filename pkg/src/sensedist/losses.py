"""Training losses over one classification head.

All losses take a predictions matrix and a targets matrix of identical
shape [N, C] and return a scalar that participates in autograd.
Cross-entropy consumes raw head scores (it applies log-softmax itself);
the distribution losses (MAE, MSE, Huber) consume predicted
distributions, i.e. scores already passed through softmax. `head_loss`
routes accordingly so callers never apply softmax in the wrong place.

With delta = prediction - target, elementwise over N instances and C
labels:

  ce     -(1/N)  sum_i sum_c  log softmax(score)_ic * y_ic
  mae     (1/(N*C)) sum |delta|
  mse     (1/(N*C)) sum delta^2
  huber   sum of  delta^2 / (2*N*C)          where |delta| < 1
                  (2*|delta| - 1) / (2*N*C)  elsewhere

In the small-error regime Huber is exactly half of MSE.
"""

from __future__ import annotations

import torch

from .errors import ConfigError, NumericError

LOSS_KINDS = ("ce", "mae", "mse", "huber")

# Distribution losses consume softmaxed scores; ce consumes raw scores.
DISTRIBUTION_LOSSES = ("mae", "mse", "huber")


def _check_pair(pred: torch.Tensor, target: torch.Tensor) -> tuple[int, int]:
    if pred.dim() != 2 or target.dim() != 2:
        raise NumericError(
            f"expected [N, C] matrices, got {tuple(pred.shape)} and {tuple(target.shape)}"
        )
    if pred.shape != target.shape:
        raise NumericError(
            f"prediction shape {tuple(pred.shape)} does not match "
            f"target shape {tuple(target.shape)}"
        )
    if not torch.isfinite(pred).all():
        raise NumericError("non-finite prediction entries")
    if not torch.isfinite(target).all():
        raise NumericError("non-finite target entries")
    return pred.shape[0], pred.shape[1]


def cross_entropy_loss(scores: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Soft-target cross-entropy over raw scores, averaged per instance."""
    n, _ = _check_pair(scores, targets)
    log_probs = torch.log_softmax(scores, dim=1)
    return -(log_probs * targets).sum() / n


def mae_loss(pred_dist: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean absolute error per matrix cell."""
    n, c = _check_pair(pred_dist, targets)
    return (pred_dist - targets).abs().sum() / (n * c)


def mse_loss(pred_dist: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean squared error per matrix cell."""
    n, c = _check_pair(pred_dist, targets)
    delta = pred_dist - targets
    return (delta * delta).sum() / (n * c)


def huber_loss(pred_dist: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Quadratic inside |delta| < 1, linear outside, half of MSE when small."""
    n, c = _check_pair(pred_dist, targets)
    delta = pred_dist - targets
    abs_delta = delta.abs()
    elementwise = torch.where(
        abs_delta < 1.0, delta * delta, 2.0 * abs_delta - 1.0
    )
    return elementwise.sum() / (2.0 * n * c)


_LOSS_FNS = {
    "ce": cross_entropy_loss,
    "mae": mae_loss,
    "mse": mse_loss,
    "huber": huber_loss,
}


def head_loss(kind: str, scores: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """One head's loss from raw scores; softmaxes first for distribution losses."""
    if kind not in _LOSS_FNS:
        raise ConfigError(f"unknown loss kind: {kind!r}; choose from {LOSS_KINDS}")
    if kind in DISTRIBUTION_LOSSES:
        return _LOSS_FNS[kind](torch.softmax(scores, dim=1), targets)
    return _LOSS_FNS[kind](scores, targets)


def total_loss(
    loss1: torch.Tensor, loss2: torch.Tensor, loss3: torch.Tensor
) -> torch.Tensor:
    """Unweighted sum of the three per-level head losses."""
    total = loss1 + loss2 + loss3
    if not torch.isfinite(total):
        raise NumericError(
            f"non-finite total loss: {loss1.item()!r} + {loss2.item()!r} + {loss3.item()!r}"
        )
    return total
