"""Forward computation of the training objectives.

These are reference values for any trainer to check against: the
discriminator/generator adversarial terms of the conditional-GAN game and the
L2 reconstruction term, combined as adversarial + weight * L2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

PROB_EPS = 1e-7


@dataclass(frozen=True)
class LossParams:
    """l2_weight is the multiplier on the reconstruction term."""

    l2_weight: float = 100.0

    def __post_init__(self):
        if not np.isfinite(self.l2_weight) or self.l2_weight < 0:
            raise ValueError(f"bad l2 weight {self.l2_weight}")


def _clamped(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty score array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite score")
    return np.clip(arr, PROB_EPS, 1.0 - PROB_EPS)


def l2_term(pred, gt, normalize: bool = True) -> float:
    """Euclidean norm of (gt - pred), RMS-normalized by default.

    Dividing by sqrt(count) makes the value resolution-independent, so maps of
    any size are comparable; normalize=False returns the raw norm.
    """
    p = np.asarray(pred, dtype=np.float64).ravel()
    g = np.asarray(gt, dtype=np.float64).ravel()
    if p.size != g.size:
        raise DimensionMismatch(f"size {p.size} vs {g.size}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(g))):
        raise ValueError("non-finite input")
    norm = float(np.linalg.norm(g - p))
    return norm / np.sqrt(p.size) if normalize else norm


def cgan_d_loss(on_real, on_fake) -> float:
    """Discriminator loss: -(mean log D(real) + mean log(1 - D(fake)))."""
    real = _clamped(on_real)
    fake = _clamped(on_fake)
    return float(-(np.mean(np.log(real)) + np.mean(np.log(1.0 - fake))))


def cgan_g_loss(on_fake, non_saturating: bool = True) -> float:
    """Generator adversarial loss.

    The default is the non-saturating -mean log D(fake), which keeps gradients
    alive early in training. non_saturating=False gives the game-theoretic
    term the generator minimizes verbatim, mean log(1 - D(fake)); note that
    form is negative once the discriminator is fooled more often than not.
    """
    fake = _clamped(on_fake)
    if non_saturating:
        return float(-np.mean(np.log(fake)))
    return float(np.mean(np.log(1.0 - fake)))


def combined_objective(g_adv: float, l2: float,
                       params: LossParams | None = None) -> float:
    """Total generator objective: adversarial term plus weighted L2."""
    params = params or LossParams()
    if not (np.isfinite(g_adv) and np.isfinite(l2)):
        raise ValueError("non-finite loss input")
    return g_adv + params.l2_weight * l2
