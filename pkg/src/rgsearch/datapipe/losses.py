"""Pure scalar loss utilities for preference and reward-model objectives."""

from __future__ import annotations

import math
from dataclasses import dataclass


def _softplus(x: float) -> float:
    """log(1 + e^x), stable for large |x|."""
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def dpo_loss(
    logp_pos: float,
    logp_neg: float,
    ref_logp_pos: float,
    ref_logp_neg: float,
    beta: float,
) -> float:
    """Pairwise preference loss over policy/reference log-probabilities.

    -log sigmoid(beta * (logp_pos - ref_logp_pos) - beta * (logp_neg - ref_logp_neg)).
    All four log-probs equal gives ln 2; the loss strictly decreases as the
    positive margin grows.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    margin = beta * (logp_pos - ref_logp_pos) - beta * (logp_neg - ref_logp_neg)
    return _softplus(-margin)


@dataclass(frozen=True)
class DiscriminativeLosses:
    """The four scoring/ranking objectives over a (positive, negative) pair.

    l1: binary cross-entropy -(log sigma(y+) + log(1 - sigma(y-)))
    l2: score gap sigma(y+) - sigma(y-)
    l3: squared error (sigma(y+) - 1)^2 + (sigma(y-) - 0)^2
    l4: pairwise ranking -log sigma(y+ - y-)
    """

    l1: float
    l2: float
    l3: float
    l4: float


def discriminative_losses(y_pos: float, y_neg: float) -> DiscriminativeLosses:
    sig_pos = sigmoid(y_pos)
    sig_neg = sigmoid(y_neg)
    return DiscriminativeLosses(
        l1=_softplus(-y_pos) + _softplus(y_neg),
        l2=sig_pos - sig_neg,
        l3=(sig_pos - 1.0) ** 2 + sig_neg ** 2,
        l4=_softplus(-(y_pos - y_neg)),
    )
