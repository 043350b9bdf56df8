"""Ensemble statistics of the two-detector phase-readout scheme.

A spatially split state recombines after one wall period with relative
phase delta_mu between its halves. Detector D1 fires with probability
p*sin^2(delta_mu/2) per cavity and D2 with p*cos^2(delta_mu/2), where p is
the chance of finding the particle inside a detector of width epsilon next
to the static wall:

    p_exact  = (2/L0) * int_0^eps sin^2(n*pi*x/L0) dx
             = eps/L0 - sin(2*n*pi*eps/L0) / (2*n*pi)
    p_approx = (2*n^2*pi^2/3) * (eps/L0)^3        (small eps/L0)

With delta_mu = 0 only D2 can fire; the click ratio D1/D2 estimates
tan^2(delta_mu/2). Everything is driven by one seeded generator so counts
reproduce bit for bit; sharded runs derive per-shard child seeds and merge
by summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "DetectionProbability",
    "ProtocolConfig",
    "ProtocolOutcome",
    "detection_probability",
    "click_ratio",
    "simulate_ensemble",
    "required_ensemble_size",
]

MAX_EPSILON_FRACTION = 0.05


class DetectionProbability(NamedTuple):
    approx: float
    exact: float


def detection_probability(n: int, epsilon: float, L0: float) -> DetectionProbability:
    """Per-cavity detection probability for a width-epsilon detector.

    Returns the cubic small-width approximation together with the exact
    integral; requires epsilon/L0 <= 0.05.
    """
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    if not (L0 > 0 and 0 <= epsilon):
        raise ValueError("need L0 > 0 and epsilon >= 0")
    frac = epsilon / L0
    if frac > MAX_EPSILON_FRACTION:
        raise ValueError(f"epsilon/L0 = {frac:.4g} exceeds the {MAX_EPSILON_FRACTION} limit")
    approx = (2.0 * n * n * math.pi**2 / 3.0) * frac**3
    exact = frac - math.sin(2.0 * n * math.pi * frac) / (2.0 * n * math.pi)
    return DetectionProbability(approx=approx, exact=exact)


def click_ratio(delta_mu: float) -> float:
    """Expected D1/D2 click ratio, tan^2(delta_mu/2).

    Grows without bound as delta_mu approaches pi (D2 stops firing).
    """
    return math.tan(delta_mu / 2.0) ** 2


@dataclass(frozen=True)
class ProtocolConfig:
    """One ensemble run: detector geometry, phase difference, size, seed."""

    mode: int
    epsilon: float
    L0: float
    delta_mu: float
    ensemble_size: int
    seed: int

    def __post_init__(self):
        if self.mode < 1:
            raise ValueError(f"mode must be >= 1, got {self.mode}")
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if not (self.L0 > 0 and self.epsilon >= 0):
            raise ValueError("need L0 > 0 and epsilon >= 0")
        if self.epsilon / self.L0 > MAX_EPSILON_FRACTION:
            raise ValueError(
                f"epsilon/L0 = {self.epsilon / self.L0:.4g} exceeds the {MAX_EPSILON_FRACTION} limit"
            )
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True)
class ProtocolOutcome:
    """Aggregated detector counts and the inferred message.

    ratio is None when neither detector fired, and infinite when only D1
    fired. inferred_message is "0", "1" or "inconclusive".
    """

    clicks_D1: int
    clicks_D2: int
    undetected: int
    ratio: float | None
    inferred_message: str
    seed: int


def _infer_message(clicks_D1: int, clicks_D2: int, delta_mu: float) -> str:
    # message 0 predicts zero D1 clicks; message 1 predicts
    # D1 ~ Poisson(D2 * tan^2(delta_mu/2)). Use a 3-sigma band for the
    # latter and demand the hypotheses actually separate.
    expected_if_1 = clicks_D2 * click_ratio(delta_mu)
    consistent_0 = clicks_D1 == 0
    consistent_1 = abs(clicks_D1 - expected_if_1) <= 3.0 * math.sqrt(max(expected_if_1, 1.0))
    if consistent_0 and not consistent_1:
        return "0"
    if consistent_1 and not consistent_0:
        return "1"
    return "inconclusive"


def simulate_ensemble(config: ProtocolConfig, shards: int = 1) -> ProtocolOutcome:
    """Count D1/D2 clicks over the ensemble with a seeded generator.

    Each cavity independently yields a D1 click, a D2 click, or nothing.
    shards > 1 splits the ensemble over derived child seeds and sums the
    counts; totals are deterministic for a fixed (seed, shards) pair.
    """
    if shards < 1:
        raise ValueError("shards must be >= 1")
    p = detection_probability(config.mode, config.epsilon, config.L0).exact
    half = config.delta_mu / 2.0
    p1 = p * math.sin(half) ** 2
    p2 = p * math.cos(half) ** 2
    probs = [p1, p2, max(1.0 - p1 - p2, 0.0)]

    counts = np.zeros(3, dtype=np.int64)
    base, rem = divmod(config.ensemble_size, shards)
    children = np.random.SeedSequence(config.seed).spawn(shards)
    for i, child in enumerate(children):
        size = base + (1 if i < rem else 0)
        if size == 0:
            continue
        rng = np.random.default_rng(child)
        counts += rng.multinomial(size, probs)

    d1, d2 = int(counts[0]), int(counts[1])
    if d1 == 0 and d2 == 0:
        ratio = None
    elif d2 == 0:
        ratio = math.inf
    else:
        ratio = d1 / d2
    return ProtocolOutcome(
        clicks_D1=d1,
        clicks_D2=d2,
        undetected=int(counts[2]),
        ratio=ratio,
        inferred_message=_infer_message(d1, d2, config.delta_mu),
        seed=config.seed,
    )


def required_ensemble_size(
    delta_mu: float, n: int, epsilon: float, L0: float, confidence_sigma: float = 3.0
) -> int:
    """Smallest ensemble for which the expected D1 count reaches
    confidence_sigma^2 (Poisson discrimination of a zero rate).

    Raises for delta_mu = 0 (or any multiple of 2*pi): the two messages
    produce identical statistics at every ensemble size.
    """
    if confidence_sigma <= 0:
        raise ValueError("confidence_sigma must be positive")
    signal = math.sin(delta_mu / 2.0) ** 2
    if signal == 0.0:
        raise ValueError("delta_mu = 0: messages are indistinguishable at any ensemble size")
    p = detection_probability(n, epsilon, L0).exact
    return int(math.ceil(confidence_sigma**2 / (p * signal)))
