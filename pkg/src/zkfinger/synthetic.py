"""Synthetic minutiae generation for desk-scale experiments.

Fingers are random constellations with a minimum separation (real
minutiae never stack); impressions of the same finger apply Gaussian
position/orientation jitter plus a fraction of insertions and deletions,
mimicking capture-to-capture variation.
"""

import math

import numpy as np

from .minutiae import Minutia, MinutiaKind


def make_finger(
    rng: np.random.Generator,
    count: int = 36,
    width: int = 400,
    height: int = 400,
    margin: int = 20,
    min_sep: float = 14.0,
) -> list:
    """Random minutiae constellation with pairwise separation >= min_sep."""
    points = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 200 * count:
            raise RuntimeError("cannot place minutiae with the requested separation")
        x = rng.uniform(margin, width - margin)
        y = rng.uniform(margin, height - margin)
        if all(math.hypot(x - px, y - py) >= min_sep for px, py in points):
            points.append((x, y))
    return [
        Minutia(
            x,
            y,
            rng.uniform(0.0, 2.0 * math.pi) % (2.0 * math.pi),
            MinutiaKind.RIDGE_ENDING if rng.random() < 0.6 else MinutiaKind.BIFURCATION,
        )
        for x, y in points
    ]


def perturb(
    minutiae,
    rng: np.random.Generator,
    sigma_xy: float = 3.0,
    sigma_theta: float = 0.1,
    indel_rate: float = 0.10,
    width: int = 400,
    height: int = 400,
    margin: int = 20,
) -> list:
    """Another impression of the same finger."""
    jittered = []
    for m in minutiae:
        x = float(np.clip(m.x + rng.normal(0.0, sigma_xy), 0.0, width - 1.0))
        y = float(np.clip(m.y + rng.normal(0.0, sigma_xy), 0.0, height - 1.0))
        theta = (m.theta + rng.normal(0.0, sigma_theta)) % (2.0 * math.pi)
        jittered.append(Minutia(x, y, theta, m.kind))

    indels = int(round(indel_rate * len(jittered)))
    if indels and len(jittered) > indels + 1:
        keep = rng.choice(len(jittered), size=len(jittered) - indels, replace=False)
        jittered = [jittered[i] for i in sorted(keep)]
    for _ in range(indels):
        jittered.append(
            Minutia(
                float(rng.uniform(margin, width - margin)),
                float(rng.uniform(margin, height - margin)),
                float(rng.uniform(0.0, 2.0 * math.pi) % (2.0 * math.pi)),
                MinutiaKind.RIDGE_ENDING,
            )
        )
    return jittered


def make_corpus(
    seed: int,
    fingers: int = 10,
    impressions: int = 2,
    count: int = 14,
    margin: int = 70,
    min_sep: float = 30.0,
    **perturb_kwargs,
) -> list:
    """fingers x impressions nested list; impression 0 is the base.

    Defaults keep every k-nearest-neighbor distance under the grid's
    d_max so clamping never blurs the distance rows.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(fingers):
        base = make_finger(rng, count=count, margin=margin, min_sep=min_sep)
        prints = [base]
        for _ in range(impressions - 1):
            prints.append(perturb(base, rng, margin=margin, **perturb_kwargs))
        corpus.append(prints)
    return corpus
