"""
Label noise models.

uniform_centered              i.i.d. U[0, 1], mean removed, scaled to norm eta
degree_proportional           e_i = deg(i), scaled to norm eta
inverse_degree_proportional   e_i = 1 / deg(i) (0 for isolated vertices), scaled likewise

The two degree models are deterministic and draw nothing from the stream.
"""

import logging
from typing import Sequence

import numpy as np

from io_formats.serializers import NOISE_MODELS

from .synthesis import SeedOrRng, make_rng

logger = logging.getLogger(__name__)


class NoiseModelError(Exception):
    """Unknown noise model or invalid noise level."""
    pass


def gen_noise(
    model: str,
    eta: float,
    seed: SeedOrRng,
    labeled: Sequence[int],
    degrees: np.ndarray,
) -> np.ndarray:
    """
    Noise vector on the labeled vertices with ||e|| = eta.

    Args:
        model: One of uniform_centered, degree_proportional,
            inverse_degree_proportional
        eta: Noise norm (positive)
        seed: Integer seed or Generator (only uniform_centered draws from it)
        labeled: Labeled vertices, in observation order
        degrees: Weighted degree of every vertex

    Returns:
        Vector of length len(labeled); all zeros when the unscaled vector
        vanishes (one label under uniform_centered, or only isolated labels)
    """
    if model not in NOISE_MODELS:
        raise NoiseModelError(f'Unknown noise model: {model}')
    if not eta > 0 or not np.isfinite(eta):
        raise NoiseModelError(f'eta must be positive, got {eta}')
    labeled = np.asarray(labeled, dtype=int)
    degrees = np.asarray(degrees, dtype=float)

    if model == 'uniform_centered':
        raw = make_rng(seed).random(labeled.size)
        raw = raw - raw.mean()
    elif model == 'degree_proportional':
        raw = degrees[labeled].copy()
    else:
        on_labels = degrees[labeled]
        isolated = on_labels <= 0.0
        if isolated.any():
            logger.warning(f'{int(isolated.sum())} isolated labeled vertex(es) get zero noise [NOISE-GEN01]')
        raw = np.zeros(labeled.size)
        raw[~isolated] = 1.0 / on_labels[~isolated]

    norm = float(np.linalg.norm(raw))
    if norm <= np.finfo(float).tiny:
        logger.warning(f'{model} noise vanishes before scaling, using e = 0 [NOISE-GEN02]')
        return np.zeros(labeled.size)
    return raw * (eta / norm)
