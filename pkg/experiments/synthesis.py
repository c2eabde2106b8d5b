"""
Synthetic smooth signals and per-trial random streams.

Every trial owns one numpy Generator on a PCG64 stream seeded with
base_seed XOR trial_index. Gaussian draws use numpy's ziggurat
`standard_normal`, uniform draws `random`; both are fixed by numpy's
stream compatibility policy for a given seed.

AIDEV-NOTE: trial-draw-order; signal, vertex permutation, then one noise draw per label count
"""

import logging
from typing import Union

import numpy as np

from graph_core import LaplacianBundle

logger = logging.getLogger(__name__)

SeedOrRng = Union[int, np.random.Generator]


def make_rng(seed: SeedOrRng) -> np.random.Generator:
    """Generator(PCG64(seed)); a Generator passes through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(int(seed)))


def trial_seed(base_seed: int, trial_index: int) -> int:
    return int(base_seed) ^ int(trial_index)


def synth_raw_signal(bundle: LaplacianBundle, seed: SeedOrRng) -> np.ndarray:
    """
    f = chi c with c_k ~ N(0, 1/lambda_k) on the positive spectrum and
    c_k = 0 on ker(L), before normalization.
    """
    rng = make_rng(seed)
    positive = bundle.positive_mask
    coefficients = np.zeros(bundle.num_vertices)
    coefficients[positive] = rng.standard_normal(int(positive.sum())) / np.sqrt(bundle.eigenvalues[positive])
    return bundle.eigenvectors @ coefficients


def synth_signal(bundle: LaplacianBundle, seed: SeedOrRng) -> np.ndarray:
    """
    Random smooth signal min-max normalized to [0, 1].

    Args:
        bundle: Laplacian bundle
        seed: Integer seed or an existing Generator (advanced in place)

    Returns:
        N-vector with minimum 0 and maximum 1; all zeros if the raw draw is
        constant (a graph with no edges)
    """
    raw = synth_raw_signal(bundle, seed)
    low, high = float(raw.min()), float(raw.max())
    if high - low <= 0.0:
        logger.warning('Synthetic signal is constant, returning zeros [SYNTH-SIGNAL01]')
        return np.zeros_like(raw)
    return (raw - low) / (high - low)
