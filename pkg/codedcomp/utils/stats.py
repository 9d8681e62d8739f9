"""
codedcomp Statistics

Confidence intervals for Monte-Carlo estimates.
"""

import math
from typing import Tuple

import numpy as np
from scipy import stats


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    phat = failures / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if failures <= 0 else max(0.0, centre - half)
    high = 1.0 if failures >= trials else min(1.0, centre + half)
    return low, high


def mean_interval(samples: np.ndarray, confidence: float = 0.95) -> Tuple[float, float, float]:
    """Sample mean with a normal-approximation interval."""
    samples = np.asarray(samples, dtype=float)
    mean = float(samples.mean())
    if samples.size < 2:
        return mean, mean, mean
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    half = z * float(samples.std(ddof=1)) / math.sqrt(samples.size)
    return mean, mean - half, mean + half
