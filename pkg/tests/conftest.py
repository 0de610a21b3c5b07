from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def make_histogram(rng: np.random.Generator, bins: int) -> np.ndarray:
    h = rng.random(bins)
    return h / h.sum()


def peaked_histogram(bins: int, peak: int, width: int = 3) -> np.ndarray:
    """Histogram with mass concentrated around one bin, for synthetic slides."""
    h = np.zeros(bins)
    for offset in range(-width, width + 1):
        idx = min(max(peak + offset, 0), bins - 1)
        h[idx] += width + 1 - abs(offset)
    return h / h.sum()
