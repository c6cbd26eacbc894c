"""Shared fixtures and brute-force oracles for the pansrr tests."""

import logging

import numpy as np
import pytest
from scipy import ndimage

from pansrr.core.haar import analyze_array
from pansrr.core.raster import ImagePlane, MultibandVolume
from pansrr.logging_utils import LOGGER_NAME


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def textured(shape, seed=0, smoothing=2.0):
    """Smooth random texture in roughly [0.2, 0.8], periodic at the borders."""
    noise = np.random.default_rng(seed).standard_normal(shape)
    field = ndimage.gaussian_filter(noise, smoothing, mode="wrap")
    field = (field - field.min()) / (field.max() - field.min())
    return 0.2 + 0.6 * field


@pytest.fixture
def texture():
    return ImagePlane(textured((32, 32)))


@pytest.fixture
def volume():
    planes = [ImagePlane(textured((32, 32), seed=s)) for s in range(3)]
    return MultibandVolume(tuple(planes), ("red", "green", "blue"))


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def area_shift(plane, tx, ty, levels):
    """Upsample by pixel replication, shift by whole fine pixels, block-average back.

    Exact for shifts that are multiples of ``2**-levels`` plane pixels.
    """
    factor = 2**levels
    fine = np.kron(plane, np.ones((factor, factor)))
    sx, sy = int(round(tx * factor)), int(round(ty * factor))
    assert np.isclose(sx, tx * factor) and np.isclose(sy, ty * factor)
    fine = np.roll(fine, (-sy, -sx), axis=(0, 1))
    h, w = plane.shape
    return fine.reshape(h, factor, w, factor).mean(axis=(1, 3))


def upsample_shift_reanalyze(plane, tx, ty, levels):
    return analyze_array(area_shift(plane, tx, ty, levels))


def dense_sandwich(left, x, right):
    """``L @ X @ R`` with both stencils materialised."""
    m, n = x.shape
    return left.dense(m) @ x @ right.dense(n)


def kron_apply(left, x, right):
    """``(L kron R^T) vec(X)`` with row-major vec, reshaped back."""
    m, n = x.shape
    big = np.kron(left.dense(m), right.dense(n).T)
    return (big @ x.ravel()).reshape(m, n)


@pytest.fixture(autouse=True)
def _fresh_log_handlers():
    """Drop handlers installed by the CLI so none outlives a captured stream."""
    yield
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
