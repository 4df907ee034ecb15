"""Shared fixtures and random-draw helpers for the test suite."""

import math

import numpy as np
import pytest

import heraldpurity as hp

SEED = 20260825

# Benchmark sources reused across files.  The ratio-5 source has a Schmidt
# number of exactly 2.6; the narrowband-pumped crystal source is strongly
# multimode (K near 22.1).
K26_PARAMS = (1.0, 5.0, math.pi / 4, -math.pi / 4)
KTP_PARAMS = (6.0, 0.70, math.pi / 4, 0.97)


def draw_source(rng, k_max=8.0):
    """Random double-Gaussian amplitude with a bounded mode count."""
    while True:
        sigma1 = 10.0 ** rng.uniform(math.log10(0.2), 1.0)
        sigma2 = 10.0 ** rng.uniform(math.log10(0.2), 1.0)
        theta1 = rng.uniform(0.1, math.pi - 0.1)
        offset = rng.uniform(0.1, math.pi - 0.1)
        if rng.random() < 0.5:
            offset = -offset
        jsa = hp.DoubleGaussianJsa(sigma1, sigma2, theta1, theta1 - offset)
        if hp.schmidt_number(jsa) <= k_max:
            return jsa


def draw_case(rng, k_max=8.0, n_budget=1100):
    """Random (jsa, filter, half_extent, n_points) tractable on every route.

    Redraws until the closed-form heralding probability is meaningful and
    the recommended grid stays small enough for a quick decomposition.
    """
    while True:
        jsa = draw_source(rng, k_max=k_max)
        width = 10.0 ** rng.uniform(math.log10(0.05), math.log10(20.0))
        filt = hp.GaussianFilter(rng.uniform(-3.0, 3.0), width)
        if hp.closed_form_success(jsa, filt) < 1e-8:
            continue
        half_extent, n_points = hp.recommended_grid(jsa, herald_filter=filt)
        if n_points > n_budget:
            continue
        return jsa, filt, half_extent, n_points


def identity_filter(jsa, tails=12.0):
    """Flat unit-transmission tabulated filter covering the idler marginal."""
    _, s_idl = jsa.marginal_widths()
    grid = np.linspace(-tails * s_idl, tails * s_idl, 41)
    return hp.TabulatedFilter(grid, np.ones_like(grid))


@pytest.fixture(scope="session")
def jsa_k26():
    return hp.DoubleGaussianJsa(*K26_PARAMS)


@pytest.fixture(scope="session")
def jsa_ktp():
    return hp.DoubleGaussianJsa(*KTP_PARAMS)


@pytest.fixture(scope="session")
def jsa_separable():
    return hp.DoubleGaussianJsa(1.0, 1.0, math.pi / 4, -math.pi / 4)


@pytest.fixture(scope="session")
def k26_grid(jsa_k26):
    extent, points = hp.recommended_grid(jsa_k26)
    return hp.discretize(jsa_k26, half_extent=extent, n_points=points)


@pytest.fixture(scope="session")
def k26_modes(k26_grid):
    return hp.decompose(k26_grid)


@pytest.fixture(scope="session")
def ktp_grid(jsa_ktp):
    extent, points = hp.recommended_grid(jsa_ktp)
    return hp.discretize(jsa_ktp, half_extent=extent, n_points=points)


@pytest.fixture(scope="session")
def ktp_modes(ktp_grid):
    return hp.decompose(ktp_grid)
