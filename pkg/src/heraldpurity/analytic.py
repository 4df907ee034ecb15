"""Closed-form results for double-Gaussian amplitudes and Gaussian filters.

Every expression here is written through the quadratic-form coefficients
``(a, b, c)`` of the joint intensity (see
``DoubleGaussianJsa.intensity_coefficients``) and their determinant
``w = a*c - b**2``.  Gaussian integrals then reduce to ratios of these
coefficients, which keeps the formulas short and free of sign conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DoubleGaussianJsa, GaussianFilter, HomCurve

__all__ = [
    "ClosedFormReport",
    "closed_form_success",
    "closed_form_purity",
    "closed_form_report",
    "schmidt_number",
    "thermal_schmidt_coefficients",
    "schmidt_mode_analytic",
    "mode_scales",
    "hom_dip_analytic",
    "visibility",
]


@dataclass(frozen=True)
class ClosedFormReport:
    """Closed-form figures of merit for one source and herald filter.

    Attributes:
        success: Heralding probability.
        purity_filtered: Purity of the heralded photon behind the filter.
        schmidt_number: Mode number K of the unfiltered amplitude.
        g2: Unheralded marginal second-order correlation, ``1 + 1/K``.
        visibility: Balanced-splitter interference visibility of the
            filtered photon, ``purity / (2 - purity)``.
    """

    success: float
    purity_filtered: float
    schmidt_number: float
    g2: float
    visibility: float


def _require_types(jsa, filt=None):
    if not isinstance(jsa, DoubleGaussianJsa):
        raise TypeError("closed forms exist only for double-Gaussian amplitudes")
    if filt is not None and not isinstance(filt, GaussianFilter):
        raise TypeError("closed forms exist only for Gaussian filters")


def closed_form_success(jsa, herald_filter):
    """Heralding probability for a Gaussian herald filter, in closed form.

    With intensity coefficients ``(a, b, c)``, determinant ``w``, filter
    variance ``z = 2*width**2`` and center ``w0``::

        success = sqrt(z*w / (a + z*w)) * exp(-w0**2 * w / (a + z*w))

    Args:
        jsa: ``DoubleGaussianJsa`` of the source.
        herald_filter: ``GaussianFilter`` on the idler arm.

    Returns:
        Success probability in [0, 1].
    """
    _require_types(jsa, herald_filter)
    a, b, c = jsa.intensity_coefficients()
    w = a * c - b * b
    z = 2.0 * herald_filter.width**2
    denom = a + z * w
    return math.sqrt(z * w / denom) * math.exp(
        -herald_filter.center**2 * w / denom
    )


def closed_form_purity(jsa, herald_filter):
    """Heralded-photon purity for a Gaussian herald filter, in closed form.

    With intensity coefficients ``(a, b, c)`` and inverse filter variance
    ``phi = 1 / (2*width**2)``::

        purity = sqrt(1 - b**2 / (a * (c + phi)))

    The result does not depend on the filter center: detuning the passband
    costs heralding probability but conditions the same signal state shape.

    Args:
        jsa: ``DoubleGaussianJsa`` of the source.
        herald_filter: ``GaussianFilter`` on the idler arm.

    Returns:
        Purity in (0, 1].
    """
    _require_types(jsa, herald_filter)
    a, b, c = jsa.intensity_coefficients()
    phi = 0.5 / herald_filter.width**2
    return math.sqrt(1.0 - b * b / (a * (c + phi)))


def schmidt_number(jsa):
    """Mode number K of a double-Gaussian amplitude, in closed form.

    ``K = sqrt(a*c / (a*c - b**2))``; the unfiltered purity is ``1/K``.
    """
    _require_types(jsa)
    a, b, c = jsa.intensity_coefficients()
    return math.sqrt(a * c / (a * c - b * b))


def thermal_schmidt_coefficients(mode_number, n_modes=64):
    """Geometric (thermal) mode weights for a given mode number K.

    A double-Gaussian amplitude has weights
    ``p_mu = 2 * (K - 1)**mu / (K + 1)**(mu + 1)``; their squares sum to
    ``1/K``.

    Args:
        mode_number: Mode number K, at least 1.
        n_modes: Number of leading weights to return.

    Returns:
        Array of the first ``n_modes`` weights, descending.
    """
    k = float(mode_number)
    if not math.isfinite(k) or k < 1.0:
        raise ValueError(f"mode number must be >= 1, got {mode_number}")
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    mu = np.arange(int(n_modes), dtype=float)
    ratio = (k - 1.0) / (k + 1.0)
    return 2.0 / (k + 1.0) * ratio**mu


def mode_scales(jsa):
    """Gaussian width scales of the signal and idler mode families.

    Returns:
        Tuple ``(signal_scale, idler_scale)`` in rad/ps: with intensity
        coefficients ``(a, b, c)`` and determinant ``w``, the signal scale
        is ``(c / (w*a))**(1/4)`` and the idler scale ``(a / (w*c))**(1/4)``.
    """
    _require_types(jsa)
    a, b, c = jsa.intensity_coefficients()
    w = a * c - b * b
    return (c / (w * a)) ** 0.25, (a / (w * c)) ** 0.25


def _hermite_function(order, x):
    """Orthonormal Hermite function h_order(x) by the stable recurrence.

    ``h_0 = pi**-0.25 * exp(-x**2/2)`` and
    ``h_n = x*sqrt(2/n)*h_{n-1} - sqrt((n-1)/n)*h_{n-2}``.  The recurrence
    propagates the already-normalized functions, so no factorials or large
    intermediate powers appear and orders of several hundred stay finite.
    """
    h_prev = np.zeros_like(x)
    h = math.pi**-0.25 * np.exp(-0.5 * x * x)
    for n in range(1, order + 1):
        h, h_prev = x * math.sqrt(2.0 / n) * h - math.sqrt((n - 1.0) / n) * h_prev, h
    return h


def schmidt_mode_analytic(jsa, mu, omega, side="signal"):
    """Sample one Schmidt mode of a double-Gaussian amplitude.

    The modes are Hermite-Gauss functions: with width scale ``s`` from
    ``mode_scales``,

        mode_mu(w) = (-1j)**mu * h_mu(w / s) / sqrt(s)

    where ``h_mu`` is the orthonormal Hermite function.  The ``(-1j)**mu``
    phases are chosen so that the weighted products of signal and idler
    modes reconstruct the amplitude when its frequencies are anticorrelated
    (cross coefficient ``b > 0``); for correlated amplitudes the odd modes
    carry an extra sign.

    Args:
        jsa: ``DoubleGaussianJsa`` whose modes are wanted.
        mu: Mode index, a non-negative integer.  Stable well beyond 200.
        omega: Frequencies at which to sample, rad/ps.
        side: ``"signal"`` or ``"idler"``.

    Returns:
        Complex array of mode samples.
    """
    _require_types(jsa)
    if mu < 0 or int(mu) != mu:
        raise ValueError(f"mode index must be a non-negative integer, got {mu}")
    if side not in ("signal", "idler"):
        raise ValueError(f"side must be 'signal' or 'idler', got {side!r}")
    scale = mode_scales(jsa)[0 if side == "signal" else 1]
    x = np.asarray(omega, dtype=float) / scale
    values = _hermite_function(int(mu), x) / math.sqrt(scale)
    return (-1j) ** int(mu) * values.astype(complex)


def hom_dip_analytic(jsa, purity, delays, reflectivity=0.5,
                     transmissivity=0.5):
    """Closed-form coincidence dip for equal Gaussian-filtered sources.

    The dip is Gaussian in delay with a width set by the signal conditional
    width of the amplitude and a depth set by the heralded purity::

        c(tau) = 1 - 2*R*T*(1 + purity * exp(-tau**2 / (2*a)))

    where ``a`` is the leading intensity coefficient.  The width does not
    depend on the herald filter; only the depth does.

    Args:
        jsa: ``DoubleGaussianJsa`` of both sources.
        purity: Heralded purity behind the (equal) herald filters.
        delays: Relative delays in ps.
        reflectivity: Beam splitter intensity reflectivity.
        transmissivity: Beam splitter intensity transmissivity.

    Returns:
        ``HomCurve`` sampled at the given delays.
    """
    _require_types(jsa)
    if not 0.0 <= purity <= 1.0:
        raise ValueError(f"purity must lie in [0, 1], got {purity}")
    if abs(reflectivity + transmissivity - 1.0) > 1e-9:
        raise ValueError("reflectivity and transmissivity must sum to one")
    a, _, _ = jsa.intensity_coefficients()
    tau = np.atleast_1d(np.asarray(delays, dtype=float))
    rt = reflectivity * transmissivity
    samples = 1.0 - 2.0 * rt * (1.0 + purity * np.exp(-tau * tau / (2.0 * a)))
    return HomCurve(tau, np.clip(samples, 0.0, 1.0))


def visibility(purity, reflectivity=0.5, transmissivity=0.5):
    """Interference visibility of two equal sources of given purity.

    ``V = R*T*purity / (1 - (2 + purity)*R*T)``; on a balanced splitter this
    reduces to ``purity / (2 - purity)``.
    """
    if not 0.0 <= purity <= 1.0:
        raise ValueError(f"purity must lie in [0, 1], got {purity}")
    rt = reflectivity * transmissivity
    denom = 1.0 - (2.0 + purity) * rt
    if denom <= 0.0:
        raise ValueError("splitter parameters leave no distinguishable baseline")
    return rt * purity / denom


def closed_form_report(jsa, herald_filter):
    """Closed-form scalar figures of merit for one source configuration.

    Args:
        jsa: ``DoubleGaussianJsa`` of the source.
        herald_filter: ``GaussianFilter`` on the idler arm.

    Returns:
        ``ClosedFormReport`` with success, filtered purity, mode number,
        marginal g2, and balanced-splitter visibility.
    """
    _require_types(jsa, herald_filter)
    k = schmidt_number(jsa)
    p_fil = closed_form_purity(jsa, herald_filter)
    return ClosedFormReport(
        success=closed_form_success(jsa, herald_filter),
        purity_filtered=p_fil,
        schmidt_number=k,
        g2=1.0 + 1.0 / k,
        visibility=p_fil / (2.0 - p_fil),
    )
