"""Reconstruction-quality and collaboration-cost metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UndefinedMetric
from .signals import ComplexSeries, power


@dataclass(frozen=True)
class RqfValue:
    """Normalized power distortion of a reconstruction: 0 iff exact."""

    value: float
    n_samples: int


@dataclass(frozen=True)
class RemovalFraction:
    value: float
    clamped: bool


def rqf(reference: ComplexSeries, reconstructed: ComplexSeries) -> RqfValue:
    """Mean-square error over mean-square reference power."""
    if len(reference) != len(reconstructed):
        raise ShapeError("length mismatch")
    p_ref = power(reference)
    if p_ref == 0:
        raise UndefinedMetric("reference has zero power")
    err = power(reference.samples - reconstructed.samples)
    return RqfValue(err / p_ref, len(reference))


def itu_threshold(integration_s: float, window_s: float) -> float:
    """Detrimental-level distortion budget scaled from 10% over a long
    integration down to one analysis window."""
    if integration_s <= 0 or window_s <= 0:
        raise UndefinedMetric("durations must be > 0")
    return 0.10 / integration_s * window_s


def removal_fraction(incident_rfi: ComplexSeries, composite: ComplexSeries,
                     reconstructed: ComplexSeries) -> RemovalFraction:
    """1 - residual power / incident interference power, clamped to [0, 1].

    The residual is everything in the reconstruction that is not the clean
    (interference-free) part of the composite.
    """
    if not len(incident_rfi) == len(composite) == len(reconstructed):
        raise ShapeError("length mismatch")
    p_inc = power(incident_rfi)
    if p_inc == 0:
        raise UndefinedMetric("incident interference has zero power")
    clean = composite.samples - incident_rfi.samples
    residual = power(reconstructed.samples - clean)
    value = 1.0 - residual / p_inc
    clamped = value < 0.0 or value > 1.0
    return RemovalFraction(min(max(value, 0.0), 1.0), clamped)


def rate_budget_bps(window_length: int, n_components: int, duration_s: float,
                    rfi_bw_hz: float, fine_bw_hz: float = 30.5e3,
                    bits_per_entry: int = 32) -> float:
    """Eigenspace-sharing data rate: one L x M matrix of ``bits_per_entry``-bit
    entries per fine channel per signal duration."""
    if duration_s <= 0 or rfi_bw_hz <= 0 or fine_bw_hz <= 0:
        raise UndefinedMetric("durations and bandwidths must be > 0")
    return (window_length * n_components * bits_per_entry
            * (rfi_bw_hz / fine_bw_hz) / duration_s)
