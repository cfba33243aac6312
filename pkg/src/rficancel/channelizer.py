"""Critically sampled DFT filterbank standing in for the telescope back-end.

The default (no prototype) is a plain block-DFT: exactly invertible, used by
the structural contracts.  Passing a polyphase prototype turns it into a
windowed filterbank with real channel selectivity; ``pfb_prototype`` designs
a Kaiser-windowed-sinc prototype whose single-tap case degenerates to the
rectangular block-DFT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, ShapeError
from .signals import ComplexSeries


@dataclass(frozen=True)
class ChannelPlan:
    """Coarse/fine bandwidth bookkeeping for the telescope back-end."""

    coarse_bw_hz: float = 11.7e6
    fine_bw_hz: float = 30.5e3

    def __post_init__(self):
        if self.fine_bw_hz > self.coarse_bw_hz:
            raise InvalidArgument("fine bandwidth exceeds coarse bandwidth")
        if self.fine_bw_hz <= 0:
            raise InvalidArgument("bandwidths must be > 0")

    @property
    def n_fine_per_coarse(self) -> int:
        return max(int(round(self.coarse_bw_hz / self.fine_bw_hz)), 1)


def pfb_prototype(n_channels: int, taps_per_branch: int = 24, beta: float = 11.0) -> np.ndarray:
    """Kaiser-windowed sinc lowpass, cutoff at half a channel, unit DC gain."""
    if taps_per_branch < 1:
        raise InvalidArgument("taps_per_branch must be >= 1")
    P = taps_per_branch * n_channels
    k = np.arange(P) - (P - 1) / 2
    h = np.sinc(k / n_channels) * np.kaiser(P, beta)
    return h / h.sum()


def channelize(x: ComplexSeries, n_channels: int,
               prototype: np.ndarray | None = None) -> list[ComplexSeries]:
    """Split into ``n_channels`` critically sampled channel series.

    Without a prototype this is the block-DFT
    ``y_c[b] = (1/n) sum_m x[bn+m] exp(-2j pi c m / n)``; trailing samples
    that do not fill a block are zero-padded.  With a prototype of length
    ``P*n`` the block is replaced by the polyphase-filtered history
    ``y_c[b] = sum_j h[j] x[bn+n-1-j] exp(-2j pi c (n-1-j)/n)``, which reduces
    to the rectangular form for ``P=1, h=1/n``.  Channel ``c`` is centred on
    ``c/n`` of the input rate; per-channel mean powers sum to the input power.
    """
    if n_channels < 1:
        raise InvalidArgument("n_channels must be >= 1")
    n = n_channels
    samples = x.samples
    pad = (-len(samples)) % n
    if pad:
        samples = np.concatenate([samples, np.zeros(pad, dtype=samples.dtype)])
    nb = len(samples) // n
    blocks = samples.reshape(nb, n)
    if prototype is None:
        acc = blocks / n
    else:
        if len(prototype) % n:
            raise InvalidArgument("prototype length must be a multiple of n_channels")
        taps = np.asarray(prototype, dtype=np.float64).reshape(-1, n)[:, ::-1]
        acc = np.zeros((nb, n), dtype=np.complex128)
        for p in range(taps.shape[0]):
            if p:
                acc[p:] += taps[p] * blocks[: nb - p]
            else:
                acc += taps[0] * blocks
    Y = np.fft.fft(acc, axis=1)
    rate = x.sample_rate / n
    return [ComplexSeries(np.ascontiguousarray(Y[:, c]), rate,
                          x.center_freq + c * x.sample_rate / n)
            for c in range(n)]


def dechannelize(channels: list[ComplexSeries]) -> ComplexSeries:
    """Exact inverse of the rectangular (prototype-free) channelizer."""
    if not channels:
        raise InvalidArgument("no channels given")
    n = len(channels)
    nb = len(channels[0])
    if any(len(c) != nb for c in channels):
        raise ShapeError("ragged channel lengths")
    Y = np.stack([c.samples for c in channels], axis=1)
    blocks = np.fft.ifft(Y, axis=1) * n
    return ComplexSeries(blocks.ravel(), channels[0].sample_rate * n,
                         channels[0].center_freq)
