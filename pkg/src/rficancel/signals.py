"""Complex baseband series: synthesis, mixing, delay, and power bookkeeping."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, ShapeError

_MAGIC = b"RFIC"
_VERSION = 1
NEG_INF_DB = float("-inf")


@dataclass(frozen=True)
class ComplexSeries:
    """Uniformly sampled complex baseband signal.

    ``center_freq`` is an annotation only; no operation retunes it.
    """

    samples: np.ndarray
    sample_rate: float
    center_freq: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 1:
            raise InvalidArgument("series needs at least one sample")
        if not self.sample_rate > 0:
            raise InvalidArgument(f"sample_rate must be > 0, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "ComplexSeries":
        return ComplexSeries(samples, self.sample_rate, self.center_freq)


def power(x) -> float:
    """Mean |x[n]|^2; accepts a ComplexSeries or a bare array."""
    samples = x.samples if isinstance(x, ComplexSeries) else np.asarray(x)
    return float(np.mean(np.abs(samples) ** 2))


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def db_to_amplitude(db: float) -> float:
    return 10.0 ** (db / 20.0)


def gen_circular_gaussian(n: int, variance: float, seed, sample_rate: float = 1.0,
                          center_freq: float = 0.0) -> ComplexSeries:
    """I.i.d. circular complex Gaussian samples with mean power ``variance``.

    Real and imaginary parts are each Normal(0, variance/2); deterministic
    for a fixed seed (or a caller-owned Generator).
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if variance < 0:
        raise InvalidArgument("variance must be >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    scale = np.sqrt(variance / 2.0)
    samples = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return ComplexSeries(samples, sample_rate, center_freq)


def gen_narrowband_gaussian(n: int, variance: float, freq_norm: float, width_norm: float,
                            seed, sample_rate: float = 1.0) -> ComplexSeries:
    """Narrowband Gaussian process centred at normalized frequency ``freq_norm``.

    Synthesized by brick-wall masking white noise in the frequency domain to a
    band of total width ``width_norm`` (cycles/sample), then renormalizing to
    the requested mean power.  Used as the spectral-line stand-in.
    """
    if n < 8:
        raise InvalidArgument("n too short for narrowband synthesis")
    if not 0 < width_norm < 1:
        raise InvalidArgument("width_norm must be in (0, 1)")
    white = gen_circular_gaussian(n, 1.0, seed).samples
    spec = np.fft.fft(white)
    f = np.fft.fftfreq(n)
    dist = np.abs((f - freq_norm + 0.5) % 1.0 - 0.5)
    spec[dist > width_norm / 2.0] = 0.0
    out = np.fft.ifft(spec)
    p = np.mean(np.abs(out) ** 2)
    if p == 0:
        raise InvalidArgument("mask removed all content; widen width_norm")
    out *= np.sqrt(variance / p)
    return ComplexSeries(out, sample_rate)


def mix(base: ComplexSeries, add: ComplexSeries, gain_db: float = 0.0) -> ComplexSeries:
    """base + 10^(gain_db/20) * add; ``-inf`` gain leaves base untouched."""
    if len(base) != len(add):
        raise ShapeError(f"length mismatch: {len(base)} vs {len(add)}")
    if base.sample_rate != add.sample_rate:
        raise ShapeError("sample-rate mismatch")
    if gain_db == NEG_INF_DB:
        return base
    return base.with_samples(base.samples + db_to_amplitude(gain_db) * add.samples)


def delay_samples(x: ComplexSeries, k: int) -> ComplexSeries:
    """Shift right by ``k`` whole samples, zero-filling the start; length kept."""
    if not 0 <= k < len(x):
        raise InvalidArgument(f"delay {k} outside [0, {len(x)})")
    if k == 0:
        return x
    out = np.zeros_like(x.samples)
    out[k:] = x.samples[:-k]
    return x.with_samples(out)


def inr_db(rfi: ComplexSeries, noise_power: float) -> float:
    """Interference-to-noise ratio in dB; -inf for a zero-power series."""
    if not noise_power > 0:
        raise InvalidArgument("noise_power must be > 0")
    p = power(rfi)
    if p == 0:
        return NEG_INF_DB
    return 10.0 * np.log10(p / noise_power)


def write_series(path, x: ComplexSeries) -> None:
    """Raw format: 24-byte header (magic, u32 version, f64 rate, f64 center),
    then little-endian interleaved I/Q float32."""
    header = _MAGIC + struct.pack("<Idd", _VERSION, x.sample_rate, x.center_freq)
    iq = np.empty(2 * len(x), dtype="<f4")
    iq[0::2] = x.samples.real
    iq[1::2] = x.samples.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(iq.tobytes())


def read_series(path) -> ComplexSeries:
    with open(path, "rb") as fh:
        header = fh.read(24)
        if len(header) != 24 or header[:4] != _MAGIC:
            raise InvalidArgument(f"{path}: not a raw series file")
        version, rate, center = struct.unpack("<Idd", header[4:])
        if version != _VERSION:
            raise InvalidArgument(f"{path}: unsupported version {version}")
        iq = np.frombuffer(fh.read(), dtype="<f4")
    if iq.size % 2:
        raise InvalidArgument(f"{path}: truncated I/Q payload")
    samples = iq[0::2].astype(np.float64) + 1j * iq[1::2].astype(np.float64)
    return ComplexSeries(samples, rate, center)
