"""Propagation between the cell and the telescope: fixed dB gains, AWGN,
quasi-static tapped-delay fading, band-limiting, and the uplink path split."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .lte import UeGeometry, uplink_power_dbm
from .signals import ComplexSeries, db_to_amplitude, gen_circular_gaussian

SCENARIO_NAMES = (
    "awgn", "urban_micro", "bad_urban_micro", "indoor_to_outdoor",
    "urban_macro", "bad_urban_macro", "suburban_macro", "rural_macro",
    "flat_rayleigh",
)

# delay-spread and cell-radius stand-ins per scenario: exponentially decaying
# six-tap profiles, micro spreads 0.1-0.5 us, macro 0.5-2 us, "bad" doubled
_PRESETS = {
    "awgn": (0.0, 5000.0),
    "urban_micro": (0.25e-6, 1000.0),
    "bad_urban_micro": (0.5e-6, 1000.0),
    "indoor_to_outdoor": (0.1e-6, 1000.0),
    "urban_macro": (1.0e-6, 5000.0),
    "bad_urban_macro": (2.0e-6, 5000.0),
    "suburban_macro": (0.5e-6, 5000.0),
    "rural_macro": (0.5e-6, 10000.0),
    "flat_rayleigh": (0.0, 5000.0),
}

QUASI_STATIC_BLOCK_S = 10e-3  # one fading draw per LTE frame duration


@dataclass(frozen=True)
class ChannelScenario:
    """Tapped-delay profile realized for a specific sample rate."""

    name: str
    taps: tuple  # ((delay_samples, mean_power_linear), ...)
    cell_radius_m: float

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise InvalidArgument(f"unknown scenario {self.name!r}")
        delays = [d for d, _ in self.taps]
        powers = np.array([p for _, p in self.taps])
        if delays[0] != 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise InvalidArgument("tap delays must increase strictly from 0")
        if abs(powers.sum() - 1.0) > 1e-9:
            raise InvalidArgument(f"tap powers sum to {powers.sum()}, expected 1")

    @property
    def is_identity(self) -> bool:
        return self.name == "awgn"


def make_scenario(name: str, sample_rate: float, n_taps: int = 6,
                  cell_radius_m: float | None = None,
                  taps: list | None = None) -> ChannelScenario:
    """Build a scenario preset at a sample rate; explicit taps override."""
    if name not in _PRESETS:
        raise InvalidArgument(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")
    spread_s, radius = _PRESETS[name]
    if cell_radius_m is not None:
        radius = cell_radius_m
    if taps is not None:
        return ChannelScenario(name, tuple((int(d), float(p)) for d, p in taps), radius)
    if name in ("awgn", "flat_rayleigh") or spread_s == 0.0:
        return ChannelScenario(name, ((0, 1.0),), radius)
    delays = np.round(np.linspace(0.0, spread_s * sample_rate, n_taps)).astype(int)
    # rounding can collide at low rates; keep the strictly increasing prefix
    keep = np.concatenate([[True], np.diff(delays) > 0])
    delays = delays[keep]
    tau = max(spread_s * sample_rate / 3.0, 1.0)
    powers = np.exp(-delays / tau)
    powers /= powers.sum()
    return ChannelScenario(name, tuple(zip(delays.tolist(), powers.tolist())), radius)


@dataclass(frozen=True)
class LinkBudget:
    """Fixed-loss budget anchoring the BS-to-telescope path."""

    propagation_loss_db: float = 92.46
    sidelobe_gain_dbi: float = -40.0
    distance_km: float = 20.0
    use_fspl: bool = False
    carrier_freq_hz: float = 1.42e9

    def __post_init__(self):
        if self.propagation_loss_db < 0:
            raise InvalidArgument("propagation loss must be >= 0")

    def path_loss_db(self, distance_m: float) -> float:
        """Inverse-square loss anchored at the budget point; optional FSPL mode."""
        if distance_m <= 0:
            raise InvalidArgument("distance must be > 0")
        if self.use_fspl:
            lam = 299792458.0 / self.carrier_freq_hz
            return 20.0 * np.log10(4.0 * np.pi * distance_m / lam)
        ref_m = self.distance_km * 1000.0
        return self.propagation_loss_db + 20.0 * np.log10(distance_m / ref_m)


def apply_gain_db(x: ComplexSeries, g: float) -> ComplexSeries:
    if not np.isfinite(g):
        raise InvalidArgument("gain must be finite")
    return x.with_samples(x.samples * db_to_amplitude(g))


def awgn(x: ComplexSeries, noise_power: float, seed) -> ComplexSeries:
    if noise_power < 0:
        raise InvalidArgument("noise_power must be >= 0")
    if noise_power == 0:
        return x
    noise = gen_circular_gaussian(len(x), noise_power, seed)
    return x.with_samples(x.samples + noise.samples)


def _draw_taps(scenario: ChannelScenario, n_blocks: int, rng) -> np.ndarray:
    powers = np.array([p for _, p in scenario.taps])
    h = (rng.standard_normal((n_blocks, len(powers)))
         + 1j * rng.standard_normal((n_blocks, len(powers))))
    return h * np.sqrt(powers / 2.0)


def fade(x: ComplexSeries, scenario: ChannelScenario, seed) -> ComplexSeries:
    """Random FIR with the scenario's mean tap powers, block-constant per 10 ms.

    The awgn scenario passes through untouched (noise is added separately);
    flat_rayleigh is the single-tap special case.
    """
    if scenario.is_identity:
        return x
    delays = [d for d, _ in scenario.taps]
    if delays[-1] >= len(x):
        raise InvalidArgument(f"max tap delay {delays[-1]} exceeds series length")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    block = max(int(round(QUASI_STATIC_BLOCK_S * x.sample_rate)), 1)
    n_blocks = -(-len(x) // block)
    h = _draw_taps(scenario, n_blocks, rng)
    per_sample = np.repeat(h, block, axis=0)[:len(x)]
    out = np.zeros_like(x.samples)
    for k, (d, _) in enumerate(scenario.taps):
        if d == 0:
            out += per_sample[:, k] * x.samples
        else:
            out[d:] += per_sample[d:, k] * x.samples[:-d]
    return x.with_samples(out)


def _fft_convolve_same(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Linear convolution via FFT, trimmed to 'same' alignment."""
    n = len(x) + len(h) - 1
    nfft = 1 << (n - 1).bit_length()
    y = np.fft.ifft(np.fft.fft(x, nfft) * np.fft.fft(h, nfft))[:n]
    start = (len(h) - 1) // 2
    return y[start:start + len(x)]


def bandlimit(x: ComplexSeries, center_freq_norm: float, half_bw_norm: float,
              n_taps: int = 1025, beta: float = 11.0) -> ComplexSeries:
    """Kaiser-windowed-sinc FIR band-pass around a normalized center frequency.

    Stands in for transmit spectrum shaping and the telescope band match; the
    group delay is compensated (same-length output).
    """
    if not 0 < half_bw_norm < 0.5:
        raise InvalidArgument("half_bw_norm must be in (0, 0.5)")
    k = np.arange(n_taps) - (n_taps - 1) / 2
    h = 2.0 * half_bw_norm * np.sinc(2.0 * half_bw_norm * k) * np.kaiser(n_taps, beta)
    h = (h / h.sum()).astype(np.complex128)
    n = np.arange(len(x))
    shifted = x.samples * np.exp(-2j * np.pi * center_freq_norm * n)
    filtered = _fft_convolve_same(shifted, h)
    return x.with_samples(filtered * np.exp(2j * np.pi * center_freq_norm * n))


@dataclass(frozen=True)
class UplinkPath:
    to_bs: ComplexSeries
    to_telescope: ComplexSeries
    tx_power_dbm: float
    bs_loss_db: float
    telescope_loss_db: float


def composite_uplink_path(ue: UeGeometry, scenario: ChannelScenario,
                          budget: LinkBudget, x: ComplexSeries, seed) -> UplinkPath:
    """Split one UE transmission into its BS and telescope arrivals.

    Geometry: the UE sits on the BS-telescope axis at ``d_n`` from the BS, so
    the telescope path length is ``R - d_n`` with the scenario fading applied
    to the in-cell segment (both arrivals share the same fading draw).  Power
    control exactly cancels the in-cell inverse-square loss, making the BS
    arrival power independent of ``d_n``.
    """
    r_cell = scenario.cell_radius_m
    if ue.distance_m > r_cell:
        raise InvalidArgument("UE outside the cell")
    p_dbm = uplink_power_dbm(ue, r_cell)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    faded = fade(x, scenario, rng)
    tx = apply_gain_db(faded, p_dbm)
    bs_loss = budget.path_loss_db(ue.distance_m)
    tel_dist = max(budget.distance_km * 1000.0 - ue.distance_m, 1.0)
    tel_loss = budget.path_loss_db(tel_dist)
    to_bs = apply_gain_db(tx, -bs_loss)
    to_tel = apply_gain_db(tx, -tel_loss + budget.sidelobe_gain_dbi)
    return UplinkPath(to_bs, to_tel, p_dbm, bs_loss, tel_loss)
