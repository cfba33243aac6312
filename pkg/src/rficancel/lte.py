"""LTE-shaped baseband synthesis: resource grids, OFDMA downlink and SC-FDMA
uplink waveforms, synchronization sequences, and uplink power control."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, ShapeError
from .signals import ComplexSeries

# (bandwidth_mhz, sampling_freq_hz, n_fft, n_subcarrier incl DC, n_guard, resource blocks)
LTE_TABLE = (
    (1.25, 1.92e6, 128, 76, 52, 6),
    (2.5, 3.84e6, 256, 151, 105, 12),
    (5.0, 7.68e6, 512, 301, 211, 25),
    (10.0, 15.36e6, 1024, 601, 423, 50),
    (15.0, 23.04e6, 1536, 901, 635, 75),
    (20.0, 30.72e6, 2048, 1201, 847, 100),
)

SUBCARRIERS_PER_RB = 12
SLOTS_PER_FRAME = 20
FRAME_DURATION_S = 10e-3
PSS_ROOTS = (25, 29, 34)

_BITS_PER_SYMBOL = {"qpsk": 2, "qam16": 4, "qam64": 6}


@dataclass(frozen=True)
class LteConfig:
    """One row of the standard parameter table plus the CP mode."""

    bandwidth_mhz: float
    sampling_freq_hz: float
    n_fft: int
    n_subcarrier: int
    n_guard: int
    n_resource_blocks: int
    cp_mode: str = "short"

    def __post_init__(self):
        row = (self.bandwidth_mhz, self.sampling_freq_hz, self.n_fft,
               self.n_subcarrier, self.n_guard, self.n_resource_blocks)
        if row not in LTE_TABLE:
            raise InvalidArgument(
                f"parameters {row} do not form a standard table row; "
                f"use LteConfig.from_bandwidth()")
        if self.n_subcarrier + self.n_guard > self.n_fft:
            raise InvalidArgument("subcarriers + guards exceed FFT size")
        if self.cp_mode not in ("short", "long"):
            raise InvalidArgument(f"cp_mode must be short|long, got {self.cp_mode!r}")

    @classmethod
    def from_bandwidth(cls, bandwidth_mhz: float, cp_mode: str = "short") -> "LteConfig":
        for bw, fs, nfft, nsc, ng, nrb in LTE_TABLE:
            if bw == bandwidth_mhz:
                return cls(bw, fs, nfft, nsc, ng, nrb, cp_mode)
        raise InvalidArgument(f"no table row for bandwidth {bandwidth_mhz} MHz")

    @property
    def symbols_per_slot(self) -> int:
        return 7 if self.cp_mode == "short" else 6

    @property
    def n_data_subcarriers(self) -> int:
        return SUBCARRIERS_PER_RB * self.n_resource_blocks

    def subcarrier_offsets(self) -> np.ndarray:
        """DC-relative offsets of the data subcarriers, ascending; DC unused."""
        h = self.n_data_subcarriers // 2
        return np.concatenate([np.arange(-h, 0), np.arange(1, h + 1)])

    def cp_lengths_per_slot(self) -> list[int]:
        """Standard 160/144-sample pattern scaled by n_fft/2048; long CP n_fft/4."""
        if self.cp_mode == "short":
            cp_a = 160 * self.n_fft // 2048
            cp_b = 144 * self.n_fft // 2048
            return [cp_a] + [cp_b] * 6
        return [self.n_fft // 4] * 6

    @property
    def slot_samples(self) -> int:
        return sum(self.cp_lengths_per_slot()) + self.symbols_per_slot * self.n_fft

    @property
    def frame_samples(self) -> int:
        return SLOTS_PER_FRAME * self.slot_samples


@dataclass(frozen=True)
class UeGeometry:
    """User-equipment placement inside the cell."""

    distance_m: float
    p_max_dbm: float = 23.0

    def __post_init__(self):
        if not self.distance_m > 0:
            raise InvalidArgument("distance_m must be > 0")


def modulate(bits, scheme: str) -> np.ndarray:
    """Gray-mapped unit-average-energy constellation symbols (3GPP tables)."""
    scheme = scheme.lower()
    if scheme not in _BITS_PER_SYMBOL:
        raise InvalidArgument(f"unknown scheme {scheme!r}")
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidArgument("bits must be 0/1")
    bps = _BITS_PER_SYMBOL[scheme]
    if bits.size % bps:
        raise InvalidArgument(f"bit count {bits.size} not divisible by {bps}")
    b = 1 - 2 * bits.reshape(-1, bps)  # 0 -> +1, 1 -> -1
    if scheme == "qpsk":
        return (b[:, 0] + 1j * b[:, 1]) / np.sqrt(2.0)
    if scheme == "qam16":
        i = b[:, 0] * (2 - b[:, 2])
        q = b[:, 1] * (2 - b[:, 3])
        return (i + 1j * q) / np.sqrt(10.0)
    i = b[:, 0] * (4 - b[:, 2] * (2 - b[:, 4]))
    q = b[:, 1] * (4 - b[:, 3] * (2 - b[:, 5]))
    return (i + 1j * q) / np.sqrt(42.0)


def pss_sequence(root: int) -> np.ndarray:
    """Length-62 Zadoff-Chu synchronization sequence (length 63, DC punctured)."""
    if root not in PSS_ROOTS:
        raise InvalidArgument(f"root must be one of {PSS_ROOTS}")
    n = np.arange(63)
    zc = np.exp(-1j * np.pi * root * n * (n + 1) / 63.0)
    return np.delete(zc, 31)


@dataclass(frozen=True)
class ResourceGrid:
    """Time-frequency grid of modulated symbols before waveform synthesis.

    ``cells`` rows follow ``cfg.subcarrier_offsets()`` (ascending, DC skipped);
    columns are OFDM symbols.  ``allocation_map[rb, slot]`` holds the owner id
    (0 = empty; downlink uses a single owner 1, uplink one id per UE).
    """

    cfg: LteConfig
    cells: np.ndarray
    allocation_map: np.ndarray

    def __post_init__(self):
        n_data = self.cfg.n_data_subcarriers
        if self.cells.shape[0] != n_data:
            raise ShapeError(f"cells rows {self.cells.shape[0]} != {n_data}")
        n_slots = self.allocation_map.shape[1]
        if self.cells.shape[1] != n_slots * self.cfg.symbols_per_slot:
            raise ShapeError("cells columns inconsistent with allocation map slots")
        if self.allocation_map.shape[0] != self.cfg.n_resource_blocks:
            raise ShapeError("allocation map rows != resource blocks")

    @property
    def n_slots(self) -> int:
        return self.allocation_map.shape[1]

    @property
    def n_symbols(self) -> int:
        return self.cells.shape[1]

    @property
    def occupancy_fraction(self) -> float:
        return float(np.count_nonzero(self.allocation_map) / self.allocation_map.size)

    def dump_csv(self, path) -> None:
        offs = self.cfg.subcarrier_offsets()
        sps = self.cfg.symbols_per_slot
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subcarrier", "symbol", "re", "im", "owner"])
            for i, off in enumerate(offs):
                rb = i // SUBCARRIERS_PER_RB
                for t in range(self.n_symbols):
                    c = self.cells[i, t]
                    owner = int(self.allocation_map[rb, t // sps])
                    w.writerow([int(off), t, f"{c.real:.9g}", f"{c.imag:.9g}", owner])


def _pss_row_indices(cfg: LteConfig) -> np.ndarray:
    """Cell-row indices of the central 62 subcarriers (offsets -31..-1, 1..31)."""
    h = cfg.n_data_subcarriers // 2
    lo = np.arange(-31, 0) + h
    hi = np.arange(1, 32) + h - 1
    return np.concatenate([lo, hi])


def _fill_grid(cfg: LteConfig, scheme: str, n_frames: int, seed, chooser,
               embed_pss: bool, pss_root: int) -> ResourceGrid:
    n_rb = cfg.n_resource_blocks
    sps = cfg.symbols_per_slot
    n_slots = SLOTS_PER_FRAME * n_frames
    cells = np.zeros((cfg.n_data_subcarriers, n_slots * sps), dtype=np.complex128)
    alloc = np.zeros((n_rb, n_slots), dtype=np.int64)
    bps = _BITS_PER_SYMBOL[scheme.lower()]

    if isinstance(seed, np.random.Generator):
        streams = seed.spawn(n_frames)
    else:
        streams = [np.random.default_rng(s)
                   for s in np.random.SeedSequence(seed).spawn(n_frames)]
    for fr, rng in enumerate(streams):
        chosen, owners = chooser(rng)
        slot0 = fr * SLOTS_PER_FRAME
        alloc[chosen, slot0:slot0 + SLOTS_PER_FRAME] = owners[:, None]
        if chosen.size:
            rows = (chosen[:, None] * SUBCARRIERS_PER_RB
                    + np.arange(SUBCARRIERS_PER_RB)[None, :]).ravel()
            n_sym_frame = SLOTS_PER_FRAME * sps
            bits = rng.integers(0, 2, size=rows.size * n_sym_frame * bps)
            syms = modulate(bits, scheme).reshape(rows.size, n_sym_frame)
            t0 = slot0 * sps
            cells[rows, t0:t0 + n_sym_frame] = syms

    if embed_pss:
        pss = pss_sequence(pss_root)
        rows = _pss_row_indices(cfg)
        for fr in range(n_frames):
            # last two symbols of slot 0 of subframes 0 and 5: the second-to-last
            # carries a PSS-like secondary marker, the last the PSS itself
            for slot in (fr * SLOTS_PER_FRAME, fr * SLOTS_PER_FRAME + 10):
                for sym in (slot * sps + sps - 2, slot * sps + sps - 1):
                    cells[rows, sym] = pss
    return ResourceGrid(cfg, cells, alloc)


def build_grid(cfg: LteConfig, occupancy: float, scheme: str, n_frames: int, seed,
               embed_pss: bool = True, pss_root: int = 25) -> ResourceGrid:
    """Downlink grid: per frame, a uniformly random resource-block subset of
    the nearest achievable fraction is loaded with random symbols (owner 1);
    each frame draws from its own seed stream."""
    if not 0 <= occupancy <= 1:
        raise InvalidArgument("occupancy must be in [0, 1]")
    if n_frames < 1:
        raise InvalidArgument("n_frames must be >= 1")
    n_rb = cfg.n_resource_blocks
    n_occ = int(round(occupancy * n_rb))

    def chooser(rng):
        chosen = np.sort(rng.permutation(n_rb)[:n_occ])
        return chosen, np.ones(n_occ, dtype=np.int64)

    return _fill_grid(cfg, scheme, n_frames, seed, chooser, embed_pss, pss_root)


def build_uplink_grid(cfg: LteConfig, occupancy: float, scheme: str, n_frames: int,
                      seed, n_ues: int, embed_pss: bool = False,
                      pss_root: int = 25) -> ResourceGrid:
    """Uplink grid: per frame the occupied blocks form one random contiguous
    run split contiguously among the UEs, so every owner's subcarriers satisfy
    the SC-FDMA contiguity requirement."""
    if not 0 <= occupancy <= 1:
        raise InvalidArgument("occupancy must be in [0, 1]")
    if n_ues < 1:
        raise InvalidArgument("n_ues must be >= 1")
    n_rb = cfg.n_resource_blocks
    n_occ = int(round(occupancy * n_rb))

    def chooser(rng):
        start = int(rng.integers(0, n_rb - n_occ + 1)) if n_occ < n_rb else 0
        chosen = np.arange(start, start + n_occ)
        owners = np.zeros(n_occ, dtype=np.int64)
        bounds = np.linspace(0, n_occ, n_ues + 1).astype(int)
        for u in range(n_ues):
            owners[bounds[u]:bounds[u + 1]] = u + 1
        return chosen, owners

    return _fill_grid(cfg, scheme, n_frames, seed, chooser, embed_pss, pss_root)


def owner_allocations(grid: ResourceGrid, owner: int, slot: int) -> list[tuple[int, int]]:
    """Contiguous (start, length) data-subcarrier runs of an owner in a slot."""
    rbs = np.flatnonzero(grid.allocation_map[:, slot] == owner)
    runs: list[tuple[int, int]] = []
    for rb in rbs:
        start = int(rb) * SUBCARRIERS_PER_RB
        if runs and runs[-1][0] + runs[-1][1] == start:
            runs[-1] = (runs[-1][0], runs[-1][1] + SUBCARRIERS_PER_RB)
        else:
            runs.append((start, SUBCARRIERS_PER_RB))
    return runs


def scfdma_waveform_by_owner(grid: ResourceGrid, cfg: LteConfig,
                             owner: int) -> ComplexSeries:
    """Synthesize one owner's uplink contribution frame by frame, following
    the per-frame allocation in the grid."""
    sps = cfg.symbols_per_slot
    parts = []
    for fr in range(grid.n_slots // SLOTS_PER_FRAME):
        s0 = fr * SLOTS_PER_FRAME
        sub = ResourceGrid(cfg,
                           grid.cells[:, s0 * sps:(s0 + SLOTS_PER_FRAME) * sps],
                           grid.allocation_map[:, s0:s0 + SLOTS_PER_FRAME])
        alloc = owner_allocations(grid, owner, s0)
        parts.append(scfdma_waveform(sub, cfg, alloc).samples)
    return ComplexSeries(np.concatenate(parts), cfg.sampling_freq_hz)


def _assemble(cfg: LteConfig, symbols_time: np.ndarray) -> np.ndarray:
    """Prepend per-symbol cyclic prefixes and serialize slot by slot."""
    n_sym = symbols_time.shape[0]
    sps = cfg.symbols_per_slot
    if n_sym % sps:
        raise ShapeError("symbol count not a whole number of slots")
    cps = cfg.cp_lengths_per_slot()
    out = np.empty(n_sym // sps * cfg.slot_samples, dtype=np.complex128)
    pos = 0
    for s in range(n_sym):
        cp = cps[s % sps]
        sym = symbols_time[s]
        out[pos:pos + cp] = sym[-cp:]
        out[pos + cp:pos + cp + cfg.n_fft] = sym
        pos += cp + cfg.n_fft
    return out


def ofdma_waveform(grid: ResourceGrid, cfg: LteConfig) -> ComplexSeries:
    """Downlink synthesis: unitary inverse DFT per symbol plus cyclic prefix."""
    if grid.cfg != cfg:
        raise ShapeError("grid was built for a different configuration")
    bins = cfg.subcarrier_offsets() % cfg.n_fft
    spec = np.zeros((grid.n_symbols, cfg.n_fft), dtype=np.complex128)
    spec[:, bins] = grid.cells.T
    syms = np.fft.ifft(spec, axis=1) * np.sqrt(cfg.n_fft)
    return ComplexSeries(_assemble(cfg, syms), cfg.sampling_freq_hz)


def demodulate_ofdma(x: ComplexSeries, cfg: LteConfig) -> np.ndarray:
    """Loopback receiver: strip CPs, forward unitary DFT, demap data rows."""
    n_sym_total = len(x) // cfg.slot_samples * cfg.symbols_per_slot
    if n_sym_total == 0 or len(x) % cfg.slot_samples:
        raise ShapeError("series length is not a whole number of slots")
    cps = cfg.cp_lengths_per_slot()
    sps = cfg.symbols_per_slot
    syms = np.empty((n_sym_total, cfg.n_fft), dtype=np.complex128)
    pos = 0
    for s in range(n_sym_total):
        cp = cps[s % sps]
        syms[s] = x.samples[pos + cp:pos + cp + cfg.n_fft]
        pos += cp + cfg.n_fft
    spec = np.fft.fft(syms, axis=1) / np.sqrt(cfg.n_fft)
    bins = cfg.subcarrier_offsets() % cfg.n_fft
    return spec[:, bins].T


def scfdma_waveform(grid: ResourceGrid, cfg: LteConfig, ue_alloc) -> ComplexSeries:
    """Uplink synthesis: per-UE DFT precoding onto contiguous subcarriers.

    ``ue_alloc`` is a sequence of ``(start, length)`` ranges in data-subcarrier
    row indices.  Only allocated cells are transmitted; a range of length 1
    degenerates to plain OFDMA on that subcarrier.
    """
    if grid.cfg != cfg:
        raise ShapeError("grid was built for a different configuration")
    n_data = cfg.n_data_subcarriers
    taken = np.zeros(n_data, dtype=bool)
    for start, length in ue_alloc:
        if length < 1 or start < 0 or start + length > n_data:
            raise InvalidArgument(f"allocation ({start},{length}) out of range")
        if length >= cfg.n_fft:
            raise InvalidArgument("allocation must be smaller than the FFT size")
        if taken[start:start + length].any():
            raise InvalidArgument("overlapping UE allocations")
        taken[start:start + length] = True
    bins = cfg.subcarrier_offsets() % cfg.n_fft
    spec = np.zeros((grid.n_symbols, cfg.n_fft), dtype=np.complex128)
    for start, length in ue_alloc:
        block = grid.cells[start:start + length, :]
        precoded = np.fft.fft(block, axis=0) / np.sqrt(length)
        spec[:, bins[start:start + length]] = precoded.T
    syms = np.fft.ifft(spec, axis=1) * np.sqrt(cfg.n_fft)
    return ComplexSeries(_assemble(cfg, syms), cfg.sampling_freq_hz)


def uplink_power_dbm(ue: UeGeometry, d_max: float, floor_dbm: float = -40.0) -> float:
    """Open-loop power control: P_max scaled by (d/d_max)^2, floored."""
    if ue.distance_m > d_max:
        raise InvalidArgument(f"UE at {ue.distance_m} m outside cell radius {d_max} m")
    dbm = ue.p_max_dbm + 20.0 * np.log10(ue.distance_m / d_max)
    return max(dbm, floor_dbm)
