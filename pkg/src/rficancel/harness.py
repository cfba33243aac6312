"""Scenario configuration, Monte-Carlo trial execution, and sweep reporting."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import channel as chan
from . import channelizer, klt, lte, metrics, signals
from .cancel import cancel_pipeline
from .errors import ConfigError, RficancelError
from .signals import ComplexSeries, power

SWEEP_AXES = ("inr", "occupancy", "sync_error", "window_length", "ue_distance", "scenario")
CSV_COLUMNS = ("axis", "trial", "seed", "rqf", "removal_fraction", "inr_db", "error_code")
AGG_COLUMNS = ("axis", "rqf_mean", "rqf_median", "rqf_std", "n")


@dataclass(frozen=True)
class UeConfig:
    distance_m: float = 800.0
    center_freq_offset_hz: float = 0.0


@dataclass(frozen=True)
class LteSection:
    bandwidth_mhz: float = 10.0
    cp_mode: str = "short"
    link_direction: str = "downlink"
    modulation: str = "qpsk"
    occupancy: float = 0.7
    char_frames: int = 8
    eval_frames: int = 2
    pss_root: int = 25
    center_freq_offset_norm: float | None = None
    tx_bandlimit: bool = True
    tx_margin_norm: float = 0.002
    tx_taps: int = 1025
    tx_beta: float = 11.0
    ues: tuple = (UeConfig(),)


@dataclass(frozen=True)
class ChannelSection:
    scenario: str = "awgn"
    propagation_loss_db: float = 92.46
    sidelobe_gain_dbi: float = -40.0
    distance_km: float = 20.0
    use_fspl: bool = False
    bs_char_inr_offset_db: float = 16.0
    cell_radius_m: float | None = None
    taps: tuple | None = None


@dataclass(frozen=True)
class KltSection:
    window_length: int = 100
    truncation_threshold: float = 0.01
    truncate_phi_t: bool = False
    char_window: str = "preceding"  # or "same"
    eval_samples: int | None = None  # analysis block length (channel samples)


@dataclass(frozen=True)
class TelescopeSection:
    inr_db: float = 5.0
    noise_power: float = 3e-3
    astro_power: float = 1.0
    line_width_norm: float = 2e-3
    line_offset_in_channel: float = 0.12
    n_channels: int = 4
    channel_index: int = 1
    edge_frac: float = 0.25
    pfb_taps_per_branch: int = 24
    pfb_beta: float = 11.0
    coarse_select: bool = True
    coarse_margin: float = 0.1
    characterization_site: str = "bs"
    coarse_bw_hz: float = 11.7e6
    fine_bw_hz: float = 30.5e3


@dataclass(frozen=True)
class SweepSection:
    axis: str = "inr"
    grid: tuple = (-10.0, 0.0, 10.0, 20.0)


@dataclass(frozen=True)
class BudgetSection:
    duration_s: float = 4.0
    assumed_components: int | None = None  # default: 60% of the window length
    bits_per_entry: int = 32
    rfi_bw_hz: float | None = None  # default: the LTE channel bandwidth


@dataclass(frozen=True)
class ScenarioConfig:
    lte: LteSection = field(default_factory=LteSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    klt: KltSection = field(default_factory=KltSection)
    telescope: TelescopeSection = field(default_factory=TelescopeSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    budget: BudgetSection = field(default_factory=BudgetSection)
    trials: int = 20
    base_seed: int = 20210515
    output_path: str = "sweep.csv"

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if not self.sweep.grid:
            raise ConfigError("sweep.grid: must be non-empty")
        if self.sweep.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: {self.sweep.axis!r} not in {SWEEP_AXES}")
        if self.lte.link_direction not in ("downlink", "uplink"):
            raise ConfigError("lte.link_direction: must be downlink|uplink")
        if self.lte.link_direction == "uplink" and not self.lte.ues:
            raise ConfigError("lte.ues: uplink needs at least one UE")
        if not 0 <= self.lte.occupancy <= 1:
            raise ConfigError("lte.occupancy: must be in [0, 1]")
        if self.lte.char_frames < 0 or self.lte.eval_frames < 1:
            raise ConfigError("lte frame counts: char >= 0, eval >= 1 required")
        if self.klt.char_window not in ("preceding", "same"):
            raise ConfigError("klt.char_window: must be preceding|same")
        if self.klt.char_window == "preceding" and self.lte.char_frames < 1:
            raise ConfigError("lte.char_frames: preceding characterization needs >= 1")
        if not 0 < self.klt.truncation_threshold <= 1:
            raise ConfigError("klt.truncation_threshold: must be in (0, 1]")
        if self.telescope.characterization_site not in ("bs", "telescope"):
            raise ConfigError("telescope.characterization_site: must be bs|telescope")
        if self.telescope.n_channels < 1:
            raise ConfigError("telescope.n_channels: must be >= 1")
        if not 0 <= self.telescope.channel_index < self.telescope.n_channels:
            raise ConfigError("telescope.channel_index: outside channel range")
        if self.telescope.noise_power <= 0:
            raise ConfigError("telescope.noise_power: must be > 0")
        if self.channel.scenario not in chan.SCENARIO_NAMES:
            raise ConfigError(f"channel.scenario: unknown {self.channel.scenario!r}")
        try:
            self.lte_config()
        except RficancelError as exc:
            raise ConfigError(f"lte: {exc}") from exc
        n = self.telescope.n_channels
        if self.lte_config().frame_samples % n:
            raise ConfigError("telescope.n_channels: must divide the frame length")

    def lte_config(self) -> lte.LteConfig:
        return lte.LteConfig.from_bandwidth(self.lte.bandwidth_mhz, self.lte.cp_mode)

    def center_offset_norm(self) -> float:
        """LTE band-center offset placing the upper band edge ``edge_frac`` of
        the way into the evaluated channel (unless configured explicitly)."""
        if self.lte.center_freq_offset_norm is not None:
            return self.lte.center_freq_offset_norm
        cfg = self.lte_config()
        tel = self.telescope
        n = tel.n_channels
        band_half = (cfg.n_data_subcarriers // 2) / cfg.n_fft
        channel_lo = tel.channel_index / n - 0.5 / n
        return channel_lo + tel.edge_frac / n - band_half

    def line_freq_norm(self) -> float:
        tel = self.telescope
        return (tel.channel_index + tel.line_offset_in_channel) / tel.n_channels


def derive_seed(base_seed: int, axis_index: int, trial_index: int) -> int:
    digest = hashlib.blake2b(
        f"{base_seed}:{axis_index}:{trial_index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class TrialRow:
    axis_value: object
    trial_index: int
    seed: int
    rqf: float | None
    removal_fraction: float | None
    inr_db: float | None
    error_code: str = ""


@dataclass(frozen=True)
class SweepReport:
    config: ScenarioConfig
    rows: tuple
    aggregates: tuple  # (axis_value, rqf_mean, rqf_median, rqf_std, n)


def _apply_axis(cfg: ScenarioConfig, axis_value) -> ScenarioConfig:
    axis = cfg.sweep.axis
    if axis == "inr":
        return replace(cfg, telescope=replace(cfg.telescope, inr_db=float(axis_value)))
    if axis == "occupancy":
        return replace(cfg, lte=replace(cfg.lte, occupancy=float(axis_value)))
    if axis == "window_length":
        return replace(cfg, klt=replace(cfg.klt, window_length=int(axis_value)))
    if axis == "scenario":
        return replace(cfg, channel=replace(cfg.channel, scenario=str(axis_value)))
    if axis == "ue_distance":
        ues = tuple(replace(u, distance_m=float(axis_value)) for u in cfg.lte.ues)
        return replace(cfg, lte=replace(cfg.lte, ues=ues))
    return cfg  # sync_error handled inside the trial


def _freq_shift(x: ComplexSeries, f_norm: float) -> ComplexSeries:
    if f_norm == 0.0:
        return x
    ramp = np.exp(2j * np.pi * f_norm * np.arange(len(x)))
    return x.with_samples(x.samples * ramp)


def _channel_series(x: ComplexSeries, n: int, proto, index: int) -> ComplexSeries:
    return channelizer.channelize(x, n, proto)[index]


def _rfi_waveforms(cfg: ScenarioConfig, rng_grid, rng_fade):
    """Synthesize the full-rate RFI as seen at the source and at the telescope
    input (before injection scaling).  The two differ by channel fading and,
    for uplink, by the per-UE path geometry; deterministic gains drop out of
    the characterization, which is scale-invariant."""
    lcfg = cfg.lte_config()
    n_frames = cfg.lte.char_frames + cfg.lte.eval_frames
    f_off = cfg.center_offset_norm()
    scen = chan.make_scenario(cfg.channel.scenario, lcfg.sampling_freq_hz,
                              cell_radius_m=cfg.channel.cell_radius_m,
                              taps=cfg.channel.taps)
    budget = chan.LinkBudget(cfg.channel.propagation_loss_db,
                             cfg.channel.sidelobe_gain_dbi,
                             cfg.channel.distance_km, cfg.channel.use_fspl)

    if cfg.lte.link_direction == "downlink":
        grid = lte.build_grid(lcfg, cfg.lte.occupancy, cfg.lte.modulation,
                              n_frames, rng_grid, pss_root=cfg.lte.pss_root)
        x = lte.ofdma_waveform(grid, lcfg)
        x = _freq_shift(x, f_off)
        if cfg.lte.tx_bandlimit:
            half = (lcfg.n_data_subcarriers // 2) / lcfg.n_fft + cfg.lte.tx_margin_norm
            x = chan.bandlimit(x, f_off, half, cfg.lte.tx_taps, cfg.lte.tx_beta)
        source = x
        incident = chan.fade(x, scen, rng_fade)
        return source, incident

    n_ues = len(cfg.lte.ues)
    grid = lte.build_uplink_grid(lcfg, cfg.lte.occupancy, cfg.lte.modulation,
                                 n_frames, rng_grid, n_ues)
    at_bs = None
    at_tel = None
    for u, ue_cfg in enumerate(cfg.lte.ues, start=1):
        x_u = lte.scfdma_waveform_by_owner(grid, lcfg, u)
        ue_off = f_off + ue_cfg.center_freq_offset_hz / lcfg.sampling_freq_hz
        x_u = _freq_shift(x_u, ue_off)
        if cfg.lte.tx_bandlimit:
            half = (lcfg.n_data_subcarriers // 2) / lcfg.n_fft + cfg.lte.tx_margin_norm
            x_u = chan.bandlimit(x_u, ue_off, half, cfg.lte.tx_taps, cfg.lte.tx_beta)
        ue = lte.UeGeometry(ue_cfg.distance_m)
        path = chan.composite_uplink_path(ue, scen, budget, x_u, rng_fade)
        at_bs = path.to_bs if at_bs is None else signals.mix(at_bs, path.to_bs)
        at_tel = path.to_telescope if at_tel is None else signals.mix(at_tel, path.to_telescope)
    return at_bs, at_tel


def run_trial(cfg: ScenarioConfig, axis_value, trial_seed: int,
              trial_index: int = 0) -> TrialRow:
    """One deterministic Monte-Carlo trial; failures become error rows."""
    try:
        return _run_trial_inner(cfg, axis_value, trial_seed, trial_index)
    except RficancelError as exc:
        return TrialRow(axis_value, trial_index, trial_seed, None, None, None,
                        type(exc).__name__)


def _run_trial_inner(cfg: ScenarioConfig, axis_value, trial_seed: int,
                     trial_index: int) -> TrialRow:
    cfg = _apply_axis(cfg, axis_value)
    sync_delay = int(axis_value) if cfg.sweep.axis == "sync_error" else 0
    tel = cfg.telescope
    lcfg = cfg.lte_config()
    L = cfg.klt.window_length

    ss = np.random.SeedSequence(trial_seed).spawn(5)
    rng_grid, rng_fade, rng_noise, rng_line, rng_char = (
        np.random.default_rng(s) for s in ss)

    source, incident = _rfi_waveforms(cfg, rng_grid, rng_fade)

    n = tel.n_channels
    proto = (channelizer.pfb_prototype(n, tel.pfb_taps_per_branch, tel.pfb_beta)
             if n > 1 else None)
    if tel.coarse_select and n > 1:
        # coarse band selection ahead of the fine filterbank (both sites run the
        # same receive chain); only the interference needs it, since the noise
        # and the line carry no strong out-of-channel structure to fold in
        center = tel.channel_index / n
        half = (0.5 + tel.coarse_margin) / n
        source = chan.bandlimit(source, center, half)
        incident = (source if incident is source
                    else chan.bandlimit(incident, center, half))
    frame_ch = lcfg.frame_samples // n
    rfi_src_ch = _channel_series(source, n, proto, tel.channel_index)
    rfi_tel_ch = (rfi_src_ch if incident is source
                  else _channel_series(incident, n, proto, tel.channel_index))

    if cfg.klt.char_window == "preceding":
        char_lo, char_hi = 0, cfg.lte.char_frames * frame_ch
        eval_lo = char_hi
        eval_hi = eval_lo + cfg.lte.eval_frames * frame_ch
    else:
        char_lo, char_hi = 0, cfg.lte.eval_frames * frame_ch
        eval_lo, eval_hi = 0, char_hi
    if cfg.klt.eval_samples is not None:
        eval_hi = min(eval_hi, eval_lo + cfg.klt.eval_samples)

    noise_full = signals.gen_circular_gaussian(
        len(incident), tel.noise_power, rng_noise, lcfg.sampling_freq_hz)
    noise_ch = _channel_series(noise_full, n, proto, tel.channel_index)
    noise_eval = noise_ch.samples[eval_lo:eval_hi]
    sigma_nch = float(np.mean(np.abs(noise_ch.samples) ** 2))

    rate_ch = rfi_tel_ch.sample_rate
    rfi_eval_series = ComplexSeries(rfi_tel_ch.samples[eval_lo:eval_hi], rate_ch)
    if sync_delay:
        # synchronization error: the telescope's analysis window lags the
        # shared eigenspace by whole cancellation-domain samples
        rfi_eval_series = signals.delay_samples(rfi_eval_series, sync_delay)
    rfi_eval = rfi_eval_series.samples
    scale = np.sqrt(10 ** (tel.inr_db / 10) * sigma_nch
                    / max(np.mean(np.abs(rfi_eval) ** 2), 1e-300))
    rfi_eval = rfi_eval * scale

    if tel.characterization_site == "bs":
        char_rfi = rfi_src_ch.samples[char_lo:char_hi] * scale
        char_inr_db = tel.inr_db + cfg.channel.bs_char_inr_offset_db
        p_char = float(np.mean(np.abs(char_rfi) ** 2))
        char_noise = signals.gen_circular_gaussian(
            len(incident), 1.0, rng_char).samples
        char_noise_ch = _channel_series(
            ComplexSeries(char_noise, lcfg.sampling_freq_hz), n, proto,
            tel.channel_index).samples[char_lo:char_hi]
        char_noise_ch *= np.sqrt(p_char / 10 ** (char_inr_db / 10)
                                 / max(np.mean(np.abs(char_noise_ch) ** 2), 1e-300))
    else:
        char_rfi = rfi_tel_ch.samples[char_lo:char_hi] * scale
        char_noise = signals.gen_circular_gaussian(
            len(incident), tel.noise_power, rng_char).samples
        char_noise_ch = _channel_series(
            ComplexSeries(char_noise, lcfg.sampling_freq_hz), n, proto,
            tel.channel_index).samples[char_lo:char_hi]
    char_in = ComplexSeries(char_rfi + char_noise_ch, rate_ch)

    phi_r = klt.characterize(char_in, L, cfg.klt.truncation_threshold)

    line_full = signals.gen_narrowband_gaussian(
        len(incident), tel.astro_power, cfg.line_freq_norm(),
        tel.line_width_norm / n, rng_line, lcfg.sampling_freq_hz)
    line_eval = _channel_series(line_full, n, proto,
                                tel.channel_index).samples[eval_lo:eval_hi]

    x_tilde = ComplexSeries(line_eval + noise_eval, rate_ch)
    incident_series = ComplexSeries(rfi_eval, rate_ch)
    x_t = ComplexSeries(x_tilde.samples + rfi_eval, rate_ch)

    x_hat = cancel_pipeline(x_t, phi_r, L, cfg.klt.truncate_phi_t,
                            cfg.klt.truncation_threshold)
    q = metrics.rqf(x_tilde, x_hat)
    rem = metrics.removal_fraction(incident_series, x_t, x_hat)
    measured = signals.inr_db(incident_series, sigma_nch)
    return TrialRow(axis_value, trial_index, trial_seed, q.value, rem.value,
                    measured)


def run_sweep(cfg: ScenarioConfig, threads: int = 1) -> SweepReport:
    """Grid x trials with derived seeds; trial failures never abort the sweep."""
    cfg.validate()
    jobs = [(ai, v, ti, derive_seed(cfg.base_seed, ai, ti))
            for ai, v in enumerate(cfg.sweep.grid)
            for ti in range(cfg.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda j: run_trial(cfg, j[1], j[3], j[2]), jobs))
    else:
        rows = [run_trial(cfg, v, seed, ti) for _, v, ti, seed in jobs]
    # pool.map preserves job order, so rows are already sorted by
    # (axis index, trial index) regardless of execution interleaving
    aggregates = []
    for v in cfg.sweep.grid:
        vals = [r.rqf for r in rows if r.axis_value == v and r.error_code == ""]
        if vals:
            aggregates.append((v, float(np.mean(vals)), float(np.median(vals)),
                               float(np.std(vals)), len(vals)))
        else:
            aggregates.append((v, None, None, None, 0))
    return SweepReport(cfg, tuple(rows), tuple(aggregates))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_report_csv(report: SweepReport, path: str) -> None:
    """Trial rows to ``path`` (fixed column order) and aggregates to
    ``<path>.agg.csv``; byte-identical across reruns of the same config."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in report.rows:
            fh.write(",".join([
                _fmt(r.axis_value), str(r.trial_index), str(r.seed),
                _fmt(r.rqf), _fmt(r.removal_fraction), _fmt(r.inr_db),
                r.error_code]) + "\n")
    with open(str(path) + ".agg.csv", "w", newline="") as fh:
        fh.write(",".join(AGG_COLUMNS) + "\n")
        for a in report.aggregates:
            fh.write(",".join(_fmt(v) for v in a) + "\n")


# ---------------------------------------------------------------------------
# presets and config file handling

def desk_preset() -> ScenarioConfig:
    """CI-speed scenario mirroring the headline experiment: 10 MHz downlink,
    AWGN path, 5 dB interference-to-noise in the evaluated channel."""
    return ScenarioConfig(
        sweep=SweepSection(axis="inr", grid=(5.0,)),
        trials=20,
        output_path="desk.csv",
    )


def paper_preset() -> ScenarioConfig:
    """Paper-scale spot check: 20 MHz interference, window length 500,
    >= 64k channel samples per trial.  Runtime is minutes-scale; excluded
    from the CI acceptance run."""
    return ScenarioConfig(
        lte=LteSection(bandwidth_mhz=20.0, char_frames=8, eval_frames=2),
        klt=KltSection(window_length=500),
        budget=BudgetSection(assumed_components=300),
        sweep=SweepSection(axis="inr", grid=(5.0,)),
        trials=3,
        output_path="paper.csv",
    )


PRESETS = {"desk": desk_preset, "paper": paper_preset}


def _section(data: dict, key: str, cls, ctx: str):
    raw = data.get(key, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"{ctx}{key}: expected an object")
    fields = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(raw) - fields
    if unknown:
        raise ConfigError(f"{ctx}{key}: unknown keys {sorted(unknown)}")
    kwargs = dict(raw)
    if cls is LteSection and "ues" in kwargs:
        kwargs["ues"] = tuple(UeConfig(**u) for u in kwargs["ues"])
    if cls is SweepSection and "grid" in kwargs:
        kwargs["grid"] = tuple(kwargs["grid"])
    if cls is ChannelSection and kwargs.get("taps") is not None:
        kwargs["taps"] = tuple(tuple(t) for t in kwargs["taps"])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{ctx}{key}: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    """Read a JSON scenario file; every section key is optional and defaults
    to the desk-scale values."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    known_top = {"lte", "channel", "klt", "telescope", "sweep", "budget",
                 "trials", "base_seed", "output_path"}
    unknown = set(data) - known_top
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    cfg = ScenarioConfig(
        lte=_section(data, "lte", LteSection, ""),
        channel=_section(data, "channel", ChannelSection, ""),
        klt=_section(data, "klt", KltSection, ""),
        telescope=_section(data, "telescope", TelescopeSection, ""),
        sweep=_section(data, "sweep", SweepSection, ""),
        budget=_section(data, "budget", BudgetSection, ""),
        trials=int(data.get("trials", 20)),
        base_seed=int(data.get("base_seed", 20210515)),
        output_path=str(data.get("output_path", "sweep.csv")),
    )
    cfg.validate()
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return asdict(cfg)


def budget_bps(cfg: ScenarioConfig) -> float:
    """Rate budget for sharing the eigenspace of this scenario's interference."""
    L = cfg.klt.window_length
    m = cfg.budget.assumed_components
    if m is None:
        m = int(round(0.6 * L))
    bw = cfg.budget.rfi_bw_hz
    if bw is None:
        bw = cfg.lte.bandwidth_mhz * 1e6
    return metrics.rate_budget_bps(L, m, cfg.budget.duration_s, bw,
                                   cfg.telescope.fine_bw_hz,
                                   cfg.budget.bits_per_entry)
