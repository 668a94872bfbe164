"""Configuration-driven experiment runner.

A scenario describes one link (modulation mode, rates, fiber, impairments)
plus sweep grids over baud rate, OSNR, and phase-rotation angle. Each sweep
point is simulated frame by frame with per-point derived seeds, so points are
independent and may be evaluated in parallel with bit-identical results.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linkmodel, metrics, rxchain, txchain
from .linkmodel import FiberParams, MzmParams, NoiseLoader
from .sigkit import ComplexWaveform, RealWaveform, resample_to, rrc_taps
from .txchain import FRAME_SYMBOLS, PAYLOAD_BITS, PREAMBLE_SYMBOLS

CSV_HEADER = (
    "scenario,mode,baud_hz,bitrate_bps,fiber_km,osnr_db,cspr_db,ossr_db,"
    "phase_deg,alpha,dsp_stage,ber,bit_errors,bits_counted,flags"
)

MODES = ("pam4-dsb", "pam4-ssb-kk")
STAGES = ("tdeq", "dd-rls", "postfilter-mlsd")
ALPHA_GRID = tuple(round(0.1 * k, 1) for k in range(1, 9))

# Post filter and MLSD are only worthwhile under heavy band limitation; for
# single-sideband runs below this line rate they are skipped.
SSB_POSTFILTER_MIN_BITRATE = 112e9


class ConfigError(ValueError):
    """Invalid scenario configuration; `fields` names the offending entries."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid scenario config: " + "; ".join(problems))
        self.fields = problems


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment description. List-valued baud_hz / osnr_db / phase_deg
    entries become a cartesian sweep grid."""

    name: str
    mode: str
    baud_hz: tuple
    dac_rate_hz: float
    fiber_km: float
    seed: int
    frames: int = 5
    osnr_db: tuple = (math.inf,)
    phase_deg: tuple = (45.0,)
    cspr_target_db: float | None = None
    modulation_index: float | None = None
    dsb_chirp: float = 0.0  # push-pull asymmetry; negative pre-chirp fights fading
    alpha: float | str = "auto"
    dsp_stage: tuple = ("postfilter-mlsd",)
    rolloff: float = 0.01
    drive_lpf_hz: float | None = None
    drive_lpf_order: int = 4  # transmit electrical cascade rolls off steeply
    frontend_bw_hz: float = 50e9
    frontend_order: int = 2
    adc_rate_hz: float = 160e9
    obpf_bw_hz: float | str | None = None  # "auto" tracks the baud rate
    dispersion_ps_nm_km: float = 17.0
    wavelength_nm: float = 1552.9
    fiber_loss_db_km: float = 0.2
    v_pi: float = 6.9
    dac_enob_bits: float = math.inf
    dac_clip_fraction: float = 1.0
    dac_skew_s: float = 0.0

    def fiber(self) -> FiberParams:
        return FiberParams(
            length_km=self.fiber_km,
            dispersion_ps_nm_km=self.dispersion_ps_nm_km,
            wavelength_nm=self.wavelength_nm,
            loss_db_km=self.fiber_loss_db_km,
        )


def _as_tuple(value) -> tuple:
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(float(v) for v in value)
    return (float(value),)


def make_config(**kwargs) -> ScenarioConfig:
    """Validated ScenarioConfig constructor; collects all problems at once."""
    problems = []
    known = set(ScenarioConfig.__dataclass_fields__)
    for key in kwargs:
        if key not in known:
            problems.append(f"unknown field '{key}'")
    mode = kwargs.get("mode")
    if mode not in MODES:
        problems.append(f"mode must be one of {MODES}, got {mode!r}")
    for req in ("name", "dac_rate_hz", "fiber_km", "seed", "baud_hz"):
        if kwargs.get(req) is None:
            problems.append(f"missing required field '{req}'")
    for sweepable in ("baud_hz", "osnr_db", "phase_deg"):
        if sweepable in kwargs and kwargs[sweepable] is not None:
            try:
                kwargs[sweepable] = _as_tuple(kwargs[sweepable])
            except (TypeError, ValueError):
                problems.append(f"{sweepable} must be a number or list of numbers")
    stages = kwargs.get("dsp_stage", ("postfilter-mlsd",))
    if isinstance(stages, str):
        stages = (stages,)
    stages = tuple(stages)
    for s in stages:
        if s not in STAGES:
            problems.append(f"dsp_stage entries must be in {STAGES}, got {s!r}")
    kwargs["dsp_stage"] = stages
    alpha = kwargs.get("alpha", "auto")
    if not (alpha == "auto" or (isinstance(alpha, (int, float)) and 0 <= alpha < 1)):
        problems.append("alpha must be 'auto' or a value in [0, 1)")
    frames = kwargs.get("frames", 5)
    if not (isinstance(frames, int) and frames >= 1):
        problems.append("frames must be a positive integer")
    obpf = kwargs.get("obpf_bw_hz")
    if isinstance(obpf, str) and obpf != "auto":
        problems.append("obpf_bw_hz must be a frequency, null, or 'auto'")
    if kwargs.get("fiber_km") is not None and kwargs["fiber_km"] < 0:
        problems.append("fiber_km must be >= 0")
    if mode == "pam4-ssb-kk" and kwargs.get("cspr_target_db") is None and kwargs.get("modulation_index") is None:
        problems.append("pam4-ssb-kk requires cspr_target_db or modulation_index")
    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(**kwargs)


def load_config(path) -> ScenarioConfig:
    """Load a JSON scenario file; SSBLINK_SEED in the environment overrides
    the configured seed."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])
    if "SSBLINK_SEED" in os.environ:
        raw["seed"] = int(os.environ["SSBLINK_SEED"])
    if "seed" in raw and not isinstance(raw["seed"], int):
        raise ConfigError(["seed must be an integer"])
    return make_config(**raw)


def _ratio(target_hz: float, source_hz: float) -> tuple[int, int]:
    frac = Fraction(int(round(target_hz)), int(round(source_hz)))
    return frac.numerator, frac.denominator


@dataclass(frozen=True)
class SweepPoint:
    index: int
    baud_hz: float
    osnr_db: float
    phase_deg: float


def sweep_points(cfg: ScenarioConfig) -> list[SweepPoint]:
    points = []
    idx = 0
    for baud in cfg.baud_hz:
        for osnr in cfg.osnr_db:
            for phase in cfg.phase_deg:
                points.append(SweepPoint(idx, baud, osnr, phase))
                idx += 1
    return points


@dataclass
class ResultRow:
    scenario: str
    mode: str
    baud_hz: float
    bitrate_bps: float
    fiber_km: float
    osnr_db: float
    cspr_db: float
    ossr_db: float
    phase_deg: float
    alpha: float | None
    dsp_stage: str
    ber: float
    bit_errors: int
    bits_counted: int
    flags: str
    point_index: int = 0


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.10g}"
    return str(value)


def write_csv(rows: list[ResultRow], path) -> None:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.scenario, r.mode, r.baud_hz, r.bitrate_bps, r.fiber_km,
                    r.osnr_db, r.cspr_db, r.ossr_db, r.phase_deg, r.alpha,
                    r.dsp_stage, r.ber, r.bit_errors, r.bits_counted, r.flags,
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# transmitter and receiver assembly
# ---------------------------------------------------------------------------


def _drive_scale(cfg: ScenarioConfig, m: float) -> float:
    # modulation index m = pi*Vpp/(2*Vpi) maps peak-normalized drives to volts
    return m * cfg.v_pi / math.pi


def _tx_field(cfg: ScenarioConfig, baud_hz: float, symbols, m: float) -> ComplexWaveform:
    """Shape, convert to drive voltages, and modulate onto the unit carrier
    at the simulation rate (4 samples per symbol)."""
    up, down = _ratio(cfg.dac_rate_hz, baud_hz)
    shaped = txchain.shape_nyquist(symbols, baud_hz, up, down, cfg.rolloff)
    sim_rate = 4.0 * baud_hz
    scale = _drive_scale(cfg, m)
    dac = None
    if (
        math.isfinite(cfg.dac_enob_bits)
        or cfg.dac_clip_fraction < 1.0
        or cfg.dac_skew_s != 0.0
    ):
        dac = txchain.DacModel(
            sample_rate_hz=cfg.dac_rate_hz,
            enob_bits=cfg.dac_enob_bits,
            clip_fraction=cfg.dac_clip_fraction,
            channel_skew_s=cfg.dac_skew_s,
        )

    def to_sim(wave: RealWaveform, channel: int) -> RealWaveform:
        if dac is not None:
            wave = txchain.apply_dac(wave, dac, channel=channel)
        return resample_to(wave, sim_rate)

    def analog(wave: RealWaveform, volts: float) -> RealWaveform:
        wave = RealWaveform(volts * wave.samples, sim_rate)
        if cfg.drive_lpf_hz is not None:
            wave = linkmodel.electrical_lowpass(wave, cfg.drive_lpf_hz, order=cfg.drive_lpf_order)
        return wave

    if cfg.mode == "pam4-ssb-kk":
        v_i, v_q = txchain.make_ssb_drives(shaped)
        v_i, v_q = to_sim(v_i, 1), to_sim(v_q, 2)
        # both AWG channels swing to the same full scale; scaling jointly
        # keeps them an exact Hilbert pair
        peak = max(np.max(np.abs(v_i.samples)), np.max(np.abs(v_q.samples)))
        volts = scale / peak
        v_i, v_q = analog(v_i, volts), analog(v_q, volts)
        carrier = linkmodel.unit_carrier(len(v_i), sim_rate)
        mzm = MzmParams(v_pi=cfg.v_pi, arm_phase_bias=linkmodel.QUADRATURE_BIAS)
        # in-phase drive on the biased arm (arm 2), Hilbert partner on arm 1
        return linkmodel.mzm_dual_drive(carrier, v_q, v_i, mzm)
    # intensity modulation: push-pull at quadrature; a drive asymmetry of
    # dsb_chirp pre-chirps the carrier (standard dispersion-tolerance trick)
    v = to_sim(shaped, 1)
    v = analog(v, scale / np.max(np.abs(v.samples)))
    k = cfg.dsb_chirp
    arm1 = RealWaveform(0.5 * (1.0 + k) * v.samples, sim_rate)
    arm2 = RealWaveform(-0.5 * (1.0 - k) * v.samples, sim_rate)
    carrier = linkmodel.unit_carrier(len(v), sim_rate)
    mzm = MzmParams(v_pi=cfg.v_pi, arm_phase_bias=0.5 * math.pi)
    return linkmodel.mzm_dual_drive(carrier, arm1, arm2, mzm)


def _apply_channel(
    cfg: ScenarioConfig,
    field: ComplexWaveform,
    baud_hz: float,
    osnr_db: float,
    noise_seed,
) -> RealWaveform:
    """Fiber, noise loading, optional optical filter, detection, front end."""
    field = linkmodel.fiber_cd(field, cfg.fiber())
    if not math.isinf(osnr_db):
        field = linkmodel.load_osnr(field, NoiseLoader(osnr_db, rng_seed=noise_seed))
    if cfg.obpf_bw_hz is not None:
        bw = baud_hz if cfg.obpf_bw_hz == "auto" else cfg.obpf_bw_hz
        center = 0.25 * (1 + cfg.rolloff) * baud_hz if cfg.mode == "pam4-ssb-kk" else 0.0
        field = linkmodel.obpf(field, center, bw)
    pd_out = linkmodel.photodiode(field)
    return linkmodel.elec_frontend(
        pd_out, cfg.frontend_bw_hz, cfg.adc_rate_hz, order=cfg.frontend_order
    )


def _to_symbol_rate(cfg: ScenarioConfig, adc_out: RealWaveform, baud_hz: float, phase_deg: float) -> RealWaveform:
    """Mode-specific field recovery, ending in a real waveform at 4 samples
    per symbol ready for the matched filter."""
    sim_rate = 4.0 * baud_hz
    if cfg.mode == "pam4-ssb-kk":
        field = rxchain.kk_reconstruct(adc_out, oversample=4)
        field = rxchain.cd_compensate(field, cfg.fiber())
        field = rxchain.remove_carrier(field)
        field = resample_to(field, sim_rate)
        return rxchain.phase_align(field, math.radians(phase_deg))
    rx = resample_to(adc_out, sim_rate)
    return RealWaveform(rx.samples - np.mean(rx.samples), sim_rate)


def _matched_filter(rx: RealWaveform, rolloff: float) -> RealWaveform:
    from scipy.signal import fftconvolve

    taps = rrc_taps(rolloff, txchain.RRC_SPAN_SYMBOLS, 4).taps
    y = fftconvolve(rx.samples, taps, mode="same")
    y /= np.sqrt(np.mean(y**2))
    return RealWaveform(y, rx.sample_rate_hz)


def _equalize_stages(
    cfg: ScenarioConfig,
    rx4: RealWaveform,
    frame: txchain.SymbolFrame,
    stages: tuple,
    alpha_spec,
) -> dict:
    """Run the matched filter, sync, and the requested DSP stage ladder.

    Returns {stage: payload_bits}, where the post-filter stage maps each
    candidate alpha to its payload bits (a single entry for a fixed alpha).
    Stages share one equalizer pass so staged BER comparisons are apples to
    apples.
    """
    filtered = _matched_filter(rx4, cfg.rolloff)
    offset = rxchain.synchronize(filtered, frame.sync, sps=4, rolloff=cfg.rolloff)
    # A margin on both sides keeps every equalizer tap window inside real
    # samples; the transmit guard symbols guarantee it exists in the record.
    margin = 64
    lo = offset - margin
    hi = offset + FRAME_SYMBOLS * 4 + margin
    seg = filtered.samples[max(lo, 0) : hi]
    seg = np.pad(seg, (max(-lo, 0), max(hi - len(filtered), 0)))
    aligned = RealWaveform(seg, filtered.sample_rate_hz)
    start = margin // 4  # symbol index of the frame start inside `aligned`
    state = rxchain.ffe_train(aligned, frame.training, training_start_symbol=start + 2 * 64)
    eq = rxchain.ffe_apply(aligned, state, FRAME_SYMBOLS, start_symbol=start)
    payload = slice(PREAMBLE_SYMBOLS, FRAME_SYMBOLS)

    out: dict = {}
    if "tdeq" in stages:
        out["tdeq"] = txchain.demap_pam4(txchain.slice_pam4(eq[payload]))
    need_dd = ("dd-rls" in stages) or ("postfilter-mlsd" in stages)
    if need_dd:
        refined = rxchain.dd_rls(eq)
        if "dd-rls" in stages:
            out["dd-rls"] = txchain.demap_pam4(txchain.slice_pam4(refined[payload]))
        if "postfilter-mlsd" in stages:
            alphas = ALPHA_GRID if alpha_spec == "auto" else (float(alpha_spec),)
            by_alpha = {}
            for alpha in alphas:
                shaped = rxchain.postfilter_apply(refined, rxchain.PostFilter(alpha))
                dec = rxchain.mlsd_viterbi(shaped, rxchain.TrellisSpec(alpha))
                by_alpha[alpha] = txchain.demap_pam4(dec[payload])
            out["postfilter-mlsd"] = by_alpha
    return out


def _point_stages(cfg: ScenarioConfig, baud_hz: float) -> tuple[tuple, str]:
    """Resolve the stage list at this operating point; single-sideband links
    below the post-filter cutoff rate fall back to the dd-rls output."""
    stages = cfg.dsp_stage
    flag = ""
    if (
        cfg.mode == "pam4-ssb-kk"
        and "postfilter-mlsd" in stages
        and 2.0 * baud_hz < SSB_POSTFILTER_MIN_BITRATE
    ):
        stages = tuple(s for s in stages if s != "postfilter-mlsd")
        if "dd-rls" not in stages:
            stages = stages + ("dd-rls",)
        flag = "postfilter-skipped-low-rate"
    return stages, flag


def cspr_search(
    cfg: ScenarioConfig,
    target_db: float | None = None,
    tolerance_db: float = 0.2,
    baud_hz: float | None = None,
    max_iter: int = 40,
) -> float:
    """Find the modulation index that yields the target carrier-to-signal
    ratio, by bisection (CSPR decreases monotonically with drive amplitude).

    The probe uses a full representative frame so the peak-normalized drive
    statistics match the actual transmitter (a short probe would see a lower
    record peak and bias the result by close to a dB).
    """
    if target_db is None:
        target_db = cfg.cspr_target_db
    if target_db is None:
        raise ValueError("no CSPR target given")
    baud = baud_hz if baud_hz is not None else cfg.baud_hz[0]
    rng = np.random.default_rng([cfg.seed, 0xC5])
    frame = txchain.build_frame(rng.integers(0, 2, size=PAYLOAD_BITS), seed=cfg.seed)

    def cspr_of(m: float) -> float:
        field = _tx_field(cfg, baud, frame, m)
        meas = metrics.measure_optical(field, 0.0, baud, rolloff=cfg.rolloff)
        return meas.cspr_db

    lo, hi = 1e-3, 1.0
    cspr_hi = cspr_of(hi)
    if target_db < cspr_hi - tolerance_db:
        raise ValueError(
            f"unreachable CSPR target {target_db} dB: minimum achievable at "
            f"m={hi} is {cspr_hi:.2f} dB"
        )
    if abs(cspr_hi - target_db) <= tolerance_db:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        c = cspr_of(mid)
        if abs(c - target_db) <= tolerance_db:
            return mid
        if c > target_db:
            lo = mid  # carrier still too dominant, drive harder
        else:
            hi = mid
    raise RuntimeError("CSPR search did not converge")


def _evaluate_point(cfg: ScenarioConfig, point: SweepPoint, m: float) -> list[ResultRow]:
    """Simulate all frames of one sweep point and emit one row per stage."""
    stages, stage_flag = _point_stages(cfg, point.baud_hz)
    bitrate = 2.0 * point.baud_hz
    fiber_km = cfg.fiber_km

    errors: dict = {s: 0 for s in stages}
    bits_total: dict = {s: 0 for s in stages}
    alpha_used: dict = {s: None for s in stages}
    # the post-filter coefficient is chosen by minimum BER pooled over all
    # frames of the point, then reported alongside that pooled count
    alpha_errors: dict = {}
    cspr_db = math.nan
    ossr_db = math.nan
    flags = [stage_flag] if stage_flag else []

    for fidx in range(cfg.frames):
        frame_rng = np.random.default_rng([cfg.seed, point.index, fidx])
        payload_bits = frame_rng.integers(0, 2, size=PAYLOAD_BITS)
        frame = txchain.build_frame(payload_bits, seed=cfg.seed)
        field = _tx_field(cfg, point.baud_hz, frame, m)
        if fidx == 0:
            try:
                meas = metrics.measure_optical(field, 0.0, point.baud_hz, rolloff=cfg.rolloff)
                cspr_db, ossr_db = meas.cspr_db, meas.ossr_db
            except ValueError:
                pass  # carrier not resolvable (deep drive); leave nan
        adc_out = _apply_channel(
            cfg, field, point.baud_hz, point.osnr_db, noise_seed=[cfg.seed, point.index, fidx, 7]
        )
        try:
            rx4 = _to_symbol_rate(cfg, adc_out, point.baud_hz, point.phase_deg)
            stage_bits = _equalize_stages(cfg, rx4, frame, stages, cfg.alpha)
        except (rxchain.MinimumPhaseError, rxchain.SyncNotFoundError, rxchain.EqualizerDivergedError) as exc:
            failure = {
                rxchain.MinimumPhaseError: "kk-min-phase-violated",
                rxchain.SyncNotFoundError: "sync-not-found",
                rxchain.EqualizerDivergedError: "equalizer-diverged",
            }[type(exc)]
            flags.append(failure)
            return [
                ResultRow(
                    cfg.name, cfg.mode, point.baud_hz, bitrate, fiber_km,
                    point.osnr_db, cspr_db, ossr_db, point.phase_deg, None, s,
                    math.nan, 0, 0, ";".join(flags), point.index,
                )
                for s in stages
            ]
        for s, result in stage_bits.items():
            if s == "postfilter-mlsd":
                for alpha, bits in result.items():
                    alpha_errors[alpha] = alpha_errors.get(alpha, 0) + int(np.sum(bits != payload_bits))
                bits_total[s] += payload_bits.size
            else:
                errors[s] += int(np.sum(result != payload_bits))
                bits_total[s] += result.size

    if "postfilter-mlsd" in stages and alpha_errors:
        best_alpha = min(alpha_errors, key=lambda a: (alpha_errors[a], a))
        errors["postfilter-mlsd"] = alpha_errors[best_alpha]
        alpha_used["postfilter-mlsd"] = best_alpha

    rows = []
    for s in stages:
        row_flags = list(flags)
        if errors[s] < 10:
            row_flags.append("insufficient-stats")
        rows.append(
            ResultRow(
                cfg.name, cfg.mode, point.baud_hz, bitrate, fiber_km,
                point.osnr_db, cspr_db, ossr_db, point.phase_deg, alpha_used[s],
                s, errors[s] / bits_total[s], errors[s], bits_total[s],
                ";".join(row_flags), point.index,
            )
        )
    return rows


def run_scenario(cfg: ScenarioConfig, parallel: int = 1) -> list[ResultRow]:
    """Evaluate every sweep point; deterministic for a fixed config and seed
    regardless of the parallelism setting."""
    points = sweep_points(cfg)
    m_by_baud: dict[float, float] = {}
    for baud in sorted({p.baud_hz for p in points}):
        if cfg.modulation_index is not None:
            m_by_baud[baud] = cfg.modulation_index
        elif cfg.mode == "pam4-ssb-kk":
            m_by_baud[baud] = cspr_search(cfg, baud_hz=baud)
        else:
            m_by_baud[baud] = 0.6  # mild intensity-modulation drive
    jobs = [(cfg, p, m_by_baud[p.baud_hz]) for p in points]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            nested = list(pool.map(_evaluate_point_star, jobs))
    else:
        nested = [_evaluate_point(*job) for job in jobs]
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r.point_index, STAGES.index(r.dsp_stage)))
    return rows


def _evaluate_point_star(job) -> list[ResultRow]:
    return _evaluate_point(*job)


def plot_rows(rows: list[ResultRow], out_dir) -> list[str]:
    """Line plots of BER against the swept quantity; CSV stays the contract,
    these are a convenience."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    by_stage: dict[str, list[ResultRow]] = {}
    for r in rows:
        by_stage.setdefault(r.dsp_stage, []).append(r)
    for axis, label in (("osnr_db", "OSNR (dB)"), ("phase_deg", "phase rotation (deg)"), ("bitrate_bps", "bit rate (b/s)")):
        values = {getattr(r, axis) for r in rows}
        if len(values) < 2:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for stage, group in sorted(by_stage.items()):
            pts = sorted((getattr(r, axis), r.ber) for r in group if not math.isnan(r.ber))
            if not pts:
                continue
            ax.semilogy([p[0] for p in pts], [max(p[1], 1e-7) for p in pts], marker="o", label=stage)
        ax.set_xlabel(label)
        ax.set_ylabel("BER")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        name = rows[0].scenario if rows else "scenario"
        path = os.path.join(out_dir, f"{name}_{axis}.png")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
