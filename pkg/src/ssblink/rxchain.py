"""Receiver DSP: Kramers-Kronig field reconstruction, dispersion compensation,
phase alignment, frame synchronization, adaptive equalization, post filtering,
and maximum-likelihood sequence detection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as dsp

from .linkmodel import FiberParams, dispersion_phase
from .sigkit import ComplexWaveform, RealWaveform, hilbert_imag, resample, rrc_taps
from .txchain import PAM4_LEVELS, slice_pam4


class MinimumPhaseError(RuntimeError):
    """Raised when the detected intensity is not strictly positive, i.e. the
    carrier is too weak for the minimum-phase field reconstruction."""


class SyncNotFoundError(RuntimeError):
    """Raised when no unambiguous synchronization peak exists."""


class EqualizerDivergedError(RuntimeError):
    """Raised when equalizer training ends with a worse error than it started."""


def kk_reconstruct(i_pd: RealWaveform, oversample: int = 4) -> ComplexWaveform:
    """Reconstruct the complex optical field from its detected intensity.

    The intensity record is upsampled by `oversample` (the logarithm widens
    the spectrum, so headroom is required), then the minimum-phase relation
    phi = H{ln(i)/2} gives the field sqrt(i) * exp(j*phi). The result equals
    the true field up to a constant phase whenever that field is minimum
    phase, i.e. the carrier dominates the signal excursions.
    """
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    up = resample(i_pd, oversample, 1)
    intensity = up.samples
    if np.min(i_pd.samples) <= 0.0 or np.min(intensity) <= 0.0:
        raise MinimumPhaseError(
            "minimum-phase violated: nonpositive intensity after upsampling "
            "(carrier-to-signal power ratio too low)"
        )
    phase = hilbert_imag(0.5 * np.log(intensity))
    out = np.sqrt(intensity) * np.exp(1j * phase)
    return ComplexWaveform(out, up.sample_rate_hz)


def cd_compensate(w: ComplexWaveform, f: FiberParams) -> ComplexWaveform:
    """Apply the conjugate of the fiber's dispersion transfer (phase only;
    span loss is left to amplitude normalization elsewhere)."""
    if f.length_km == 0:
        return w
    phase = dispersion_phase(len(w), w.sample_rate_hz, f)
    out = np.fft.ifft(np.fft.fft(w.samples) * np.exp(-1j * phase))
    return ComplexWaveform(out, w.sample_rate_hz)


def phase_align(w: ComplexWaveform, theta_rad: float) -> RealWaveform:
    """Undo a constant field rotation and take the real part: Re{w e^{-j*theta}}.

    With the quadrature-biased transmitter the beat term carries a +45 degree
    rotation, so theta = 45 degrees recovers the double-sideband amplitude.
    """
    return RealWaveform(np.real(w.samples * np.exp(-1j * theta_rad)), w.sample_rate_hz)


def remove_carrier(w: ComplexWaveform) -> ComplexWaveform:
    """Subtract the mean field (the carrier term is the DC component)."""
    return ComplexWaveform(w.samples - np.mean(w.samples), w.sample_rate_hz)


def shaped_reference(symbols: np.ndarray, sps: int, rolloff: float = 0.01) -> np.ndarray:
    """Root-raised-cosine shaped replica of a symbol block at `sps`, trimmed
    to the block span (used as the synchronization template)."""
    taps = rrc_taps(rolloff, 16, sps).taps
    ref = dsp.upfirdn(taps, np.asarray(symbols, dtype=np.float64), up=sps)
    delay = (taps.size - 1) // 2
    return ref[delay : delay + sps * len(symbols)]


def synchronize(
    w: RealWaveform,
    sync_symbols,
    sps: int = 4,
    rolloff: float = 0.01,
    min_peak_ratio: float = 1.5,
) -> int:
    """Locate the frame start by normalized cross-correlation.

    Returns the sample offset of the first sync symbol's center. Raises
    SyncNotFoundError when the best peak is not at least `min_peak_ratio`
    times the largest peak elsewhere (more than two symbols away).
    """
    ref = shaped_reference(np.asarray(sync_symbols, dtype=np.float64), sps, rolloff)
    x = w.samples
    if x.size < ref.size:
        raise ValueError("waveform shorter than the sync reference")
    corr = dsp.fftconvolve(x, ref[::-1], mode="valid")
    energy = dsp.fftconvolve(x**2, np.ones(ref.size), mode="valid")
    norm = np.sqrt(np.maximum(energy, 1e-30) * np.sum(ref**2))
    score = np.abs(corr) / norm
    best = int(np.argmax(score))
    guard = 2 * sps
    masked = score.copy()
    masked[max(0, best - guard) : best + guard + 1] = 0.0
    runner_up = float(np.max(masked)) if masked.size else 0.0
    if runner_up <= 0 or score[best] / runner_up < min_peak_ratio:
        raise SyncNotFoundError("sync not found: correlation peak not unambiguous")
    return best


@dataclass(frozen=True)
class EqualizerConfig:
    """Adaptive FIR settings shared by training and application."""

    num_taps: int = 97
    sps: int = 4  # tap spacing Ts/sps
    forgetting_factor: float = 0.999
    init_delta: float = 0.01  # P(0) = I / init_delta

    def __post_init__(self):
        if not 0.9 < self.forgetting_factor <= 1.0:
            raise ValueError("forgetting_factor must lie in (0.9, 1]")
        if self.num_taps < 1 or self.num_taps % 2 == 0:
            raise ValueError("num_taps must be odd and positive")


@dataclass
class EqualizerState:
    """Converged (or converging) RLS equalizer: taps plus recursion state."""

    taps: np.ndarray
    tap_spacing: float  # in symbol durations
    forgetting_factor: float
    p_matrix: np.ndarray
    training_errors: np.ndarray = field(default_factory=lambda: np.empty(0))


def _symbol_windows(x: np.ndarray, num_symbols: int, start_symbol: int, sps: int, num_taps: int) -> np.ndarray:
    """(num_symbols, num_taps) view of tap-input vectors, one per symbol,
    centered on each symbol instant. x is zero-padded internally."""
    half = (num_taps - 1) // 2
    padded = np.concatenate([np.zeros(half), x, np.zeros(half + sps)])
    idx = (np.arange(num_symbols) + start_symbol) * sps
    windows = np.lib.stride_tricks.sliding_window_view(padded, num_taps)
    return windows[idx]


def ffe_train(
    rx: RealWaveform,
    training_symbols,
    cfg: EqualizerConfig = EqualizerConfig(),
    training_start_symbol: int = 128,
) -> EqualizerState:
    """Train the fractionally spaced feed-forward equalizer by RLS.

    `rx` must be frame-aligned at cfg.sps samples per symbol (sample 0 on the
    first sync symbol's center); the training block begins at
    `training_start_symbol`. Raises EqualizerDivergedError if the trailing
    training error exceeds the leading one.
    """
    d = np.asarray(training_symbols, dtype=np.float64)
    windows = _symbol_windows(rx.samples, d.size, training_start_symbol, cfg.sps, cfg.num_taps)
    lam = cfg.forgetting_factor
    w = np.zeros(cfg.num_taps)
    p = np.eye(cfg.num_taps) / cfg.init_delta
    errors = np.empty(d.size)
    for n in range(d.size):
        x = windows[n]
        px = p @ x
        k = px / (lam + x @ px)
        e = d[n] - w @ x
        w += k * e
        p = (p - np.outer(k, px)) / lam
        p = 0.5 * (p + p.T)
        errors[n] = e
    head = np.mean(errors[:32] ** 2)
    tail = np.mean(errors[-32:] ** 2)
    if tail > head:
        raise EqualizerDivergedError(
            f"equalizer diverged: training MSE rose from {head:.3e} to {tail:.3e}"
        )
    return EqualizerState(
        taps=w,
        tap_spacing=1.0 / cfg.sps,
        forgetting_factor=lam,
        p_matrix=p,
        training_errors=errors,
    )


def ffe_apply(
    rx: RealWaveform,
    state: EqualizerState,
    num_symbols: int,
    start_symbol: int = 0,
) -> np.ndarray:
    """Filter at the fractional tap spacing and decimate to one output per
    symbol, aligned to symbol centers."""
    sps = int(round(1.0 / state.tap_spacing))
    windows = _symbol_windows(rx.samples, num_symbols, start_symbol, sps, state.taps.size)
    return windows @ state.taps


def dd_rls(
    symbols_in,
    num_taps: int = 21,
    forgetting_factor: float = 0.999,
    init_delta: float = 100.0,
) -> np.ndarray:
    """Symbol-spaced decision-directed RLS refinement.

    The reference is the nearest PAM-4 level of the current output, so an
    input already on the levels passes through unchanged (the center-tap
    initialization then sees zero error everywhere). Two stability choices
    matter here: a deliberately large init_delta keeps the first few hundred
    updates gentle (decision-directed adaptation must not chase the distorted
    frame head), and the inverse-correlation matrix is re-symmetrized every
    step, since over tens of thousands of updates it otherwise drifts off
    positive definite and the recursion blows up.
    """
    x = np.asarray(symbols_in, dtype=np.float64)
    half = (num_taps - 1) // 2
    padded = np.concatenate([np.zeros(half), x, np.zeros(half)])
    windows = np.lib.stride_tricks.sliding_window_view(padded, num_taps)
    lam = forgetting_factor
    w = np.zeros(num_taps)
    w[half] = 1.0
    p = np.eye(num_taps) / init_delta
    out = np.empty_like(x)
    for n in range(x.size):
        u = windows[n]
        y = w @ u
        out[n] = y
        e = slice_pam4(y) - y
        pu = p @ u
        k = pu / (lam + u @ pu)
        w += k * e
        p = (p - np.outer(k, pu)) / lam
        p = 0.5 * (p + p.T)
    return out


@dataclass(frozen=True)
class PostFilter:
    """Two-tap partial-response shaping [1, alpha]."""

    alpha: float

    def __post_init__(self):
        if not abs(self.alpha) < 1:
            raise ValueError("alpha magnitude must be below 1")


def postfilter_apply(symbols, pf: PostFilter) -> np.ndarray:
    """y[k] = x[k] + alpha * x[k-1], with x[-1] = 0."""
    x = np.asarray(symbols, dtype=np.float64)
    y = x.copy()
    y[1:] += pf.alpha * x[:-1]
    return y


@dataclass(frozen=True)
class TrellisSpec:
    """Single-memory trellis over the PAM-4 alphabet with branch gain [1, alpha]."""

    alpha: float
    alphabet: tuple = tuple(PAM4_LEVELS)
    memory: int = 1


def mlsd_viterbi(y, t: TrellisSpec) -> np.ndarray:
    """Maximum-likelihood sequence detection over the [1, alpha] trellis.

    Branch metric (y_k - s_k - alpha*s_{k-1})^2 with s_{-1} = 0; four states
    (one per previous symbol), full-record traceback, global minimum path.
    """
    y = np.asarray(y, dtype=np.float64)
    levels = np.asarray(t.alphabet, dtype=np.float64)
    n = y.size
    if n == 0:
        return np.empty(0)
    n_states = levels.size
    # branch_base[prev, cur] = cur + alpha*prev
    branch_base = levels[None, :] + t.alpha * levels[:, None]
    back = np.empty((n, n_states), dtype=np.int8)
    # stage 0: virtual zero previous symbol
    metric = (y[0] - levels) ** 2
    back[0] = 0
    for k in range(1, n):
        cand = metric[:, None] + (y[k] - branch_base) ** 2
        back[k] = np.argmin(cand, axis=0)
        metric = cand[back[k], np.arange(n_states)]
    state = int(np.argmin(metric))
    path = np.empty(n, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        path[k] = state
        state = int(back[k, state])
    return levels[path]
