"""Transmitter DSP: PAM-4 mapping, framing, Nyquist shaping, SSB drive
generation, and DAC impairment modeling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as dsp

from .sigkit import FirFilter, RealWaveform, hilbert_imag, rrc_taps

PAM4_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])

# Gray map: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 (adjacent levels differ in
# exactly one bit, so BER ~ SER/2). Index below is 2*b0 + b1.
_GRAY_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])
_GRAY_BITS = {-3.0: (0, 0), -1.0: (0, 1), 1.0: (1, 1), 3.0: (1, 0)}

SYNC_BLOCK_SYMBOLS = 64
NUM_SYNC_BLOCKS = 2
TRAINING_BLOCK_SYMBOLS = 128
NUM_TRAINING_BLOCKS = 4
PAYLOAD_SYMBOLS = 25600
PREAMBLE_SYMBOLS = NUM_SYNC_BLOCKS * SYNC_BLOCK_SYMBOLS + NUM_TRAINING_BLOCKS * TRAINING_BLOCK_SYMBOLS
FRAME_SYMBOLS = PREAMBLE_SYMBOLS + PAYLOAD_SYMBOLS  # 26240
PAYLOAD_BITS = 2 * PAYLOAD_SYMBOLS

# Minimum peak-to-sidelobe ratio of a sync block's autocorrelation; candidate
# blocks are redrawn from the seeded stream until this holds.
_SYNC_MIN_PSL = 4.0

RRC_SPAN_SYMBOLS = 64  # long span because rolloff 0.01 decays slowly


def map_pam4(bits) -> np.ndarray:
    """Gray-map a bit sequence (MSB first per symbol) onto PAM-4 levels."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % 2:
        raise ValueError("bit count must be even for PAM-4 mapping")
    if bits.size == 0:
        return np.empty(0)
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    idx = 2 * bits[0::2] + bits[1::2]
    return _GRAY_LEVELS[idx]


def demap_pam4(symbols) -> np.ndarray:
    """Inverse of map_pam4; symbols must be exact PAM-4 levels."""
    symbols = np.asarray(symbols, dtype=np.float64).ravel()
    bits = np.empty(2 * symbols.size, dtype=np.int64)
    for level, (b0, b1) in _GRAY_BITS.items():
        sel = symbols == level
        bits[0::2][sel] = b0
        bits[1::2][sel] = b1
    covered = np.isin(symbols, PAM4_LEVELS)
    if not np.all(covered):
        raise ValueError("symbols contain values outside the PAM-4 alphabet")
    return bits


def slice_pam4(samples) -> np.ndarray:
    """Nearest-level PAM-4 decision."""
    x = np.asarray(samples, dtype=np.float64)
    return np.clip(2.0 * np.round((x + 3.0) / 2.0) - 3.0, -3.0, 3.0)


@dataclass(frozen=True)
class SymbolFrame:
    """One transmitted frame: sync | training | payload PAM-4 symbols."""

    sync: np.ndarray       # 2 x 64 symbols, concatenated
    training: np.ndarray   # 4 x 128 symbols, concatenated
    payload: np.ndarray    # 25600 symbols

    def __post_init__(self):
        for name, arr, want in (
            ("sync", self.sync, NUM_SYNC_BLOCKS * SYNC_BLOCK_SYMBOLS),
            ("training", self.training, NUM_TRAINING_BLOCKS * TRAINING_BLOCK_SYMBOLS),
            ("payload", self.payload, PAYLOAD_SYMBOLS),
        ):
            arr = np.asarray(arr, dtype=np.float64)
            if arr.size != want:
                raise ValueError(f"{name} must hold {want} symbols, got {arr.size}")
            if not np.all(np.isin(arr, PAM4_LEVELS)):
                raise ValueError(f"{name} contains non-PAM-4 levels")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def symbols(self) -> np.ndarray:
        return np.concatenate([self.sync, self.training, self.payload])

    def __len__(self) -> int:
        return FRAME_SYMBOLS


def _autocorr_psl(block: np.ndarray) -> float:
    ac = np.correlate(block, block, "full")
    mid = ac.size // 2
    sidelobes = np.abs(np.concatenate([ac[:mid], ac[mid + 1:]]))
    return float(ac[mid] / np.max(sidelobes))


def build_frame(payload_bits, seed: int) -> SymbolFrame:
    """Assemble a frame around the given payload bits.

    The preamble (sync and training blocks) is drawn from a seeded stream so
    the same seed always yields the same preamble; sync candidates are redrawn
    until their autocorrelation peak-to-sidelobe ratio is at least 4.
    """
    payload_bits = np.asarray(payload_bits, dtype=np.int64).ravel()
    if payload_bits.size != PAYLOAD_BITS:
        raise ValueError(
            f"payload must hold {PAYLOAD_BITS} bits, got {payload_bits.size}"
        )
    rng = np.random.default_rng(seed)
    sync_blocks = []
    while len(sync_blocks) < NUM_SYNC_BLOCKS:
        cand = rng.choice(PAM4_LEVELS, size=SYNC_BLOCK_SYMBOLS)
        if _autocorr_psl(cand) >= _SYNC_MIN_PSL:
            sync_blocks.append(cand)
    training = rng.choice(PAM4_LEVELS, size=NUM_TRAINING_BLOCKS * TRAINING_BLOCK_SYMBOLS)
    return SymbolFrame(
        sync=np.concatenate(sync_blocks),
        training=training,
        payload=map_pam4(payload_bits),
    )


def shape_nyquist(
    frame,
    baud_hz: float,
    up: int,
    down: int,
    rolloff: float = 0.01,
    guard_symbols: int = 64,
) -> RealWaveform:
    """Root-raised-cosine shape a frame to the DAC rate baud * up/down.

    The symbol stream is zero-stuffed by `up`, filtered, and decimated by
    `down` in one polyphase pass. `guard_symbols` zero symbols pad each end so
    later FFT-based stages see no frame content at the record edges. Peak
    amplitude is normalized to 1.
    """
    if up < 1 or down < 1:
        raise ValueError("up and down must be positive integers")
    if up < down:
        raise ValueError("sub-Nyquist DAC: up/down must give >= 1 sample/symbol")
    symbols = frame.symbols if isinstance(frame, SymbolFrame) else np.asarray(frame, dtype=np.float64)
    padded = np.concatenate([np.zeros(guard_symbols), symbols, np.zeros(guard_symbols)])
    taps = rrc_taps(rolloff, RRC_SPAN_SYMBOLS, up).taps
    shaped = dsp.upfirdn(taps, padded, up=up, down=down)
    shaped = shaped / np.max(np.abs(shaped))
    return RealWaveform(shaped, baud_hz * up / down)


def make_ssb_drives(shaped: RealWaveform) -> tuple[RealWaveform, RealWaveform]:
    """Hilbert-pair drive waveforms (v_i, v_q) for single-sideband generation.

    v_i is the shaped signal itself, v_q its Hilbert transform; driving the
    quadrature-biased modulator with this pair puts all signal power on the
    upper sideband.
    """
    v_q = hilbert_imag(shaped.samples)
    return shaped, RealWaveform(v_q, shaped.sample_rate_hz)


@dataclass(frozen=True)
class DacModel:
    """Lumped AWG impairments: clipping, quantization, inter-channel skew."""

    sample_rate_hz: float
    enob_bits: float = math.inf  # inf disables quantization
    clip_fraction: float = 1.0
    channel_skew_s: float = 0.0  # channel 2 minus channel 1

    def __post_init__(self):
        if not 0 < self.clip_fraction <= 1:
            raise ValueError("clip_fraction must lie in (0, 1]")
        if self.enob_bits <= 0:
            raise ValueError("enob_bits must be > 0")
        # The DAC runs near one sample per symbol, so a dozen samples of skew
        # already exceeds the ten-symbol plausibility bound.
        if abs(self.channel_skew_s) * self.sample_rate_hz > 12:
            raise ValueError("channel skew exceeds ten symbol durations")


def _fractional_delay(x: np.ndarray, delay_s: float, fs: float) -> np.ndarray:
    n = x.size
    freqs = np.fft.fftfreq(n, d=1.0 / fs)
    spec = np.fft.fft(x) * np.exp(-2j * np.pi * freqs * delay_s)
    return np.fft.ifft(spec).real


def apply_dac(w: RealWaveform, dac: DacModel, channel: int = 1) -> RealWaveform:
    """Clip, quantize, and (for channel 2) delay a drive waveform.

    Clipping is at +-clip_fraction of the record peak; quantization uses a
    mid-rise uniform quantizer with 2**enob levels across the clipped range.
    """
    x = w.samples.copy()
    full_scale = dac.clip_fraction * np.max(np.abs(x))
    if full_scale > 0:
        x = np.clip(x, -full_scale, full_scale)
        if math.isfinite(dac.enob_bits):
            step = 2.0 * full_scale / (2.0 ** dac.enob_bits)
            x = (np.floor(x / step) + 0.5) * step
            x = np.clip(x, -full_scale + step / 2, full_scale - step / 2)
    if channel == 2 and dac.channel_skew_s != 0.0:
        x = _fractional_delay(x, dac.channel_skew_s, w.sample_rate_hz)
    return RealWaveform(x, w.sample_rate_hz)


def frame_overhead_ratio() -> float:
    """Payload fraction of the frame: 25600/26240."""
    return PAYLOAD_SYMBOLS / FRAME_SYMBOLS


def net_bit_rate(line_rate_bps: float, fec_overhead: float = 0.07) -> float:
    """Net rate after frame redundancy and FEC overhead."""
    return line_rate_bps * frame_overhead_ratio() / (1.0 + fec_overhead)
