"""Physical channel models: dual-drive MZM, fiber chromatic dispersion,
amplifier noise loading, optical band-pass filtering, square-law detection,
and the electrical front end."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as dsp

from .sigkit import ComplexWaveform, RealWaveform, resample_to

C_LIGHT_M_S = 299_792_458.0
OSNR_REF_BW_HZ = 12.5e9  # 0.1 nm at 1550 nm

# Arm phase offset that puts the modulator at quadrature with the carrier term
# at -45 degrees relative to the signal term: -pi/2, stored mod 2*pi.
QUADRATURE_BIAS = 1.5 * math.pi


@dataclass(frozen=True)
class MzmParams:
    """Lumped dual-drive Mach-Zehnder modulator.

    v_pi is the per-arm pi-voltage; arm_phase_bias is the static phase of arm 2
    relative to arm 1 (any real value, stored mod 2*pi). The default v_pi comes
    from a 1.73 V*cm phase-shifter figure over 2.5 mm arms.
    """

    v_pi: float = 6.9
    arm_phase_bias: float = QUADRATURE_BIAS
    insertion_loss_db: float = 0.0

    def __post_init__(self):
        if self.v_pi <= 0:
            raise ValueError("v_pi must be > 0")
        if self.insertion_loss_db < 0:
            raise ValueError("insertion_loss_db must be >= 0")
        object.__setattr__(self, "arm_phase_bias", self.arm_phase_bias % (2 * math.pi))


@dataclass(frozen=True)
class FiberParams:
    """Single-mode fiber span: dispersion, length, wavelength, loss."""

    length_km: float
    dispersion_ps_nm_km: float = 17.0
    wavelength_nm: float = 1552.9
    loss_db_km: float = 0.2

    def __post_init__(self):
        if self.length_km < 0:
            raise ValueError("length_km must be >= 0")
        if not 1000.0 < self.wavelength_nm < 2000.0:
            raise ValueError("wavelength_nm outside the sane (1000, 2000) nm range")
        if self.loss_db_km < 0:
            raise ValueError("loss_db_km must be >= 0")


@dataclass(frozen=True)
class NoiseLoader:
    """ASE-style noise loading to a target OSNR in the 12.5 GHz reference band."""

    target_osnr_db: float
    rng_seed: int = 0

    def __post_init__(self):
        if math.isnan(self.target_osnr_db) or self.target_osnr_db == -math.inf:
            raise ValueError("target OSNR must be a real dB value (linear > 0)")


def mzm_dual_drive(
    carrier: ComplexWaveform,
    v1: RealWaveform,
    v2: RealWaveform,
    p: MzmParams,
) -> ComplexWaveform:
    """Exact dual-drive MZM transfer.

    E_out = (E_in / 2) * [exp(j*pi*v1/v_pi) + exp(j*(pi*v2/v_pi + bias))],
    scaled by the insertion loss. At bias = -pi/2 the first-order expansion is
    (E_in / 2) * [(pi/v_pi) * (v2 + j*v1) + 1 - j], i.e. the in-phase drive
    rides on arm 2 and the quadrature drive on arm 1.
    """
    if len(v1) != len(carrier) or len(v2) != len(carrier):
        raise ValueError("carrier and drive waveforms must have equal length")
    theta1 = math.pi * v1.samples / p.v_pi
    theta2 = math.pi * v2.samples / p.v_pi + p.arm_phase_bias
    scale = 10.0 ** (-p.insertion_loss_db / 20.0)
    out = 0.5 * carrier.samples * (np.exp(1j * theta1) + np.exp(1j * theta2)) * scale
    return ComplexWaveform(out, carrier.sample_rate_hz)


def mzm_small_signal(
    carrier: ComplexWaveform,
    v1: RealWaveform,
    v2: RealWaveform,
    p: MzmParams,
) -> ComplexWaveform:
    """First-order (small-signal) MZM transfer at the quadrature bias.

    Linearization of `mzm_dual_drive`; used to verify the exact model and for
    ideal single-sideband checks where modulator harmonics would obscure the
    quantity under test.
    """
    if len(v1) != len(carrier) or len(v2) != len(carrier):
        raise ValueError("carrier and drive waveforms must have equal length")
    bias = np.exp(1j * p.arm_phase_bias)
    sig = 1j * math.pi / p.v_pi * (v1.samples + bias * v2.samples)
    scale = 10.0 ** (-p.insertion_loss_db / 20.0)
    out = 0.5 * carrier.samples * (1.0 + bias + sig) * scale
    return ComplexWaveform(out, carrier.sample_rate_hz)


def unit_carrier(num_samples: int, sample_rate_hz: float) -> ComplexWaveform:
    """Constant unit optical field (no laser phase noise modeled)."""
    return ComplexWaveform(np.ones(num_samples, dtype=np.complex128), sample_rate_hz)


def dispersion_phase(num_samples: int, sample_rate_hz: float, f: FiberParams) -> np.ndarray:
    """Spectral phase of the fiber span on the FFT frequency grid.

    Sign convention: positive dispersion delays the longer-wavelength
    (negative baseband frequency) components.
    """
    nu = np.fft.fftfreq(num_samples, d=1.0 / sample_rate_hz)
    lam = f.wavelength_nm * 1e-9
    d = f.dispersion_ps_nm_km * 1e-6  # s/m^2
    return math.pi * d * (f.length_km * 1e3) * lam**2 * nu**2 / C_LIGHT_M_S


def fiber_cd(w: ComplexWaveform, f: FiberParams) -> ComplexWaveform:
    """All-pass chromatic dispersion plus scalar span loss."""
    if f.length_km == 0:
        return w
    phase = dispersion_phase(len(w), w.sample_rate_hz, f)
    loss = 10.0 ** (-f.loss_db_km * f.length_km / 20.0)
    out = np.fft.ifft(np.fft.fft(w.samples) * np.exp(1j * phase)) * loss
    return ComplexWaveform(out, w.sample_rate_hz)


def load_osnr(w: ComplexWaveform, n: NoiseLoader) -> ComplexWaveform:
    """Add circular complex white Gaussian noise to reach the target OSNR.

    The target is signal power over noise power in the 12.5 GHz reference
    band; the injected full-band noise power is scaled by fs/12.5 GHz.
    """
    if math.isinf(n.target_osnr_db):
        return w
    p_sig = w.power()
    if p_sig <= 0:
        raise ValueError("cannot noise-load a zero-power waveform")
    osnr_lin = 10.0 ** (n.target_osnr_db / 10.0)
    noise_power = p_sig / osnr_lin * (w.sample_rate_hz / OSNR_REF_BW_HZ)
    rng = np.random.default_rng(n.rng_seed)
    sigma = math.sqrt(noise_power / 2.0)
    noise = rng.normal(scale=sigma, size=len(w)) + 1j * rng.normal(scale=sigma, size=len(w))
    return ComplexWaveform(w.samples + noise, w.sample_rate_hz)


def noise_density_for(w: ComplexWaveform, n: NoiseLoader) -> float:
    """Injected noise density in W/Hz for `load_osnr` with these arguments."""
    if math.isinf(n.target_osnr_db):
        return 0.0
    osnr_lin = 10.0 ** (n.target_osnr_db / 10.0)
    return w.power() / osnr_lin / OSNR_REF_BW_HZ


def obpf(
    w: ComplexWaveform,
    center_offset_hz: float,
    bw_hz: float,
    edge_hz: float | None = None,
) -> ComplexWaveform:
    """Optical band-pass: flat passband with raised-cosine amplitude edges.

    The cosine taper is centered on the nominal band edge, so the equivalent
    noise bandwidth equals bw_hz exactly. Stopband rejection is total (FFT
    mask), comfortably past the 40 dB requirement.
    """
    fs = w.sample_rate_hz
    if bw_hz >= fs:
        raise ValueError("filter bandwidth must be below the sample rate")
    if edge_hz is None:
        edge_hz = 0.1 * bw_hz
    nu = np.fft.fftfreq(len(w), d=1.0 / fs)
    offset = np.abs(nu - center_offset_hz) - bw_hz / 2.0
    mask = np.zeros(len(w))
    mask[offset <= -edge_hz / 2] = 1.0
    taper = (offset > -edge_hz / 2) & (offset < edge_hz / 2)
    mask[taper] = np.cos(math.pi / 2.0 * (offset[taper] / edge_hz + 0.5))
    out = np.fft.ifft(np.fft.fft(w.samples) * mask)
    return ComplexWaveform(out, fs)


def photodiode(w: ComplexWaveform) -> RealWaveform:
    """Square-law detection: |E|^2 with unit responsivity."""
    return RealWaveform(np.abs(w.samples) ** 2, w.sample_rate_hz)


def _bessel_lowpass(x: np.ndarray, fs: float, bw_3db_hz: float, order: int) -> np.ndarray:
    b, a = dsp.bessel(order, 2 * math.pi * bw_3db_hz, "low", analog=True, norm="mag")
    freqs = np.fft.fftfreq(x.size, d=1.0 / fs)
    _, h = dsp.freqs(b, a, worN=2 * math.pi * freqs)
    return np.fft.ifft(np.fft.fft(x) * h).real


def electrical_lowpass(w: RealWaveform, bw_3db_hz: float, order: int = 2) -> RealWaveform:
    """Bessel low-pass applied across the whole record (models driver or
    modulator electrical bandwidth)."""
    if math.isinf(bw_3db_hz):
        return w
    return RealWaveform(_bessel_lowpass(w.samples, w.sample_rate_hz, bw_3db_hz, order), w.sample_rate_hz)


def elec_frontend(
    w: RealWaveform,
    bw_3db_hz: float,
    adc_rate_hz: float,
    order: int = 2,
) -> RealWaveform:
    """Receiver electrical path: Bessel low-pass at bw_3db_hz, then resampling
    to the ADC rate. Pass bw_3db_hz = inf to disable the filter."""
    if not math.isinf(bw_3db_hz) and bw_3db_hz >= adc_rate_hz / 2:
        raise ValueError("front-end bandwidth must stay below the ADC Nyquist rate")
    out = electrical_lowpass(w, bw_3db_hz, order)
    if adc_rate_hz != w.sample_rate_hz:
        out = resample_to(out, adc_rate_hz)
    return out
