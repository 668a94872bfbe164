"""Quantitative evaluation: BER counting, optical power-ratio measurements,
amplitude PDFs, and the closed-form dispersion-fading oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as dsp

from .linkmodel import C_LIGHT_M_S, OSNR_REF_BW_HZ, FiberParams
from .sigkit import welch_spectrum


@dataclass(frozen=True)
class BerReport:
    bit_errors: int
    bits_counted: int
    symbol_errors: int
    insufficient_stats: bool

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_counted


def count_ber(tx_bits, rx_bits) -> BerReport:
    """Exact error count over a payload bit stream.

    Flags insufficient statistics when fewer than 10 errors were observed
    (equivalently, bits_counted < 10/ber for the measured rate).
    """
    tx = np.asarray(tx_bits, dtype=np.int64).ravel()
    rx = np.asarray(rx_bits, dtype=np.int64).ravel()
    if tx.size != rx.size:
        raise ValueError(f"bit stream length mismatch: {tx.size} vs {rx.size}")
    if tx.size == 0 or tx.size % 2:
        raise ValueError("bit streams must be non-empty and of even length")
    errors = int(np.sum(tx != rx))
    sym_err = int(np.sum(np.any((tx != rx).reshape(-1, 2), axis=1)))
    return BerReport(
        bit_errors=errors,
        bits_counted=tx.size,
        symbol_errors=sym_err,
        insufficient_stats=errors < 10,
    )


def fading_oracle(nu_hz: float, f: FiberParams) -> float:
    """Small-signal RF power-fading envelope of a double-sideband link.

    cos^2(pi * D * L * lambda^2 * nu^2 / c): the closed-form prediction used
    as the independent oracle for the end-to-end channel simulation. The first
    null sits at sqrt(c / (2 D L lambda^2)).
    """
    lam = f.wavelength_nm * 1e-9
    d = f.dispersion_ps_nm_km * 1e-6
    arg = math.pi * d * (f.length_km * 1e3) * lam**2 * float(nu_hz) ** 2 / C_LIGHT_M_S
    return math.cos(arg) ** 2


def fading_first_null_hz(f: FiberParams) -> float:
    """Frequency of the first fading null of `fading_oracle`."""
    lam = f.wavelength_nm * 1e-9
    d = f.dispersion_ps_nm_km * 1e-6
    return math.sqrt(C_LIGHT_M_S / (2.0 * d * (f.length_km * 1e3) * lam**2))


@dataclass(frozen=True)
class OpticalMeasures:
    cspr_db: float
    ossr_db: float
    osnr_db: float


def measure_optical(
    w,
    carrier_freq_hz: float,
    baud_hz: float,
    sideband: str = "upper",
    rolloff: float = 0.01,
    rbw_hz: float | None = None,
    noise_density: float | None = None,
) -> OpticalMeasures:
    """Carrier-to-signal, sideband-suppression, and OSNR estimates.

    The carrier bin spans +-baud/256 around carrier_freq_hz; the signal band
    extends (1+rolloff)/2 * baud to either side of the carrier, the kept side
    selected by `sideband`. OSNR uses the injected noise density when given
    (simulation ground truth); otherwise it is extrapolated from the spectral
    floor beyond the signal band, which modulator harmonics can bias.
    """
    if sideband not in ("upper", "lower"):
        raise ValueError("sideband must be 'upper' or 'lower'")
    if rbw_hz is None:
        rbw_hz = baud_hz / 1024.0
    f, p = welch_spectrum(w, rbw_hz)
    rel = f - carrier_freq_hz
    half_carrier = baud_hz / 256.0
    band_edge = (1.0 + rolloff) / 2.0 * baud_hz * 1.04  # small margin for leakage

    carrier_sel = np.abs(rel) <= half_carrier
    upper_sel = (rel > half_carrier) & (rel <= band_edge)
    lower_sel = (rel < -half_carrier) & (rel >= -band_edge)
    p_carrier = float(np.sum(p[carrier_sel]))
    p_upper = float(np.sum(p[upper_sel]))
    p_lower = float(np.sum(p[lower_sel]))
    p_signal = p_upper + p_lower

    bin_hz = f[1] - f[0]
    peak_density = np.max(p[carrier_sel]) / bin_hz if np.any(carrier_sel) else 0.0
    side_density = max(p_signal, 1e-300) / max(np.sum(upper_sel | lower_sel), 1) / bin_hz
    if p_carrier <= 0 or peak_density < 3.0 * side_density:
        raise ValueError("carrier not resolvable against the signal band")

    if sideband == "upper":
        ossr_db = 10.0 * math.log10(max(p_upper, 1e-300) / max(p_lower, 1e-300))
    else:
        ossr_db = 10.0 * math.log10(max(p_lower, 1e-300) / max(p_upper, 1e-300))
    cspr_db = 10.0 * math.log10(p_carrier / max(p_signal, 1e-300))

    if noise_density is None:
        floor_sel = (np.abs(rel) > 1.25 * band_edge) & (np.abs(rel) < 2.0 * band_edge)
        if not np.any(floor_sel):
            floor_sel = np.abs(rel) > 1.25 * band_edge
        noise_density = float(np.median(p[floor_sel]) / bin_hz) if np.any(floor_sel) else 0.0
    in_band = carrier_sel | upper_sel | lower_sel
    band_hz = float(np.sum(in_band)) * bin_hz
    p_total = p_carrier + p_signal
    p_sig_clean = max(p_total - noise_density * band_hz, 1e-300)
    p_noise_ref = noise_density * OSNR_REF_BW_HZ
    osnr_db = 10.0 * math.log10(p_sig_clean / p_noise_ref) if p_noise_ref > 0 else math.inf
    return OpticalMeasures(cspr_db=cspr_db, ossr_db=ossr_db, osnr_db=osnr_db)


def pdf_profile(samples, bins: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Normalized amplitude histogram (bin centers, probability density)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 1e4:
        raise ValueError("pdf_profile needs at least 1e4 samples")
    density, edges = np.histogram(x, bins=bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, density


def count_modes(centers: np.ndarray, density: np.ndarray, min_rel_height: float = 0.05) -> int:
    """Number of detectable modes in a histogram, via peak finding on a
    lightly smoothed density. Zero padding lets boundary bins count as peaks."""
    smooth = dsp.savgol_filter(density, window_length=min(9, len(density) // 2 * 2 + 1), polyorder=2)
    padded = np.concatenate([[0.0], smooth, [0.0]])
    peaks, _ = dsp.find_peaks(padded, height=min_rel_height * np.max(smooth), prominence=0.02 * np.max(smooth))
    return int(peaks.size)
