"""Desk-scale simulator and DSP library for direct-detection optical links.

Covers two systems end to end: Nyquist PAM-4 over short standard fiber, and
Nyquist single-sideband PAM-4 over metro spans with Kramers-Kronig reception.
The physical layer (dual-drive Mach-Zehnder modulator, chromatic dispersion,
noise loading, square-law detection) and the full adaptive receiver chain
(fractional RLS equalizer, decision-directed refinement, post filter, MLSD)
are all included, along with a configuration-driven experiment runner.
"""

from .sigkit import (
    EDGE_GUARD,
    ComplexWaveform,
    FirFilter,
    RealWaveform,
    analytic_signal,
    psd,
    read_waveform,
    resample,
    resample_to,
    rrc_taps,
    welch_spectrum,
    write_waveform,
)
from .txchain import (
    DacModel,
    SymbolFrame,
    apply_dac,
    build_frame,
    demap_pam4,
    frame_overhead_ratio,
    make_ssb_drives,
    map_pam4,
    net_bit_rate,
    shape_nyquist,
    slice_pam4,
)
from .linkmodel import (
    FiberParams,
    MzmParams,
    NoiseLoader,
    elec_frontend,
    fiber_cd,
    load_osnr,
    mzm_dual_drive,
    mzm_small_signal,
    obpf,
    photodiode,
    unit_carrier,
)
from .rxchain import (
    EqualizerConfig,
    EqualizerState,
    MinimumPhaseError,
    PostFilter,
    SyncNotFoundError,
    TrellisSpec,
    cd_compensate,
    dd_rls,
    ffe_apply,
    ffe_train,
    kk_reconstruct,
    mlsd_viterbi,
    phase_align,
    postfilter_apply,
    remove_carrier,
    synchronize,
)
from .metrics import (
    BerReport,
    OpticalMeasures,
    count_ber,
    fading_first_null_hz,
    fading_oracle,
    measure_optical,
    pdf_profile,
)
from .bench import ScenarioConfig, cspr_search, run_scenario, write_csv

__version__ = "0.1.0"
