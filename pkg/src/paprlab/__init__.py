"""Peak-to-average power reduction for oversampled OFDM: serial peak cancellation
and the clipping / conventional peak-cancellation baselines it is compared with."""

from ._backend import BACKEND
from .clipping import ClipConfig, ScfFactor, clip, rcf, scf, scf_beta
from .metrics import ber_awgn, ccdf_estimate, papr_at_ccdf, sdr_db
from .ofdm import (
    FreqSymbol,
    PowerStats,
    forward_fft,
    lowpass_filter,
    map_qam16,
    normalize_power,
    oversampled_ifft,
    papr_db,
)
from .peak_cancel import (
    CancelReport,
    OpCounter,
    SpcState,
    WindowFn,
    complexity_alg1,
    complexity_alg2,
    cpc,
    expected_peak_count,
    make_window,
    scale_factor,
    spc_algorithm1,
    spc_algorithm2,
    spc_step,
)
from .schemes import SchemeConfig

__version__ = "0.1.0"
