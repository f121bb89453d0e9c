"""Detection of q-ary data over noisy channels with unknown gain/offset mismatch.

Provides fixed and dynamic threshold detectors, Pearson-distance detection,
k-means clustering detectors, the constrained codebooks that make
mismatch-immune detection possible, and a seeded Monte Carlo WER simulator.
"""

from .channel import (
    LinearChannel,
    NoiseSpec,
    PerLevelOffsetChannel,
    sample_offsets,
    snr_to_sigma,
    transmit_linear,
    transmit_per_level,
)
from .codebook import (
    PearsonCodebook,
    constant_composition_count,
    enumerate_code,
    is_pearson_codeword,
    pearson_code_size,
    sample_codeword,
    verify_properties_AB,
)
from .detectors import (
    DETECTOR_IDS,
    DetectionResult,
    KMeansConfig,
    centroids_to_thresholds,
    detect_ftd,
    detect_minmax,
    detect_pearson,
    fixed_thresholds,
    ftd_tolerance_ok,
    init_centroids_minmax,
    init_centroids_nominal,
    kmeans_detect,
    pearson_distance,
    quantize,
    update_centroids_mean,
    update_centroids_regression,
    within_cluster_ss,
)
from .domain import (
    Alphabet,
    Centroids,
    Codeword,
    ReceivedWord,
    ThresholdVector,
    check_offset_premise,
    validate_codeword,
)
from .metrics import WerEstimate, binomial_ci, q_function, wer_upper_bound
from .sim import SweepConfig, TrialOutcome, WerCurve, run_sweep, run_trial

__version__ = "0.1.0"
