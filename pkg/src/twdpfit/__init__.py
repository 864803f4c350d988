"""Rician vs two-wave-with-diffuse-power fading identification for measured
wireless channels: distribution functions, seedable generators, the
grid-search ML / information-criterion / g-test decision pipeline, spatial
correlation processing and link-level BER consequences.
"""

from .errors import (
    DomainError,
    EstimationError,
    NumericalError,
    ParseError,
    TwdpfitError,
)
from .fading import (
    FadingParams,
    marcum_q1,
    rayleigh_cdf,
    rice_cdf,
    rice_pdf,
    sigma2_from_k,
    specular_amplitudes,
    twdp_cdf,
    twdp_pdf,
)
from .inference import (
    EnvelopeSet,
    FitReport,
    GridConfig,
    GTestResult,
    ModelFit,
    aicc,
    chi2_quantile,
    estimate_omega,
    fit_envelopes,
    g_test,
    ml_fit,
    partition_chequerboard,
    partition_stride,
    select_model,
)
from .linksim import BerCurve, capacity_loss, simulate_ber
from .measurement import (
    CorrelationMap,
    DirectionalScan,
    SpatialGrid,
    autocorr2d,
    average_corr,
    cir,
    excess_distance,
    noise_mask,
    power_map,
    tap_envelopes,
)
from .synth import ComplexSampleSet, PlaneWave, PlaneWaveScene, sample_twdp, synth_field

__version__ = "0.1.0"

__all__ = [
    "TwdpfitError", "DomainError", "ParseError", "EstimationError", "NumericalError",
    "FadingParams", "marcum_q1", "sigma2_from_k", "specular_amplitudes",
    "rayleigh_cdf", "rice_cdf", "rice_pdf", "twdp_cdf", "twdp_pdf",
    "EnvelopeSet", "GridConfig", "ModelFit", "GTestResult", "FitReport",
    "partition_stride", "partition_chequerboard", "estimate_omega",
    "ml_fit", "aicc", "select_model", "g_test", "chi2_quantile", "fit_envelopes",
    "ComplexSampleSet", "PlaneWave", "PlaneWaveScene", "sample_twdp", "synth_field",
    "SpatialGrid", "DirectionalScan", "CorrelationMap",
    "noise_mask", "power_map", "autocorr2d", "average_corr",
    "cir", "excess_distance", "tap_envelopes",
    "BerCurve", "simulate_ber", "capacity_loss",
]
