"""Landmark-guided picture composition with a resampling diffusion sampler."""

from .canvas import (
    CompositionSpec,
    Placement,
    load_image,
    load_mask,
    rasterize,
    save_image,
    spec_from_json,
    spec_to_json,
)
from .denoiser import (
    Denoiser,
    EpsilonPrediction,
    GaussianDenoiser,
    GmmDenoiser,
    GmmModel,
    analytic_gmm_epsilon,
    gmm_posterior_mean,
)
from .sampler import (
    CompositionInput,
    OpCountReport,
    PaintCancelled,
    PaintResult,
    ResampleConfig,
    ResamplePlan,
    SamplingFailure,
    build_resample_plan,
    count_ops,
    encode_known,
    merge,
    paint,
    reverse_step,
    unconditional_sample,
)
from .schedule import (
    GaussianNoiseSource,
    Schedule,
    forward_jump,
    forward_rejump,
    forward_step,
    linear_beta_schedule,
)
from .spectral import (
    CorruptionProfile,
    RadialSpectrum,
    corruption_profile,
    expected_noise_spectrum,
    highband_energy,
    radial_power_spectrum,
)

__version__ = "0.1.0"
