"""Multimodal presentation-technique analytics engine.

Computes 23 presentation-technique factors from speech feature bundles,
scores their effectiveness with a proportional-odds ordinal model, recommends
similar and different speeches or sentences, and summarizes speeches as
glyph-ready data for a linked four-panel UI.
"""

__version__ = "0.1.0"

from .bundle import (
    FeatureBundle,
    SpeechMeta,
    bundle_from_doc,
    bundle_to_doc,
    dump_bundle,
    load_bundle,
    slice_bundle,
)
from .effectiveness import (
    EffectivenessModel,
    EffectivenessScore,
    FactorCoefficients,
    builtin_model,
    effectiveness_curve,
    evaluate,
    factor_histogram,
    fit,
    load_model,
    parallel_lines_test,
    save_model,
    wald_significance,
)
from .factors import (
    ALL_FACTORS,
    FactorId,
    FactorVector,
    MassTable,
    average,
    compute_factors,
    dispersion,
    emotion_diversity,
    gesture_diversity,
    gesture_energy_series,
    volatility,
    watching_camera_ratio,
)
from .recommend import RecommendationQuery, RecommendationResult, recommend, speech_script_vector
from .store import CorpusStore
from .summarize import (
    OverlayTrail,
    SpeechTwinSummary,
    TimeSliceView,
    cluster_poses,
    gaze_heatmap,
    overlay_trail,
    representative_pose,
    speech_twin,
    time_slices,
)
from .synth import SynthProfile, synth_bundle
