"""Illumination-aware video compositing: MVC cloning, gradient mixing and
swarm-sampled alpha matting over a propagated trimap."""

from .compositor import (
    CompositeConfig,
    PipelineError,
    PipelineResult,
    compose_layers,
    run_pipeline,
)
from .imaging import Frame, compute_gradient, load_frame, save_frame
from .matting import (
    AlphaMatte,
    CandidateSet,
    PsoConfig,
    SamplePair,
    collect_samples,
    correlation_matte,
    estimate_alpha,
    matte_composite,
    pair_fitness,
    pso_select,
    smooth_matte,
)
from .metrics import MetricsRecord, emit_report, mse, rgb_probe
from .mixing import MixingWeights, legacy_mixing_weight, mixed_gradient, mixing_weight
from .mvc import CloneParams, MeanValueWeights, clone_region, mean_value_coordinates, membrane
from .synthetic import SceneSpec, bundled_suite, generate_scene
from .trimap import (
    BoundaryList,
    Label,
    Trimap,
    TrimapFlow,
    extract_boundary,
    hierarchical_boundary_sample,
    load_trimap,
    propagate_trimap,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaMatte", "BoundaryList", "CandidateSet", "CloneParams", "CompositeConfig",
    "Frame", "Label", "MeanValueWeights", "MetricsRecord", "MixingWeights",
    "PipelineError", "PipelineResult", "PsoConfig", "SamplePair", "SceneSpec",
    "Trimap", "TrimapFlow", "bundled_suite", "clone_region", "collect_samples",
    "compose_layers", "compute_gradient", "correlation_matte", "emit_report",
    "estimate_alpha", "extract_boundary", "generate_scene",
    "hierarchical_boundary_sample", "legacy_mixing_weight", "load_frame",
    "load_trimap", "matte_composite", "mean_value_coordinates", "membrane",
    "mixed_gradient", "mixing_weight", "mse", "pair_fitness", "propagate_trimap",
    "pso_select", "rgb_probe", "run_pipeline", "save_frame", "smooth_matte",
]
