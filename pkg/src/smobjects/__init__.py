"""Objects discovered as networks of highly probable sensorimotor transitions.

A naive agent moves a small sensor aperture over a grid world, memorizes the
salient readings of the first scene, and after every scene change checks
which state-to-state motor transitions still hold. Rigid objects surface as
sets of states whose transitions stay near-certain; spectral clustering and
probability thresholding pull those sets out of the learned matrix.
"""

from .agent import (
    SensorSpec,
    contrast_sensor_1d,
    contrast_sensor_2d,
    filter_response,
    is_salient,
    motor_range,
    read_sensor,
    salient_positions,
)
from .explore import (
    ExperimentResult,
    ReplayError,
    SceneEvent,
    events_to_log,
    explore_first_scene,
    replay,
    run_experiment,
    verify_scene,
)
from .harness import (
    ExperimentConfig,
    PurityReport,
    config_to_lines,
    evaluate_purity,
    ground_truth_labels,
    parse_config,
    run_custom,
    run_pipeline,
    run_sim1,
    run_sim2,
    sim1_config,
    sim2_config,
    write_artifacts,
)
from .memory import (
    NothingToLearnError,
    StateCatalog,
    TransitionRecord,
    TransitionStore,
    build_catalog,
    reduce,
    reinforce,
)
from .spectral import (
    ClusterAssignment,
    ThresholdExtraction,
    build_similarity,
    cluster_similarity,
    eigendecompose_symmetric,
    estimate_k_eigengap,
    extract_objects_by_threshold,
    kmeans,
    reorder,
    spectral_embed,
)
from .worldsim import (
    GridObject,
    ObjectSpec,
    PlacementError,
    Scene,
    WorldSpec,
    cell,
    compose,
    generate_initial_scene,
    mutate_scene,
)

__version__ = "0.1.0"

__all__ = [
    "SensorSpec",
    "contrast_sensor_1d",
    "contrast_sensor_2d",
    "filter_response",
    "is_salient",
    "motor_range",
    "read_sensor",
    "salient_positions",
    "ExperimentResult",
    "ReplayError",
    "SceneEvent",
    "events_to_log",
    "explore_first_scene",
    "replay",
    "run_experiment",
    "verify_scene",
    "ExperimentConfig",
    "PurityReport",
    "config_to_lines",
    "evaluate_purity",
    "ground_truth_labels",
    "parse_config",
    "run_custom",
    "run_pipeline",
    "run_sim1",
    "run_sim2",
    "sim1_config",
    "sim2_config",
    "write_artifacts",
    "NothingToLearnError",
    "StateCatalog",
    "TransitionRecord",
    "TransitionStore",
    "build_catalog",
    "reduce",
    "reinforce",
    "ClusterAssignment",
    "ThresholdExtraction",
    "build_similarity",
    "cluster_similarity",
    "eigendecompose_symmetric",
    "estimate_k_eigengap",
    "extract_objects_by_threshold",
    "kmeans",
    "reorder",
    "spectral_embed",
    "GridObject",
    "ObjectSpec",
    "PlacementError",
    "Scene",
    "WorldSpec",
    "cell",
    "compose",
    "generate_initial_scene",
    "mutate_scene",
    "__version__",
]
