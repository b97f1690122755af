"""thzbeam: scalar-diffraction toolkit for THz wavefront engineering."""

from .aperture import (
    SPEED_OF_LIGHT,
    AmplitudeMask,
    ApertureField,
    ApertureGrid,
    AxiconDesign,
    CausticCurve,
    ObstacleSpec,
    PhaseMap,
    WavefrontSpec,
    axicon_design,
    circular_taper,
    compose_aperture,
    make_grid,
    make_obstacle_mask,
    phase_caustic,
    phase_conical,
    phase_planar,
    phase_quadratic,
    phase_spiral,
    quantize_phase,
    synthesize_field,
    synthesize_phase,
    wrap_phase,
)
from .errors import (
    CausticDesignError,
    ConfigError,
    EvanescentDesignError,
    GeometryError,
    NoBeamError,
    SamplingError,
    ToolkitError,
)
from .metrics import (
    BeamStats,
    GainCurve,
    abbe_spot,
    aperture_gain_dbi,
    beam_profile_stats,
    fraunhofer_distance,
    gain_curve,
    normalized_gain,
    numeric_aperture,
    self_healing_correlation,
)
from .oam import (
    CrosstalkMatrix,
    LinkBudgetSpec,
    OamModeSet,
    crosstalk_matrix,
    demultiplex,
    multiplex,
    required_bandwidth,
)
from .propagation import (
    FieldSlice,
    FrequencySweep,
    PropagationPlan,
    axial_scan,
    multi_frequency_scan,
    propagate_asm,
    propagate_direct,
    propagate_slice,
    propagate_with_obstacles,
)
from .scenarios import (
    PRESET_NAMES,
    RunManifest,
    ScenarioConfig,
    load_config,
    parse_config,
    preset,
    preset_text,
    run_scenario,
)

__version__ = "0.1.0"
