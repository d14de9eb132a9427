"""Desk-scale simulator of an interference-based bit-commitment protocol.

One party commits a bit by choosing what to measure — which-slit telescopes
(bit 0) or screen position (bit 1) — over N rounds in which the other party
secretly opens or closes two slits.  The package provides the far-field
optics (tabulated densities and samplers), the two-party protocol engine
with a hypothesis-testing verifier, parameterized cheating strategies with
Monte Carlo estimators of their success, and a toy linear-algebra
demonstration of the purification attack that motivates the design.
"""

from .config import (
    DEFAULT_CONFIG_TOML,
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    config_hash,
    load_config,
)
from .montecarlo import (
    CheatEstimate,
    ConcealingReport,
    ConsistencyEstimate,
    GuessSlitTrials,
    SweepResult,
    SweepRow,
    binding_sweep,
    concealing_experiment,
    estimate_cheat_success,
    guess_slit_trials,
    no_detection_consistency,
    run_single_protocol,
)
from .nogo import (
    DensityMatrix,
    InsufficientAncillaError,
    NogoError,
    NotEquallyConcealingError,
    PureState,
    UnitaryMatrix,
    apply_on_A,
    cheating_unitary,
    fidelity,
    haar_unitary,
    partial_trace_A,
    random_density_matrix,
    random_purification,
    trace_distance,
    unitarity_defect,
)
from .optics import (
    NoPhotonError,
    OpticsError,
    OpticsParams,
    ScreenGrid,
    ScreenPdf,
    SlitConfig,
    WhichSlit,
    WindowTooNarrowError,
    count_dark_hits,
    dark_fringe_bin_mask,
    dark_fringe_mass,
    density_at,
    fringe_phase,
    fringe_visibility,
    fringe_visibility_from_positions,
    make_grid,
    mixture_screen_pdf,
    photon_arrives,
    sample_screen_position,
    sample_which_slit,
    screen_pdf,
    wavefront_earth_ratio,
    wavefront_extent,
)
from .protocol import (
    AliceBehavior,
    AliceState,
    Bit,
    CheckResult,
    CommitTranscript,
    MeasurementKind,
    ProtocolAbort,
    ProtocolError,
    ProtocolParams,
    RoundAnnouncement,
    RoundSecret,
    UnveilData,
    Verdict,
    bob_draw_configs,
    bob_verify,
    dark_fringe_occupancy_test,
    min_positions_for_occupancy_test,
    run_commit_phase,
    substream,
)
from .stats import (
    BalanceResult,
    GofResult,
    InsufficientSamplesError,
    Log2Fit,
    binomial_balance_test,
    chi_squared_gof,
    equal_probability_edges,
    exact_binomial_two_sided_pvalue,
    fit_log2_acceptance,
    ks_distance,
    total_variation_distance,
    wilson_interval,
)
from .strategies import (
    StrategyKind,
    StrategySpec,
    behavior_for,
    build_unveil,
    fabricate_screen_unveil,
    guess_slit_unveil,
    honest_unveil,
    no_detection_unveil,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
