//! Declarative gain sweeps over the three source geometries.

mod config;
mod output;
mod run;

pub use config::{
    log_ladder, GainConfig, GainKind, Geometry, GridConfig, LabUnits, MediumConfig, OutputKind, PumpConfig,
    ScenarioConfig,
};
pub use output::write_outputs;
pub use run::{
    compute_states, compute_states_for, filter_state, resolve_cache_dir, run_scenario, sweep_filters, sweep_filters_on,
    FilterSweep, FilteredState, FilteredSummary, GainState, GainSummary, PropagatorCache, RunOptions, ScenarioResult,
    ScenarioSummary, Source, StateSweep, COARSE_POINTS,
};

/// Environment variable that overrides the propagator cache directory.
pub const CACHE_ENV: &str = "TWINBEAM_CACHE_DIR";
