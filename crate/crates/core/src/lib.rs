#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub use faer::c64;

pub mod calibrate;
pub mod error;
pub mod filter;
pub mod gaussian;
pub mod grid;
pub mod linalg;
pub mod medium;
pub mod poling;
pub mod propagator;
pub mod pump;
pub mod scenario;
pub mod schmidt;

pub use calibrate::{calibrate_pump_power, Calibration, CalibrationOptions};
pub use error::{Error, Result};
pub use filter::{filter_transmission, FilterFunction, FilterKind};
pub use gaussian::{
    bloch_messiah, covariance_from_correlators, covariance_from_state, extract_mode_sets, fidelity_matrix,
    filter_pure_mode, filtered_correlators, purity, purity_from_determinant, williamson, BlochMessiahResult,
    CovarianceMatrix, FilteredModeSet, PureFilteredMode, WilliamsonResult,
};
pub use grid::FrequencyGrid;
pub use medium::{delta_k, MediumSpec, Mode};
pub use poling::{
    design_domains, pmf_of_profile, sigma_th_from_separability, target_amplitude, PmfTarget, PolingDesign,
    PolingProfile,
};
pub use propagator::{
    assemble_generator, compose, domain_propagator, double_pass_propagator, stitch, GeneratorBlocks, Propagator,
};
pub use pump::{pump_amplitude, PumpSpectrum};
pub use scenario::{run_scenario, sweep_filters, Geometry, RunOptions, ScenarioConfig, ScenarioResult};
pub use schmidt::{
    jsa, mean_signal_photons, mode_fidelity, schmidt_decompose, schmidt_number, Correlators, JsaMatrix,
    SchmidtDecomposition,
};
