//! Statistical experiments: Birkhoff averages, correlations, spectral scans,
//! rigidity, joinings and the DJR weak-mixing experiment.

pub mod correlation;
pub mod djr;
pub mod estimate;
pub mod joining;
pub mod spectral;
pub mod system;

pub use correlation::{correlation_sequence, flow_rigidity_test, rigidity_test, RigidityResult};
pub use djr::{
    djr_weak_mixing_experiment, t_alpha_ergodicity_probe, DjrWeakMixingReport, TAlphaReport,
};
pub use estimate::{birkhoff, birkhoff_flow, birkhoff_union, MeasureEstimate};
pub use joining::{joining_estimate, JoiningClass, JoiningEstimate};
pub use spectral::{
    default_lambda_grid, rational_grid, spectral_scan, spectral_scan_flow, spectral_scan_rotation,
    SpectralScan,
};
pub use system::System;
