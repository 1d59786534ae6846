//! NLS time evolution, conserved functionals, modulation fits and the
//! orbital-stability experiment.

mod evolve;
mod experiment;
mod field;
mod modulation;

pub use evolve::{evolve, evolve_with, Integrator, Scheme, MAX_LINEAR_PHASE};
pub use experiment::{
    perturbation_direction, stability_experiment, ExperimentParams, ExperimentReport,
    ExperimentSummary, Sample, LYAPUNOV_C, MAX_DELTA,
};
pub use field::{
    directional_derivative, functionals, random_trig, seeded, variational_residual, ConservedSet,
    Field, Functional, MIN_FIELD_M,
};
pub use modulation::{fit_modulation, modulation_rates, ModulationFit, TUBE_RADIUS};
