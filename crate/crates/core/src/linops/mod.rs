//! Linearised operators about the cnoidal wave, their Floquet-Bloch spectra,
//! and the quadratic-form identities used in the stability argument.

mod assembly;
mod bands;
mod curvature;
mod forms;
mod stability;

pub use assembly::{
    assemble, differentiate_modes, BlochOperator, CoefficientSpectrum, OperatorKind,
    OperatorSymbol, SpectralOperator,
};
pub use bands::{bands, brillouin_grid, lowest_eigenvalues, BandStructure};
pub use curvature::{
    c_interval_exact, mu_curvature_explicit, mu_curvature_from_band, mu_curvature_numeric,
    solve_deflated, KERNEL_GAP,
};
pub use forms::{
    assemble_for_profile, intertwine_residual, k_plus_partial, k_plus_soliton_forms,
    quadratic_form, sos_k_minus,
};
pub use stability::{
    jl_eigenvalues, jl_kernel_alignment, spectral_stability_check, StabilityReport, StabilitySlice,
};
