//! The least-favorable construction: the smooth plateau center density, its
//! trigonometric perturbations and their budget set, the product prior on
//! the coefficients, Fisher-information diagnostics, and the Bayes-risk
//! lower-bound chain.

pub mod bump;
pub mod diagnostics;
pub mod perturbation;
pub mod plateau;
pub mod prior;
pub mod theorem2;
pub mod van_trees;

pub use bump::{calibrate_a, calibrate_a_against, calibration_integral, BumpDensity, Calibration};
pub use diagnostics::{
    default_sensitivity_step, fisher_info_numeric, fourier_coeff_derivative_numeric,
    SensitivityEstimate,
};
pub use perturbation::{
    build_f_theta, build_f_theta_on, derivative_identity_check, perturbation, perturbation_value,
    theta_membership, weighted_sum_bound_check, ParameterSet, PerturbedDensity, ThetaMembership,
    ThetaVector,
};
pub use plateau::{g_hat, plateau_density, plateau_density_on, LfGrid};
pub use prior::{
    a_schedule, lemma1_tail_probability, prior_spec, Lemma1Audit, PriorSpec, XiLaw,
};
pub use theorem2::{
    k_star, plateau_seminorm_bound, plateau_seminorm_sq, theorem2_sweep, ProbeFamily,
    ProbeRecord, SweepConfig, SweepResult, SweepRow,
};
pub use van_trees::{van_trees_bound, van_trees_closed_form};

/// Shape constant of the bump density used throughout the construction.
///
/// The canonical calibration level `2 pi` brackets no root over the scanned
/// range (see [`calibrate_a`]: the integral is bounded below by `2 pi`,
/// approached only in the degenerate flat limit), so the construction pins
/// the flagged fallback `a = 1`.
pub fn shape_constant() -> f64 {
    bump::FALLBACK_SHAPE_A
}
