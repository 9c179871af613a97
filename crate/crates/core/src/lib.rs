//! Exact-constant minimax density estimation over fractional Sobolev
//! classes: spectral calculus on uniform grids, the minimax kernel and its
//! Pinsker constant, kernel density estimation with exact and Monte Carlo
//! integrated-risk oracles, and the least-favorable lower-bound
//! construction.

pub mod error;
pub mod estimator;
pub mod fourier;
pub mod grid;
pub mod kernel;
pub mod lower_bound;
pub mod rng;
pub mod sampling;
pub mod sobolev;

pub use error::{CoreError, Result};
pub use estimator::{
    exact_mise, exact_mise_split, ise, kde_evaluate, kde_evaluate_naive, monte_carlo_mise,
    MiseEstimate,
};
pub use fourier::{
    forward_transform, forward_transform_natural, forward_transform_sized, fourier_at,
    inverse_transform, inverse_transform_unchecked, parseval_pair,
};
pub use grid::{GridFunction, SpectralFunction};
pub use kernel::{
    c_min, kernel_grid_plan, kernel_time_domain, kernel_time_domain_cached, pinsker_constant,
    KernelSpec,
};
pub use rng::{rng_streams, RngStream, StreamState};
pub use sampling::{rejection_sample, Sample};
pub use sobolev::{
    class_membership, fractional_derivative, fractional_derivative_with, sobolev_seminorm_sq,
    sobolev_seminorm_sq_with, Membership, SobolevClass, TailCheck,
};
