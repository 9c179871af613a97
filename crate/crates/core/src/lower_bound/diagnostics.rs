//! Quadrature diagnostics behind the Bayes-risk bound: the per-coefficient
//! Fisher information of the perturbed family and the sensitivity of the
//! matched Fourier functional, both expected near their `1/(2A)` and
//! `1/(2 sqrt A)` limits.

use crate::error::{CoreError, Result};
use crate::grid::kahan_sum;
use crate::lower_bound::perturbation::{
    build_f_theta_on, perturbation_value, PerturbedDensity,
};

/// Density values below this are treated as exact zeros in the information
/// integrand; the numerator carries the squared plateau factor, so the ratio
/// vanishes with it.
const PLATEAU_FLOOR: f64 = 1e-30;

/// `I(theta_kappa) = (1/b) int P phi_kappa^2 / (1 + sum theta phi) dx - (m_kappa / b)^2`
/// evaluated by grid quadrature; `m_kappa = int P phi_kappa`.
pub fn fisher_info_numeric(pd: &PerturbedDensity, kappa: i64) -> Result<f64> {
    if kappa == 0 {
        return Err(CoreError::InvalidParameter(
            "coefficient index kappa must be nonzero".into(),
        ));
    }
    let plateau = pd.plateau.as_ref();
    let dx = plateau.dx();
    let a_half = pd.a_half;
    // bracket = density * b / plateau pointwise, but recompute from theta to
    // keep the edge guard explicit
    let sum = crate::lower_bound::perturbation::perturbation_sum_on(&pd.theta, pd.grid())?;
    let mut integral = 0.0;
    let mut moment = 0.0;
    for (j, (&p, &s)) in plateau.values().iter().zip(&sum).enumerate() {
        if p < PLATEAU_FLOOR {
            continue;
        }
        let phi = perturbation_value(kappa, a_half, plateau.x(j));
        integral += p * phi * phi / (1.0 + s);
        moment += p * phi;
    }
    integral *= dx;
    moment *= dx;
    Ok(integral / pd.b_theta - (moment / pd.b_theta).powi(2))
}

/// Central-difference sensitivity of the matched Fourier functional
/// `sqrt(A) <f_theta, phi_c>` with respect to `theta_c`, with a step-halving
/// consistency gap.
///
/// For `c > 0` this is the real-part derivative of the transform at mode
/// `c pi / A`; for `c < 0` the imaginary-part analogue. Both approach
/// `1/(2 sqrt A)`.
#[derive(Debug, Clone, Copy)]
pub struct SensitivityEstimate {
    pub value: f64,
    /// Relative gap between the full-step and half-step estimates.
    pub richardson_gap: f64,
}

pub fn fourier_coeff_derivative_numeric(
    pd: &PerturbedDensity,
    c: i64,
    step: f64,
) -> Result<SensitivityEstimate> {
    if c == 0 {
        return Err(CoreError::InvalidParameter(
            "coefficient index must be nonzero".into(),
        ));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CoreError::StepUnderflow(step));
    }
    let theta_c = pd.theta.get(c);
    if theta_c != 0.0 && step < theta_c.abs() * 1e-12 {
        return Err(CoreError::StepUnderflow(step));
    }
    let d_full = central_difference(pd, c, step)?;
    let d_half = central_difference(pd, c, 0.5 * step)?;
    let scale = d_full.abs().max(d_half.abs()).max(f64::MIN_POSITIVE);
    Ok(SensitivityEstimate {
        value: d_half,
        richardson_gap: (d_full - d_half).abs() / scale,
    })
}

fn matched_functional(pd: &PerturbedDensity, c: i64) -> f64 {
    let a = pd.a_half as f64;
    let dx = pd.density.dx();
    let dot = kahan_sum(pd.density.values().iter().enumerate().map(|(j, &v)| {
        v * perturbation_value(c, pd.a_half, pd.density.x(j))
    }));
    a.sqrt() * dot * dx
}

fn central_difference(pd: &PerturbedDensity, c: i64, h: f64) -> Result<f64> {
    let plus = build_f_theta_on(&pd.theta.with_shift(c, h)?, pd.grid())?;
    let minus = build_f_theta_on(&pd.theta.with_shift(c, -h)?, pd.grid())?;
    Ok((matched_functional(&plus, c) - matched_functional(&minus, c)) / (2.0 * h))
}

/// Default step for the sensitivity difference:
/// `1e-5 * max(sigma_kappa, A^{-2 beta})`.
pub fn default_sensitivity_step(sigma_kappa: f64, a_half: u32, beta: f64) -> f64 {
    1e-5 * sigma_kappa.max((a_half as f64).powf(-2.0 * beta))
}
