//! Fractional differentiation by Fourier multiplier and Sobolev seminorms.
//!
//! The derivative of order `gamma >= 0` is the inverse transform of
//! `m_gamma(w) * F(w)` with the principal-branch multiplier
//!
//! ```text
//! m_gamma(w) = |w|^gamma * exp(-i sgn(w) gamma pi/2)
//! ```
//!
//! which reduces to ordinary differentiation at integer orders and gives
//! `|w|^{2 gamma} |F|^2` as the seminorm weight.

use crate::error::{CoreError, Result};
use crate::fourier;
use crate::grid::{kahan_sum, GridFunction};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Smoothness class: squared seminorm of order `beta` bounded by `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevClass {
    pub beta: f64,
    pub l: f64,
}

impl SobolevClass {
    pub fn new(beta: f64, l: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "smoothness index beta must be positive, got {beta}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "seminorm budget L must be positive and finite, got {l}"
            )));
        }
        Ok(Self { beta, l })
    }

    /// Lower-bound machinery additionally needs `beta > 1/2`.
    pub fn require_lower_bound_range(&self) -> Result<()> {
        if self.beta <= 0.5 {
            return Err(CoreError::InvalidParameter(format!(
                "lower-bound routines need beta > 1/2, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Relative multiplier-weighted energy allowed beyond `band_fraction * omega_max`.
#[derive(Debug, Clone, Copy)]
pub struct TailCheck {
    pub threshold: f64,
    pub band_fraction: f64,
}

impl Default for TailCheck {
    fn default() -> Self {
        Self {
            threshold: 1e-6,
            band_fraction: 0.9,
        }
    }
}

pub fn multiplier(gamma: f64, w: f64) -> Complex64 {
    if w == 0.0 {
        return if gamma == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        };
    }
    let mag = w.abs().powf(gamma);
    let phase = -w.signum() * gamma * FRAC_PI_2;
    Complex64::new(mag * phase.cos(), mag * phase.sin())
}

fn tail_fraction(weighted: &[f64], n: usize, band_fraction: f64) -> f64 {
    // weighted[k] = |m F|^2 at omega_k; tail = |omega_k| > band_fraction * omega_max
    let total: f64 = kahan_sum(weighted.iter().copied());
    if total <= 0.0 {
        return 0.0;
    }
    let cut = (band_fraction * n as f64 / 2.0) as usize;
    let mut tail = 0.0;
    for (k, &e) in weighted.iter().enumerate() {
        let offset = (k as isize - (n / 2) as isize).unsigned_abs();
        if offset > cut {
            tail += e;
        }
    }
    tail / total
}

/// `|w|^{2 gamma}` with the zero-frequency bin pinned to a finite value
/// (0 for gamma != 0; the seminorm adds the exact singular-cell term itself).
fn weight_at(gamma: f64, w: f64) -> f64 {
    if w == 0.0 {
        if gamma == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        w.abs().powf(2.0 * gamma)
    }
}

fn checked_weighted_energy(
    spectrum_values: &[Complex64],
    n: usize,
    gamma: f64,
    d_omega: f64,
    omega_max: f64,
    tail: TailCheck,
) -> Result<Vec<f64>> {
    let weighted: Vec<f64> = (0..n)
        .map(|k| {
            let w = -omega_max + k as f64 * d_omega;
            weight_at(gamma, w) * spectrum_values[k].norm_sqr()
        })
        .collect();
    let frac = tail_fraction(&weighted, n, tail.band_fraction);
    if frac > tail.threshold {
        return Err(CoreError::SpectralTail {
            fraction: frac,
            threshold: tail.threshold,
            band_fraction: tail.band_fraction,
        });
    }
    Ok(weighted)
}

/// Fractional derivative of order `gamma >= 0` on the grid's Nyquist band.
///
/// `gamma = 0` returns the input unchanged (exact identity, no transform).
pub fn fractional_derivative(f: &GridFunction, gamma: f64) -> Result<GridFunction> {
    fractional_derivative_with(f, gamma, TailCheck::default())
}

pub fn fractional_derivative_with(
    f: &GridFunction,
    gamma: f64,
    tail: TailCheck,
) -> Result<GridFunction> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "derivative order must be >= 0, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(f.clone());
    }
    let spec = fourier::forward_transform_natural(f)?;
    let n = spec.len();
    let omega_max = spec.omega_max();
    let d_omega = spec.d_omega();
    checked_weighted_energy(spec.values(), n, gamma, d_omega, omega_max, tail)?;
    let multiplied: Vec<Complex64> = spec
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| multiplier(gamma, -omega_max + k as f64 * d_omega) * v)
        .collect();
    let mspec = crate::grid::SpectralFunction::new(omega_max, multiplied)?;
    // The multiplier preserves Hermitian symmetry; skip the redundant gate.
    let (out, _) =
        fourier::inverse_transform_unchecked(&mspec, (f.support_lo(), f.support_hi()), f.len())?;
    Ok(out)
}

/// Squared Sobolev seminorm `(1/2pi) integral |w|^{2 gamma} |F(w)|^2 dw`.
///
/// Accepts any order `gamma > -1/2`; the singular zero-frequency cell of
/// negative orders is integrated in closed form.
pub fn sobolev_seminorm_sq(f: &GridFunction, gamma: f64) -> Result<f64> {
    sobolev_seminorm_sq_with(f, gamma, TailCheck::default())
}

pub fn sobolev_seminorm_sq_with(f: &GridFunction, gamma: f64, tail: TailCheck) -> Result<f64> {
    if !(gamma.is_finite() && gamma > -0.5) {
        return Err(CoreError::InvalidParameter(format!(
            "seminorm order must exceed -1/2, got {gamma}"
        )));
    }
    let spec = fourier::forward_transform_natural(f)?;
    let n = spec.len();
    let omega_max = spec.omega_max();
    let d_omega = spec.d_omega();
    let weighted = checked_weighted_energy(spec.values(), n, gamma, d_omega, omega_max, tail)?;
    let mut sum = kahan_sum(weighted.iter().copied());
    if gamma < 0.0 {
        // |w|^{2 gamma} blows up at the w = 0 bin (its weight is pinned to 0
        // above); integrate that cell exactly, 2 gamma + 1 > 0 keeps it finite.
        let f0 = spec.values()[n / 2].norm_sqr();
        let half = 0.5 * d_omega;
        let cell_avg = 2.0 * half.powf(2.0 * gamma + 1.0) / ((2.0 * gamma + 1.0) * d_omega);
        sum += f0 * cell_avg;
    }
    Ok(sum * d_omega / (2.0 * PI))
}

/// Class membership with its slack: `seminorm^2 <= L`, margin `L - seminorm^2`.
#[derive(Debug, Clone, Copy)]
pub struct Membership {
    pub member: bool,
    pub seminorm_sq: f64,
    pub margin: f64,
}

pub fn class_membership(f: &GridFunction, cls: &SobolevClass) -> Result<Membership> {
    f.require_density()?;
    let s = sobolev_seminorm_sq(f, cls.beta)?;
    Ok(Membership {
        member: s <= cls.l,
        seminorm_sq: s,
        margin: cls.l - s,
    })
}
