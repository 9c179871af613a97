//! Trigonometric perturbations of the plateau density and the coefficient
//! set they live in.
//!
//! `phi_k(x) = A^{-1/2} cos(k pi x / A)` on `[-A, A)` for `k > 0`, the same
//! with sine (signed `k` inside) for `k < 0`. On the dyadic grids of
//! [`LfGrid`] these are exactly orthonormal under grid quadrature.

use crate::error::{CoreError, Result};
use crate::grid::{kahan_sum, GridFunction};
use crate::lower_bound::plateau::{plateau_density_on, LfGrid};
use crate::sobolev;
use std::f64::consts::PI;
use std::sync::Arc;

/// Sparse coefficient vector: finitely many nonzero `theta_k`, `k != 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThetaVector {
    entries: Vec<(i64, f64)>, // sorted by k, no zeros, no duplicates
}

impl ThetaVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut entries: Vec<(i64, f64)> = pairs
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .collect();
        if entries.iter().any(|&(k, _)| k == 0) {
            return Err(CoreError::InvalidParameter(
                "theta has no k = 0 coefficient".into(),
            ));
        }
        if entries.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(CoreError::InvalidParameter(
                "theta coefficients must be finite".into(),
            ));
        }
        entries.sort_by_key(|&(k, _)| k);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(CoreError::InvalidParameter(format!(
                    "duplicate coefficient index {}",
                    pair[0].0
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn single(k: i64, value: f64) -> Result<Self> {
        Self::from_pairs([(k, value)])
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn get(&self, k: i64) -> f64 {
        self.entries
            .binary_search_by_key(&k, |&(i, _)| i)
            .map(|idx| self.entries[idx].1)
            .unwrap_or(0.0)
    }

    /// Returns a copy with `theta_k` shifted by `delta`.
    pub fn with_shift(&self, k: i64, delta: f64) -> Result<Self> {
        let mut map: Vec<(i64, f64)> = self.entries.clone();
        match map.binary_search_by_key(&k, |&(i, _)| i) {
            Ok(idx) => map[idx].1 += delta,
            Err(idx) => map.insert(idx, (k, delta)),
        }
        Self::from_pairs(map)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(k, v)| (k, v * s)).collect(),
        }
    }

    pub fn l1(&self) -> f64 {
        kahan_sum(self.entries.iter().map(|&(_, v)| v.abs()))
    }

    pub fn sum_sq(&self) -> f64 {
        kahan_sum(self.entries.iter().map(|&(_, v)| v * v))
    }

    /// `sum theta_k^2 (|k| pi / A)^p`.
    pub fn weighted_sum_sq(&self, a_half: u32, p: f64) -> f64 {
        let a = a_half as f64;
        kahan_sum(
            self.entries
                .iter()
                .map(|&(k, v)| v * v * ((k.unsigned_abs() as f64) * PI / a).powf(p)),
        )
    }

    pub fn max_abs_index(&self) -> i64 {
        self.entries
            .iter()
            .map(|&(k, _)| k.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn support(&self) -> Vec<i64> {
        self.entries.iter().map(|&(k, _)| k).collect()
    }
}

/// `phi_k` evaluated at a point of `[-A, A)`; zero outside.
pub fn perturbation_value(k: i64, a_half: u32, x: f64) -> f64 {
    let a = a_half as f64;
    if !(-a..a).contains(&x) {
        return 0.0;
    }
    let arg = k as f64 * PI * x / a;
    if k > 0 {
        arg.cos() / a.sqrt()
    } else {
        arg.sin() / a.sqrt()
    }
}

/// `phi_k` sampled on the standard grid for `A`.
pub fn perturbation(k: i64, a_half: u32) -> Result<GridFunction> {
    perturbation_on(k, LfGrid::default_for(a_half)?)
}

pub fn perturbation_on(k: i64, grid: LfGrid) -> Result<GridFunction> {
    if k == 0 {
        return Err(CoreError::InvalidParameter(
            "perturbation index k must be nonzero".into(),
        ));
    }
    let (lo, hi) = grid.support();
    GridFunction::from_fn(lo, hi, grid.n_points, |x| {
        perturbation_value(k, grid.a_half, x)
    })
}

/// `sum_k theta_k phi_k` sampled on the grid.
///
/// Oscillations are generated by a rotation recurrence, re-synchronized to
/// the libm value every 4096 points to keep the drift near 1e-12.
pub fn perturbation_sum_on(theta: &ThetaVector, grid: LfGrid) -> Result<Vec<f64>> {
    for &(k, _) in theta.entries() {
        if k == 0 {
            return Err(CoreError::InvalidParameter("k = 0".into()));
        }
    }
    let (lo, _) = grid.support();
    let dx = grid.dx();
    let a = grid.a_half as f64;
    let inv_sqrt_a = 1.0 / a.sqrt();
    let n = grid.n_points;
    // the support [-A, A) is exactly on-grid (dyadic step)
    let j_start = ((-a - lo) / dx).round() as usize;
    let j_end = ((a - lo) / dx).round() as usize;
    let mut sum = vec![0.0f64; n];
    const RESYNC: usize = 4096;
    for &(k, v) in theta.entries() {
        let freq = k as f64 * PI / a;
        let weight = v * inv_sqrt_a;
        let (rot_c, rot_s) = ((freq * dx).cos(), (freq * dx).sin());
        let mut j = j_start;
        while j < j_end {
            let arg = freq * (lo + j as f64 * dx);
            let (mut s, mut c) = arg.sin_cos();
            let block_end = (j + RESYNC).min(j_end);
            if k > 0 {
                for slot in &mut sum[j..block_end] {
                    *slot += weight * c;
                    let c_next = c * rot_c - s * rot_s;
                    s = s * rot_c + c * rot_s;
                    c = c_next;
                }
            } else {
                for slot in &mut sum[j..block_end] {
                    *slot += weight * s;
                    let c_next = c * rot_c - s * rot_s;
                    s = s * rot_c + c * rot_s;
                    c = c_next;
                }
            }
            j = block_end;
        }
    }
    Ok(sum)
}

/// The coefficient set: both budget inequalities of the construction.
#[derive(Debug, Clone, Copy)]
pub struct ParameterSet {
    pub a_half: u32,
    pub beta: f64,
    pub l: f64,
}

impl ParameterSet {
    pub fn new(a_half: u32, beta: f64, l: f64) -> Result<Self> {
        if a_half < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "half-support A must be at least 2, got {a_half}"
            )));
        }
        sobolev::SobolevClass::new(beta, l)?;
        Ok(Self { a_half, beta, l })
    }

    /// `sum |theta_k| <= A^{1 - 2 beta}`.
    pub fn l1_budget(&self) -> f64 {
        (self.a_half as f64).powf(1.0 - 2.0 * self.beta)
    }

    /// `sum theta_k^2 (k pi / A)^{2 beta} <= 4 A^2 L`.
    pub fn quad_budget(&self) -> f64 {
        4.0 * (self.a_half as f64).powi(2) * self.l
    }
}

/// Result of the membership test with both slacks.
#[derive(Debug, Clone, Copy)]
pub struct ThetaMembership {
    pub l1: f64,
    pub l1_margin: f64,
    pub quad: f64,
    pub quad_margin: f64,
}

impl ThetaMembership {
    pub fn l1_ok(&self) -> bool {
        self.l1_margin >= 0.0
    }

    pub fn quad_ok(&self) -> bool {
        self.quad_margin >= 0.0
    }

    pub fn member(&self) -> bool {
        self.l1_ok() && self.quad_ok()
    }
}

pub fn theta_membership(theta: &ThetaVector, set: &ParameterSet) -> ThetaMembership {
    let l1 = theta.l1();
    let quad = theta.weighted_sum_sq(set.a_half, 2.0 * set.beta);
    ThetaMembership {
        l1,
        l1_margin: set.l1_budget() - l1,
        quad,
        quad_margin: set.quad_budget() - quad,
    }
}

/// The perturbed density `f_theta = plateau * (1 + sum theta_k phi_k) / b(theta)`.
#[derive(Debug, Clone)]
pub struct PerturbedDensity {
    pub a_half: u32,
    pub theta: ThetaVector,
    pub b_theta: f64,
    pub plateau: Arc<GridFunction>,
    pub density: GridFunction,
    grid: LfGrid,
}

impl PerturbedDensity {
    pub fn grid(&self) -> LfGrid {
        self.grid
    }

    /// The normalizer bracket `|b - 1| <= A^{-3/2}` of coefficient vectors
    /// inside the budget set.
    pub fn b_bracket_ok(&self) -> bool {
        (self.b_theta - 1.0).abs() <= (self.a_half as f64).powf(-1.5)
    }
}

/// Build `f_theta` on the standard grid for `A`.
pub fn build_f_theta(theta: &ThetaVector, a_half: u32) -> Result<PerturbedDensity> {
    build_f_theta_on(theta, LfGrid::default_for(a_half)?)
}

pub fn build_f_theta_on(theta: &ThetaVector, grid: LfGrid) -> Result<PerturbedDensity> {
    let plateau = plateau_density_on(grid)?;
    let sum = perturbation_sum_on(theta, grid)?;
    let a = grid.a_half as f64;
    // positivity of the bracket 1 + sum theta_k phi_k on the support
    let mut min_bracket = f64::INFINITY;
    for (j, &s) in sum.iter().enumerate() {
        let x = plateau.x(j);
        if (-a..a).contains(&x) {
            min_bracket = min_bracket.min(1.0 + s);
        }
    }
    if min_bracket <= 0.0 {
        return Err(CoreError::NotADensity {
            reason: format!(
                "perturbation bracket reaches {min_bracket:.3e}; theta is too large for a density"
            ),
        });
    }
    let dx = plateau.dx();
    let unnormalized: Vec<f64> = plateau
        .values()
        .iter()
        .zip(&sum)
        .map(|(&p, &s)| p * (1.0 + s))
        .collect();
    let b_theta = dx * kahan_sum(unnormalized.iter().copied());
    let values: Vec<f64> = unnormalized.iter().map(|v| v / b_theta).collect();
    let density = GridFunction::new(plateau.support_lo(), plateau.support_hi(), values)?;
    density.require_density()?;
    Ok(PerturbedDensity {
        a_half: grid.a_half,
        theta: theta.clone(),
        b_theta,
        plateau,
        density,
        grid,
    })
}

/// Two routes to `||(sum theta_k phi_k)^{(gamma)}||_2^2`: the spectral norm on
/// the period grid `[-A, A)` against the closed-form sum
/// `sum theta_k^2 (|k| pi / A)^{2 gamma}`.
pub fn derivative_identity_check(
    theta: &ThetaVector,
    a_half: u32,
    gamma: f64,
) -> Result<(f64, f64)> {
    if a_half < 2 {
        return Err(CoreError::InvalidParameter("A must be >= 2".into()));
    }
    let a = a_half as f64;
    let k_max = theta.max_abs_index().max(1) as usize;
    let n = (4 * k_max).next_power_of_two().max(1 << 12);
    // period grid: the support is exactly one period, so the transform's
    // frequency lattice contains every mode k pi / A exactly
    let lo = -a;
    let hi = a;
    let dx = (hi - lo) / n as f64;
    let mut values = vec![0.0f64; n];
    for &(k, v) in theta.entries() {
        let freq = k as f64 * PI / a;
        let weight = v / a.sqrt();
        for (j, s) in values.iter_mut().enumerate() {
            let arg = freq * (lo + j as f64 * dx);
            *s += weight * if k > 0 { arg.cos() } else { arg.sin() };
        }
    }
    let f = GridFunction::new(lo, hi, values)?;
    let lhs = if gamma == 0.0 {
        f.norm_sq()
    } else {
        sobolev::fractional_derivative(&f, gamma)?.norm_sq()
    };
    let rhs = theta.weighted_sum_sq(a_half, 2.0 * gamma);
    Ok((lhs, rhs))
}

/// The weighted-budget inequality
/// `sum theta_k^2 (k pi / A)^{2 beta - l} <= (1 + 4 L) A^{2 - l}` for
/// `0 < l < 2 beta`, on coefficient vectors from the budget set.
pub fn weighted_sum_bound_check(
    theta: &ThetaVector,
    set: &ParameterSet,
    l_exp: f64,
) -> Result<(bool, f64, f64)> {
    if !(l_exp > 0.0 && l_exp < 2.0 * set.beta) {
        return Err(CoreError::InvalidParameter(format!(
            "exponent l must lie in (0, 2 beta), got {l_exp}"
        )));
    }
    let lhs = theta.weighted_sum_sq(set.a_half, 2.0 * set.beta - l_exp);
    let rhs = (1.0 + 4.0 * set.l) * (set.a_half as f64).powf(2.0 - l_exp);
    Ok((lhs <= rhs, lhs, rhs))
}
