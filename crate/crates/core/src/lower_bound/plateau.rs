//! The plateau density: convolution of the bump with a scaled indicator.
//!
//! `g_A` is `1/(2A-1)` times the indicator of `[-A+1/2, A-1/2]`, so the
//! convolution is supported on `[-A, A]`, takes the constant value
//! `1/(2A-1)` on `[-A+1, A-1]` and rolls off smoothly over the outer unit
//! strips. The convolution is done spectrally: the bump transform is sampled
//! on the target band and multiplied by the closed-form indicator transform.

use crate::error::{CoreError, Result};
use crate::fourier;
use crate::grid::{GridFunction, SpectralFunction};
use crate::lower_bound::bump::BumpDensity;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Closed-form transform of `g_A`: `2 sin((A - 1/2) w) / ((2A - 1) w)`.
pub fn g_hat(a_half: u32, w: f64) -> f64 {
    let edge = a_half as f64 - 0.5;
    let denom = 2.0 * a_half as f64 - 1.0;
    if w.abs() < 1e-14 {
        1.0
    } else {
        2.0 * (edge * w).sin() / (denom * w)
    }
}

/// Grid geometry used by the least-favorable construction for half-support `A`.
///
/// The span is the next power of two above `2A + 2`, so the grid step is
/// dyadic and every structural break point (`+-A`, `+-(A-1)`, `+-(A-1/2)`)
/// falls exactly on a grid point. Trigonometric quadrature over `[-A, A)`
/// then telescopes exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LfGrid {
    pub a_half: u32,
    pub n_points: usize,
    /// Power-of-two multiplier on the base span (1 for the standard grid;
    /// larger for seminorms whose fractional tails need room).
    pub span_factor: u32,
}

impl LfGrid {
    pub fn new(a_half: u32, n_points: usize) -> Result<Self> {
        Self::with_span_factor(a_half, n_points, 1)
    }

    pub fn with_span_factor(a_half: u32, n_points: usize, span_factor: u32) -> Result<Self> {
        if a_half < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "half-support A must be at least 2, got {a_half}"
            )));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(CoreError::NonPowerOfTwo(n_points));
        }
        if span_factor == 0 || !span_factor.is_power_of_two() {
            return Err(CoreError::InvalidParameter(format!(
                "span factor must be a power of two, got {span_factor}"
            )));
        }
        Ok(Self {
            a_half,
            n_points,
            span_factor,
        })
    }

    /// Default resolution: step near 1/256 with a floor of 2^13 points.
    pub fn default_for(a_half: u32) -> Result<Self> {
        let span = Self::span_for(a_half);
        let n = ((span * 256.0) as usize).next_power_of_two().max(1 << 13);
        Self::new(a_half, n)
    }

    pub fn span_for(a_half: u32) -> f64 {
        ((2 * a_half + 2) as usize).next_power_of_two() as f64
    }

    pub fn span(&self) -> f64 {
        Self::span_for(self.a_half) * self.span_factor as f64
    }

    pub fn half_span(&self) -> f64 {
        self.span() / 2.0
    }

    pub fn support(&self) -> (f64, f64) {
        (-self.half_span(), self.half_span())
    }

    pub fn dx(&self) -> f64 {
        self.span() / self.n_points as f64
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }
}

fn build_plateau(grid: LfGrid) -> Result<GridFunction> {
    let a_half = grid.a_half;
    let bump = BumpDensity::new(crate::lower_bound::shape_constant())?;
    let n = grid.n_points;
    let omega_max = grid.nyquist();
    let f0_hat = fourier::forward_transform_sized(bump.grid(), omega_max, n)?;
    let values: Vec<Complex64> = (0..n)
        .map(|k| {
            let w = f0_hat.omega(k);
            f0_hat.values()[k] * g_hat(a_half, w)
        })
        .collect();
    let spec = SpectralFunction::new(omega_max, values)?;
    let (raw, _) = fourier::inverse_transform_unchecked(&spec, grid.support(), n)?;
    // exact compact support: zero outside [-A, A], clip band-limit ringing
    let a = a_half as f64;
    let cleaned: Vec<f64> = raw
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let x = raw.x(j);
            // the continuous convolution vanishes at the closed endpoints too
            if x <= -a || x >= a {
                0.0
            } else {
                v.max(0.0)
            }
        })
        .collect();
    GridFunction::new(raw.support_lo(), raw.support_hi(), cleaned)
}

static PLATEAU_CACHE: Lazy<Mutex<HashMap<LfGrid, Arc<GridFunction>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// `f0 * g_A` on the standard grid for `A` (cached).
pub fn plateau_density(a_half: u32) -> Result<Arc<GridFunction>> {
    plateau_density_on(LfGrid::default_for(a_half)?)
}

pub fn plateau_density_on(grid: LfGrid) -> Result<Arc<GridFunction>> {
    if let Some(hit) = PLATEAU_CACHE.lock().unwrap().get(&grid) {
        return Ok(hit.clone());
    }
    let fresh = Arc::new(build_plateau(grid)?);
    PLATEAU_CACHE.lock().unwrap().insert(grid, fresh.clone());
    Ok(fresh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lower_bound::bump::bump_shape;

    /// Oracle: P(x) = (F0(x + A - 1/2) - F0(x - A + 1/2)) / (2A - 1) with the
    /// bump CDF F0 evaluated by adaptive Simpson on the closed form.
    fn plateau_oracle(a_half: u32, x: f64, c_a: f64, a: f64) -> f64 {
        let lo = (x - (a_half as f64 - 0.5)).max(-0.5);
        let hi = (x + (a_half as f64 - 0.5)).min(0.5);
        if hi <= lo {
            return 0.0;
        }
        simpson(|t| bump_shape(a, t), lo, hi, 1 << 12) / c_a / (2.0 * a_half as f64 - 1.0)
    }

    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn plateau_value_and_support() {
        for a_half in [2u32, 5, 10] {
            let p = plateau_density(a_half).unwrap();
            let target = 1.0 / (2.0 * a_half as f64 - 1.0);
            let j0 = p.nearest_index(0.0);
            assert!(
                (p.values()[j0] - target).abs() < 1e-8,
                "A={a_half}: P(0) = {} vs {target}",
                p.values()[j0]
            );
            // flat on [-A+1, A-1]
            let mut worst = 0.0f64;
            for (j, &v) in p.values().iter().enumerate() {
                let x = p.x(j);
                if x.abs() <= a_half as f64 - 1.0 {
                    worst = worst.max((v - target).abs());
                }
                if x.abs() >= a_half as f64 {
                    assert_eq!(v, 0.0, "A={a_half}: nonzero at x={x}");
                }
            }
            assert!(worst < 1e-8, "A={a_half}: plateau deviation {worst:.3e}");
            assert!((p.integral() - 1.0).abs() < 1e-8, "A={a_half}");
            assert!(p.is_density());
        }
    }

    #[test]
    fn plateau_matches_cdf_oracle_on_the_rolloff() {
        let a_half = 4u32;
        let p = plateau_density(a_half).unwrap();
        let bump = BumpDensity::new(crate::lower_bound::shape_constant()).unwrap();
        let mut worst = 0.0f64;
        for (j, &v) in p.values().iter().enumerate() {
            let x = p.x(j);
            if x.abs() > a_half as f64 - 1.0 && x.abs() < a_half as f64 {
                let oracle = plateau_oracle(a_half, x, bump.c_a, bump.a);
                worst = worst.max((v - oracle).abs());
            }
        }
        assert!(worst < 1e-7, "rolloff oracle gap {worst:.3e}");
    }

    #[test]
    fn plateau_is_symmetric() {
        let p = plateau_density(6).unwrap();
        let n = p.len();
        let v = p.values();
        for k in 1..n / 2 {
            assert!((v[n / 2 + k] - v[n / 2 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_small_a() {
        assert!(plateau_density(1).is_err());
    }

    #[test]
    fn g_hat_at_zero_and_formula() {
        assert_eq!(g_hat(2, 0.0), 1.0);
        let w = 1.7;
        assert!((g_hat(2, w) - 2.0 * (1.5 * w).sin() / (3.0 * w)).abs() < 1e-15);
    }
}
