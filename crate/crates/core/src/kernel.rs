//! Pinsker's constant, the minimax tuning constant, and the minimax kernel
//! `K_hat(w) = (1 - c |w|^beta)_+` in both domains.

use crate::error::{CoreError, Result};
use crate::fourier;
use crate::grid::{GridFunction, SpectralFunction};
use crate::sobolev::SobolevClass;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Exact asymptotic constant of the minimax integrated risk:
/// `(2b+1) (pi (2b+1)(b+1)/b)^{-2b/(2b+1)} L^{1/(2b+1)}`.
pub fn pinsker_constant(cls: &SobolevClass) -> f64 {
    let b = cls.beta;
    let base = PI * (2.0 * b + 1.0) * (b + 1.0) / b;
    (2.0 * b + 1.0) * base.powf(-2.0 * b / (2.0 * b + 1.0)) * cls.l.powf(1.0 / (2.0 * b + 1.0))
}

/// Minimax multiplier scale `c_min = (n L pi (2b+1)(b+1)/b)^{-b/(2b+1)}`.
///
/// Strictly decreasing in `n`, with `c_min * n^{b/(2b+1)}` constant.
pub fn c_min(cls: &SobolevClass, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(CoreError::InvalidParameter(
            "sample size n must be at least 1".into(),
        ));
    }
    let b = cls.beta;
    let base = n as f64 * cls.l * PI * (2.0 * b + 1.0) * (b + 1.0) / b;
    Ok(base.powf(-b / (2.0 * b + 1.0)))
}

/// Frequency-domain kernel specification `(beta, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub beta: f64,
    pub c: f64,
}

impl KernelSpec {
    pub fn new(beta: f64, c: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && c.is_finite() && c > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "kernel spec needs beta > 0 and c > 0, got beta={beta}, c={c}"
            )));
        }
        Ok(Self { beta, c })
    }

    /// The minimax kernel for the class at sample size `n`.
    pub fn minimax(cls: &SobolevClass, n: u64) -> Result<Self> {
        Self::new(cls.beta, c_min(cls, n)?)
    }

    /// Truncation edge `c^{-1/beta}`: `K_hat` vanishes for `|w| >= edge`.
    pub fn omega_edge(&self) -> f64 {
        self.c.powf(-1.0 / self.beta)
    }

    /// `max(0, 1 - c |w|^beta)`.
    pub fn kernel_hat(&self, w: f64) -> f64 {
        (1.0 - self.c * w.abs().powf(self.beta)).max(0.0)
    }

    /// Value of the time-domain kernel at the origin:
    /// `K(0) = (1/2pi) integral K_hat = (beta/(beta+1)) * omega_edge / pi`.
    pub fn value_at_origin(&self) -> f64 {
        self.beta / (self.beta + 1.0) * self.omega_edge() / PI
    }

    /// Sample `K_hat` on the symmetric frequency grid.
    pub fn sample_hat(&self, omega_max: f64, n: usize) -> Result<SpectralFunction> {
        SpectralFunction::from_fn(omega_max, n, |w| Complex64::new(self.kernel_hat(w), 0.0))
    }
}

/// Tolerance of the kernel tail-mass gate `|integral K - 1| < tol`.
pub const KERNEL_MASS_TOL: f64 = 1e-6;

/// Inverse transform of `K_hat` on `[-half_span, half_span)`.
///
/// Fails when the grid is too coarse to host the kernel band
/// (`pi/dx < omega_edge`) or the support too narrow for its tails
/// (quadrature mass off by more than [`KERNEL_MASS_TOL`]).
pub fn kernel_time_domain(
    spec: &KernelSpec,
    support: (f64, f64),
    n_points: usize,
) -> Result<GridFunction> {
    let (lo, hi) = support;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CoreError::InvalidSupport { lo, hi });
    }
    if (lo + hi).abs() > 1e-9 * (hi - lo) {
        return Err(CoreError::InvalidParameter(format!(
            "kernel support must be symmetric about 0, got [{lo}, {hi})"
        )));
    }
    if n_points < 2 || !n_points.is_power_of_two() {
        return Err(CoreError::NonPowerOfTwo(n_points));
    }
    let dx = (hi - lo) / n_points as f64;
    let omega_max = PI / dx;
    if omega_max < spec.omega_edge() {
        return Err(CoreError::InvalidParameter(format!(
            "grid nyquist {omega_max:.3} cannot represent the kernel band \
             (omega_edge = {:.3}); use more points or a narrower support",
            spec.omega_edge()
        )));
    }
    let hat = spec.sample_hat(omega_max, n_points)?;
    let (kernel, _) = fourier::inverse_transform_unchecked(&hat, support, n_points)?;
    // Mass gate: quadrature integral against K_hat(0) = 1. With half-weight
    // boundary terms this detects tails folding back across the period.
    let trapezoid =
        kernel.integral() - 0.5 * kernel.dx() * (kernel.values()[0] + kernel.values()[n_points - 1]);
    let deficit = (trapezoid - 1.0).abs();
    if deficit > KERNEL_MASS_TOL {
        return Err(CoreError::KernelTailMass {
            deficit,
            tol: KERNEL_MASS_TOL,
        });
    }
    Ok(kernel)
}

/// Pick a symmetric support and point count for [`kernel_time_domain`]: the
/// half-span doubles until the mass gate passes and the origin value has
/// stabilized under further widening (periodized tails below 5e-7), with the
/// point count keeping the Nyquist band comfortably above `omega_edge`.
pub fn kernel_grid_plan(spec: &KernelSpec, min_half_span: f64) -> (f64, usize) {
    let edge = spec.omega_edge();
    let points_for = |half: f64| -> usize {
        let needed = 2.0 * half * 1.3 * edge / PI;
        (needed.max(256.0) as usize).next_power_of_two().min(1 << 22)
    };
    let mut half = min_half_span.max(8.0 / edge).max(4.0);
    let mut prev_origin: Option<f64> = None;
    loop {
        let n = points_for(half);
        if let Ok(k) = kernel_time_domain(spec, (-half, half), n) {
            let origin = k.values()[k.nearest_index(0.0)];
            if let Some(prev) = prev_origin {
                if (origin - prev).abs() < 5e-7 {
                    return (half, n);
                }
            }
            prev_origin = Some(origin);
        } else {
            prev_origin = None;
        }
        half *= 2.0;
        if half > 1e7 || points_for(half) >= 1 << 22 {
            return (half, points_for(half));
        }
    }
}

type KernelKey = (u64, u64, u64, u64, usize);

static KERNEL_CACHE: Lazy<Mutex<HashMap<KernelKey, Arc<GridFunction>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached variant of [`kernel_time_domain`] keyed by `(beta, c, grid)`.
pub fn kernel_time_domain_cached(
    spec: &KernelSpec,
    support: (f64, f64),
    n_points: usize,
) -> Result<Arc<GridFunction>> {
    let key = (
        spec.beta.to_bits(),
        spec.c.to_bits(),
        support.0.to_bits(),
        support.1.to_bits(),
        n_points,
    );
    if let Some(hit) = KERNEL_CACHE.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let fresh = Arc::new(kernel_time_domain(spec, support, n_points)?);
    KERNEL_CACHE
        .lock()
        .unwrap()
        .insert(key, fresh.clone());
    Ok(fresh)
}
