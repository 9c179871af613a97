//! Continuous Fourier transform bridge.
//!
//! Conventions (characteristic-function orientation):
//!
//! ```text
//! forward:  F(w) = integral f(x) e^{+iwx} dx
//! inverse:  f(x) = (1/2pi) integral F(w) e^{-ixw} dw
//! ```
//!
//! Both integrals are discretized by the uniform-rectangle rule on the
//! respective grids. When `omega_max = pi/dx` (the Nyquist default) the pair
//! reduces to an exact DFT/IDFT pair, so round trips are exact to rounding.
//! Other `omega_max` values go through a chirp-z (Bluestein) evaluation of
//! the same sums.

use crate::error::{CoreError, Result};
use crate::grid::{GridFunction, SpectralFunction};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Tolerance for treating a frequency step as the exact DFT step.
const NATURAL_STEP_TOL: f64 = 1e-12;
/// Hermitian-symmetry tolerance for inverse transforms of real functions.
pub const HERMITIAN_TOL: f64 = 1e-8;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Unnormalized in-place FFT through the shared plan cache.
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// `S_k = sum_j y_j e^{i sign phi j k}` for `k = 0..n_out`, arbitrary real `phi > 0`.
///
/// Uses Bluestein's factorization `jk = (j^2 + k^2 - (k-j)^2)/2`; three FFTs
/// of length `>= n_in + n_out - 1`.
fn chirp_z(y: &[Complex64], n_out: usize, phi: f64, sign: f64) -> Vec<Complex64> {
    let n_in = y.len();
    let m = (n_in + n_out - 1).next_power_of_two();
    let half = 0.5 * sign * phi;
    let chirp = |idx: usize| -> Complex64 {
        let t = half * (idx as f64) * (idx as f64);
        Complex64::new(t.cos(), t.sin())
    };
    let mut u = vec![Complex64::default(); m];
    for (j, yj) in y.iter().enumerate() {
        u[j] = yj * chirp(j);
    }
    let mut v = vec![Complex64::default(); m];
    for k in 0..n_out {
        v[k] = chirp(k).conj();
    }
    for j in 1..n_in {
        v[m - j] = chirp(j).conj();
    }
    fft_in_place(&mut u, false);
    fft_in_place(&mut v, false);
    for (a, b) in u.iter_mut().zip(&v) {
        *a *= b;
    }
    fft_in_place(&mut u, true);
    let scale = 1.0 / m as f64;
    (0..n_out).map(|k| u[k] * chirp(k) * scale).collect()
}

/// `S_k = sum_j y_j e^{i sign 2pi jk/n}` via a single FFT.
fn dft_natural(y: &[Complex64], sign: f64) -> Vec<Complex64> {
    let mut buf = y.to_vec();
    fft_in_place(&mut buf, sign > 0.0);
    buf
}

fn exponential_sum(y: &[Complex64], n_out: usize, phi: f64, sign: f64) -> Vec<Complex64> {
    let n = y.len();
    if n == n_out && (phi * n as f64 / (2.0 * PI) - 1.0).abs() < NATURAL_STEP_TOL {
        dft_natural(y, sign)
    } else {
        chirp_z(y, n_out, phi, sign)
    }
}

/// Forward transform of a grid function onto `[-omega_max, omega_max)` with the
/// same number of points.
///
/// `F(0)` reproduces the quadrature integral of `f` exactly.
pub fn forward_transform(f: &GridFunction, omega_max: f64) -> Result<SpectralFunction> {
    if !(omega_max.is_finite() && omega_max > 0.0) {
        return Err(CoreError::OmegaMaxNonPositive(omega_max));
    }
    let n = f.len();
    let dx = f.dx();
    let dw = 2.0 * omega_max / n as f64;
    let phi = dw * dx;
    let natural = (phi * n as f64 / (2.0 * PI) - 1.0).abs() < NATURAL_STEP_TOL;

    // y_j = f_j e^{-i omega_max j dx}; on the natural grid the phase is exactly (-1)^j.
    let y: Vec<Complex64> = if natural {
        f.values()
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let s = if j % 2 == 0 { v } else { -v };
                Complex64::new(s, 0.0)
            })
            .collect()
    } else {
        f.values()
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let t = -omega_max * j as f64 * dx;
                Complex64::new(t.cos(), t.sin()) * v
            })
            .collect()
    };
    let sums = exponential_sum(&y, n, phi, 1.0);
    let lo = f.support_lo();
    let values: Vec<Complex64> = sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let wk = -omega_max + k as f64 * dw;
            let t = wk * lo;
            Complex64::new(t.cos(), t.sin()) * s * dx
        })
        .collect();
    SpectralFunction::new(omega_max, values)
}

/// Forward transform on the grid's own Nyquist band `omega_max = pi/dx`.
pub fn forward_transform_natural(f: &GridFunction) -> Result<SpectralFunction> {
    forward_transform(f, PI / f.dx())
}

/// Forward transform onto `[-omega_max, omega_max)` with `n_out` samples,
/// independent of the input grid size. Always the chirp-z path.
pub fn forward_transform_sized(
    f: &GridFunction,
    omega_max: f64,
    n_out: usize,
) -> Result<SpectralFunction> {
    if !(omega_max.is_finite() && omega_max > 0.0) {
        return Err(CoreError::OmegaMaxNonPositive(omega_max));
    }
    if n_out < 2 || !n_out.is_power_of_two() {
        return Err(CoreError::NonPowerOfTwo(n_out));
    }
    let dx = f.dx();
    let dw = 2.0 * omega_max / n_out as f64;
    let phi = dw * dx;
    let y: Vec<Complex64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let t = -omega_max * j as f64 * dx;
            Complex64::new(t.cos(), t.sin()) * v
        })
        .collect();
    let sums = chirp_z(&y, n_out, phi, 1.0);
    let lo = f.support_lo();
    let values: Vec<Complex64> = sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let wk = -omega_max + k as f64 * dw;
            let t = wk * lo;
            Complex64::new(t.cos(), t.sin()) * s * dx
        })
        .collect();
    SpectralFunction::new(omega_max, values)
}

/// Pointwise transform values `F(w) = dx sum_j f_j e^{i w x_j}` at arbitrary
/// frequencies. Direct evaluation; intended for a handful of points.
pub fn fourier_at(f: &GridFunction, omegas: &[f64]) -> Vec<Complex64> {
    let dx = f.dx();
    let lo = f.support_lo();
    omegas
        .iter()
        .map(|&w| {
            let mut acc = Complex64::default();
            for (j, &v) in f.values().iter().enumerate() {
                if v != 0.0 {
                    let t = w * (lo + j as f64 * dx);
                    acc += Complex64::new(t.cos(), t.sin()) * v;
                }
            }
            acc * dx
        })
        .collect()
}

/// Inverse transform onto the grid `[lo, hi)` with `n_points` samples.
///
/// Requires Hermitian symmetry of `spectrum` within [`HERMITIAN_TOL`]; the
/// imaginary residue of the reconstruction is discarded after that check.
pub fn inverse_transform(
    spectrum: &SpectralFunction,
    support: (f64, f64),
    n_points: usize,
) -> Result<GridFunction> {
    inverse_transform_with_tol(spectrum, support, n_points, HERMITIAN_TOL)
}

pub fn inverse_transform_with_tol(
    spectrum: &SpectralFunction,
    support: (f64, f64),
    n_points: usize,
    hermitian_tol: f64,
) -> Result<GridFunction> {
    let dev = spectrum.hermitian_asymmetry();
    if dev > hermitian_tol {
        return Err(CoreError::AsymmetricSpectrum {
            dev,
            tol: hermitian_tol,
        });
    }
    Ok(inverse_transform_unchecked(spectrum, support, n_points)?.0)
}

/// Inverse transform without the symmetry gate; also returns the largest
/// imaginary residue (relative to the peak magnitude) for diagnostics.
pub fn inverse_transform_unchecked(
    spectrum: &SpectralFunction,
    support: (f64, f64),
    n_points: usize,
) -> Result<(GridFunction, f64)> {
    let (lo, hi) = support;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CoreError::InvalidSupport { lo, hi });
    }
    if n_points < 2 || !n_points.is_power_of_two() {
        return Err(CoreError::NonPowerOfTwo(n_points));
    }
    let dw = spectrum.d_omega();
    let omega_max = spectrum.omega_max();
    let dx = (hi - lo) / n_points as f64;
    let phi = dw * dx;
    // G_k = F_k e^{-i k dw lo}
    let g: Vec<Complex64> = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let t = -(k as f64) * dw * lo;
            Complex64::new(t.cos(), t.sin()) * v
        })
        .collect();
    let sums = exponential_sum(&g, n_points, phi, -1.0);
    let scale = dw / (2.0 * PI);
    let mut peak = f64::MIN_POSITIVE;
    let mut imag_max = 0.0f64;
    let values: Vec<f64> = sums
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            let t = omega_max * (lo + j as f64 * dx);
            let z = Complex64::new(t.cos(), t.sin()) * s * scale;
            peak = peak.max(z.norm());
            imag_max = imag_max.max(z.im.abs());
            z.re
        })
        .collect();
    Ok((GridFunction::new(lo, hi, values)?, imag_max / peak))
}

/// Discrete Parseval pair: `dx * sum f^2` and `(dw/2pi) * sum |F|^2`.
pub fn parseval_pair(f: &GridFunction, spectrum: &SpectralFunction) -> (f64, f64) {
    let time = f.norm_sq();
    let freq = spectrum.d_omega() / (2.0 * PI)
        * crate::grid::kahan_sum(spectrum.values().iter().map(|v| v.norm_sqr()));
    (time, freq)
}
