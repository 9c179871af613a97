//! Kernel density estimation and its integrated-squared-error oracles.
//!
//! The estimator is the binned convolution `f_n(x) = (1/n) sum_i K(x - X_i)`
//! with samples snapped to the evaluation grid (bin width = grid step) and
//! the convolution done by FFT; a naive summation path is kept for
//! equivalence testing.

use crate::error::{CoreError, Result};
use crate::fourier;
use crate::grid::{kahan_sum, GridFunction, SpectralFunction};
use crate::rng::RngStream;
use crate::sampling::{rejection_sample, Sample};
use crate::sobolev::{class_membership, SobolevClass};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Empirical mean integrated squared error over replications.
#[derive(Debug, Clone, Copy)]
pub struct MiseEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
    pub n: usize,
    /// Class-membership margin of the target density (warn-only diagnostic).
    pub class_margin: f64,
}

fn bin_sample(sample: &Sample, lo: f64, dx: f64, m: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0.0f64; m];
    for &x in &sample.values {
        let j = ((x - lo) / dx).round();
        if j < 0.0 || j >= m as f64 {
            return Err(CoreError::GridMismatch(format!(
                "sample value {x} falls outside the evaluation grid"
            )));
        }
        counts[j as usize] += 1.0;
    }
    Ok(counts)
}

fn check_kernel(kernel: &GridFunction, dx: f64) -> Result<usize> {
    let mass = kernel.integral();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(CoreError::InvalidParameter(format!(
            "kernel integrates to {mass:.9}, expected 1 within 1e-6"
        )));
    }
    if ((kernel.dx() - dx) / dx).abs() > 1e-9 {
        return Err(CoreError::GridMismatch(format!(
            "kernel step {:.6e} differs from evaluation step {dx:.6e}",
            kernel.dx()
        )));
    }
    // index of the kernel origin
    let j0 = kernel.nearest_index(0.0);
    if kernel.x(j0).abs() > 1e-9 * dx.max(1.0) {
        return Err(CoreError::GridMismatch(
            "kernel grid does not contain x = 0".into(),
        ));
    }
    Ok(j0)
}

/// Binned-convolution estimator with the kernel transform precomputed, so
/// replications share one kernel FFT.
pub struct PreparedKde {
    lo: f64,
    hi: f64,
    eval_points: usize,
    dx: f64,
    j0: usize,
    fft_len: usize,
    kernel_fft: Vec<Complex64>,
}

impl PreparedKde {
    pub fn new(
        kernel: &GridFunction,
        eval_support: (f64, f64),
        eval_points: usize,
    ) -> Result<Self> {
        let (lo, hi) = eval_support;
        if eval_points < 2 || !eval_points.is_power_of_two() {
            return Err(CoreError::NonPowerOfTwo(eval_points));
        }
        let dx = (hi - lo) / eval_points as f64;
        let j0 = check_kernel(kernel, dx)?;
        let fft_len = (eval_points + kernel.len()).next_power_of_two();
        let mut kernel_fft: Vec<Complex64> = kernel
            .values()
            .iter()
            .map(|&k| Complex64::new(k, 0.0))
            .chain(std::iter::repeat(Complex64::default()))
            .take(fft_len)
            .collect();
        fourier::fft_in_place(&mut kernel_fft, false);
        Ok(Self {
            lo,
            hi,
            eval_points,
            dx,
            j0,
            fft_len,
            kernel_fft,
        })
    }

    pub fn evaluate(&self, sample: &Sample) -> Result<GridFunction> {
        if sample.is_empty() {
            return Err(CoreError::EmptySample);
        }
        let counts = bin_sample(sample, self.lo, self.dx, self.eval_points)?;
        let mut a: Vec<Complex64> = counts
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .chain(std::iter::repeat(Complex64::default()))
            .take(self.fft_len)
            .collect();
        fourier::fft_in_place(&mut a, false);
        for (x, y) in a.iter_mut().zip(&self.kernel_fft) {
            *x *= y;
        }
        fourier::fft_in_place(&mut a, true);
        let scale = 1.0 / (self.fft_len as f64 * sample.len() as f64);
        let values: Vec<f64> = (0..self.eval_points)
            .map(|g| a[g + self.j0].re * scale)
            .collect();
        GridFunction::new(self.lo, self.hi, values)
    }
}

/// Binned KDE via FFT convolution.
pub fn kde_evaluate(
    sample: &Sample,
    kernel: &GridFunction,
    eval_support: (f64, f64),
    eval_points: usize,
) -> Result<GridFunction> {
    PreparedKde::new(kernel, eval_support, eval_points)?.evaluate(sample)
}

/// Reference O(bins * grid) summation path for equivalence tests.
pub fn kde_evaluate_naive(
    sample: &Sample,
    kernel: &GridFunction,
    eval_support: (f64, f64),
    eval_points: usize,
) -> Result<GridFunction> {
    if sample.is_empty() {
        return Err(CoreError::EmptySample);
    }
    let (lo, hi) = eval_support;
    if eval_points < 2 || !eval_points.is_power_of_two() {
        return Err(CoreError::NonPowerOfTwo(eval_points));
    }
    let dx = (hi - lo) / eval_points as f64;
    let j0 = check_kernel(kernel, dx)?;
    let counts = bin_sample(sample, lo, dx, eval_points)?;
    let kv = kernel.values();
    let mk = kv.len();
    let inv_n = 1.0 / sample.len() as f64;
    let values: Vec<f64> = (0..eval_points)
        .map(|g| {
            let mut acc = 0.0;
            for (b, &c) in counts.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let idx = g as isize - b as isize + j0 as isize;
                if idx >= 0 && (idx as usize) < mk {
                    acc += c * kv[idx as usize];
                }
            }
            acc * inv_n
        })
        .collect();
    GridFunction::new(lo, hi, values)
}

/// Exact MISE of the kernel estimator, in the Fourier domain:
///
/// ```text
/// MISE = (1/2pi) int [ K^2 (1 - |phi|^2)/n + (1 - K)^2 |phi|^2 ] dw
/// ```
///
/// with `phi` the characteristic function of the target and `K` the real
/// kernel transform on the same frequency grid.
pub fn exact_mise(f_hat: &SpectralFunction, kernel_hat: &[f64], n: usize) -> Result<f64> {
    let (v, b) = exact_mise_split(f_hat, kernel_hat, n)?;
    Ok(v + b)
}

/// Variance and bias terms of [`exact_mise`], separately.
pub fn exact_mise_split(
    f_hat: &SpectralFunction,
    kernel_hat: &[f64],
    n: usize,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(CoreError::InvalidParameter("n must be positive".into()));
    }
    if kernel_hat.len() != f_hat.len() {
        return Err(CoreError::GridMismatch(format!(
            "kernel transform has {} points, spectrum {}",
            kernel_hat.len(),
            f_hat.len()
        )));
    }
    for (k, &kh) in kernel_hat.iter().enumerate() {
        if !((-1e-12..=1.0 + 1e-12).contains(&kh)) {
            return Err(CoreError::InvalidParameter(format!(
                "kernel transform value {kh} at index {k} outside [0, 1]"
            )));
        }
    }
    let mut phi_max = 0.0f64;
    for v in f_hat.values() {
        phi_max = phi_max.max(v.norm());
    }
    if phi_max > 1.0 + 1e-8 {
        return Err(CoreError::NotACharacteristicFunction {
            reason: format!("|phi| reaches {phi_max:.12}, exceeds 1 + 1e-8"),
        });
    }
    let at_zero = f_hat.value_at_zero();
    if (at_zero.re - 1.0).abs() > 1e-6 || at_zero.im.abs() > 1e-6 {
        return Err(CoreError::NotACharacteristicFunction {
            reason: format!("phi(0) = {at_zero} differs from 1"),
        });
    }
    let dw = f_hat.d_omega();
    let inv_n = 1.0 / n as f64;
    let variance = kahan_sum(f_hat.values().iter().zip(kernel_hat).map(|(phi, &kh)| {
        kh * kh * (1.0 - phi.norm_sqr()) * inv_n
    })) * dw
        / (2.0 * PI);
    let bias = kahan_sum(f_hat.values().iter().zip(kernel_hat).map(|(phi, &kh)| {
        (1.0 - kh) * (1.0 - kh) * phi.norm_sqr()
    })) * dw
        / (2.0 * PI);
    Ok((variance, bias))
}

/// Squared L2 distance between two functions on the same grid.
pub fn ise(estimate: &GridFunction, truth: &GridFunction) -> Result<f64> {
    if estimate.len() != truth.len()
        || (estimate.support_lo() - truth.support_lo()).abs() > 1e-9
    {
        return Err(CoreError::GridMismatch(
            "ISE needs identical evaluation grids".into(),
        ));
    }
    let dx = estimate.dx();
    Ok(dx * kahan_sum(
        estimate
            .values()
            .iter()
            .zip(truth.values())
            .map(|(a, b)| (a - b) * (a - b)),
    ))
}

/// Monte Carlo MISE of the kernel estimator at `f` over seeded replications.
///
/// Replication `r` owns stream `stream_offset + r` of `master_seed`; the
/// aggregation is a fixed-order compensated sum, so results do not depend on
/// the number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_mise(
    f: &GridFunction,
    cls: &SobolevClass,
    kernel: &GridFunction,
    n: usize,
    replications: usize,
    master_seed: u64,
    stream_offset: u64,
) -> Result<MiseEstimate> {
    if replications < 2 {
        return Err(CoreError::TooFewReplications(replications));
    }
    f.require_density()?;
    let class_margin = class_membership(f, cls)?.margin;
    let support = (f.support_lo(), f.support_hi());
    let n_points = f.len();
    let ises: Vec<Result<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(master_seed, stream_offset + r as u64);
            let sample = rejection_sample(f, n, &mut rng)?;
            let est = kde_evaluate(&sample, kernel, support, n_points)?;
            ise(&est, f)
        })
        .collect();
    let mut values = Vec::with_capacity(replications);
    for r in ises {
        values.push(r?);
    }
    let mean = kahan_sum(values.iter().copied()) / replications as f64;
    let ssq = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let sd = (ssq / (replications as f64 - 1.0)).sqrt();
    Ok(MiseEstimate {
        mean,
        std_error: sd / (replications as f64).sqrt(),
        replications,
        n,
        class_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{kernel_grid_plan, kernel_time_domain, KernelSpec};
    use crate::rng::StreamState;

    fn gaussian_density(sigma: f64, support: f64, n: usize) -> GridFunction {
        GridFunction::from_fn(-support, support, n, |x| {
            (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
        })
        .unwrap()
    }

    fn dummy_state() -> StreamState {
        StreamState {
            master_seed: 0,
            stream_id: 0,
            word_pos: 0,
        }
    }

    fn aligned_kernel(spec: &KernelSpec, dx: f64) -> GridFunction {
        let (half, _) = kernel_grid_plan(spec, 4.0);
        let nk = (2.0 * half / dx).ceil() as usize;
        let nk = nk.next_power_of_two();
        let half = nk as f64 * dx / 2.0;
        kernel_time_domain(spec, (-half, half), nk).unwrap()
    }

    #[test]
    fn single_point_sample_reproduces_kernel() {
        let spec = KernelSpec::new(2.0, 1.0).unwrap();
        let n = 1 << 12;
        let support = 256.0;
        let dx = 2.0 * support / n as f64;
        let kernel = aligned_kernel(&spec, dx);
        let sample = Sample {
            values: vec![0.0],
            origin: dummy_state(),
        };
        let est = kde_evaluate(&sample, &kernel, (-support, support), n).unwrap();
        let j0k = kernel.nearest_index(0.0);
        let j0e = est.nearest_index(0.0);
        let reach = kernel.len().min(1 << 10) / 2;
        for off in 0..reach {
            let a = est.values()[j0e + off];
            let b = kernel.values()[j0k + off];
            assert!((a - b).abs() < 1e-12, "offset {off}: {a} vs {b}");
        }
    }

    #[test]
    fn symmetric_two_point_sample_is_symmetric() {
        let spec = KernelSpec::new(2.0, 0.25).unwrap();
        let n = 1 << 12;
        let support = 128.0;
        let dx = 2.0 * support / n as f64;
        let kernel = aligned_kernel(&spec, dx);
        let a = 64.0 * dx; // on-grid offsets keep binning exact
        let sample = Sample {
            values: vec![-a, a],
            origin: dummy_state(),
        };
        let est = kde_evaluate(&sample, &kernel, (-support, support), n).unwrap();
        let v = est.values();
        for k in 1..n / 2 {
            assert!(
                (v[n / 2 + k] - v[n / 2 - k]).abs() < 1e-10,
                "asymmetry at {k}"
            );
        }
    }

    #[test]
    fn estimator_mass_is_one() {
        let f = gaussian_density(0.75, 96.0, 1 << 13);
        let spec = KernelSpec::new(2.0, 0.01).unwrap();
        let kernel = aligned_kernel(&spec, f.dx());
        let mut rng = RngStream::new(31, 0);
        let sample = rejection_sample(&f, 2000, &mut rng).unwrap();
        let est = kde_evaluate(&sample, &kernel, (-96.0, 96.0), 1 << 13).unwrap();
        assert!((est.integral() - 1.0).abs() < 1e-4, "mass {}", est.integral());
    }

    #[test]
    fn fft_and_naive_paths_agree() {
        let f = gaussian_density(1.0, 64.0, 1 << 11);
        let spec = KernelSpec::new(2.0, 0.05).unwrap();
        let kernel = aligned_kernel(&spec, f.dx());
        let mut rng = RngStream::new(77, 0);
        let sample = rejection_sample(&f, 1000, &mut rng).unwrap();
        let fast = kde_evaluate(&sample, &kernel, (-64.0, 64.0), 1 << 11).unwrap();
        let slow = kde_evaluate_naive(&sample, &kernel, (-64.0, 64.0), 1 << 11).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in fast.values().iter().zip(slow.values()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-6, "path discrepancy {worst:.3e}");
    }

    #[test]
    fn empty_sample_is_rejected() {
        let spec = KernelSpec::new(2.0, 1.0).unwrap();
        let kernel = aligned_kernel(&spec, 2.0 * 64.0 / (1 << 11) as f64);
        let sample = Sample {
            values: vec![],
            origin: dummy_state(),
        };
        assert!(matches!(
            kde_evaluate(&sample, &kernel, (-64.0, 64.0), 1 << 11),
            Err(CoreError::EmptySample)
        ));
    }

    #[test]
    fn zero_kernel_mise_is_l2_norm() {
        let f = gaussian_density(1.0, 16.0, 1 << 10);
        let f_hat = fourier::forward_transform_natural(&f).unwrap();
        let k0 = vec![0.0; f_hat.len()];
        let m = exact_mise(&f_hat, &k0, 123).unwrap();
        assert!(((m - f.norm_sq()) / m).abs() < 1e-10);
    }

    #[test]
    fn variance_term_scales_exactly_like_one_over_n() {
        let f = gaussian_density(1.0, 16.0, 1 << 10);
        let f_hat = fourier::forward_transform_natural(&f).unwrap();
        let spec = KernelSpec::new(2.0, 0.1).unwrap();
        let k: Vec<f64> = (0..f_hat.len())
            .map(|i| spec.kernel_hat(f_hat.omega(i)))
            .collect();
        let (v1, b1) = exact_mise_split(&f_hat, &k, 100).unwrap();
        let (v2, b2) = exact_mise_split(&f_hat, &k, 700).unwrap();
        assert_eq!(b1, b2);
        assert!((v1 / v2 - 7.0).abs() < 1e-12);
        // n -> infinity leaves the pure bias term
        let (v3, b3) = exact_mise_split(&f_hat, &k, usize::MAX).unwrap();
        assert!(v3 < 1e-18 * (b3 + 1.0));
    }

    #[test]
    fn non_characteristic_spectrum_is_rejected() {
        let s = SpectralFunction::from_fn(8.0, 64, |w| {
            Complex64::new(1.5 * (-w * w).exp(), 0.0)
        })
        .unwrap();
        let k = vec![0.5; 64];
        assert!(matches!(
            exact_mise(&s, &k, 10),
            Err(CoreError::NotACharacteristicFunction { .. })
        ));
    }

    #[test]
    fn monte_carlo_reproducibility_and_se_scaling() {
        let f = gaussian_density(0.75, 96.0, 1 << 13);
        let cls = SobolevClass::new(2.0, 1.0).unwrap();
        let spec = KernelSpec::minimax(&cls, 200).unwrap();
        let kernel = aligned_kernel(&spec, f.dx());
        let e1 = monte_carlo_mise(&f, &cls, &kernel, 200, 24, 9, 0).unwrap();
        let e2 = monte_carlo_mise(&f, &cls, &kernel, 200, 24, 9, 0).unwrap();
        assert_eq!(e1.mean.to_bits(), e2.mean.to_bits());
        assert_eq!(e1.std_error.to_bits(), e2.std_error.to_bits());
        assert!(e1.class_margin > 0.0);
        let e4 = monte_carlo_mise(&f, &cls, &kernel, 200, 96, 9, 0).unwrap();
        let ratio = (e1.std_error / e4.std_error).powi(2);
        assert!(
            (1.5..12.0).contains(&ratio),
            "se^2 ratio {ratio} not near 4"
        );
        assert!(monte_carlo_mise(&f, &cls, &kernel, 200, 1, 9, 0).is_err());
    }
}
