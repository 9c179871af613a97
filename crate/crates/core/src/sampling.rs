//! Rejection sampling from grid densities.

use crate::error::{CoreError, Result};
use crate::grid::GridFunction;
use crate::rng::{RngStream, StreamState};

/// I.i.d. draws plus the stream position that reproduces them bit-exactly.
#[derive(Debug, Clone)]
pub struct Sample {
    pub values: Vec<f64>,
    pub origin: StreamState,
}

/// `n` i.i.d. draws from a compactly supported grid density.
///
/// Proposals are uniform over the density's effective support with a flat
/// envelope at `max f`; the target is evaluated by linear interpolation.
pub fn rejection_sample(f: &GridFunction, n: usize, rng: &mut RngStream) -> Result<Sample> {
    f.require_density()?;
    let origin = rng.state();
    let fmax = f.max_value();
    if !(fmax.is_finite() && fmax > 0.0) {
        return Err(CoreError::NotADensity {
            reason: "density has no positive values".into(),
        });
    }
    let (lo, hi) = f.effective_support(fmax * 1e-14);
    let envelope = fmax * (1.0 + 1e-12);
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let x = rng.uniform_in(lo, hi);
        let u = envelope * rng.uniform();
        if u <= f.interpolate(x) {
            values.push(x);
        }
    }
    Ok(Sample { values, origin })
}

impl Sample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::grid::kahan_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let ssq =
            crate::grid::kahan_sum(self.values.iter().map(|v| (v - m) * (v - m)));
        (ssq / (self.values.len() as f64 - 1.0)).sqrt()
    }

    /// Kolmogorov-Smirnov statistic against the density's grid CDF.
    pub fn ks_statistic(&self, f: &GridFunction) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // cumulative trapezoid CDF on the grid
        let dx = f.dx();
        let mut cdf = Vec::with_capacity(f.len());
        let mut acc = 0.0;
        for v in f.values() {
            acc += v * dx;
            cdf.push(acc.min(1.0));
        }
        let eval_cdf = |x: f64| -> f64 {
            if x <= f.support_lo() {
                return 0.0;
            }
            let t = (x - f.support_lo()) / dx;
            let j = t.floor() as usize;
            if j >= cdf.len() {
                return 1.0;
            }
            let base = if j == 0 { 0.0 } else { cdf[j - 1] };
            base + (t - j as f64) * (cdf[j] - if j == 0 { 0.0 } else { cdf[j - 1] })
        };
        let n = sorted.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in sorted.iter().enumerate() {
            let c = eval_cdf(x);
            d = d.max((c - i as f64 / n).abs());
            d = d.max(((i as f64 + 1.0) / n - c).abs());
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_uniform() -> GridFunction {
        // dyadic grid: the indicator edges land exactly on grid points
        GridFunction::from_fn(-0.5, 1.5, 1 << 10, |x| {
            if (0.0..1.0).contains(&x) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn uniform_moments() {
        let f = unit_uniform();
        let mut rng = RngStream::new(11, 0);
        let s = rejection_sample(&f, 10_000, &mut rng).unwrap();
        let tol = 3.0 * (1.0 / 12f64).sqrt() / 100.0;
        assert!((s.mean() - 0.5).abs() < tol, "mean {}", s.mean());
    }

    #[test]
    fn ks_calibration_uniform() {
        let f = unit_uniform();
        let mut rng = RngStream::new(5, 1);
        let n = 10_000;
        let s = rejection_sample(&f, n, &mut rng).unwrap();
        let d = s.ks_statistic(&f);
        assert!(d < 1.63 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn rejects_non_density() {
        let f = GridFunction::from_fn(0.0, 1.0, 64, |_| 2.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(rejection_sample(&f, 10, &mut rng).is_err());
    }

    #[test]
    fn reproducible_from_state() {
        let f = GridFunction::from_fn(-4.0, 4.0, 1 << 9, |x| {
            (-x * x).exp() / std::f64::consts::PI.sqrt()
        })
        .unwrap();
        let mut rng = RngStream::new(123, 7);
        let s1 = rejection_sample(&f, 500, &mut rng).unwrap();
        let mut replay = RngStream::from_state(s1.origin);
        let s2 = rejection_sample(&f, 500, &mut replay).unwrap();
        assert_eq!(s1.values, s2.values);
    }
}
