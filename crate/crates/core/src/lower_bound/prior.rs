//! The product prior on perturbation coefficients: variance profile,
//! frequency cutoff, bounded base laws, sampling, and the budget-set audit.

use crate::error::{CoreError, Result};
use crate::lower_bound::perturbation::{theta_membership, ParameterSet, ThetaVector};
use crate::rng::RngStream;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Bounded, zero-mean, unit-variance base law for the coefficient draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiLaw {
    /// `rho(t) proportional to 1 + cos(pi t / T)` on `[-T, T]`, scaled to unit
    /// variance. Smooth, compactly supported, Fisher information exactly
    /// `pi^2/3 - 2 ~ 1.2899`.
    RaisedCosine,
    /// Standard Gaussian tapered to zero over `[core, edge]` by a squared
    /// cosine, rescaled to unit variance. Fisher information `1 + O(1e-5)`,
    /// for slack parameters too small for the raised cosine.
    TruncatedGaussian { core: f64, edge: f64 },
}

/// Raised-cosine half-width giving unit variance: `T^2 (1/3 - 2/pi^2) = 1`.
pub fn raised_cosine_half_width() -> f64 {
    1.0 / (1.0 / 3.0 - 2.0 / (PI * PI)).sqrt()
}

/// Closed-form Fisher information of the unit-variance raised cosine.
pub fn raised_cosine_fisher_info() -> f64 {
    PI * PI / 3.0 - 2.0
}

impl XiLaw {
    pub fn default_for_slack(eps: f64) -> Self {
        if 1.0 + eps >= raised_cosine_fisher_info() {
            XiLaw::RaisedCosine
        } else {
            XiLaw::TruncatedGaussian {
                core: 5.0,
                edge: 7.0,
            }
        }
    }

    /// Almost-sure bound `G` with `|xi| <= G`.
    pub fn bound(&self) -> f64 {
        match self {
            XiLaw::RaisedCosine => raised_cosine_half_width(),
            XiLaw::TruncatedGaussian { edge, .. } => edge / self.scale(),
        }
    }

    /// Rescale factor mapping the raw law to unit variance (memoized; the
    /// tapered-Gaussian second moment needs a quadrature).
    fn scale(&self) -> f64 {
        use once_cell::sync::Lazy;
        use std::collections::HashMap;
        use std::sync::Mutex;
        static SCALES: Lazy<Mutex<HashMap<(u64, u64), f64>>> =
            Lazy::new(|| Mutex::new(HashMap::new()));
        match self {
            XiLaw::RaisedCosine => 1.0,
            XiLaw::TruncatedGaussian { core, edge } => {
                let key = (core.to_bits(), edge.to_bits());
                if let Some(&s) = SCALES.lock().unwrap().get(&key) {
                    return s;
                }
                let s = self.raw_moment(*core, *edge, 2).sqrt();
                SCALES.lock().unwrap().insert(key, s);
                s
            }
        }
    }

    fn taper(core: f64, edge: f64, t: f64) -> f64 {
        let u = t.abs();
        if u <= core {
            1.0
        } else if u >= edge {
            0.0
        } else {
            (PI * (u - core) / (2.0 * (edge - core))).cos().powi(2)
        }
    }

    fn raw_moment(&self, core: f64, edge: f64, p: i32) -> f64 {
        // Simpson quadrature of t^p phi(t) w(t) normalized by the mass.
        let n = 1 << 14;
        let h = 2.0 * edge / n as f64;
        let dens = |t: f64| (-0.5 * t * t).exp() * Self::taper(core, edge, t);
        let mut mass = 0.0;
        let mut mom = 0.0;
        for i in 0..=n {
            let t = -edge + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            mass += w * dens(t);
            mom += w * dens(t) * t.powi(p);
        }
        mom / mass
    }

    /// Density of the unit-variance law.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            XiLaw::RaisedCosine => {
                let t_half = raised_cosine_half_width();
                if x.abs() >= t_half {
                    0.0
                } else {
                    (1.0 + (PI * x / t_half).cos()) / (2.0 * t_half)
                }
            }
            XiLaw::TruncatedGaussian { core, edge } => {
                let s = self.scale();
                let t = x * s;
                if t.abs() >= *edge {
                    return 0.0;
                }
                let h = 2.0 * edge / (1 << 14) as f64;
                // normalization via cached-ish Simpson; cheap relative to use
                let dens = |u: f64| (-0.5 * u * u).exp() * Self::taper(*core, *edge, u);
                let mut mass = 0.0;
                let n = 1 << 14;
                for i in 0..=n {
                    let u = -edge + i as f64 * h;
                    let w = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    mass += w * dens(u);
                }
                mass *= h / 3.0;
                dens(t) / mass * s
            }
        }
    }

    /// Fisher information of the unit-variance law: exact for the raised
    /// cosine, quadrature of `(rho')^2 / rho` for the tapered Gaussian.
    pub fn fisher_info(&self) -> f64 {
        match self {
            XiLaw::RaisedCosine => raised_cosine_fisher_info(),
            XiLaw::TruncatedGaussian { core, edge } => {
                // I(rho_s) = s^2 I(rho_raw) for the scaling rho_s(x) = s rho(s x)
                let s = self.scale();
                let n = 1 << 16;
                let h = 2.0 * edge / n as f64;
                let delta = edge - core;
                // rho_raw = phi w / Z; (rho')^2/rho = [phi'^2 w/phi + 2 phi' w' + phi w'^2/w]/Z
                let mut num = 0.0;
                let mut mass = 0.0;
                for i in 0..=n {
                    let t = -edge + i as f64 * h;
                    let weight = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    let phi = (-0.5 * t * t).exp();
                    let w = Self::taper(*core, *edge, t);
                    mass += weight * phi * w;
                    let u = t.abs();
                    let (wp, w_ratio) = if u <= *core || u >= *edge {
                        (0.0, 0.0)
                    } else {
                        let arg = PI * (u - core) / (2.0 * delta);
                        let rate = PI / (2.0 * delta);
                        // d/dt of cos^2(arg(|t|)): sign from |t|'
                        let wp = -2.0 * arg.cos() * arg.sin() * rate * t.signum();
                        let ratio = 4.0 * arg.sin().powi(2) * rate * rate; // w'^2 / w
                        (wp, ratio)
                    };
                    let phip = -t * phi;
                    num += weight * (phip * phip * w / phi + 2.0 * phip * wp + phi * w_ratio);
                }
                s * s * num / mass
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            XiLaw::RaisedCosine => {
                let t_half = raised_cosine_half_width();
                loop {
                    let t = rng.uniform_in(-t_half, t_half);
                    let u = rng.uniform();
                    if u <= 0.5 * (1.0 + (PI * t / t_half).cos()) {
                        return t;
                    }
                }
            }
            XiLaw::TruncatedGaussian { core, edge } => {
                let s = self.scale();
                loop {
                    // Box-Muller pair; first coordinate only, for a fixed draw cost
                    let u1 = rng.uniform().max(f64::MIN_POSITIVE);
                    let u2 = rng.uniform();
                    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
                    let accept = rng.uniform();
                    if z.abs() < *edge && accept <= Self::taper(*core, *edge, z) {
                        return z / s;
                    }
                }
            }
        }
    }
}

/// The prior: cutoff `W`, variance profile `sigma_k^2`, bound constant and
/// base law.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    pub a_half: u32,
    pub beta: f64,
    pub l: f64,
    pub n: u64,
    pub eps: f64,
    pub w_cutoff: f64,
    pub xi_law: XiLaw,
}

/// Half-support schedule `A = max(4, ceil(ln n))`.
pub fn a_schedule(n: u64) -> u32 {
    ((n as f64).ln().ceil() as u32).max(4)
}

/// Build the prior for `(beta, L, n, eps)` at half-support `A`.
///
/// The variance profile is `sigma_k^2 = (2A/n) (|W/k|^beta - 1)_+` with
/// cutoff `W = (A/pi) (L (1-eps) n (2b+1)(b+1) pi / b)^{1/(2b+1)}`; this is
/// the profile that saturates the weighted budget
/// `sum_k sigma_k^2 (k pi/A)^{2 beta} <= (1-eps) 4 A^2 L` while maximizing
/// the Bayes-risk sum.
pub fn prior_spec(beta: f64, l: f64, n: u64, eps: f64, a_half: u32) -> Result<PriorSpec> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "slack eps must lie in (0, 1), got {eps}"
        )));
    }
    if !(beta > 0.5) {
        return Err(CoreError::InvalidParameter(format!(
            "prior construction needs beta > 1/2, got {beta}"
        )));
    }
    if n == 0 {
        return Err(CoreError::InvalidParameter("n must be positive".into()));
    }
    crate::sobolev::SobolevClass::new(beta, l)?;
    let a = a_half as f64;
    let w_cutoff = (a / PI)
        * (l * (1.0 - eps) * n as f64 * (2.0 * beta + 1.0) * (beta + 1.0) * PI / beta)
            .powf(1.0 / (2.0 * beta + 1.0));
    Ok(PriorSpec {
        a_half,
        beta,
        l,
        n,
        eps,
        w_cutoff,
        xi_law: XiLaw::default_for_slack(eps),
    })
}

impl PriorSpec {
    /// `sigma_k^2 = (2A/n) (|W/k|^beta - 1)_+`, zero at and beyond the cutoff.
    pub fn sigma_sq(&self, k: i64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let ratio = self.w_cutoff / k.unsigned_abs() as f64;
        let raw = ratio.powf(self.beta) - 1.0;
        if raw <= 0.0 {
            0.0
        } else {
            2.0 * self.a_half as f64 / self.n as f64 * raw
        }
    }

    /// Largest active `|k|` (`sigma_k^2 > 0` iff `|k| <= k_active`).
    pub fn k_active(&self) -> i64 {
        if self.w_cutoff <= 1.0 {
            0
        } else {
            let k = self.w_cutoff.ceil() as i64 - 1;
            // guard the boundary case W integral
            if (k as f64) < self.w_cutoff {
                k
            } else {
                k - 1
            }
        }
    }

    /// `sum_{k != 0} sigma_k^2 (|k| pi / A)^{2 beta}`; designed to equal
    /// `(1 - eps) 4 A^2 L` up to cutoff discretization.
    pub fn weighted_variance_sum(&self) -> f64 {
        let a = self.a_half as f64;
        let mut sum = 0.0;
        for k in 1..=self.k_active() {
            sum += 2.0 * self.sigma_sq(k) * (k as f64 * PI / a).powf(2.0 * self.beta);
        }
        sum
    }

    /// One draw: `theta_k = sigma_k xi_k` for `0 < |k| < W`, independent.
    pub fn sample(&self, rng: &mut RngStream) -> Result<ThetaVector> {
        let mut pairs = Vec::new();
        for k in 1..=self.k_active() {
            let s = self.sigma_sq(k).sqrt();
            pairs.push((k, s * self.xi_law.sample(rng)));
            pairs.push((-k, s * self.xi_law.sample(rng)));
        }
        ThetaVector::from_pairs(pairs)
    }
}

/// Empirical frequencies of budget-set violations under the prior.
#[derive(Debug, Clone, Copy)]
pub struct Lemma1Audit {
    pub trials: usize,
    pub joint_failures: usize,
    pub l1_failures: usize,
    pub quad_failures: usize,
    pub failure_frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

fn wilson_interval(failures: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte Carlo audit of `P(theta not in Theta_A(L))` with per-constraint
/// breakdown and a 95% Wilson interval on the joint failure frequency.
pub fn lemma1_tail_probability(
    spec: &PriorSpec,
    set: &ParameterSet,
    trials: usize,
    master_seed: u64,
    stream_offset: u64,
) -> Result<Lemma1Audit> {
    if trials < 1000 {
        return Err(CoreError::InvalidParameter(format!(
            "audit needs at least 1000 trials, got {trials}"
        )));
    }
    let outcomes: Vec<Result<(bool, bool)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(master_seed, stream_offset + t as u64);
            let theta = spec.sample(&mut rng)?;
            let m = theta_membership(&theta, set);
            Ok((m.l1_ok(), m.quad_ok()))
        })
        .collect();
    let mut l1_failures = 0usize;
    let mut quad_failures = 0usize;
    let mut joint_failures = 0usize;
    for o in outcomes {
        let (l1_ok, quad_ok) = o?;
        if !l1_ok {
            l1_failures += 1;
        }
        if !quad_ok {
            quad_failures += 1;
        }
        if !(l1_ok && quad_ok) {
            joint_failures += 1;
        }
    }
    let (wl, wh) = wilson_interval(joint_failures, trials, 1.96);
    Ok(Lemma1Audit {
        trials,
        joint_failures,
        l1_failures,
        quad_failures,
        failure_frequency: joint_failures as f64 / trials as f64,
        wilson_low: wl,
        wilson_high: wh,
    })
}
