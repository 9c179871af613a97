//! Certified maximization sweep of `||f_theta^{(beta)}||_2^2` over the
//! budget set, at a ladder of half-supports.
//!
//! The supremum is over an infinite-dimensional set; the sweep probes
//! (a) single modes saturating the quadratic budget near the smallest
//! feasible frequency, (b) deterministic pairs and bands, (c) random sparse
//! members, and reports the running maximum. Every probe is a member of the
//! set, so each value is a certified lower bound on the supremum.

use crate::error::{CoreError, Result};
use crate::fourier;
use crate::grid::{kahan_sum, GridFunction};
use crate::lower_bound::bump::BumpDensity;
use crate::lower_bound::perturbation::{
    build_f_theta_on, theta_membership, ParameterSet, ThetaVector,
};
use crate::lower_bound::plateau::{plateau_density_on, LfGrid};
use crate::rng::RngStream;
use crate::sobolev;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub beta: f64,
    pub l: f64,
    pub a_list: Vec<u32>,
    /// Probes per half-support.
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeFamily {
    Single,
    Pair,
    Band,
    Random,
}

impl ProbeFamily {
    pub fn label(&self) -> &'static str {
        match self {
            ProbeFamily::Single => "single",
            ProbeFamily::Pair => "pair",
            ProbeFamily::Band => "band",
            ProbeFamily::Random => "random",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub a_half: u32,
    pub family: ProbeFamily,
    pub k_support: Vec<i64>,
    pub l1: f64,
    pub quad: f64,
    pub seminorm_sq: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub a_half: u32,
    pub best: f64,
    pub gap: f64,
    pub best_k: Vec<i64>,
    /// `||(f0 * g_A)^{(beta)}||_2^2` (theta = 0 term, wide grid).
    pub plateau_term: f64,
    /// Its spectral bound `||f0^{(beta-1)}||_2^2 / (A - 1/2)^2`.
    pub plateau_bound: f64,
    pub probes: usize,
    pub n_points: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub records: Vec<ProbeRecord>,
}

/// Smallest single-mode index able to saturate the quadratic budget within
/// the l1 budget: `k* = ceil((2 sqrt L)^{1/beta} A^3 / pi)`.
pub fn k_star(a_half: u32, beta: f64, l: f64) -> i64 {
    let a = a_half as f64;
    ((2.0 * l.sqrt()).powf(1.0 / beta) * a * a * a / PI).ceil() as i64
}

fn sweep_grid(a_half: u32, beta: f64, l: f64) -> (LfGrid, i64) {
    let span = LfGrid::span_for(a_half);
    let ks = k_star(a_half, beta, l) as f64;
    let want = (2.2 * ks * span / a_half as f64) as usize;
    let n = want.next_power_of_two().clamp(1 << 12, 1 << 19);
    let grid = LfGrid {
        a_half,
        n_points: n,
        span_factor: 1,
    };
    // probes stay below 70% of the Nyquist band
    let k_cap = (0.70 * grid.nyquist() * a_half as f64 / PI).floor() as i64;
    (grid, k_cap)
}

/// Scale a raw coefficient vector onto the budget boundary (strictly inside
/// by a hair, so membership never fails on rounding).
fn project_to_budget(raw: &ThetaVector, set: &ParameterSet) -> Option<ThetaVector> {
    let l1 = raw.l1();
    let quad = raw.weighted_sum_sq(set.a_half, 2.0 * set.beta);
    if l1 <= 0.0 || quad <= 0.0 {
        return None;
    }
    let scale = (set.l1_budget() / l1)
        .min((set.quad_budget() / quad).sqrt())
        * (1.0 - 1e-12);
    let theta = raw.scaled(scale);
    debug_assert!(theta_membership(&theta, set).member());
    Some(theta)
}

fn mode_magnitude(k: i64, a_half: u32, beta: f64) -> f64 {
    (k.unsigned_abs() as f64 * PI / a_half as f64).powf(-beta)
}

fn build_probes(
    set: &ParameterSet,
    k_lo: i64,
    k_cap: i64,
    budget: usize,
    seed: u64,
) -> Vec<(ProbeFamily, ThetaVector)> {
    let mut probes: Vec<(ProbeFamily, ThetaVector)> = Vec::with_capacity(budget);
    let a_half = set.a_half;
    let beta = set.beta;
    let log_lo = (k_lo.max(1) as f64).ln();
    let log_hi = (k_cap.max(k_lo + 1) as f64).ln();
    let pick_k = |t: f64| -> i64 { (log_lo + (log_hi - log_lo) * t).exp().round() as i64 };

    // (a) single modes, alternating cosine/sine, swept across the feasible band
    let n_single = (budget / 4).max(4);
    for i in 0..n_single {
        let t = i as f64 / n_single as f64;
        let mut k = pick_k(t);
        if i % 2 == 1 {
            k = -k;
        }
        if let Ok(raw) = ThetaVector::single(k, mode_magnitude(k, a_half, beta)) {
            if let Some(theta) = project_to_budget(&raw, set) {
                probes.push((ProbeFamily::Single, theta));
            }
        }
    }

    // (b) deterministic pairs and contiguous bands above the feasibility knee
    let n_pair = (budget / 8).max(2);
    let ratios = [1.1, 1.3, 1.7, 2.3];
    for i in 0..n_pair {
        let t = i as f64 / n_pair as f64;
        let k1 = pick_k(0.15 + 0.8 * t);
        let k2 = ((k1 as f64) * ratios[i % ratios.len()]).round() as i64;
        if k2 > k_cap {
            continue;
        }
        let raw = ThetaVector::from_pairs([
            (k1, mode_magnitude(k1, a_half, beta)),
            (if i % 2 == 0 { k2 } else { -k2 }, mode_magnitude(k2, a_half, beta)),
        ]);
        if let Ok(raw) = raw {
            if let Some(theta) = project_to_budget(&raw, set) {
                probes.push((ProbeFamily::Pair, theta));
            }
        }
    }
    let n_band = (budget / 8).max(2);
    for i in 0..n_band {
        let m = [4usize, 8, 16][i % 3];
        let t = i as f64 / n_band as f64;
        let start = pick_k(0.3 + 0.65 * t);
        let pairs: Vec<(i64, f64)> = (0..m)
            .map(|j| {
                let k = start + j as i64;
                let k = if j % 2 == 0 { k } else { -k };
                (k, mode_magnitude(k, a_half, beta))
            })
            .collect();
        if pairs.iter().any(|&(k, _)| k.abs() > k_cap) {
            continue;
        }
        if let Ok(raw) = ThetaVector::from_pairs(pairs) {
            if let Some(theta) = project_to_budget(&raw, set) {
                probes.push((ProbeFamily::Band, theta));
            }
        }
    }

    // (c) random sparse members fill the remaining budget
    let mut idx = 0u64;
    while probes.len() < budget {
        let mut rng = RngStream::new(seed, idx);
        idx += 1;
        let m = 1 + (rng.uniform() * 6.0) as usize;
        let mut pairs = Vec::with_capacity(m);
        for _ in 0..m {
            let mut k = pick_k(rng.uniform());
            if rng.uniform() < 0.5 {
                k = -k;
            }
            let jitter = 0.5 + rng.uniform();
            pairs.push((k, mode_magnitude(k, a_half, beta) * jitter));
        }
        let Ok(raw) = ThetaVector::from_pairs(pairs) else {
            continue;
        };
        if raw.entries().is_empty() {
            continue;
        }
        if let Some(theta) = project_to_budget(&raw, set) {
            probes.push((ProbeFamily::Random, theta));
        }
    }
    probes
}

fn weighted_seminorm(
    values: &[num_complex::Complex64],
    weights: &[f64],
    d_omega: f64,
) -> Result<f64> {
    let n = values.len();
    let weighted: Vec<f64> = values
        .iter()
        .zip(weights)
        .map(|(v, &w)| w * v.norm_sqr())
        .collect();
    let total = kahan_sum(weighted.iter().copied());
    let cut = (0.9 * n as f64 / 2.0) as usize;
    let mut tail = 0.0;
    for (k, &e) in weighted.iter().enumerate() {
        if (k as isize - (n / 2) as isize).unsigned_abs() > cut {
            tail += e;
        }
    }
    if total > 0.0 && tail / total > 1e-6 {
        return Err(CoreError::SpectralTail {
            fraction: tail / total,
            threshold: 1e-6,
            band_fraction: 0.9,
        });
    }
    Ok(total * d_omega / (2.0 * PI))
}

fn evaluate_probe(
    theta: &ThetaVector,
    grid: LfGrid,
    weights: &Arc<Vec<f64>>,
) -> Result<f64> {
    let pd = build_f_theta_on(theta, grid)?;
    let spec = fourier::forward_transform_natural(&pd.density)?;
    weighted_seminorm(spec.values(), weights, spec.d_omega())
}

/// `||(f0 * g_A)^{(beta)}||_2^2` on a widened grid (the fractional
/// derivative of a compactly supported function has polynomial tails).
pub fn plateau_seminorm_sq(a_half: u32, beta: f64) -> Result<f64> {
    let base = LfGrid::default_for(a_half)?;
    let grid = LfGrid::with_span_factor(
        a_half,
        (base.n_points * 4).min(1 << 19),
        4,
    )?;
    let p = plateau_density_on(grid)?;
    sobolev::sobolev_seminorm_sq(&p, beta)
}

/// `||f0^{(beta-1)}||_2^2 / (A - 1/2)^2`: the closed bound on the theta = 0
/// term, from `|g_hat| <= 2/((2A-1)|w|)` pointwise.
pub fn plateau_seminorm_bound(a_half: u32, beta: f64) -> Result<f64> {
    let bump = BumpDensity::new(crate::lower_bound::shape_constant())?;
    let wide = GridFunction::from_fn(-32.0, 32.0, 1 << 16, |x| bump.value(x))?;
    let s = sobolev::sobolev_seminorm_sq(&wide, beta - 1.0)?;
    Ok(s / (a_half as f64 - 0.5).powi(2))
}

pub fn theorem2_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.beta <= 0.5 {
        return Err(CoreError::InvalidParameter(format!(
            "sweep needs beta > 1/2, got {}",
            cfg.beta
        )));
    }
    if cfg.budget == 0 {
        return Err(CoreError::InvalidParameter("probe budget is zero".into()));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &a_half in &cfg.a_list {
        let set = ParameterSet::new(a_half, cfg.beta, cfg.l)?;
        let (grid, k_cap) = sweep_grid(a_half, cfg.beta, cfg.l);
        let k_lo = (k_star(a_half, cfg.beta, cfg.l) as f64 * 0.75) as i64;
        let probes = build_probes(&set, k_lo.max(1), k_cap, cfg.budget, cfg.seed);
        // warm the plateau cache before the parallel section
        plateau_density_on(grid)?;
        let weights: Arc<Vec<f64>> = {
            let dw = 2.0 * grid.nyquist() / grid.n_points as f64;
            Arc::new(
                (0..grid.n_points)
                    .map(|k| {
                        let w: f64 = -grid.nyquist() + k as f64 * dw;
                        if w == 0.0 {
                            0.0
                        } else {
                            w.abs().powf(2.0 * cfg.beta)
                        }
                    })
                    .collect(),
            )
        };
        let evaluated: Vec<Result<ProbeRecord>> = probes
            .par_iter()
            .map(|(family, theta)| {
                let m = theta_membership(theta, &set);
                let seminorm_sq = evaluate_probe(theta, grid, &weights)?;
                Ok(ProbeRecord {
                    a_half,
                    family: *family,
                    k_support: theta.support(),
                    l1: m.l1,
                    quad: m.quad,
                    seminorm_sq,
                })
            })
            .collect();
        let mut a_records = Vec::with_capacity(evaluated.len());
        for r in evaluated {
            a_records.push(r?);
        }
        // deterministic reduction: value, then smaller max |k|, then the
        // lexicographically larger support (positive k first)
        let best = a_records
            .iter()
            .max_by(|x, y| {
                x.seminorm_sq
                    .partial_cmp(&y.seminorm_sq)
                    .unwrap()
                    .then_with(|| {
                        let kx = x.k_support.iter().map(|k| k.abs()).max().unwrap_or(0);
                        let ky = y.k_support.iter().map(|k| k.abs()).max().unwrap_or(0);
                        ky.cmp(&kx)
                    })
                    .then_with(|| x.k_support.cmp(&y.k_support))
            })
            .expect("non-empty probe list");
        rows.push(SweepRow {
            a_half,
            best: best.seminorm_sq,
            gap: (best.seminorm_sq - cfg.l).abs(),
            best_k: best.k_support.clone(),
            plateau_term: plateau_seminorm_sq(a_half, cfg.beta)?,
            plateau_bound: plateau_seminorm_bound(a_half, cfg.beta)?,
            probes: a_records.len(),
            n_points: grid.n_points,
        });
        records.extend(a_records);
    }
    Ok(SweepResult { rows, records })
}
