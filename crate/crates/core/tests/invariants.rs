//! Cross-module invariants, mostly property-based.

use pinsker_core::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn gaussian_mixture(weights: &[(f64, f64, f64)]) -> GridFunction {
    // sum of gaussians (weight, center, sigma), normalized
    let raw = GridFunction::from_fn(-24.0, 24.0, 1 << 11, |x| {
        weights
            .iter()
            .map(|&(w, c, s)| w * (-0.5 * ((x - c) / s).powi(2)).exp() / (s * (2.0 * PI).sqrt()))
            .sum()
    })
    .unwrap();
    let mass = raw.integral();
    GridFunction::new(
        raw.support_lo(),
        raw.support_hi(),
        raw.values().iter().map(|v| v / mass).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_band_limited(seed in 0u64..1000) {
        // random band-limited function: spectrum supported well inside nyquist
        let n = 1 << 10;
        let mut rng = RngStream::new(seed, 0);
        let omega_max = PI / (48.0 / n as f64);
        let band = omega_max / 8.0;
        let spec = SpectralFunction::from_fn(omega_max, n, |w| {
            if w.abs() < band && w.abs() > 0.0 {
                let phase = 2.0 * PI * (w * 7.91).sin();
                let mag = (-(w / band).powi(2)).exp() * (1.0 + 0.3 * (w * 3.1).cos());
                num_complex::Complex64::from_polar(mag, phase * w.signum())
            } else if w == 0.0 {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::default()
            }
        }).unwrap();
        // symmetrize to a real function
        let vals = spec.values().to_vec();
        let sym: Vec<_> = (0..n)
            .map(|k| {
                if k == 0 {
                    vals[0]
                } else {
                    0.5 * (vals[k] + vals[n - k].conj())
                }
            })
            .collect();
        let spec = SpectralFunction::new(omega_max, sym).unwrap();
        let f = inverse_transform(&spec, (-24.0, 24.0), n).unwrap();
        let back = forward_transform_natural(&f).unwrap();
        let f2 = inverse_transform(&back, (-24.0, 24.0), n).unwrap();
        let scale = f.max_abs().max(1e-12);
        let mut worst = 0.0f64;
        for (x, y) in f.values().iter().zip(f2.values()) {
            worst = worst.max((x - y).abs());
        }
        prop_assert!(worst / scale < 1e-8, "round trip {:.3e}", worst / scale);
        let _ = rng.uniform();
    }

    #[test]
    fn parseval_holds(w1 in 0.2f64..2.0, c1 in -4.0f64..4.0, s1 in 0.4f64..2.0,
                      w2 in 0.0f64..1.0, c2 in -4.0f64..4.0, s2 in 0.4f64..2.0) {
        let f = gaussian_mixture(&[(w1, c1, s1), (w2, c2, s2)]);
        let spec = forward_transform_natural(&f).unwrap();
        let (t, fr) = parseval_pair(&f, &spec);
        prop_assert!(((t - fr) / t).abs() < 1e-6, "parseval gap {:.3e}", (t - fr) / t);
    }

    #[test]
    fn hermitian_symmetry_of_real_transforms(c in -3.0f64..3.0, s in 0.3f64..1.5) {
        let f = gaussian_mixture(&[(1.0, c, s)]);
        let spec = forward_transform_natural(&f).unwrap();
        prop_assert!(spec.hermitian_asymmetry() < 1e-8);
    }

    #[test]
    fn seminorm_scales_quadratically(t in 0.05f64..0.95, beta in 0.3f64..2.5) {
        // damping the spectrum by t scales the squared seminorm by t^2
        let f = gaussian_mixture(&[(1.0, 0.0, 1.0)]);
        let damped = GridFunction::new(
            f.support_lo(),
            f.support_hi(),
            f.values().iter().map(|v| v * t).collect(),
        ).unwrap();
        let s1 = sobolev_seminorm_sq(&f, beta).unwrap();
        let s2 = sobolev_seminorm_sq(&damped, beta).unwrap();
        prop_assert!(((s2 / s1) - t * t).abs() < 1e-10 * t * t + 1e-14);
    }

    #[test]
    fn kernel_hat_shape(beta in 0.3f64..4.0, c in 0.01f64..10.0,
                        w1 in 0.0f64..50.0, w2 in 0.0f64..50.0) {
        let spec = KernelSpec::new(beta, c).unwrap();
        let (lo, hi) = if w1 < w2 { (w1, w2) } else { (w2, w1) };
        let (klo, khi) = (spec.kernel_hat(lo), spec.kernel_hat(hi));
        prop_assert!((0.0..=1.0).contains(&klo) && (0.0..=1.0).contains(&khi));
        prop_assert!(khi <= klo + 1e-15, "not nonincreasing");
        prop_assert!((spec.kernel_hat(-lo) - klo).abs() < 1e-15, "not even");
    }

    #[test]
    fn c_min_power_law(beta in 0.55f64..3.0, l in 0.1f64..4.0, n in 1u64..100_000) {
        let cls = SobolevClass::new(beta, l).unwrap();
        let c1 = c_min(&cls, n).unwrap();
        let c2 = c_min(&cls, 2 * n).unwrap();
        let expo = beta / (2.0 * beta + 1.0);
        let inv1 = c1 * (n as f64).powf(expo);
        let inv2 = c2 * (2.0 * n as f64).powf(expo);
        prop_assert!(((inv1 - inv2) / inv1).abs() < 1e-12);
    }

    #[test]
    fn theta_membership_scales(seed in 0u64..500) {
        // a member stays a member when scaled down
        let mut rng = RngStream::new(seed, 3);
        let set = lower_bound::ParameterSet::new(6, 1.2, 1.0).unwrap();
        let pairs: Vec<(i64, f64)> = (1..=5)
            .map(|k| (k, (rng.uniform() - 0.5) * 1e-2))
            .collect();
        let theta = lower_bound::ThetaVector::from_pairs(pairs).unwrap();
        let m = lower_bound::theta_membership(&theta, &set);
        if m.member() {
            let half = theta.scaled(0.5);
            prop_assert!(lower_bound::theta_membership(&half, &set).member());
        }
    }
}

#[test]
fn multiplier_composition_across_orders() {
    let f = gaussian_mixture(&[(1.0, 0.3, 0.9)]);
    for (g1, g2) in [(0.25, 0.5), (1.0, 0.75), (0.4, 1.1)] {
        let seq = fractional_derivative(&fractional_derivative(&f, g1).unwrap(), g2).unwrap();
        let joint = fractional_derivative(&f, g1 + g2).unwrap();
        let scale = joint.max_abs();
        let worst = seq
            .values()
            .iter()
            .zip(joint.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(worst / scale < 1e-6, "composition gap {:.3e}", worst / scale);
    }
}

#[test]
fn gaussian_seminorm_matches_gamma_function_oracle() {
    // (1/2pi) int |w|^{2b} e^{-w^2} dw = Gamma(b + 1/2) / (2 pi).
    // The discrete rule samples the weight at the bin midpoints, so for
    // b < 1 the cusp bin at w = 0 under-counts by its exact cell mass
    // (1/2pi) * 2 (dw/2)^{2b+1} / (2b+1); the tolerance carries that term.
    let f = GridFunction::from_fn(-10.0, 10.0, 1 << 12, |x| {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    })
    .unwrap();
    let d_omega = 2.0 * PI / 20.0;
    for b in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5] {
        let oracle = statrs::function::gamma::gamma(b + 0.5) / (2.0 * PI);
        let got = sobolev_seminorm_sq(&f, b).unwrap();
        let cusp_cell =
            2.0 * (0.5 * d_omega).powf(2.0 * b + 1.0) / ((2.0 * b + 1.0) * 2.0 * PI);
        let tol = 2.0 * cusp_cell + 1e-7 * oracle;
        assert!(
            (got - oracle).abs() < tol,
            "beta = {b}: {got:.12e} vs {oracle:.12e} (tol {tol:.3e})"
        );
    }
}

#[test]
fn spectral_l1_contraction_of_plateau_transform() {
    // integral |w^ceil(b) F0(w) G_A(w)| dw <= integral |w^floor(b) F0(w)| dw / (A - 1/2)
    // (pointwise |G_A(w)| <= 2/((2A-1)|w|)); checked on a shared frequency grid
    let bump = lower_bound::BumpDensity::new(lower_bound::shape_constant()).unwrap();
    let beta = 1.5f64;
    let (ceil_b, floor_b) = (beta.ceil(), beta.floor());
    for a_half in [5u32, 20] {
        let dw = 0.01;
        let n = 40_000;
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for k in 0..n {
            let w = (k as f64 + 0.5) * dw;
            let f0 = bump.transform_at(w).abs();
            lhs += w.powf(ceil_b) * f0 * lower_bound::g_hat(a_half, w).abs() * dw;
            rhs += w.powf(floor_b) * f0 * dw;
        }
        rhs /= a_half as f64 - 0.5;
        assert!(
            lhs <= rhs,
            "A = {a_half}: lhs {lhs:.6e} > rhs {rhs:.6e}"
        );
        assert!(lhs > 0.1 * rhs, "sanity: bound should be within an order");
    }
}

#[test]
fn normalizer_bracket_over_sampled_members() {
    // |b(theta) - 1| <= A^{-3/2} across random members of the budget set
    let beta = 1.0;
    let l = 1.0;
    for a_half in [4u32, 10, 20] {
        let set = lower_bound::ParameterSet::new(a_half, beta, l).unwrap();
        for seed in 0..40u64 {
            let mut rng = RngStream::new(1000 + seed, 0);
            let m = 1 + (rng.uniform() * 6.0) as usize;
            let pairs: Vec<(i64, f64)> = (0..m)
                .map(|j| {
                    let k = 1 + (rng.uniform() * 30.0) as i64 + j as i64;
                    let k = if rng.uniform() < 0.5 { -k } else { k };
                    (k, rng.uniform() - 0.5)
                })
                .collect();
            let Ok(raw) = lower_bound::ThetaVector::from_pairs(pairs) else {
                continue;
            };
            let mm = lower_bound::theta_membership(&raw, &set);
            let scale = (set.l1_budget() / mm.l1.max(1e-300))
                .min((set.quad_budget() / mm.quad.max(1e-300)).sqrt())
                * rng.uniform();
            let theta = raw.scaled(scale);
            assert!(lower_bound::theta_membership(&theta, &set).member());
            let pd = lower_bound::build_f_theta(&theta, a_half).unwrap();
            assert!(
                pd.b_bracket_ok(),
                "A = {a_half}, seed = {seed}: b = {}",
                pd.b_theta
            );
        }
    }
}

#[test]
fn derivative_identity_over_random_cases() {
    // spectral norm vs closed-form sum within 1e-3 relative, gamma <= beta <= 4
    let mut rng = RngStream::new(2024, 0);
    for case in 0..30 {
        let a_half = 4 + (rng.uniform() * 8.0) as u32;
        let beta = 0.6 + rng.uniform() * 3.4;
        let gamma = rng.uniform() * beta;
        let m = 1 + (rng.uniform() * 5.0) as usize;
        let pairs: Vec<(i64, f64)> = (0..m)
            .map(|j| {
                let k = 1 + (rng.uniform() * 40.0) as i64 + j as i64;
                let k = if rng.uniform() < 0.5 { -k } else { k };
                (k, (rng.uniform() - 0.5) * 1e-3)
            })
            .collect();
        let Ok(theta) = lower_bound::ThetaVector::from_pairs(pairs) else {
            continue;
        };
        if theta.entries().is_empty() {
            continue;
        }
        let (lhs, rhs) = lower_bound::derivative_identity_check(&theta, a_half, gamma).unwrap();
        let rel = (lhs / rhs - 1.0).abs();
        assert!(
            rel < 1e-3,
            "case {case}: A={a_half} beta={beta:.2} gamma={gamma:.2}: gap {rel:.3e}"
        );
    }
}

#[test]
fn weighted_sum_bound_randomized_audit() {
    // the budget-set inequality holds on 100 random members
    let set = lower_bound::ParameterSet::new(8, 1.5, 1.0).unwrap();
    let mut rng = RngStream::new(77, 0);
    let mut checked = 0;
    while checked < 100 {
        let m = 1 + (rng.uniform() * 6.0) as usize;
        let pairs: Vec<(i64, f64)> = (0..m)
            .map(|j| {
                let k = 1 + (rng.uniform() * 50.0) as i64 + j as i64;
                (k, rng.uniform() - 0.5)
            })
            .collect();
        let Ok(raw) = lower_bound::ThetaVector::from_pairs(pairs) else {
            continue;
        };
        let mm = lower_bound::theta_membership(&raw, &set);
        let scale = (set.l1_budget() / mm.l1.max(1e-300))
            .min((set.quad_budget() / mm.quad.max(1e-300)).sqrt())
            * rng.uniform();
        let theta = raw.scaled(scale);
        if !lower_bound::theta_membership(&theta, &set).member() {
            continue;
        }
        let l_exp = 0.1 + rng.uniform() * (2.0 * set.beta - 0.2);
        let (ok, lhs, rhs) =
            lower_bound::weighted_sum_bound_check(&theta, &set, l_exp).unwrap();
        assert!(ok, "l = {l_exp}: {lhs:.3e} > {rhs:.3e}");
        checked += 1;
    }
}
