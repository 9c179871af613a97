//! The Bayes-risk lower bound assembled from the prior: the finite
//! per-coefficient sum and its closed-form approximation.

use crate::kernel::pinsker_constant;
use crate::lower_bound::prior::PriorSpec;
use crate::sobolev::SobolevClass;

/// `(1/(2A(1+eps))) sum_{0 < |kappa| < W} 1/(n + 2A sigma_kappa^{-2})`.
///
/// Coefficients at or beyond the cutoff have infinite prior information and
/// drop from the sum; `W <= 1` gives an empty sum.
pub fn van_trees_bound(spec: &PriorSpec) -> f64 {
    let a = spec.a_half as f64;
    let n = spec.n as f64;
    let mut sum = 0.0;
    for k in 1..=spec.k_active() {
        let s2 = spec.sigma_sq(k);
        if s2 > 0.0 {
            sum += 2.0 / (n + 2.0 * a / s2); // both signs of kappa
        }
    }
    sum / (2.0 * a * (1.0 + spec.eps))
}

/// Closed form of the maximized bound:
/// `n^{-2b/(2b+1)} gamma(b, L) (1-eps)^{1/(2b+1)} / (1+eps)`.
pub fn van_trees_closed_form(beta: f64, l: f64, n: u64, eps: f64) -> f64 {
    let cls = SobolevClass { beta, l };
    let rate = (n as f64).powf(-2.0 * beta / (2.0 * beta + 1.0));
    rate * pinsker_constant(&cls) * (1.0 - eps).powf(1.0 / (2.0 * beta + 1.0)) / (1.0 + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lower_bound::prior::prior_spec;

    #[test]
    fn empty_sum_when_cutoff_below_one() {
        let spec = prior_spec(1.0, 1e-9, 2, 0.5, 4).unwrap();
        assert!(spec.w_cutoff <= 1.0);
        assert_eq!(van_trees_bound(&spec), 0.0);
    }

    #[test]
    fn large_variance_limit_counts_coefficients() {
        // sigma^2 -> infinity turns each summand into 1/n; emulate by a spec
        // whose smallest sigma^2 is still enormous relative to 2A/n.
        let spec = prior_spec(1.0, 1.0, 50, 0.4, 4).unwrap();
        let k_act = spec.k_active();
        assert!(k_act >= 1);
        let bound = van_trees_bound(&spec);
        let cap = (2 * k_act) as f64 / (spec.n as f64 * 2.0 * 4.0 * 1.4);
        assert!(bound <= cap * 1.0000001);
        assert!(bound > 0.0);
    }

    #[test]
    fn closed_form_eps_limit() {
        let b = 1.3;
        let l = 0.8;
        let n = 4096;
        let gamma = pinsker_constant(&SobolevClass { beta: b, l });
        let rate = (n as f64).powf(-2.0 * b / (2.0 * b + 1.0));
        let v = van_trees_closed_form(b, l, n, 1e-12);
        assert!((v / (gamma * rate) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sum_to_closed_form_ratio_converges() {
        // ratio -> 1 through n = 1e4, 1e5, 1e6 at beta = 1, L = 1, eps = 0.01
        let mut prev_gap = f64::INFINITY;
        for n in [10_000u64, 100_000, 1_000_000] {
            let a = crate::lower_bound::prior::a_schedule(n);
            let spec = prior_spec(1.0, 1.0, n, 0.01, a).unwrap();
            let ratio = van_trees_bound(&spec) / van_trees_closed_form(1.0, 1.0, n, 0.01);
            let gap = (ratio - 1.0).abs();
            assert!(gap < prev_gap, "n={n}: gap {gap:.5e} not shrinking");
            prev_gap = gap;
        }
        assert!(prev_gap < 0.05);
    }

    #[test]
    fn reference_ratio_at_one_million() {
        let spec = prior_spec(1.0, 1.0, 1_000_000, 0.01, 14).unwrap();
        let ratio =
            van_trees_bound(&spec) / van_trees_closed_form(1.0, 1.0, 1_000_000, 0.01);
        assert!((0.95..=1.05).contains(&ratio), "ratio {ratio:.6}");
        // and against the bare rate-constant product
        let cls = SobolevClass { beta: 1.0, l: 1.0 };
        let bare = (1e6f64).powf(-2.0 / 3.0) * pinsker_constant(&cls);
        let r2 = van_trees_bound(&spec) / bare;
        assert!((0.8..=1.0).contains(&r2), "rate ratio {r2:.6}");
    }
}
