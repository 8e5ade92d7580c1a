use std::f64::consts::PI;

use anyon_otto::special_functions::{
    gauss_sum_full, gauss_sum_half_series, gaussian_tail_bound, partial_theta, theta3, theta3_ln,
    theta3_series,
};
use anyon_otto::SumAccuracy;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn acc() -> SumAccuracy {
    SumAccuracy::default()
}

/// `θ₃(1, e^{-π}) = π^{1/4} / Γ(3/4)`.
const THETA3_AT_E_MINUS_PI: f64 = 1.086_434_811_213_308;

#[test]
fn theta3_special_value() {
    let v = theta3(1.0, (-PI).exp(), &acc()).unwrap();
    assert_relative_eq!(v, THETA3_AT_E_MINUS_PI, max_relative = 1e-14);
}

/// Poisson dual: `Σ e^{-λ(n-γ)²} = sqrt(π/λ) Σ_k e^{-π²k²/λ} cos(2πkγ)`.
fn poisson_dual(lambda: f64, gamma: f64) -> f64 {
    let mut sum = 1.0;
    for k in 1..200 {
        let k = k as f64;
        sum += 2.0 * (-PI * PI * k * k / lambda).exp() * (2.0 * PI * k * gamma).cos();
    }
    (PI / lambda).sqrt() * sum
}

#[test]
fn gaussian_sum_matches_poisson_dual() {
    for lambda in [0.05, 0.3, 1.0, 3.0, 9.0] {
        for gamma in [-2.3, -0.5, 0.0, 0.25, 0.77] {
            let direct = gauss_sum_full(lambda, gamma, 0.0, 0, &acc()).unwrap();
            assert_relative_eq!(direct, poisson_dual(lambda, gamma), max_relative = 1e-12);
        }
    }
}

#[test]
fn log_parameterised_theta_survives_underflowing_nome() {
    // q = e^{-800} underflows, but only the n = 0, ±1 terms matter.
    let v = theta3_ln(800.0, -800.0, &acc()).unwrap();
    assert_relative_eq!(v, 2.0, max_relative = 1e-15);
}

#[test]
fn tail_bound_dominates_omitted_terms() {
    for lambda in [0.05, 0.5, 5.0] {
        for t in [0.5, 1.0, 3.0, 10.0] {
            for weight in 0..=2u8 {
                let bound = gaussian_tail_bound(lambda, t, weight);
                let exact: f64 = (0..100_000)
                    .map(|j| {
                        let s = t + j as f64;
                        s.powi(weight.into()) * (-lambda * s * s).exp()
                    })
                    .sum();
                assert!(
                    bound >= exact,
                    "lambda={lambda} t={t} w={weight}: {bound} < {exact}"
                );
            }
        }
    }
}

#[test]
fn series_report_certified_truncation() {
    let s = theta3_series(1.7, 0.9, &acc()).unwrap();
    assert!(s.tail_bound <= SumAccuracy::DEFAULT_REL_TOL * s.abs_sum);
    let h = gauss_sum_half_series(0.2, 3.3, 1.0, 2, &acc()).unwrap();
    assert!(h.tail_bound <= SumAccuracy::DEFAULT_REL_TOL * h.abs_sum);
}

proptest! {
    #[test]
    fn theta3_is_symmetric_under_inversion(ln_x in -3.0f64..3.0, q in 0.05f64..0.95) {
        let x = ln_x.exp();
        let a = theta3(x, q, &acc()).unwrap();
        let b = theta3(1.0 / x, q, &acc()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn theta3_splits_into_partial_thetas(ln_x in -3.0f64..3.0, q in 0.05f64..0.95) {
        let x = ln_x.exp();
        let full = theta3(x, q, &acc()).unwrap();
        let split = partial_theta(x, q, &acc()).unwrap() + partial_theta(1.0 / x, q, &acc()).unwrap() - 1.0;
        prop_assert!((full - split).abs() <= 1e-12 * full.abs());
    }

    #[test]
    fn theta3_obeys_modular_transformation(t in 0.05f64..20.0) {
        let lhs = theta3(1.0, (-PI * t).exp(), &acc()).unwrap();
        let rhs = theta3(1.0, (-PI / t).exp(), &acc()).unwrap() / t.sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
    }
}
