use anyon_otto::closed_form::{
    cs_efficiency_closed_with, cs_partition_closed_with, cs_partition_sectors, cs_x,
    plain_lattice_closed, ring_partition_closed, ring_partition_closed_with, upsilon, upsilon_with,
    weighted_lattice_closed, Lattice,
};
use anyon_otto::spectra::{cs_energy, Spectrum};
use anyon_otto::{CheckSettings, CsPairSpectrum, FormulaVariant, SumAccuracy};
use approx::assert_relative_eq;

fn acc() -> SumAccuracy {
    SumAccuracy::default()
}

/// Plain loop over a wide window, independent of the library's summation.
fn brute(lattice: Lattice, lambda: f64, gamma: f64, c: f64, weight: i32) -> f64 {
    let lo = match lattice {
        Lattice::Full => -4000,
        Lattice::Half => 0,
    };
    (lo..=4000)
        .map(|n| {
            let n = n as f64;
            (n - c).powi(weight) * (-lambda * (n - gamma) * (n - gamma)).exp()
        })
        .sum()
}

#[test]
fn lattice_closed_forms_match_brute_sums() {
    for lattice in [Lattice::Full, Lattice::Half] {
        for lambda in [0.05, 0.2, 1.0, 5.0, 20.0] {
            for gamma in [-3.1, -0.5, 0.0, 0.4, 2.5] {
                let plain = plain_lattice_closed(lattice, lambda, gamma, &acc()).unwrap();
                assert_relative_eq!(
                    plain,
                    brute(lattice, lambda, gamma, 0.0, 0),
                    max_relative = 1e-11
                );
                for c in [0.0, 0.5, -1.7] {
                    let w = weighted_lattice_closed(
                        lattice,
                        lambda,
                        gamma,
                        c,
                        FormulaVariant::Rederived,
                        &acc(),
                    )
                    .unwrap();
                    assert_relative_eq!(
                        w,
                        brute(lattice, lambda, gamma, c, 2),
                        max_relative = 1e-10
                    );
                }
            }
        }
    }
}

#[test]
fn ring_partition_function_grid() {
    let s = CheckSettings::default();
    for beta in [0.05, 0.5, 2.0, 20.0] {
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            assert!(
                ring_partition_closed(alpha, beta, 1.0, &s)
                    .unwrap()
                    .rel_residual
                    < 1e-12
            );
        }
    }
}

#[test]
fn upsilon_diagonal_matches_temperature_derivative() {
    let s = CheckSettings::default();
    for (alpha, beta) in [(0.2, 0.3), (0.5, 1.0), (0.9, 4.0)] {
        let h = 1e-5 * beta;
        let z = |b: f64| ring_partition_closed(alpha, b, 1.0, &s).unwrap().value;
        let derivative = -(z(beta + h) - z(beta - h)) / (2.0 * h);
        let u = upsilon(alpha, alpha, beta, 1.0, &s).unwrap();
        assert_relative_eq!(u.value, derivative, max_relative = 1e-8);
    }
}

#[test]
fn cs_parity_sectors_match_filtered_sums() {
    for (alpha, beta, length) in [
        (0.0, 0.05, 1.0),
        (0.4, 0.2, 1.3),
        (1.0, 0.01, 0.7),
        (1.6, 1.0, 2.0),
    ] {
        let (even, odd) = cs_partition_sectors(alpha, beta, length, &acc()).unwrap();
        let spectrum = CsPairSpectrum::new(length, alpha).unwrap();
        let levels = spectrum.enumerate_levels(beta, 1e-18).unwrap();
        let (mut direct_even, mut direct_odd) = (0.0, 0.0);
        for (label, e) in levels.iter() {
            let anyon_otto::Label::Pair(n1, n2) = label else {
                unreachable!()
            };
            let w = (-beta * e).exp();
            if (n1 + n2).rem_euclid(2) == 0 {
                direct_even += w;
            } else {
                direct_odd += w;
            }
        }
        assert_relative_eq!(even, direct_even, max_relative = 1e-12);
        assert_relative_eq!(odd, direct_odd, max_relative = 1e-12);
    }
}

#[test]
fn cs_weighted_sum_grid() {
    let s = CheckSettings::default();
    for (aw, ab) in [(0.0, 0.0), (1.0, 0.0), (0.3, 0.8), (1.5, 1.0)] {
        for beta in [0.01, 0.1, 1.0] {
            let r = cs_x(aw, ab, beta, 1.0, &s).unwrap();
            assert!(
                r.rel_residual < 1e-11,
                "{aw} {ab} {beta}: {}",
                r.rel_residual
            );
        }
    }
}

#[test]
fn printed_coefficients_fail_against_direct_sums() {
    let s = CheckSettings::default();
    for variant in [FormulaVariant::PaperMainText, FormulaVariant::PaperAppendix] {
        let u = upsilon_with(0.3, 0.45, 0.7, 1.0, variant, &s).unwrap();
        assert!(u.rel_residual > 1e-3, "{variant}: {}", u.rel_residual);
        let z = ring_partition_closed_with(0.3, 0.7, 1.0, variant, &s).unwrap();
        assert!(z.rel_residual > 1e-3, "{variant}: {}", z.rel_residual);
        let cs = cs_partition_closed_with(0.5, 0.1, 1.0, variant, &s).unwrap();
        assert!(cs.rel_residual > 1e-3, "{variant}: {}", cs.rel_residual);
    }
}

#[test]
fn bose_to_fermi_coupling_cycle_is_a_refrigerator() {
    let s = CheckSettings::default();
    let check =
        cs_efficiency_closed_with(0.0, 1.0, 0.05, 0.1, 1.0, FormulaVariant::Rederived, &s).unwrap();
    assert!(check.report.rel_residual < 1e-12);
    assert_relative_eq!(
        check.report.value,
        -2.5910350613330735,
        max_relative = 1e-12
    );
    assert_eq!(check.cycle.regime, anyon_otto::Regime::Refrigerator);
}

#[test]
fn cs_energy_at_unit_coupling_matches_half_integer_momenta() {
    let length = 1.3;
    let spectrum = CsPairSpectrum::new(length, 1.0).unwrap();
    let u = std::f64::consts::PI.powi(2) / (length * length);
    for n1 in -10i64..=10 {
        for n2 in n1..=10 {
            let (k1, k2) = (n1 as f64 + 0.5, n2 as f64 - 0.5);
            let free = 2.0 * u * (k1 * k1 + k2 * k2);
            assert_relative_eq!(
                cs_energy(&spectrum, n1, n2).unwrap(),
                free,
                max_relative = 1e-13,
                epsilon = 1e-13
            );
        }
    }
}
