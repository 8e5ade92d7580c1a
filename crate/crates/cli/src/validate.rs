//! Closed-form-versus-oracle checks run by the `validate` subcommand.

use std::f64::consts::PI;

use anyon_otto::closed_form::{
    cs_efficiency_closed_with, cs_partition_closed_with, cs_x_with, plain_lattice_closed,
    relative_residual, ring_efficiency_closed_with, ring_partition_closed_with, upsilon_with,
    weighted_lattice_closed, EfficiencyCheck, Lattice,
};
use anyon_otto::otto::{discretize_cycle, efficiency_cs_volume, evaluate_cycle, CommonLevels};
use anyon_otto::special_functions::{gauss_sum_full, gauss_sum_half};
use anyon_otto::spectra::pauli_energy;
use anyon_otto::thermo::{boltzmann_populations, shannon_entropy};
use anyon_otto::{
    run_cycle, CheckSettings, CycleMedium, CycleReport, FormulaVariant, OttoCycleSpec, Regime,
    Result, SumAccuracy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst residual seen in one family of checks, measured against the
/// threshold that applied at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub family: &'static str,
    /// Whether the family depends on the selected formula variant.
    pub uses_variant: bool,
    pub checks: usize,
    /// Near-degenerate cycles left out of efficiency families.
    pub skipped: usize,
    pub max_residual: f64,
    pub worst_point: String,
    pub threshold: f64,
}

impl FamilyResult {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub accuracy: SumAccuracy,
    pub tail_tol: f64,
    pub seed: u64,
    pub variant: FormulaVariant,
}

/// `max(1e-9, 10 rel_tol)`.
pub fn threshold_for(rel_tol: f64) -> f64 {
    (10.0 * rel_tol).max(1e-9)
}

struct Tracker {
    family: &'static str,
    uses_variant: bool,
    threshold: f64,
    rel_tol: f64,
    checks: usize,
    skipped: usize,
    /// Worst `residual / threshold` so far, with its parts.
    worst_ratio: f64,
    max_residual: f64,
    worst_threshold: f64,
    worst_point: String,
}

impl Tracker {
    fn new(family: &'static str, uses_variant: bool, opts: &ValidateOptions) -> Self {
        let rel_tol = opts.accuracy.rel_tol();
        let threshold = threshold_for(rel_tol);
        Self {
            family,
            uses_variant,
            threshold,
            rel_tol,
            checks: 0,
            skipped: 0,
            worst_ratio: -1.0,
            max_residual: 0.0,
            worst_threshold: threshold,
            worst_point: String::from("-"),
        }
    }

    /// Records a residual; an evaluation error counts as an infinite one.
    fn record(&mut self, point: impl FnOnce() -> String, residual: Result<f64>) {
        self.record_against(point, residual, self.threshold);
    }

    fn record_against(
        &mut self,
        point: impl FnOnce() -> String,
        residual: Result<f64>,
        threshold: f64,
    ) {
        self.checks += 1;
        let (r, note) = match residual {
            Ok(r) if r.is_nan() => (f64::INFINITY, Some("NaN".to_string())),
            Ok(r) => (r, None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        let ratio = r / threshold;
        if ratio > self.worst_ratio {
            self.worst_ratio = ratio;
            self.max_residual = r;
            self.worst_threshold = threshold;
            self.worst_point = match note {
                Some(n) => format!("{} ({n})", point()),
                None => point(),
            };
        }
    }

    /// Efficiency ratios are compared wherever the net work is resolved;
    /// points where it vanishes against the heats are skipped. The threshold
    /// grows with the cancellation between the heat contributions.
    fn record_efficiency(
        &mut self,
        point: impl FnOnce() -> String,
        check: Result<EfficiencyCheck>,
    ) {
        match check {
            Ok(c) if !well_conditioned(&c.cycle) => self.skipped += 1,
            Ok(c) => {
                let threshold = self.threshold.max(10.0 * self.rel_tol * c.condition);
                self.record_against(point, Ok(c.report.rel_residual), threshold);
            }
            Err(e) => self.record(point, Err(e)),
        }
    }

    fn finish(self) -> FamilyResult {
        FamilyResult {
            family: self.family,
            uses_variant: self.uses_variant,
            checks: self.checks,
            skipped: self.skipped,
            max_residual: self.max_residual,
            worst_point: self.worst_point,
            threshold: self.worst_threshold,
        }
    }
}

/// Smallest `|W_out| / max(|Q_in|, |Q_out|)` at which an efficiency ratio is
/// compared.
pub const MIN_WORK_FRACTION: f64 = 1e-6;

pub fn well_conditioned(report: &CycleReport) -> bool {
    report.regime != Regime::Degenerate
        && report.w_out.abs() >= MIN_WORK_FRACTION * report.q_in.abs().max(report.q_out.abs())
}

const LAMBDAS: [f64; 8] = [0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
const GAMMAS: [f64; 7] = [-5.0, -2.3, -0.5, 0.0, 0.3, 1.0, 4.7];

fn lattice_families(opts: &ValidateOptions) -> Vec<Tracker> {
    let acc = &opts.accuracy;
    let mut plain = Tracker::new("lattice theta sums", false, opts);
    let mut weighted = Tracker::new("weighted theta sums", true, opts);
    for lattice in [Lattice::Full, Lattice::Half] {
        let direct = |l, g, c, w| match lattice {
            Lattice::Full => gauss_sum_full(l, g, c, w, acc),
            Lattice::Half => gauss_sum_half(l, g, c, w, acc),
        };
        for &lambda in &LAMBDAS {
            for &gamma in &GAMMAS {
                let point = || format!("{lattice:?} lambda={lambda} gamma={gamma}");
                plain.record(
                    point,
                    residual(
                        plain_lattice_closed(lattice, lambda, gamma, acc),
                        direct(lambda, gamma, 0.0, 0),
                    ),
                );
                for c in [0.0, 0.5, -1.7] {
                    let point = || format!("{lattice:?} lambda={lambda} gamma={gamma} c={c}");
                    weighted.record(
                        point,
                        residual(
                            weighted_lattice_closed(lattice, lambda, gamma, c, opts.variant, acc),
                            direct(lambda, gamma, c, 2),
                        ),
                    );
                }
            }
        }
    }
    vec![plain, weighted]
}

fn residual(value: Result<f64>, oracle: Result<f64>) -> Result<f64> {
    Ok(relative_residual(value?, oracle?))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn ring_families(opts: &ValidateOptions, settings: &CheckSettings) -> Vec<Tracker> {
    let v = opts.variant;
    let mut z = Tracker::new("ring partition function", true, opts);
    let mut ups = Tracker::new("ring upsilon", true, opts);
    let mut eff = Tracker::new("ring efficiency", true, opts);
    for &lambda in &LAMBDAS {
        for alpha in [0.0, 0.25, 0.5, 0.9, -1.3] {
            let point = || format!("alpha={alpha} beta*eps0={lambda}");
            z.record(
                point,
                ring_partition_closed_with(alpha, lambda, 1.0, v, settings).map(|r| r.rel_residual),
            );
            for alpha_k in [0.0, 0.7] {
                let point = || format!("alpha_k={alpha_k} alpha_j={alpha} beta_j*eps0={lambda}");
                ups.record(
                    point,
                    upsilon_with(alpha_k, alpha, lambda, 1.0, v, settings).map(|r| r.rel_residual),
                );
            }
        }
    }
    for alpha_h in grid(0.0, 0.5, 3) {
        for alpha_l in grid(alpha_h + 0.1, 1.0, 3) {
            for beta_h in [0.05, 0.5, 2.0] {
                for beta_l in [beta_h * 2.0, beta_h * 20.0] {
                    let point = || {
                        format!("alpha_h={alpha_h} alpha_l={alpha_l} beta_h={beta_h} beta_l={beta_l} eps0=1")
                    };
                    let check = ring_efficiency_closed_with(
                        alpha_h, alpha_l, beta_h, beta_l, 1.0, v, settings,
                    );
                    eff.record_efficiency(point, check);
                }
            }
        }
    }
    vec![z, ups, eff]
}

fn cs_families(opts: &ValidateOptions, settings: &CheckSettings) -> Vec<Tracker> {
    let v = opts.variant;
    let mut z = Tracker::new("cs partition function", true, opts);
    let mut x = Tracker::new("cs weighted sum", true, opts);
    let mut eff = Tracker::new("cs coupling efficiency", true, opts);
    let mut vol = Tracker::new("cs volume efficiency", false, opts);
    for &mu in &LAMBDAS {
        // mu = beta π²/L² at L = 1.
        let beta = mu / (PI * PI);
        for alpha in [0.0, 0.3, 0.5, 1.0, 1.7] {
            let point = || format!("alpha={alpha} beta={beta} L=1");
            z.record(
                point,
                cs_partition_closed_with(alpha, beta, 1.0, v, settings).map(|r| r.rel_residual),
            );
            for alpha_w in [0.0, 1.0] {
                let point =
                    || format!("alpha_weight={alpha_w} alpha_boltz={alpha} beta={beta} L=1");
                x.record(
                    point,
                    cs_x_with(alpha_w, alpha, beta, 1.0, v, settings).map(|r| r.rel_residual),
                );
            }
        }
    }
    for (alpha1, alpha2) in [(0.0, 1.0), (0.0, 0.5), (0.2, 0.9), (0.5, 1.5)] {
        for (beta_h, beta_l) in [(0.05, 0.1), (0.02, 0.5), (0.1, 1.0)] {
            let point =
                || format!("alpha1={alpha1} alpha2={alpha2} beta_h={beta_h} beta_l={beta_l} L=1");
            eff.record_efficiency(
                point,
                cs_efficiency_closed_with(alpha1, alpha2, beta_h, beta_l, 1.0, v, settings),
            );
        }
    }
    for (l1, l2) in [(2.0, 1.0), (1.5, 1.2), (3.0, 0.5)] {
        for alpha in [0.0, 0.5, 1.0] {
            let point = || format!("l1={l1} l2={l2} alpha={alpha} beta_h=0.02 beta_l=0.2");
            let spec = OttoCycleSpec::new(CycleMedium::CsVolume { alpha, l1, l2 }, 0.02, 0.2)
                .and_then(|s| s.with_tail_tol(opts.tail_tol));
            vol.record(
                point,
                spec.and_then(|s| run_cycle(&s))
                    .map(|r| relative_residual(r.efficiency, efficiency_cs_volume(l1, l2))),
            );
        }
    }
    vec![z, x, eff, vol]
}

fn cycle_families(opts: &ValidateOptions) -> Vec<Tracker> {
    let mut first_law = Tracker::new("stroke first law", false, opts);
    let mut shift = Tracker::new("efficiency shift invariance", false, opts);
    let mut gibbs = Tracker::new("gibbs normalisation", false, opts);
    let mut pauli = Tracker::new("pauli energy", false, opts);

    let specs = [
        CycleMedium::Ring {
            eps0: 1.0,
            alpha_h: 0.3,
            alpha_l: 0.45,
        },
        CycleMedium::CsCoupling {
            length: 1.0,
            alpha1: 0.0,
            alpha2: 1.0,
        },
    ];
    for medium in specs {
        let beta = match medium {
            CycleMedium::Ring { .. } => (0.1, 20.0),
            _ => (0.05, 0.1),
        };
        let point = || format!("{medium:?} beta_h={} beta_l={} steps=1000", beta.0, beta.1);
        let outcome = OttoCycleSpec::new(medium, beta.0, beta.1)
            .and_then(|s| s.with_tail_tol(opts.tail_tol))
            .and_then(|s| discretize_cycle(&s, 1000))
            .map(|cycle| {
                cycle
                    .strokes
                    .iter()
                    .map(|s| {
                        let scale = s
                            .heat
                            .abs()
                            .max(s.work.abs())
                            .max(s.energy_change.abs())
                            .max(1e-300);
                        (s.heat + s.work - s.energy_change).abs() / scale
                    })
                    .fold(0.0, f64::max)
            });
        first_law.record(point, outcome);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found = 0;
    let mut attempts = 0;
    while found < 20 && attempts < 2000 {
        attempts += 1;
        let alpha_h = rng.gen_range(0.0..0.5);
        let alpha_l = rng.gen_range(alpha_h..1.0);
        let beta_h = rng.gen_range(0.05..2.0);
        let beta_l = beta_h * rng.gen_range(1.5..50.0);
        let offset = rng.gen_range(-50.0..50.0);
        let Ok(spec) = OttoCycleSpec::new(
            CycleMedium::Ring {
                eps0: 1.0,
                alpha_h,
                alpha_l,
            },
            beta_h,
            beta_l,
        ) else {
            continue;
        };
        let Ok(levels) = CommonLevels::for_spec(&spec) else {
            continue;
        };
        let Ok(base) = evaluate_cycle(&levels, beta_h, beta_l) else {
            continue;
        };
        if base.regime != Regime::Engine {
            continue;
        }
        found += 1;
        let point = || {
            format!("alpha_h={alpha_h} alpha_l={alpha_l} beta_h={beta_h} beta_l={beta_l} shift={offset}")
        };
        shift.record(
            point,
            evaluate_cycle(&levels.shifted(offset), beta_h, beta_l)
                .map(|r| relative_residual(r.efficiency, base.efficiency)),
        );
    }

    for i in 0..200 {
        let n = rng.gen_range(1..40);
        let energies: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let beta = rng.gen_range(0.01..5.0);
        let point = || format!("random vector #{i} (n={n}, beta={beta})");
        gibbs.record(
            point,
            boltzmann_populations(&energies, beta).map(|(p, _, _)| {
                let total: f64 = p.iter().sum();
                let s = shannon_entropy(&p);
                let excess = (s - (n as f64).ln()).max(0.0);
                (total - 1.0).abs().max(excess)
            }),
        );
    }

    for n in 1..=100u64 {
        let point = || format!("N={n} omega=1");
        let fermions: f64 = (0..n).map(|k| k as f64 + 0.5).sum();
        let bosons = n as f64 * 0.5;
        pauli.record(
            point,
            pauli_energy(n, 1.0).map(|e| relative_residual(e, fermions - bosons)),
        );
    }

    vec![first_law, shift, gibbs, pauli]
}

/// Runs every family and reports its worst residual.
pub fn run_validation(opts: &ValidateOptions) -> Vec<FamilyResult> {
    let settings = CheckSettings {
        accuracy: opts.accuracy,
        tail_tol: opts.tail_tol,
    };
    let mut trackers = lattice_families(opts);
    trackers.extend(ring_families(opts, &settings));
    trackers.extend(cs_families(opts, &settings));
    trackers.extend(cycle_families(opts));
    trackers.into_iter().map(Tracker::finish).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_scale_with_rel_tol() {
        assert_eq!(threshold_for(1e-12), 1e-9);
        assert_eq!(threshold_for(1e-3), 1e-2);
    }

    #[test]
    fn tracker_keeps_worst_point() {
        let opts = ValidateOptions {
            accuracy: SumAccuracy::default(),
            tail_tol: 1e-18,
            seed: 1,
            variant: FormulaVariant::Rederived,
        };
        let mut t = Tracker::new("demo", false, &opts);
        t.record(|| "a".into(), Ok(1e-12));
        t.record(|| "b".into(), Ok(1e-10));
        t.record(|| "c".into(), Ok(1e-11));
        assert_eq!(t.worst_point, "b");
        t.record_against(|| "loose".into(), Ok(5e-10), 1e-8);
        assert_eq!(t.worst_point, "b");
        t.record(|| "d".into(), Err(anyon_otto::Error::Overflow("x")));
        let r = t.finish();
        assert!(r.worst_point.starts_with("d ("));
        assert!(!r.passed());
        assert_eq!(r.checks, 5);
    }
}
