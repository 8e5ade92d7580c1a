//! Working-medium spectra.
//!
//! Natural units ħ = m = k_B = 1 throughout. The ring anyon carries its scale
//! in `eps0 = ħ²/(2ma²)`; the Calogero–Sutherland pair carries it in the ring
//! size `L` (circumference 2πL). The CS pair interaction strength
//! `πα(α-1)/L²` is fixed by `alpha` and `L` and is not stored separately.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::special_functions::scaled_tail_bound;

const RING_WINDOW_CAP: i64 = 1_000_000;
const CS_WINDOW_CAP: i64 = 1_500;

/// Quantum numbers of a level: one integer on the flux ring, an ordered
/// pair `n1 ≤ n2` for the CS pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Ring(i64),
    Pair(i64, i64),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Ring(n) => write!(f, "{n}"),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// Charged particle on a ring threaded by flux: `E_n = eps0 (n - α)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingAnyonSpectrum {
    eps0: f64,
    alpha: f64,
}

impl RingAnyonSpectrum {
    pub fn new(eps0: f64, alpha: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return domain(format!("eps0 must be positive and finite, got {eps0}"));
        }
        if !alpha.is_finite() {
            return domain(format!("alpha must be finite, got {alpha}"));
        }
        Ok(Self { eps0, alpha })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Two anyons on a ring of circumference 2πL with Calogero–Sutherland
/// coupling `alpha` (0 bosons, 1 fermions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsPairSpectrum {
    length: f64,
    alpha: f64,
}

impl CsPairSpectrum {
    pub fn new(length: f64, alpha: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return domain(format!(
                "ring size L must be positive and finite, got {length}"
            ));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return domain(format!(
                "CS coupling alpha must be finite and non-negative, got {alpha}"
            ));
        }
        Ok(Self { length, alpha })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `π²/L²`, the unit in which `E = (π²/L²)(m² + (n - α)²)` with
    /// `m = n1 + n2`, `n = n2 - n1`.
    pub fn unit(&self) -> f64 {
        PI * PI / (self.length * self.length)
    }
}

/// Ring level energy `eps0 (n - α)²`.
pub fn ring_energy(spec: &RingAnyonSpectrum, n: i64) -> f64 {
    let d = n as f64 - spec.alpha;
    spec.eps0 * d * d
}

/// CS pair level energy `π²α²/L² + (2π²/L²)(n1² + n2² + α(n1 - n2))`.
pub fn cs_energy(spec: &CsPairSpectrum, n1: i64, n2: i64) -> Result<f64> {
    if n1 > n2 {
        return Err(Error::Ordering { n1, n2 });
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let u = spec.unit();
    let alpha = spec.alpha;
    Ok(u * alpha * alpha + 2.0 * u * (a * a + b * b + alpha * (a - b)))
}

/// Ground-state energy difference between N trapped fermions and N trapped
/// bosons, `ω N (N - 1) / 2` with ħ = 1.
pub fn pauli_energy(n: u64, omega: f64) -> Result<f64> {
    if n == 0 {
        return domain("particle number must be at least 1");
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return domain(format!("trap frequency must be positive, got {omega}"));
    }
    let pairs = (n as f64) * ((n - 1) as f64) / 2.0;
    Ok(omega * pairs)
}

/// Truncated level list for a given inverse temperature.
///
/// Energies are ascending (ties broken by label). Every omitted level lies at
/// or above the highest retained energy, and `tail_bound` bounds the total
/// omitted ground-shifted Boltzmann weight `Σ e^{-β(E - E_ground)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    labels: Vec<Label>,
    energies: Vec<f64>,
    tail_bound: f64,
    beta: f64,
}

impl LevelSet {
    /// Builds a level set on an explicit label list, sorting by energy.
    pub fn from_labels<S: Spectrum + ?Sized>(
        spectrum: &S,
        labels: impl IntoIterator<Item = Label>,
        beta: f64,
        tail_bound: f64,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::new();
        for label in labels {
            if !seen.insert(label) {
                return Err(Error::Shape(format!("duplicate label {label}")));
            }
            pairs.push((spectrum.energy(label)?, label));
        }
        if !(tail_bound >= 0.0) {
            return domain(format!("tail bound must be non-negative, got {tail_bound}"));
        }
        Ok(Self::sorted(pairs, beta, tail_bound))
    }

    fn sorted(mut pairs: Vec<(f64, Label)>, beta: f64, tail_bound: f64) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (energies, labels) = pairs.into_iter().unzip();
        Self {
            labels,
            energies,
            tail_bound,
            beta,
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Same levels with every energy shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            energies: self.energies.iter().map(|e| e + offset).collect(),
            tail_bound: self.tail_bound,
            beta: self.beta,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, f64)> + '_ {
        self.labels
            .iter()
            .copied()
            .zip(self.energies.iter().copied())
    }
}

/// A level family that can be evaluated label-wise and enumerated.
pub trait Spectrum {
    fn energy(&self, label: Label) -> Result<f64>;

    /// Enumerates levels until the omitted ground-shifted Boltzmann weight at
    /// `beta` is certified below `tail_tol`.
    fn enumerate_levels(&self, beta: f64, tail_tol: f64) -> Result<LevelSet>;
}

fn check_enumeration_args(beta: f64, tail_tol: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("beta must be positive and finite, got {beta}"));
    }
    if !(tail_tol > 0.0) {
        return domain(format!("tail_tol must be positive, got {tail_tol}"));
    }
    Ok(())
}

/// Half-width guess so that `e^{-λ K²}` is already near `tail_tol`.
fn initial_half_width(lambda: f64, tail_tol: f64) -> i64 {
    let k = ((2.0 / tail_tol).ln().max(1.0) / lambda).sqrt().ceil();
    if k.is_finite() {
        (k as i64).clamp(2, RING_WINDOW_CAP)
    } else {
        RING_WINDOW_CAP
    }
}

/// Keeps the window levels at or below `cutoff`; returns the kept levels and
/// the shifted Boltzmann weight of the pruned ones.
fn prune(
    candidates: Vec<(f64, Label)>,
    cutoff: f64,
    beta: f64,
    ground: f64,
) -> (Vec<(f64, Label)>, f64) {
    let mut pruned = 0.0;
    let kept = candidates
        .into_iter()
        .filter(|(e, _)| {
            if e.partial_cmp(&cutoff) == Some(Ordering::Greater) {
                pruned += (-beta * (e - ground)).exp();
                false
            } else {
                true
            }
        })
        .collect();
    (kept, pruned)
}

impl Spectrum for RingAnyonSpectrum {
    fn energy(&self, label: Label) -> Result<f64> {
        match label {
            Label::Ring(n) => Ok(ring_energy(self, n)),
            Label::Pair(..) => Err(Error::Shape(format!("ring spectrum has no level {label}"))),
        }
    }

    fn enumerate_levels(&self, beta: f64, tail_tol: f64) -> Result<LevelSet> {
        check_enumeration_args(beta, tail_tol)?;
        let lambda = beta * self.eps0;
        let centre = self.alpha.round() as i64;
        let d0 = (centre as f64 - self.alpha).abs();
        let ground = self.eps0 * d0 * d0;
        let mut half_width = initial_half_width(lambda, tail_tol);

        loop {
            let t_hi = (centre + half_width + 1) as f64 - self.alpha;
            let t_lo = self.alpha - (centre - half_width - 1) as f64;
            let cutoff = self.eps0 * t_hi.min(t_lo).powi(2);
            let candidates = (centre - half_width..=centre + half_width)
                .map(|n| (ring_energy(self, n), Label::Ring(n)))
                .collect();
            let (kept, pruned) = prune(candidates, cutoff, beta, ground);
            let log_scale = lambda * d0 * d0;
            let outside = scaled_tail_bound(lambda, t_hi, 0, log_scale)
                + scaled_tail_bound(lambda, t_lo, 0, log_scale);
            let tail = outside + pruned;
            if tail < tail_tol {
                return Ok(LevelSet::sorted(kept, beta, tail));
            }
            if half_width >= RING_WINDOW_CAP {
                return Err(Error::NoConvergence {
                    what: "ring level enumeration",
                    terms: (2 * half_width + 1) as u64,
                });
            }
            half_width = (half_width * 2).min(RING_WINDOW_CAP);
        }
    }
}

impl Spectrum for CsPairSpectrum {
    fn energy(&self, label: Label) -> Result<f64> {
        match label {
            Label::Pair(n1, n2) => cs_energy(self, n1, n2),
            Label::Ring(_) => Err(Error::Shape(format!(
                "CS pair spectrum has no level {label}"
            ))),
        }
    }

    /// In coordinates `u1 = n1 + α/2`, `u2 = n2 - α/2` the energy is
    /// `(2π²/L²)(u1² + u2²)`, so the window is a square centred on the
    /// nearest lattice point to `(-α/2, α/2)`, restricted to `n1 ≤ n2`.
    fn enumerate_levels(&self, beta: f64, tail_tol: f64) -> Result<LevelSet> {
        check_enumeration_args(beta, tail_tol)?;
        let scale = 2.0 * self.unit();
        let mu = beta * scale;
        let (g1, g2) = (-self.alpha / 2.0, self.alpha / 2.0);
        let (c1, c2) = (g1.round() as i64, g2.round() as i64);
        let (d1, d2) = (c1 as f64 - g1, c2 as f64 - g2);
        let ground = scale * (d1 * d1 + d2 * d2);
        let full_line = 1.0 + (PI / mu).sqrt();
        let mut half_width = initial_half_width(mu, tail_tol).min(CS_WINDOW_CAP);

        loop {
            let k = half_width;
            let t1 = ((c1 + k + 1) as f64 - g1, g1 - (c1 - k - 1) as f64);
            let t2 = ((c2 + k + 1) as f64 - g2, g2 - (c2 - k - 1) as f64);
            let log_scale = mu * (d1 * d1 + d2 * d2);
            let tail1 = scaled_tail_bound(mu, t1.0, 0, log_scale)
                + scaled_tail_bound(mu, t1.1, 0, log_scale);
            let tail2 = scaled_tail_bound(mu, t2.0, 0, log_scale)
                + scaled_tail_bound(mu, t2.1, 0, log_scale);
            let outside = (tail1 + tail2) * full_line;

            // Lowest energy any label outside the square can have.
            let m1 = t1.0.min(t1.1);
            let m2 = t2.0.min(t2.1);
            let cutoff = scale * (m1 * m1 + d2 * d2).min(d1 * d1 + m2 * m2);

            let mut candidates = Vec::new();
            for n1 in c1 - k..=c1 + k {
                for n2 in (c2 - k).max(n1)..=c2 + k {
                    candidates.push((cs_energy(self, n1, n2)?, Label::Pair(n1, n2)));
                }
            }
            let (kept, pruned) = prune(candidates, cutoff, beta, ground);
            let tail = outside + pruned;
            if tail < tail_tol {
                return Ok(LevelSet::sorted(kept, beta, tail));
            }
            if half_width >= CS_WINDOW_CAP {
                return Err(Error::NoConvergence {
                    what: "CS pair level enumeration",
                    terms: ((2 * k + 1) * (2 * k + 1)) as u64,
                });
            }
            half_width = (half_width * 2).min(CS_WINDOW_CAP);
        }
    }
}

/// Either working medium, for code that handles both uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorkingMedium {
    Ring(RingAnyonSpectrum),
    CsPair(CsPairSpectrum),
}

impl Spectrum for WorkingMedium {
    fn energy(&self, label: Label) -> Result<f64> {
        match self {
            WorkingMedium::Ring(s) => s.energy(label),
            WorkingMedium::CsPair(s) => s.energy(label),
        }
    }

    fn enumerate_levels(&self, beta: f64, tail_tol: f64) -> Result<LevelSet> {
        match self {
            WorkingMedium::Ring(s) => s.enumerate_levels(beta, tail_tol),
            WorkingMedium::CsPair(s) => s.enumerate_levels(beta, tail_tol),
        }
    }
}

impl From<RingAnyonSpectrum> for WorkingMedium {
    fn from(s: RingAnyonSpectrum) -> Self {
        WorkingMedium::Ring(s)
    }
}

impl From<CsPairSpectrum> for WorkingMedium {
    fn from(s: CsPairSpectrum) -> Self {
        WorkingMedium::CsPair(s)
    }
}

/// Enumerates the levels of `spectrum` needed at inverse temperature `beta`.
pub fn enumerate_levels<S: Spectrum + ?Sized>(
    spectrum: &S,
    beta: f64,
    tail_tol: f64,
) -> Result<LevelSet> {
    spectrum.enumerate_levels(beta, tail_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ring(eps0: f64, alpha: f64) -> RingAnyonSpectrum {
        RingAnyonSpectrum::new(eps0, alpha).unwrap()
    }

    fn cs(length: f64, alpha: f64) -> CsPairSpectrum {
        CsPairSpectrum::new(length, alpha).unwrap()
    }

    #[test]
    fn ring_energy_examples() {
        assert_eq!(ring_energy(&ring(1.0, 0.0), 0), 0.0);
        let half = ring(1.0, 0.5);
        assert_eq!(ring_energy(&half, 0), 0.25);
        assert_eq!(ring_energy(&half, 1), 0.25);
        assert_eq!(ring_energy(&ring(0.5, 0.25), -1), 0.78125);
    }

    #[test]
    fn cs_energy_examples() {
        assert_eq!(cs_energy(&cs(1.0, 0.0), 0, 0).unwrap(), 0.0);
        assert_relative_eq!(
            cs_energy(&cs(1.0, 1.0), 0, 0).unwrap(),
            PI * PI,
            max_relative = 1e-15
        );
        let expected = PI * PI / 16.0 + PI * PI / 4.0;
        assert_relative_eq!(
            cs_energy(&cs(2.0, 0.5), 0, 1).unwrap(),
            expected,
            max_relative = 1e-15
        );
        assert_relative_eq!(expected, 3.0842513753404246, max_relative = 1e-15);
    }

    #[test]
    fn cs_energy_rejects_unordered_labels() {
        assert_eq!(
            cs_energy(&cs(1.0, 0.3), 2, 1),
            Err(Error::Ordering { n1: 2, n2: 1 })
        );
    }

    #[test]
    fn constructor_validation() {
        assert!(RingAnyonSpectrum::new(0.0, 0.1).is_err());
        assert!(RingAnyonSpectrum::new(1.0, f64::NAN).is_err());
        assert!(CsPairSpectrum::new(-1.0, 0.1).is_err());
        assert!(CsPairSpectrum::new(1.0, -0.1).is_err());
    }

    #[test]
    fn pauli_energy_examples() {
        assert_eq!(pauli_energy(1, 3.7).unwrap(), 0.0);
        assert_eq!(pauli_energy(2, 1.0).unwrap(), 1.0);
        // E^F = ω N²/2 = 100, E^B = ω N/2 = 10.
        assert_eq!(pauli_energy(10, 2.0).unwrap(), 90.0);
        assert!(pauli_energy(0, 1.0).is_err());
        assert!(pauli_energy(3, 0.0).is_err());
    }

    #[test]
    fn ring_enumeration_cold() {
        let set = ring(1.0, 0.0).enumerate_levels(10.0, 1e-15).unwrap();
        for n in -2..=2 {
            assert!(set.labels().contains(&Label::Ring(n)));
        }
        assert!(set.tail_bound() < 1e-15);
        assert_eq!(set.labels()[0], Label::Ring(0));
    }

    #[test]
    fn ring_ground_state_off_integer_flux() {
        for beta in [0.01, 1.0, 50.0] {
            let set = ring(1.0, 0.3).enumerate_levels(beta, 1e-16).unwrap();
            assert_eq!(set.labels()[0], Label::Ring(0));
            assert_relative_eq!(set.ground_energy(), 0.09, max_relative = 1e-15);
        }
    }

    #[test]
    fn cs_enumeration_ground_first() {
        let set = cs(1.0, 0.0).enumerate_levels(50.0, 1e-16).unwrap();
        assert_eq!(set.labels()[0], Label::Pair(0, 0));
        assert_eq!(set.energies()[0], 0.0);
    }

    #[test]
    fn enumeration_argument_checks() {
        assert!(ring(1.0, 0.0).enumerate_levels(0.0, 1e-12).is_err());
        assert!(cs(1.0, 0.0).enumerate_levels(1.0, 0.0).is_err());
    }

    #[test]
    fn enumeration_is_complete_below_cutoff() {
        // No level outside the returned set may lie below its highest energy.
        let spec = cs(1.3, 0.37);
        let set = spec.enumerate_levels(0.2, 1e-14).unwrap();
        let max_kept = *set.energies().last().unwrap();
        let kept: BTreeSet<_> = set.labels().iter().copied().collect();
        for n1 in -60..=60 {
            for n2 in n1..=60 {
                let label = Label::Pair(n1, n2);
                if !kept.contains(&label) {
                    assert!(spec.energy(label).unwrap() >= max_kept, "{label} omitted");
                }
            }
        }
    }

    #[test]
    fn tail_bound_dominates_brute_force_tail() {
        let spec = ring(0.7, 0.41);
        let beta = 0.3;
        let set = spec.enumerate_levels(beta, 1e-9).unwrap();
        let kept: BTreeSet<_> = set.labels().iter().copied().collect();
        let ground = set.ground_energy();
        let omitted: f64 = (-2000..=2000)
            .filter(|n| !kept.contains(&Label::Ring(*n)))
            .map(|n| (-beta * (ring_energy(&spec, n) - ground)).exp())
            .sum();
        assert!(omitted <= set.tail_bound());
        assert!(set.tail_bound() < 1e-9);
    }

    #[test]
    fn from_labels_rejects_duplicates() {
        let spec = ring(1.0, 0.2);
        let labels = [Label::Ring(0), Label::Ring(1), Label::Ring(0)];
        assert!(matches!(
            LevelSet::from_labels(&spec, labels, 1.0, 0.0),
            Err(Error::Shape(_))
        ));
        let wrong = [Label::Pair(0, 1)];
        assert!(matches!(
            LevelSet::from_labels(&spec, wrong, 1.0, 0.0),
            Err(Error::Shape(_))
        ));
    }
}
