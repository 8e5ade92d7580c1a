//! Gibbs ensembles on truncated level sets and the heat/work bookkeeping
//! `dE = tr{dρ H} + tr{ρ dH}`.

use crate::error::{domain, Error, Result};
use crate::spectra::{LevelSet, Spectrum};

/// Thermal state on a truncated level set, with k_B = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsEnsemble {
    levels: LevelSet,
    beta: f64,
    populations: Vec<f64>,
    log_z: f64,
    internal_energy: f64,
    entropy: f64,
}

/// Normalised Boltzmann weights of `energies` at `beta`, computed on
/// ground-shifted energies. Also returns `ln Σ e^{-β(E - E_min)}` and `E_min`.
pub fn boltzmann_populations(energies: &[f64], beta: f64) -> Result<(Vec<f64>, f64, f64)> {
    if energies.is_empty() {
        return Err(Error::Shape(
            "cannot build a Gibbs state on an empty level set".into(),
        ));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("beta must be positive and finite, got {beta}"));
    }
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies
        .iter()
        .map(|e| (-beta * (e - e_min)).exp())
        .collect();
    let z_shifted: f64 = weights.iter().sum();
    let populations = weights.into_iter().map(|w| w / z_shifted).collect();
    Ok((populations, z_shifted.ln(), e_min))
}

/// `-Σ P ln P` with `0 ln 0 = 0`.
pub fn shannon_entropy(populations: &[f64]) -> f64 {
    populations
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `Σ P_n E_n`.
pub fn mean_energy(populations: &[f64], energies: &[f64]) -> f64 {
    populations.iter().zip(energies).map(|(p, e)| p * e).sum()
}

impl GibbsEnsemble {
    pub fn from_levels(levels: LevelSet, beta: f64) -> Result<Self> {
        let (populations, log_z_shifted, e_min) = boltzmann_populations(levels.energies(), beta)?;
        let internal_energy = mean_energy(&populations, levels.energies());
        let entropy = shannon_entropy(&populations);
        Ok(Self {
            log_z: log_z_shifted - beta * e_min,
            levels,
            beta,
            populations,
            internal_energy,
            entropy,
        })
    }

    pub fn levels(&self) -> &LevelSet {
        &self.levels
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    /// Log of the truncated partition function for the unshifted energies.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn internal_energy(&self) -> f64 {
        self.internal_energy
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }
}

/// Gibbs state of `spectrum` at `beta`, enumerated to `tail_tol`.
pub fn gibbs<S: Spectrum + ?Sized>(
    spectrum: &S,
    beta: f64,
    tail_tol: f64,
) -> Result<GibbsEnsemble> {
    let levels = spectrum.enumerate_levels(beta, tail_tol)?;
    GibbsEnsemble::from_levels(levels, beta)
}

/// Truncated partition function `Σ e^{-βE}` by direct summation.
pub fn partition_function<S: Spectrum + ?Sized>(
    spectrum: &S,
    beta: f64,
    tail_tol: f64,
) -> Result<f64> {
    let levels = spectrum.enumerate_levels(beta, tail_tol)?;
    // Sum smallest terms first.
    Ok(levels
        .energies()
        .iter()
        .rev()
        .map(|e| (-beta * e).exp())
        .sum())
}

pub fn entropy(ensemble: &GibbsEnsemble) -> f64 {
    shannon_entropy(ensemble.populations())
}

/// One segment of a discretised path: level energies and populations at
/// both ends, all four lists in the same label order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub energies_before: Vec<f64>,
    pub energies_after: Vec<f64>,
    pub populations_before: Vec<f64>,
    pub populations_after: Vec<f64>,
}

impl PathStep {
    pub fn new(
        energies_before: Vec<f64>,
        energies_after: Vec<f64>,
        populations_before: Vec<f64>,
        populations_after: Vec<f64>,
    ) -> Result<Self> {
        let step = Self {
            energies_before,
            energies_after,
            populations_before,
            populations_after,
        };
        step.check()?;
        Ok(step)
    }

    fn len(&self) -> usize {
        self.energies_before.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.len();
        if self.energies_after.len() != n
            || self.populations_before.len() != n
            || self.populations_after.len() != n
        {
            return Err(Error::Shape(format!(
                "path step lists differ in length: {} / {} / {} / {}",
                n,
                self.energies_after.len(),
                self.populations_before.len(),
                self.populations_after.len()
            )));
        }
        Ok(())
    }

    pub fn energy_before(&self) -> f64 {
        mean_energy(&self.populations_before, &self.energies_before)
    }

    pub fn energy_after(&self) -> f64 {
        mean_energy(&self.populations_after, &self.energies_after)
    }
}

/// Heat and work accumulated along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatWork {
    pub heat: f64,
    pub work: f64,
}

/// Splits the energy change along `path` into heat `Σ ΔP·Ē` and work
/// `Σ P̄·ΔE` with midpoint values, so `heat + work` telescopes to the total
/// energy change at any resolution.
pub fn heat_work_split(path: &[PathStep]) -> Result<HeatWork> {
    let mut heat = 0.0;
    let mut work = 0.0;
    for (i, step) in path.iter().enumerate() {
        step.check()?;
        if i > 0 && path[i - 1].len() != step.len() {
            return Err(Error::Shape(format!(
                "path step {i} has {} levels, previous step has {}",
                step.len(),
                path[i - 1].len()
            )));
        }
        for n in 0..step.len() {
            let (e0, e1) = (step.energies_before[n], step.energies_after[n]);
            let (p0, p1) = (step.populations_before[n], step.populations_after[n]);
            heat += (p1 - p0) * 0.5 * (e0 + e1);
            work += 0.5 * (p0 + p1) * (e1 - e0);
        }
    }
    Ok(HeatWork { heat, work })
}

/// Chains consecutive states `(energies, populations)` into path steps.
pub fn path_through(states: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<PathStep>> {
    states
        .windows(2)
        .map(|w| {
            PathStep::new(
                w[0].0.clone(),
                w[1].0.clone(),
                w[0].1.clone(),
                w[1].1.clone(),
            )
        })
        .collect()
}

/// Quasi-static isochore on fixed `energies`: starts from `initial`
/// populations and passes through Gibbs states at temperatures stepped
/// linearly from `1/beta_from` to `1/beta_to` in `steps` increments.
pub fn isochore_path(
    energies: &[f64],
    initial: &[f64],
    beta_from: f64,
    beta_to: f64,
    steps: usize,
) -> Result<Vec<PathStep>> {
    if steps == 0 {
        return domain("an isochore needs at least one step");
    }
    if initial.len() != energies.len() {
        return Err(Error::Shape(
            "initial populations do not match the level list".into(),
        ));
    }
    let (t0, t1) = (1.0 / beta_from, 1.0 / beta_to);
    let mut states = vec![(energies.to_vec(), initial.to_vec())];
    for k in 1..=steps {
        // The last state is the exact Gibbs state at `beta_to`.
        let beta = if k == steps {
            beta_to
        } else {
            1.0 / (t0 + (t1 - t0) * (k as f64) / (steps as f64))
        };
        let (pops, _, _) = boltzmann_populations(energies, beta)?;
        states.push((energies.to_vec(), pops));
    }
    path_through(&states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{CsPairSpectrum, RingAnyonSpectrum};
    use approx::assert_relative_eq;

    const TAIL: f64 = 1e-18;

    fn ring(eps0: f64, alpha: f64) -> RingAnyonSpectrum {
        RingAnyonSpectrum::new(eps0, alpha).unwrap()
    }

    #[test]
    fn cold_ring_is_pure() {
        let g = gibbs(&ring(1.0, 0.0), 1e3, TAIL).unwrap();
        assert_relative_eq!(g.populations()[0], 1.0, max_relative = 1e-15);
        assert!(g.entropy() < 1e-12);
    }

    #[test]
    fn half_flux_ring_is_two_fold_degenerate() {
        let g = gibbs(&ring(1.0, 0.5), 1e3, TAIL).unwrap();
        assert_relative_eq!(g.populations()[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(g.populations()[1], 0.5, max_relative = 1e-12);
        assert_relative_eq!(g.entropy(), 2f64.ln(), max_relative = 1e-9);
    }

    #[test]
    fn unit_ring_at_unit_beta() {
        // Frozen from the direct sum Σ e^{-n²} = 1.7726372048266525...
        let z = 1.772637204826652;
        let g = gibbs(&ring(1.0, 0.0), 1.0, TAIL).unwrap();
        assert_relative_eq!(g.log_z().exp(), z, max_relative = 1e-14);
        assert_relative_eq!(g.populations()[0], 0.564131226218842, max_relative = 1e-14);
        assert_relative_eq!(
            partition_function(&ring(1.0, 0.0), 1.0, TAIL).unwrap(),
            z,
            max_relative = 1e-14
        );
        assert_relative_eq!(entropy(&g), 1.071447514779721, max_relative = 1e-13);
    }

    #[test]
    fn cs_boson_partition_function() {
        // 1 + 2e^{-2π²} + ... = 1.000000005350576...
        let spec = CsPairSpectrum::new(1.0, 0.0).unwrap();
        let z = partition_function(&spec, 1.0, TAIL).unwrap();
        assert_relative_eq!(z, 1.000000005350576, max_relative = 1e-15);
    }

    #[test]
    fn partition_function_decreases_with_beta() {
        let spec = ring(0.8, 0.3);
        let z1 = partition_function(&spec, 0.5, TAIL).unwrap();
        let z2 = partition_function(&spec, 1.0, TAIL).unwrap();
        assert!(z2 < z1);
    }

    #[test]
    fn entropy_of_simple_distributions() {
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0]), 0.0);
        let d = 7;
        let uniform = vec![1.0 / d as f64; d];
        assert_relative_eq!(
            shannon_entropy(&uniform),
            (d as f64).ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn isochore_has_no_work() {
        let energies = vec![0.0, 1.0, 4.0];
        let (p0, _, _) = boltzmann_populations(&energies, 2.0).unwrap();
        let path = isochore_path(&energies, &p0, 2.0, 1.0, 50).unwrap();
        let hw = heat_work_split(&path).unwrap();
        assert_eq!(hw.work, 0.0);
        let de = path.last().unwrap().energy_after() - path[0].energy_before();
        assert_relative_eq!(hw.heat, de, max_relative = 1e-14);
    }

    #[test]
    fn adiabat_has_no_heat() {
        let pops = vec![0.6, 0.3, 0.1];
        let states: Vec<_> = (0..=20)
            .map(|k| {
                let s = 1.0 + k as f64 / 20.0;
                (vec![0.0, s, 4.0 * s], pops.clone())
            })
            .collect();
        let hw = heat_work_split(&path_through(&states).unwrap()).unwrap();
        assert_eq!(hw.heat, 0.0);
        assert_relative_eq!(hw.work, 0.3 * 1.0 + 0.1 * 4.0, max_relative = 1e-14);
    }

    #[test]
    fn ring_isochore_heat_matches_internal_energy_change() {
        let spec = ring(1.0, 0.0);
        let hot = gibbs(&spec, 1.0, TAIL).unwrap();
        let cold = gibbs(&spec, 2.0, TAIL).unwrap();
        // Common label set: the hot enumeration contains the cold one.
        let levels = hot.levels();
        let (p_cold, _, _) = boltzmann_populations(levels.energies(), 2.0).unwrap();
        let path = isochore_path(levels.energies(), &p_cold, 2.0, 1.0, 1000).unwrap();
        let hw = heat_work_split(&path).unwrap();
        let de = hot.internal_energy() - cold.internal_energy();
        assert!((hw.heat - de).abs() < 1e-8, "{} vs {}", hw.heat, de);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            PathStep::new(vec![0.0], vec![0.0, 1.0], vec![1.0], vec![1.0]),
            Err(Error::Shape(_))
        ));
        let a = PathStep::new(vec![0.0], vec![0.0], vec![1.0], vec![1.0]).unwrap();
        let b = PathStep::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
        )
        .unwrap();
        assert!(matches!(heat_work_split(&[a, b]), Err(Error::Shape(_))));
        assert!(boltzmann_populations(&[], 1.0).is_err());
    }
}
