//! Four-stroke quantum Otto cycle.
//!
//! States: A →(hot isochore)→ B →(adiabat)→ C →(cold isochore)→ D →(adiabat)→ A.
//! B is the Gibbs state of the hot-control spectrum at `beta_h`; D is the
//! Gibbs state of the cold-control spectrum at `beta_l`. Adiabats carry
//! populations label by label, so `P(C) = P(B)` and `P(A) = P(D)`.
//!
//! Sign convention: `Q_in = Σ E^h (P(B) - P(A))` is absorbed on A→B with
//! the hot-control energies, `Q_out = Σ E^l (P(B) - P(A))` is released on
//! C→D with the cold-control energies, and `W_out = Q_in - Q_out`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::spectra::{CsPairSpectrum, Label, RingAnyonSpectrum, Spectrum, WorkingMedium};
use crate::thermo::{
    boltzmann_populations, heat_work_split, isochore_path, path_through, shannon_entropy, PathStep,
};

/// Default certified bound on the omitted Boltzmann weight per enumeration.
pub const DEFAULT_TAIL_TOL: f64 = 1e-18;

/// `|Q_in|` below this multiple of the cycle's energy scale is treated as a
/// vanishing denominator.
pub const DEGENERATE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Engine,
    Refrigerator,
    Degenerate,
}

impl Regime {
    /// Engine iff heat is absorbed and net work is delivered; degenerate when
    /// the net work vanishes to rounding.
    pub fn classify(q_in: f64, q_out: f64) -> Regime {
        let w_out = q_in - q_out;
        if w_out.abs() <= 4.0 * f64::EPSILON * (q_in.abs() + q_out.abs()) {
            Regime::Degenerate
        } else if q_in > 0.0 && w_out > 0.0 {
            Regime::Engine
        } else {
            Regime::Refrigerator
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Engine => "engine",
            Regime::Refrigerator => "refrigerator",
            Regime::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "engine" => Ok(Regime::Engine),
            "refrigerator" => Ok(Regime::Refrigerator),
            "degenerate" => Ok(Regime::Degenerate),
            _ => domain(format!("unknown regime `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MediumKind {
    Ring,
    CsVolume,
    CsCoupling,
}

impl MediumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MediumKind::Ring => "ring",
            MediumKind::CsVolume => "cs-volume",
            MediumKind::CsCoupling => "cs-coupling",
        }
    }
}

impl fmt::Display for MediumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MediumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(MediumKind::Ring),
            "cs-volume" => Ok(MediumKind::CsVolume),
            "cs-coupling" => Ok(MediumKind::CsCoupling),
            _ => domain(format!(
                "unknown medium `{s}` (expected ring, cs-volume or cs-coupling)"
            )),
        }
    }
}

/// Working medium together with its hot and cold control settings.
///
/// * `Ring`: flux parameter `alpha_h` on the hot isochore, `alpha_l` on the
///   cold one, at fixed `eps0`.
/// * `CsVolume`: fixed coupling `alpha`; the hot isochore runs at the
///   compressed size `l2`, the cold one at the expanded size `l1`.
/// * `CsCoupling`: fixed size `length`; the hot isochore runs at coupling
///   `alpha2`, the cold one at `alpha1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CycleMedium {
    Ring {
        eps0: f64,
        alpha_h: f64,
        alpha_l: f64,
    },
    CsVolume {
        alpha: f64,
        l1: f64,
        l2: f64,
    },
    CsCoupling {
        length: f64,
        alpha1: f64,
        alpha2: f64,
    },
}

impl CycleMedium {
    pub fn kind(&self) -> MediumKind {
        match self {
            CycleMedium::Ring { .. } => MediumKind::Ring,
            CycleMedium::CsVolume { .. } => MediumKind::CsVolume,
            CycleMedium::CsCoupling { .. } => MediumKind::CsCoupling,
        }
    }

    pub fn hot_control(&self) -> f64 {
        match *self {
            CycleMedium::Ring { alpha_h, .. } => alpha_h,
            CycleMedium::CsVolume { l2, .. } => l2,
            CycleMedium::CsCoupling { alpha2, .. } => alpha2,
        }
    }

    pub fn cold_control(&self) -> f64 {
        match *self {
            CycleMedium::Ring { alpha_l, .. } => alpha_l,
            CycleMedium::CsVolume { l1, .. } => l1,
            CycleMedium::CsCoupling { alpha1, .. } => alpha1,
        }
    }

    /// Spectrum at an arbitrary value of the control parameter.
    pub fn spectrum_at(&self, control: f64) -> Result<WorkingMedium> {
        Ok(match *self {
            CycleMedium::Ring { eps0, .. } => RingAnyonSpectrum::new(eps0, control)?.into(),
            CycleMedium::CsVolume { alpha, .. } => CsPairSpectrum::new(control, alpha)?.into(),
            CycleMedium::CsCoupling { length, .. } => CsPairSpectrum::new(length, control)?.into(),
        })
    }

    pub fn hot_spectrum(&self) -> Result<WorkingMedium> {
        self.spectrum_at(self.hot_control())
    }

    pub fn cold_spectrum(&self) -> Result<WorkingMedium> {
        self.spectrum_at(self.cold_control())
    }
}

/// Reservoirs, controls and enumeration tolerance of one Otto cycle.
///
/// `beta_h < beta_l` is the physical engine setting, but it is not enforced:
/// other orderings are evaluated and flagged through [`Regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttoCycleSpec {
    pub medium: CycleMedium,
    pub beta_h: f64,
    pub beta_l: f64,
    pub tail_tol: f64,
}

impl OttoCycleSpec {
    pub fn new(medium: CycleMedium, beta_h: f64, beta_l: f64) -> Result<Self> {
        let spec = Self {
            medium,
            beta_h,
            beta_l,
            tail_tol: DEFAULT_TAIL_TOL,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Result<Self> {
        self.tail_tol = tail_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, beta) in [("beta_h", self.beta_h), ("beta_l", self.beta_l)] {
            if !(beta > 0.0 && beta.is_finite()) {
                return domain(format!("{name} must be positive and finite, got {beta}"));
            }
        }
        if !(self.tail_tol > 0.0) {
            return domain(format!("tail_tol must be positive, got {}", self.tail_tol));
        }
        self.medium.hot_spectrum()?;
        self.medium.cold_spectrum()?;
        Ok(())
    }
}

/// Hot- and cold-control energies on one shared, label-ordered level list.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonLevels {
    pub labels: Vec<Label>,
    pub hot: Vec<f64>,
    pub cold: Vec<f64>,
}

impl CommonLevels {
    /// Union of the levels needed by the hot Gibbs state at `beta_h` and the
    /// cold Gibbs state at `beta_l`.
    pub fn for_spec(spec: &OttoCycleSpec) -> Result<Self> {
        let hot = spec.medium.hot_spectrum()?;
        let cold = spec.medium.cold_spectrum()?;
        let hot_set = hot.enumerate_levels(spec.beta_h, spec.tail_tol)?;
        let cold_set = cold.enumerate_levels(spec.beta_l, spec.tail_tol)?;
        let labels: BTreeSet<Label> = hot_set
            .labels()
            .iter()
            .chain(cold_set.labels())
            .copied()
            .collect();
        Self::on_labels(&hot, &cold, labels)
    }

    pub fn on_labels<S: Spectrum + ?Sized>(
        hot: &S,
        cold: &S,
        labels: impl IntoIterator<Item = Label>,
    ) -> Result<Self> {
        let labels: Vec<Label> = labels.into_iter().collect();
        let hot = labels
            .iter()
            .map(|&l| hot.energy(l))
            .collect::<Result<_>>()?;
        let cold = labels
            .iter()
            .map(|&l| cold.energy(l))
            .collect::<Result<_>>()?;
        Ok(Self { labels, hot, cold })
    }

    /// Adds `offset` to every hot and every cold energy.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            hot: self.hot.iter().map(|e| e + offset).collect(),
            cold: self.cold.iter().map(|e| e + offset).collect(),
        }
    }
}

/// Outcome of one Otto cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub q_in: f64,
    pub q_out: f64,
    pub w_out: f64,
    /// `1 - Q_out/Q_in`; exactly 0 in the degenerate regime. Outside the
    /// engine regime this is the raw ratio, not a physical efficiency.
    pub efficiency: f64,
    pub regime: Regime,
    pub labels: Vec<Label>,
    pub populations_a: Vec<f64>,
    pub populations_b: Vec<f64>,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub entropy_c: f64,
    pub entropy_d: f64,
    /// Relative difference to an independently computed closed form, when
    /// one was evaluated.
    pub oracle_residual: Option<f64>,
}

/// Evaluates the cycle on precomputed levels.
pub fn evaluate_cycle(levels: &CommonLevels, beta_h: f64, beta_l: f64) -> Result<CycleReport> {
    let (p_b, _, _) = boltzmann_populations(&levels.hot, beta_h)?;
    let (p_a, _, _) = boltzmann_populations(&levels.cold, beta_l)?;

    // Energies are measured from the most populated level, whose population
    // change carries the largest absolute rounding error.
    let reference = (0..levels.labels.len())
        .max_by(|&i, &j| (p_a[i] + p_b[i]).total_cmp(&(p_a[j] + p_b[j])))
        .unwrap_or(0);
    let (hot_ref, cold_ref) = (levels.hot[reference], levels.cold[reference]);
    let mut q_in = 0.0;
    let mut q_out = 0.0;
    let mut scale = 0.0;
    for i in 0..levels.labels.len() {
        let dp = p_b[i] - p_a[i];
        let (hot, cold) = (levels.hot[i] - hot_ref, levels.cold[i] - cold_ref);
        q_in += hot * dp;
        q_out += cold * dp;
        scale += (hot.abs() + cold.abs()) * (p_a[i] + p_b[i]);
    }
    let negligible = |q: f64| q == 0.0 || q.abs() < DEGENERATE_THRESHOLD * scale;
    let regime = match (negligible(q_in), negligible(q_out)) {
        (true, true) => Regime::Degenerate,
        (true, false) => {
            return Err(Error::DegenerateCycle(format!(
                "heat absorbed on the hot isochore vanishes (Q_in = {q_in:e}, Q_out = {q_out:e})"
            )))
        }
        _ => Regime::classify(q_in, q_out),
    };
    let efficiency = match regime {
        Regime::Degenerate => 0.0,
        _ => 1.0 - q_out / q_in,
    };
    let entropy_b = shannon_entropy(&p_b);
    let entropy_a = shannon_entropy(&p_a);
    Ok(CycleReport {
        q_in,
        q_out,
        w_out: q_in - q_out,
        efficiency,
        regime,
        labels: levels.labels.clone(),
        entropy_a,
        entropy_b,
        entropy_c: shannon_entropy(&p_b),
        entropy_d: shannon_entropy(&p_a),
        populations_a: p_a,
        populations_b: p_b,
        oracle_residual: None,
    })
}

/// Runs the cycle by direct summation over a common label set.
pub fn run_cycle(spec: &OttoCycleSpec) -> Result<CycleReport> {
    spec.validate()?;
    let levels = CommonLevels::for_spec(spec)?;
    evaluate_cycle(&levels, spec.beta_h, spec.beta_l)
}

/// `1 - L2²/L1²` for the variable-volume CS engine (expanded size `l1`,
/// compressed size `l2`). Both lengths must be positive.
pub fn efficiency_cs_volume(l1: f64, l2: f64) -> f64 {
    1.0 - (l2 * l2) / (l1 * l1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrokeKind {
    Isochore,
    Adiabat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub name: &'static str,
    pub kind: StrokeKind,
    pub path: Vec<PathStep>,
    pub heat: f64,
    pub work: f64,
    /// Mean energy at the end of the stroke minus at its start.
    pub energy_change: f64,
}

impl Stroke {
    fn new(name: &'static str, kind: StrokeKind, path: Vec<PathStep>) -> Result<Self> {
        let split = heat_work_split(&path)?;
        let energy_change = match (path.first(), path.last()) {
            (Some(first), Some(last)) => last.energy_after() - first.energy_before(),
            _ => 0.0,
        };
        Ok(Self {
            name,
            kind,
            path,
            heat: split.heat,
            work: split.work,
            energy_change,
        })
    }

    pub fn final_populations(&self) -> &[f64] {
        &self
            .path
            .last()
            .expect("strokes have at least one step")
            .populations_after
    }

    pub fn initial_populations(&self) -> &[f64] {
        &self
            .path
            .first()
            .expect("strokes have at least one step")
            .populations_before
    }
}

/// The four strokes A→B, B→C, C→D, D→A, each resolved into `steps` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedCycle {
    pub labels: Vec<Label>,
    pub strokes: [Stroke; 4],
}

impl DiscretizedCycle {
    /// Work delivered over the two adiabats.
    pub fn adiabatic_work_out(&self) -> f64 {
        -(self.strokes[1].work + self.strokes[3].work)
    }
}

fn adiabat_path(
    medium: &CycleMedium,
    labels: &[Label],
    from: f64,
    to: f64,
    populations: &[f64],
    steps: usize,
) -> Result<Vec<PathStep>> {
    let mut states = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let control = match k {
            0 => from,
            k if k == steps => to,
            k => from + (to - from) * (k as f64) / (steps as f64),
        };
        let spectrum = medium.spectrum_at(control)?;
        let energies = labels
            .iter()
            .map(|&l| spectrum.energy(l))
            .collect::<Result<Vec<_>>>()?;
        states.push((energies, populations.to_vec()));
    }
    path_through(&states)
}

/// Resolves every stroke of the cycle into `steps` segments: isochores pass
/// through Gibbs states at linearly stepped temperatures, adiabats through
/// linearly stepped control values at frozen populations.
pub fn discretize_cycle(spec: &OttoCycleSpec, steps: usize) -> Result<DiscretizedCycle> {
    if steps == 0 {
        return domain("a discretised cycle needs at least one step per stroke");
    }
    spec.validate()?;
    let levels = CommonLevels::for_spec(spec)?;
    let (p_b, _, _) = boltzmann_populations(&levels.hot, spec.beta_h)?;
    let (p_a, _, _) = boltzmann_populations(&levels.cold, spec.beta_l)?;
    let medium = &spec.medium;
    let (hot, cold) = (medium.hot_control(), medium.cold_control());

    let a_to_b = isochore_path(&levels.hot, &p_a, spec.beta_l, spec.beta_h, steps)?;
    let b_to_c = adiabat_path(medium, &levels.labels, hot, cold, &p_b, steps)?;
    let c_to_d = isochore_path(&levels.cold, &p_b, spec.beta_h, spec.beta_l, steps)?;
    let d_to_a = adiabat_path(medium, &levels.labels, cold, hot, &p_a, steps)?;

    Ok(DiscretizedCycle {
        labels: levels.labels,
        strokes: [
            Stroke::new("A->B", StrokeKind::Isochore, a_to_b)?,
            Stroke::new("B->C", StrokeKind::Adiabat, b_to_c)?,
            Stroke::new("C->D", StrokeKind::Isochore, c_to_d)?,
            Stroke::new("D->A", StrokeKind::Adiabat, d_to_a)?,
        ],
    })
}

/// Parameter that a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    BetaH,
    BetaL,
    Eps0,
    AlphaH,
    AlphaL,
    Alpha,
    L1,
    L2,
    Alpha1,
    Alpha2,
    Length,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::BetaH => "beta_h",
            SweepAxis::BetaL => "beta_l",
            SweepAxis::Eps0 => "eps0",
            SweepAxis::AlphaH => "alpha_h",
            SweepAxis::AlphaL => "alpha_l",
            SweepAxis::Alpha => "alpha",
            SweepAxis::L1 => "l1",
            SweepAxis::L2 => "l2",
            SweepAxis::Alpha1 => "alpha1",
            SweepAxis::Alpha2 => "alpha2",
            SweepAxis::Length => "length",
        }
    }

    /// Copy of `spec` with this parameter set to `value`.
    pub fn apply(&self, spec: &OttoCycleSpec, value: f64) -> Result<OttoCycleSpec> {
        let mut out = *spec;
        match (self, &mut out.medium) {
            (SweepAxis::BetaH, _) => out.beta_h = value,
            (SweepAxis::BetaL, _) => out.beta_l = value,
            (SweepAxis::Eps0, CycleMedium::Ring { eps0, .. }) => *eps0 = value,
            (SweepAxis::AlphaH, CycleMedium::Ring { alpha_h, .. }) => *alpha_h = value,
            (SweepAxis::AlphaL, CycleMedium::Ring { alpha_l, .. }) => *alpha_l = value,
            (SweepAxis::Alpha, CycleMedium::CsVolume { alpha, .. }) => *alpha = value,
            (SweepAxis::L1, CycleMedium::CsVolume { l1, .. }) => *l1 = value,
            (SweepAxis::L2, CycleMedium::CsVolume { l2, .. }) => *l2 = value,
            (SweepAxis::Alpha1, CycleMedium::CsCoupling { alpha1, .. }) => *alpha1 = value,
            (SweepAxis::Alpha2, CycleMedium::CsCoupling { alpha2, .. }) => *alpha2 = value,
            (SweepAxis::Length, CycleMedium::CsCoupling { length, .. }) => *length = value,
            (axis, medium) => {
                return domain(format!(
                    "parameter `{}` does not apply to the {} medium",
                    axis.as_str(),
                    medium.kind()
                ))
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Whether this axis is a parameter of `medium`.
    pub fn applies_to(&self, medium: MediumKind) -> bool {
        matches!(
            (self, medium),
            (SweepAxis::BetaH | SweepAxis::BetaL, _)
                | (
                    SweepAxis::Eps0 | SweepAxis::AlphaH | SweepAxis::AlphaL,
                    MediumKind::Ring
                )
                | (
                    SweepAxis::Alpha | SweepAxis::L1 | SweepAxis::L2,
                    MediumKind::CsVolume
                )
                | (
                    SweepAxis::Alpha1 | SweepAxis::Alpha2 | SweepAxis::Length,
                    MediumKind::CsCoupling
                )
        )
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "beta_h" => SweepAxis::BetaH,
            "beta_l" => SweepAxis::BetaL,
            "eps0" => SweepAxis::Eps0,
            "alpha_h" => SweepAxis::AlphaH,
            "alpha_l" => SweepAxis::AlphaL,
            "alpha" => SweepAxis::Alpha,
            "l1" => SweepAxis::L1,
            "l2" => SweepAxis::L2,
            "alpha1" => SweepAxis::Alpha1,
            "alpha2" => SweepAxis::Alpha2,
            "length" => SweepAxis::Length,
            _ => return domain(format!("unknown sweep parameter `{s}`")),
        })
    }
}

/// One sweep row; failures are kept in the row rather than aborting.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub value: f64,
    pub outcome: Result<T>,
}

/// Evaluates `eval` at every grid value in parallel; rows come back in
/// input order.
pub fn sweep_with<T, F>(
    template: &OttoCycleSpec,
    axis: SweepAxis,
    values: &[f64],
    eval: F,
) -> Vec<SweepRow<T>>
where
    T: Send,
    F: Fn(&OttoCycleSpec) -> Result<T> + Sync,
{
    values
        .par_iter()
        .map(|&value| SweepRow {
            value,
            outcome: axis.apply(template, value).and_then(|spec| eval(&spec)),
        })
        .collect()
}

pub fn sweep_efficiency(
    template: &OttoCycleSpec,
    axis: SweepAxis,
    values: &[f64],
) -> Vec<SweepRow<CycleReport>> {
    sweep_with(template, axis, values, run_cycle)
}
