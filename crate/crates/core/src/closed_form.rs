//! Theta-function closed forms for both engines, each evaluated next to an
//! independent direct-summation oracle.
//!
//! All weighted sums reduce to the kernel
//! `G(λ, γ) = Σ e^{-λ(n-γ)²} = e^{-λγ²} ϑ(e^{2λγ}, e^{-λ})` with ϑ either θ₃
//! (sum over ℤ) or Θp (sum over n ≥ 0). Expanding
//! `(n - c)² = (n - γ)² + 2(γ - c)(n - γ) + (γ - c)²` gives
//!
//! ```text
//! Σ (n - c)² e^{-λ(n-γ)²} = -∂G/∂λ + ((γ - c)/λ) ∂G/∂γ + (γ - c)² G
//! ```
//!
//! and the derivatives of G are assembled from `x ∂ϑ/∂x` and `q ∂ϑ/∂q`,
//! which are summed termwise. The coefficient sets printed in the published
//! derivation are kept as [`FormulaVariant::PaperMainText`] and
//! [`FormulaVariant::PaperAppendix`]; the oracle decides which one holds.
//!
//! For the CS pair, `m = n1 + n2` and `n = n2 - n1 ≥ 0` share parity and
//! `E = (π²/L²)(m² + (n - α)²)`. Splitting into even and odd `(m, n)`:
//!
//! ```text
//! Z = G₃(Λ, 0) Gp(Λ, α/2) + G₃(Λ, -1/2) Gp(Λ, (α-1)/2),   Λ = 4βπ²/L²
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::otto::{run_cycle, CycleMedium, CycleReport, OttoCycleSpec, Regime, DEFAULT_TAIL_TOL};
use crate::special_functions::{
    gauss_sum_full, partial_theta, partial_theta_ln, partial_theta_parts_ln, theta3, theta3_ln,
    theta3_parts_ln, SumAccuracy, ThetaParts,
};
use crate::spectra::{cs_energy, CsPairSpectrum, Label, RingAnyonSpectrum, Spectrum};
use crate::thermo::partition_function;

/// Denominator floor for relative residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// Which coefficient set a closed form was evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaVariant {
    /// Coefficients as printed next to the efficiency formulas.
    PaperMainText,
    /// Coefficients as printed in the derivation appendices.
    PaperAppendix,
    /// Coefficients from the full square expansion.
    Rederived,
}

impl FormulaVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaVariant::PaperMainText => "paper-main-text",
            FormulaVariant::PaperAppendix => "paper-appendix",
            FormulaVariant::Rederived => "rederived",
        }
    }
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-main-text" => Ok(FormulaVariant::PaperMainText),
            "paper-appendix" => Ok(FormulaVariant::PaperAppendix),
            "rederived" => Ok(FormulaVariant::Rederived),
            _ => domain(format!(
                "unknown formula variant `{s}` (expected paper-main-text, paper-appendix or rederived)"
            )),
        }
    }
}

/// A closed-form value next to its oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormReport {
    pub value: f64,
    pub oracle_value: f64,
    pub rel_residual: f64,
    pub formula_variant: FormulaVariant,
}

impl ClosedFormReport {
    pub fn new(value: f64, oracle_value: f64, formula_variant: FormulaVariant) -> Self {
        Self {
            value,
            oracle_value,
            rel_residual: relative_residual(value, oracle_value),
            formula_variant,
        }
    }
}

/// `|value - oracle| / max(|oracle|, RESIDUAL_FLOOR)`; non-finite values give
/// an infinite residual.
pub fn relative_residual(value: f64, oracle: f64) -> f64 {
    let r = (value - oracle).abs() / oracle.abs().max(RESIDUAL_FLOOR);
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Series accuracy for the closed forms and tail tolerance for the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    pub accuracy: SumAccuracy,
    pub tail_tol: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            accuracy: SumAccuracy::default(),
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    /// n ∈ ℤ, through θ₃.
    Full,
    /// n ≥ 0, through Θp.
    Half,
}

/// `G(λ, γ)` and its partial derivatives, plus the derivatives of the bare
/// theta factor `ϑ(e^{2λγ}, e^{-λ})`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    prefactor: f64,
    parts: ThetaParts,
    g: f64,
    dg_dgamma: f64,
    dg_dlambda: f64,
    dtheta_dgamma: f64,
    dtheta_dlambda: f64,
}

fn kernel(lattice: Lattice, lambda: f64, gamma: f64, acc: &SumAccuracy) -> Result<Kernel> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("Gaussian width must be positive, got {lambda}"));
    }
    let (ln_x, ln_q) = (2.0 * lambda * gamma, -lambda);
    let parts = match lattice {
        Lattice::Full => theta3_parts_ln(ln_x, ln_q, acc)?,
        Lattice::Half => partial_theta_parts_ln(ln_x, ln_q, acc)?,
    };
    let ThetaParts {
        value,
        x_deriv,
        q_deriv,
    } = parts;
    let prefactor = (-lambda * gamma * gamma).exp();
    // ∂/∂γ x = 2λx,  ∂/∂λ x = 2γx,  ∂/∂λ q = -q.
    let dtheta_dgamma = 2.0 * lambda * x_deriv;
    let dtheta_dlambda = 2.0 * gamma * x_deriv - q_deriv;
    Ok(Kernel {
        prefactor,
        parts,
        g: prefactor * value,
        dg_dgamma: prefactor * (dtheta_dgamma - 2.0 * lambda * gamma * value),
        dg_dlambda: prefactor * (dtheta_dlambda - gamma * gamma * value),
        dtheta_dgamma,
        dtheta_dlambda,
    })
}

/// `Σ e^{-λ(n-γ)²}` over the lattice, as `e^{-λγ²} ϑ(e^{2λγ}, e^{-λ})`.
pub fn plain_lattice_closed(
    lattice: Lattice,
    lambda: f64,
    gamma: f64,
    acc: &SumAccuracy,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("Gaussian width must be positive, got {lambda}"));
    }
    // Shifting the lattice by round(γ) keeps the theta factor finite.
    let k = lattice_shift(lattice, lambda, gamma, gamma);
    let g = gamma - k;
    let (ln_x, ln_q) = (2.0 * lambda * g, -lambda);
    let theta = match lattice {
        Lattice::Full => theta3_ln(ln_x, ln_q, acc)?,
        Lattice::Half => partial_theta_ln(ln_x, ln_q, acc)?,
    };
    let mut sum = (-lambda * g * g).exp() * theta;
    if lattice == Lattice::Half {
        for m in (-(k as i64))..0 {
            let d = m as f64 - g;
            sum += (-lambda * d * d).exp();
        }
    }
    Ok(sum)
}

/// `Σ (n - c)² e^{-λ(n-γ)²}` over the lattice from theta derivatives.
pub fn weighted_lattice_closed(
    lattice: Lattice,
    lambda: f64,
    gamma: f64,
    c: f64,
    variant: FormulaVariant,
    acc: &SumAccuracy,
) -> Result<f64> {
    let value = match variant {
        FormulaVariant::Rederived => shifted_weighted_sum(lattice, lambda, gamma, c, acc)?,
        FormulaVariant::PaperMainText => {
            let k = kernel(lattice, lambda, gamma, acc)?;
            c * c * k.g + k.prefactor * (c * gamma / lambda) * k.dtheta_dgamma
                - k.prefactor * k.dtheta_dlambda
        }
        FormulaVariant::PaperAppendix => {
            let k = kernel(lattice, lambda, gamma, acc)?;
            c * c * k.g + k.prefactor * ((gamma - c) / lambda) * k.dg_dgamma
                - k.prefactor * k.dg_dlambda
        }
    };
    if !value.is_finite() {
        return Err(Error::Overflow("weighted lattice closed form"));
    }
    Ok(value)
}

/// Above this `λ(γ - k)²` the theta factor risks overflowing a double.
const MAX_THETA_EXPONENT: f64 = 600.0;

/// Integer lattice shift `k` for evaluating a sum weighted around `c`:
/// `round(c)` unless that leaves the Gaussian centre so far out that the bare
/// theta factor overflows, in which case `round(γ)`. The half lattice only
/// shifts forwards.
fn lattice_shift(lattice: Lattice, lambda: f64, gamma: f64, c: f64) -> f64 {
    let clamp = |k: f64| match lattice {
        Lattice::Full => k,
        Lattice::Half => k.max(0.0),
    };
    let k = clamp(c.round());
    let g = gamma - k;
    let overflows = match lattice {
        Lattice::Full => lambda * g * g > MAX_THETA_EXPONENT,
        Lattice::Half => g > 0.0 && lambda * g * g > MAX_THETA_EXPONENT,
    };
    if overflows {
        clamp(gamma.round())
    } else {
        k
    }
}

/// `-∂G/∂λ + ((γ - c)/λ) ∂G/∂γ + (γ - c)² G` collapses to
/// `e^{-λγ²} (q∂ϑ/∂q - 2c x∂ϑ/∂x + c² ϑ)`. Evaluated as written this cancels
/// badly when the weight nearly vanishes on the dominant terms, so the
/// lattice is first shifted by `k = round(c)` (kept `≥ 0` on the half
/// lattice, whose first `k` sites are then added explicitly). With
/// `|c - k| ≤ 1/2` the three pieces are bounded by a small multiple of the
/// result.
fn shifted_weighted_sum(
    lattice: Lattice,
    lambda: f64,
    gamma: f64,
    c: f64,
    acc: &SumAccuracy,
) -> Result<f64> {
    let k = lattice_shift(lattice, lambda, gamma, c);
    let (g, cs) = (gamma - k, c - k);
    let kern = kernel(lattice, lambda, g, acc)?;
    let ThetaParts {
        value,
        x_deriv,
        q_deriv,
    } = kern.parts;
    let mut sum = kern.prefactor * (q_deriv - 2.0 * cs * x_deriv + cs * cs * value);
    if lattice == Lattice::Half {
        for m in (-(k as i64))..0 {
            let (m, d) = (m as f64, m as f64 - g);
            sum += (m - cs) * (m - cs) * (-lambda * d * d).exp();
        }
    }
    Ok(sum)
}

/// `Υ(k, j) = Σ_n E^k_n e^{-β_j E^j_n}` for the flux ring, where level
/// family `k` has flux `alpha_k` and `j` has `alpha_j`.
pub fn upsilon(
    alpha_k: f64,
    alpha_j: f64,
    beta_j: f64,
    eps0: f64,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    upsilon_with(
        alpha_k,
        alpha_j,
        beta_j,
        eps0,
        FormulaVariant::Rederived,
        settings,
    )
}

pub fn upsilon_with(
    alpha_k: f64,
    alpha_j: f64,
    beta_j: f64,
    eps0: f64,
    variant: FormulaVariant,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    check_positive("beta_j", beta_j)?;
    check_positive("eps0", eps0)?;
    let lambda = beta_j * eps0;
    let acc = &settings.accuracy;
    let value =
        eps0 * weighted_lattice_closed(Lattice::Full, lambda, alpha_j, alpha_k, variant, acc)?;
    let oracle = eps0 * gauss_sum_full(lambda, alpha_j, alpha_k, 2, acc)?;
    Ok(ClosedFormReport::new(value, oracle, variant))
}

/// Ring partition function `Z_j = e^{-λα²} θ₃(e^{2λα}, e^{-λ})`, `λ = β eps0`.
pub fn ring_partition_closed(
    alpha: f64,
    beta: f64,
    eps0: f64,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    ring_partition_closed_with(alpha, beta, eps0, FormulaVariant::Rederived, settings)
}

/// The printed variants take `λα` itself as the first theta argument.
pub fn ring_partition_closed_with(
    alpha: f64,
    beta: f64,
    eps0: f64,
    variant: FormulaVariant,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    check_positive("beta", beta)?;
    check_positive("eps0", eps0)?;
    let lambda = beta * eps0;
    let acc = &settings.accuracy;
    let value = match variant {
        FormulaVariant::Rederived => plain_lattice_closed(Lattice::Full, lambda, alpha, acc)?,
        FormulaVariant::PaperMainText | FormulaVariant::PaperAppendix => {
            (-lambda * alpha * alpha).exp() * theta3(lambda * alpha, (-lambda).exp(), acc)?
        }
    };
    let spectrum = RingAnyonSpectrum::new(eps0, alpha)?;
    let oracle = partition_function(&spectrum, beta, settings.tail_tol)?;
    Ok(ClosedFormReport::new(value, oracle, variant))
}

/// A closed-form cycle efficiency next to the summation cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCheck {
    /// `value` is the closed-form efficiency, `oracle_value` the one from
    /// [`run_cycle`].
    pub report: ClosedFormReport,
    /// Regime implied by the closed-form heats.
    pub regime: Regime,
    pub q_in: f64,
    pub q_out: f64,
    /// Every partition function and weighted sum that went into the value.
    pub components: Vec<ClosedFormReport>,
    /// Bound on `|δη / η|` per unit relative error in the four ratios
    /// `Σ E e^{-βE} / Z` that make up the two heats.
    pub condition: f64,
    /// The oracle cycle, with `oracle_residual` filled in.
    pub cycle: CycleReport,
}

/// The two heats as differences of hot-state and cold-state ratios.
struct HeatRatios {
    in_hot: f64,
    in_cold: f64,
    out_hot: f64,
    out_cold: f64,
}

impl HeatRatios {
    fn q_in(&self) -> f64 {
        self.in_hot - self.in_cold
    }

    fn q_out(&self) -> f64 {
        self.out_hot - self.out_cold
    }

    /// First-order sensitivity of `η = 1 - Q_out/Q_in` relative to `η`.
    fn condition(&self) -> f64 {
        let (q_in, q_out) = (self.q_in(), self.q_out());
        let w = q_in - q_out;
        let spread_in = self.in_hot.abs() + self.in_cold.abs();
        let spread_out = self.out_hot.abs() + self.out_cold.abs();
        ((spread_out + (q_out / q_in).abs() * spread_in) / w.abs()).max(1.0)
    }
}

fn assemble_efficiency(
    ratios: HeatRatios,
    variant: FormulaVariant,
    components: Vec<ClosedFormReport>,
    spec: &OttoCycleSpec,
) -> Result<EfficiencyCheck> {
    let (q_in, q_out) = (ratios.q_in(), ratios.q_out());
    if !q_in.is_finite() || !q_out.is_finite() {
        return Err(Error::Overflow("closed-form cycle heats"));
    }
    let regime = match (q_in == 0.0, q_out == 0.0) {
        (true, true) => Regime::Degenerate,
        (true, false) => {
            return Err(Error::DegenerateCycle(
                "closed-form heat input vanishes".into(),
            ))
        }
        _ => Regime::classify(q_in, q_out),
    };
    let value = match regime {
        Regime::Degenerate => 0.0,
        _ => 1.0 - q_out / q_in,
    };
    let mut cycle = run_cycle(spec)?;
    let report = ClosedFormReport::new(value, cycle.efficiency, variant);
    cycle.oracle_residual = Some(report.rel_residual);
    Ok(EfficiencyCheck {
        report,
        regime,
        q_in,
        q_out,
        components,
        condition: ratios.condition(),
        cycle,
    })
}

/// Flux-ring engine efficiency
/// `η = 1 - (Υ(l,h)/Z_h - Υ(l,l)/Z_l) / (Υ(h,h)/Z_h - Υ(h,l)/Z_l)`.
pub fn ring_efficiency_closed(
    alpha_h: f64,
    alpha_l: f64,
    beta_h: f64,
    beta_l: f64,
    eps0: f64,
    settings: &CheckSettings,
) -> Result<EfficiencyCheck> {
    ring_efficiency_closed_with(
        alpha_h,
        alpha_l,
        beta_h,
        beta_l,
        eps0,
        FormulaVariant::Rederived,
        settings,
    )
}

pub fn ring_efficiency_closed_with(
    alpha_h: f64,
    alpha_l: f64,
    beta_h: f64,
    beta_l: f64,
    eps0: f64,
    variant: FormulaVariant,
    settings: &CheckSettings,
) -> Result<EfficiencyCheck> {
    let spec = OttoCycleSpec::new(
        CycleMedium::Ring {
            eps0,
            alpha_h,
            alpha_l,
        },
        beta_h,
        beta_l,
    )?
    .with_tail_tol(settings.tail_tol)?;
    let z_h = ring_partition_closed(alpha_h, beta_h, eps0, settings)?;
    let z_l = ring_partition_closed(alpha_l, beta_l, eps0, settings)?;
    let u_lh = upsilon_with(alpha_l, alpha_h, beta_h, eps0, variant, settings)?;
    let u_ll = upsilon_with(alpha_l, alpha_l, beta_l, eps0, variant, settings)?;
    let u_hh = upsilon_with(alpha_h, alpha_h, beta_h, eps0, variant, settings)?;
    let u_hl = upsilon_with(alpha_h, alpha_l, beta_l, eps0, variant, settings)?;

    let ratios = HeatRatios {
        in_hot: u_hh.value / z_h.value,
        in_cold: u_hl.value / z_l.value,
        out_hot: u_lh.value / z_h.value,
        out_cold: u_ll.value / z_l.value,
    };
    assemble_efficiency(
        ratios,
        variant,
        vec![z_h, z_l, u_lh, u_ll, u_hh, u_hl],
        &spec,
    )
}

/// Even and odd `(m, n)` sectors of the CS pair partition function.
pub fn cs_partition_sectors(
    alpha: f64,
    beta: f64,
    length: f64,
    acc: &SumAccuracy,
) -> Result<(f64, f64)> {
    check_cs_args(alpha, beta, length)?;
    let lam = 4.0 * beta * PI * PI / (length * length);
    let even = plain_lattice_closed(Lattice::Full, lam, 0.0, acc)?
        * plain_lattice_closed(Lattice::Half, lam, alpha / 2.0, acc)?;
    let odd = plain_lattice_closed(Lattice::Full, lam, -0.5, acc)?
        * plain_lattice_closed(Lattice::Half, lam, (alpha - 1.0) / 2.0, acc)?;
    Ok((even, odd))
}

/// `Z(α, β) = Σ_{n1≤n2} e^{-βE}` for the CS pair at size `length`.
pub fn cs_partition_closed(
    alpha: f64,
    beta: f64,
    length: f64,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    cs_partition_closed_with(alpha, beta, length, FormulaVariant::Rederived, settings)
}

/// The printed variants attach the coupling as `(2p + α)²` in the
/// half-lattice factor instead of `(2p - α)²`.
pub fn cs_partition_closed_with(
    alpha: f64,
    beta: f64,
    length: f64,
    variant: FormulaVariant,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    check_cs_args(alpha, beta, length)?;
    let acc = &settings.accuracy;
    let value = match variant {
        FormulaVariant::Rederived => {
            let (even, odd) = cs_partition_sectors(alpha, beta, length, acc)?;
            even + odd
        }
        FormulaVariant::PaperMainText | FormulaVariant::PaperAppendix => {
            let unit = beta * PI * PI / (length * length);
            let q = (-4.0 * unit).exp();
            let even = (-unit * alpha * alpha).exp()
                * theta3(1.0, q, acc)?
                * partial_theta((-4.0 * unit * alpha).exp(), q, acc)?;
            let a1 = alpha + 1.0;
            let odd = (-unit * (a1 * a1 + 1.0)).exp()
                * theta3(q, q, acc)?
                * partial_theta((-4.0 * unit * a1).exp(), q, acc)?;
            even + odd
        }
    };
    let spectrum = CsPairSpectrum::new(length, alpha)?;
    let oracle = partition_function(&spectrum, beta, settings.tail_tol)?;
    Ok(ClosedFormReport::new(value, oracle, variant))
}

/// `𝒳 = Σ_{n1≤n2} E(α_weight) e^{-β E(α_boltz)}` for the CS pair.
pub fn cs_x(
    alpha_weight: f64,
    alpha_boltz: f64,
    beta: f64,
    length: f64,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    cs_x_with(
        alpha_weight,
        alpha_boltz,
        beta,
        length,
        FormulaVariant::Rederived,
        settings,
    )
}

/// The printed variants use the product structure `χ₁ · χ₂` with both factors
/// weighted, evaluated with the printed χ coefficients; the printed negative
/// Gaussian widths are replaced by their magnitudes, since the sums diverge
/// otherwise.
pub fn cs_x_with(
    alpha_weight: f64,
    alpha_boltz: f64,
    beta: f64,
    length: f64,
    variant: FormulaVariant,
    settings: &CheckSettings,
) -> Result<ClosedFormReport> {
    check_cs_args(alpha_boltz, beta, length)?;
    if !(alpha_weight >= 0.0 && alpha_weight.is_finite()) {
        return domain(format!(
            "CS coupling must be finite and non-negative, got {alpha_weight}"
        ));
    }
    let acc = &settings.accuracy;
    let unit = PI * PI / (length * length);
    let lam = 4.0 * beta * unit;
    let value = match variant {
        FormulaVariant::Rederived => {
            let rd = FormulaVariant::Rederived;
            let even = weighted_lattice_closed(Lattice::Full, lam, 0.0, 0.0, rd, acc)?
                * plain_lattice_closed(Lattice::Half, lam, alpha_boltz / 2.0, acc)?
                + plain_lattice_closed(Lattice::Full, lam, 0.0, acc)?
                    * weighted_lattice_closed(
                        Lattice::Half,
                        lam,
                        alpha_boltz / 2.0,
                        alpha_weight / 2.0,
                        rd,
                        acc,
                    )?;
            let (gb, gw) = ((alpha_boltz - 1.0) / 2.0, (alpha_weight - 1.0) / 2.0);
            let odd = weighted_lattice_closed(Lattice::Full, lam, -0.5, -0.5, rd, acc)?
                * plain_lattice_closed(Lattice::Half, lam, gb, acc)?
                + plain_lattice_closed(Lattice::Full, lam, -0.5, acc)?
                    * weighted_lattice_closed(Lattice::Half, lam, gb, gw, rd, acc)?;
            4.0 * unit * (even + odd)
        }
        printed => {
            let first = 4.0
                * weighted_lattice_closed(Lattice::Full, beta * unit, 0.0, 0.0, printed, acc)?
                * weighted_lattice_closed(
                    Lattice::Half,
                    lam,
                    alpha_boltz / 2.0,
                    alpha_weight / 2.0,
                    printed,
                    acc,
                )?;
            let second = 4.0
                * weighted_lattice_closed(Lattice::Full, lam, -0.5, -0.5, printed, acc)?
                * weighted_lattice_closed(
                    Lattice::Half,
                    lam,
                    (alpha_boltz + 1.0) / 2.0,
                    (alpha_weight + 1.0) / 2.0,
                    printed,
                    acc,
                )?;
            4.0 * unit * first + unit * second
        }
    };
    let oracle = cs_x_direct(alpha_weight, alpha_boltz, beta, length, settings.tail_tol)?;
    Ok(ClosedFormReport::new(value, oracle, variant))
}

/// Direct double sum for 𝒳 over the enumerated CS level set.
pub fn cs_x_direct(
    alpha_weight: f64,
    alpha_boltz: f64,
    beta: f64,
    length: f64,
    tail_tol: f64,
) -> Result<f64> {
    let boltz = CsPairSpectrum::new(length, alpha_boltz)?;
    let weight = CsPairSpectrum::new(length, alpha_weight)?;
    let levels = boltz.enumerate_levels(beta, tail_tol)?;
    let mut sum = 0.0;
    for (label, e) in levels.iter().collect::<Vec<_>>().into_iter().rev() {
        let Label::Pair(n1, n2) = label else {
            unreachable!("CS levels carry pair labels")
        };
        sum += cs_energy(&weight, n1, n2)? * (-beta * e).exp();
    }
    Ok(sum)
}

/// Coupling-driven CS engine: cold isochore at `alpha1`, hot at `alpha2`,
/// `η = 1 - Σ E(α₁)(P(B) - P(A)) / Σ E(α₂)(P(B) - P(A))`.
pub fn cs_efficiency_closed(
    alpha1: f64,
    alpha2: f64,
    beta_h: f64,
    beta_l: f64,
    length: f64,
    settings: &CheckSettings,
) -> Result<EfficiencyCheck> {
    cs_efficiency_closed_with(
        alpha1,
        alpha2,
        beta_h,
        beta_l,
        length,
        FormulaVariant::Rederived,
        settings,
    )
}

pub fn cs_efficiency_closed_with(
    alpha1: f64,
    alpha2: f64,
    beta_h: f64,
    beta_l: f64,
    length: f64,
    variant: FormulaVariant,
    settings: &CheckSettings,
) -> Result<EfficiencyCheck> {
    let medium = CycleMedium::CsCoupling {
        length,
        alpha1,
        alpha2,
    };
    let spec = OttoCycleSpec::new(medium, beta_h, beta_l)?.with_tail_tol(settings.tail_tol)?;
    // P(B): hot Gibbs state at α₂; P(A): cold Gibbs state at α₁.
    let z_b = cs_partition_closed_with(alpha2, beta_h, length, variant, settings)?;
    let z_a = cs_partition_closed_with(alpha1, beta_l, length, variant, settings)?;
    let x_1b = cs_x_with(alpha1, alpha2, beta_h, length, variant, settings)?;
    let x_1a = cs_x_with(alpha1, alpha1, beta_l, length, variant, settings)?;
    let x_2b = cs_x_with(alpha2, alpha2, beta_h, length, variant, settings)?;
    let x_2a = cs_x_with(alpha2, alpha1, beta_l, length, variant, settings)?;

    let ratios = HeatRatios {
        in_hot: x_2b.value / z_b.value,
        in_cold: x_2a.value / z_a.value,
        out_hot: x_1b.value / z_b.value,
        out_cold: x_1a.value / z_a.value,
    };
    assemble_efficiency(
        ratios,
        variant,
        vec![z_b, z_a, x_1b, x_1a, x_2b, x_2a],
        &spec,
    )
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn check_cs_args(alpha: f64, beta: f64, length: f64) -> Result<()> {
    check_positive("beta", beta)?;
    check_positive("L", length)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return domain(format!(
            "CS coupling must be finite and non-negative, got {alpha}"
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn settings() -> CheckSettings {
        CheckSettings::default()
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            FormulaVariant::PaperMainText,
            FormulaVariant::PaperAppendix,
            FormulaVariant::Rederived,
        ] {
            assert_eq!(v.as_str().parse::<FormulaVariant>().unwrap(), v);
        }
        assert!("typo".parse::<FormulaVariant>().is_err());
    }

    #[test]
    fn residual_is_recomputable() {
        let r = ClosedFormReport::new(1.0 + 1e-12, 1.0, FormulaVariant::Rederived);
        assert_relative_eq!(r.rel_residual, 1e-12, max_relative = 1e-3);
        let zero = ClosedFormReport::new(0.0, 0.0, FormulaVariant::Rederived);
        assert_eq!(zero.rel_residual, 0.0);
        assert!(relative_residual(f64::NAN, 1.0).is_infinite());
    }

    #[test]
    fn upsilon_boson_point() {
        let r = upsilon(0.0, 0.0, 1.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(r.value, 2.0 * 0.44225448587316161, max_relative = 1e-13);
        assert!(r.rel_residual < 1e-12);
        let scaled = upsilon(0.0, 0.0, 0.5, 2.0, &settings()).unwrap();
        assert_relative_eq!(scaled.value, 2.0 * r.value, max_relative = 1e-13);
    }

    #[test]
    fn upsilon_cold_limit() {
        // Only n = 0 survives: eps0 · α_k².
        let r = upsilon(0.3, 0.0, 200.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(r.value, 0.09, max_relative = 1e-12);
    }

    #[test]
    fn ring_partition_examples() {
        let r = ring_partition_closed(0.0, 1.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(r.value, 1.772637204826652, max_relative = 1e-14);
        let plus = ring_partition_closed(0.5, 0.7, 1.3, &settings()).unwrap();
        let minus = ring_partition_closed(-0.5, 0.7, 1.3, &settings()).unwrap();
        assert!(plus.rel_residual < 1e-11);
        assert_relative_eq!(plus.value, minus.value, max_relative = 1e-11);
        let shifted = ring_partition_closed(1.5, 0.7, 1.3, &settings()).unwrap();
        assert_relative_eq!(plus.value, shifted.value, max_relative = 1e-11);
    }

    #[test]
    fn printed_ring_partition_fails_at_zero_flux() {
        // θ₃ at x = λα = 0 is outside the domain.
        let r =
            ring_partition_closed_with(0.0, 1.0, 1.0, FormulaVariant::PaperMainText, &settings());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn cs_partition_examples() {
        let cold = cs_partition_closed(0.0, 50.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(cold.value, 1.0, max_relative = 1e-15);
        let unit = cs_partition_closed(0.0, 1.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(unit.value, 1.000000005350576, max_relative = 1e-15);
        for alpha in [0.0, 1.0] {
            let hot = cs_partition_closed(alpha, 0.05, 1.0, &settings()).unwrap();
            assert!(
                hot.rel_residual < 1e-11,
                "alpha = {alpha}: {}",
                hot.rel_residual
            );
        }
    }

    #[test]
    fn cs_x_examples() {
        let r = cs_x(0.0, 0.0, 1.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(r.value, 1.0561613737121204e-7, max_relative = 1e-12);
        assert!(r.rel_residual < 1e-12);
        // Ground-state dominance: π²α′²/L².
        let cold = cs_x(0.6, 0.0, 40.0, 1.0, &settings()).unwrap();
        assert_relative_eq!(cold.value, PI * PI * 0.36, max_relative = 1e-12);
    }

    #[test]
    fn equal_couplings_are_degenerate() {
        let check = cs_efficiency_closed(0.4, 0.4, 0.1, 0.3, 1.0, &settings()).unwrap();
        assert_eq!(check.regime, Regime::Degenerate);
        assert_eq!(check.report.value, 0.0);
        let ring = ring_efficiency_closed(0.2, 0.2, 0.1, 0.3, 1.0, &settings()).unwrap();
        assert_eq!(ring.regime, Regime::Degenerate);
    }
}
