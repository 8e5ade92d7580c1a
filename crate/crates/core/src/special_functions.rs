//! Lattice sums behind every closed form in the crate: the Jacobi theta
//! function θ₃, the partial theta function Θp, and Gaussian sums with a
//! polynomial weight `(n - c)^w`, over the full lattice ℤ or the half
//! lattice n ≥ 0.
//!
//! Every sum is evaluated by expanding outward from its peak index. The
//! expansion stops once the last ring of terms and the analytic Gaussian
//! tail bound for everything beyond it are both below `rel_tol` times the
//! running absolute sum. The tail bound is returned with the value.

use log::warn;

use crate::error::{domain, Error, Result};

/// Below this Gaussian width the series needs many terms; we still sum
/// directly but allow ten times the usual term budget.
pub const SLOW_CONVERGENCE_LAMBDA: f64 = 0.05;

/// Truncation policy for the infinite lattice sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumAccuracy {
    rel_tol: f64,
    max_terms: u64,
}

impl SumAccuracy {
    pub const DEFAULT_REL_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_TERMS: u64 = 1_000_000;

    pub fn new(rel_tol: f64, max_terms: u64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return domain(format!("rel_tol must lie in (0, 1), got {rel_tol}"));
        }
        if max_terms < 8 {
            return domain(format!("max_terms must be at least 8, got {max_terms}"));
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> u64 {
        self.max_terms
    }
}

impl Default for SumAccuracy {
    fn default() -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}

/// A truncated series together with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Sum of absolute values of the retained terms.
    pub abs_sum: f64,
    /// Upper bound on the absolute sum of every omitted term.
    pub tail_bound: f64,
    pub terms: u64,
}

/// A theta-type series and its two logarithmic derivatives, all evaluated at
/// the same `(x, q)`:
/// `value = Σ q^{n²} xⁿ`, `x_deriv = x ∂/∂x value = Σ n q^{n²} xⁿ`,
/// `q_deriv = q ∂/∂q value = Σ n² q^{n²} xⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParts {
    pub value: f64,
    pub x_deriv: f64,
    pub q_deriv: f64,
}

/// Upper bound on `Σ_{j≥0} (t + j)^w e^{-λ (t + j)²}` for `t > 0`.
///
/// Uses `f(t) + ∫_t^∞ f` which holds once the summand is decreasing on
/// `[t, ∞)`, i.e. `t ≥ sqrt(w / 2λ)`. Returns `+∞` when that does not hold.
pub fn gaussian_tail_bound(lambda: f64, t: f64, weight: u8) -> f64 {
    scaled_tail_bound(lambda, t, weight, 0.0)
}

/// `e^{log_scale}` times [`gaussian_tail_bound`], with the scale folded into
/// the exponent so that neither factor overflows on its own.
pub(crate) fn scaled_tail_bound(lambda: f64, t: f64, weight: u8, log_scale: f64) -> f64 {
    if !(lambda > 0.0) || !(t > 0.0) {
        return f64::INFINITY;
    }
    let w = f64::from(weight);
    if t * t < w / (2.0 * lambda) {
        return f64::INFINITY;
    }
    let g = (log_scale - lambda * t * t).exp();
    let integral0 = g / (2.0 * lambda * t);
    match weight {
        0 => g + integral0,
        1 => t * g + g / (2.0 * lambda),
        2 => t * t * g + t * g / (2.0 * lambda) + integral0 / (2.0 * lambda),
        _ => f64::INFINITY,
    }
}

/// Tail bound for `e^{log_scale} (n - c)^w e^{-λ(n-γ)²}` over `|n - γ| ≥ t`,
/// with `shift = |γ - c|`.
fn shifted_tail_bound(lambda: f64, t: f64, weight: u8, shift: f64, log_scale: f64) -> f64 {
    let t0 = scaled_tail_bound(lambda, t, 0, log_scale);
    match weight {
        0 => t0,
        1 => scaled_tail_bound(lambda, t, 1, log_scale) + shift * t0,
        _ => 2.0 * scaled_tail_bound(lambda, t, 2, log_scale) + 2.0 * shift * shift * t0,
    }
}

/// Geometry of a lattice sum: the summand behaves like
/// `|n - c|^w · exp(log_prefactor - λ(n - γ)²)`.
struct Envelope {
    lambda: f64,
    gamma: f64,
    c: f64,
    weight: u8,
    log_prefactor: f64,
    half: bool,
}

fn sum_outward<F>(
    what: &'static str,
    env: &Envelope,
    acc: &SumAccuracy,
    term: F,
) -> Result<SeriesValue>
where
    F: Fn(i64) -> f64,
{
    if env.gamma.abs() > 1e12 {
        return domain(format!("{what}: peak index {} is out of range", env.gamma));
    }
    let mut max_terms = acc.max_terms;
    if env.lambda < SLOW_CONVERGENCE_LAMBDA * (1.0 - 1e-9) {
        warn!(
            "{what}: Gaussian width {} is below {SLOW_CONVERGENCE_LAMBDA}; summing directly with a raised term budget",
            env.lambda
        );
        max_terms = max_terms.saturating_mul(10);
    }

    let mut peak = env.gamma.round() as i64;
    if env.half {
        peak = peak.max(0);
    }
    let shift = (env.gamma - env.c).abs();
    let side_tail =
        |t: f64| shifted_tail_bound(env.lambda, t, env.weight, shift, env.log_prefactor);

    let first = term(peak);
    let mut total = first;
    let mut abs_sum = first.abs();
    let mut terms = 1u64;

    for k in 1i64.. {
        let hi = peak + k;
        let lo = peak - k;
        let mut ring_abs = 0.0;

        let t_hi = term(hi);
        total += t_hi;
        ring_abs += t_hi.abs();
        terms += 1;
        let lower_open = !env.half || lo >= 0;
        if lower_open {
            let t_lo = term(lo);
            total += t_lo;
            ring_abs += t_lo.abs();
            terms += 1;
        }
        abs_sum += ring_abs;

        let mut tail = side_tail((hi + 1) as f64 - env.gamma);
        if !env.half || lo > 0 {
            tail += side_tail(env.gamma - (lo - 1) as f64);
        }

        let scale = rel_scale(acc.rel_tol, abs_sum);
        if ring_abs <= scale && tail <= scale {
            if !total.is_finite() {
                return Err(Error::Overflow(what));
            }
            return Ok(SeriesValue {
                value: total,
                abs_sum,
                tail_bound: tail,
                terms,
            });
        }
        if terms >= max_terms {
            break;
        }
    }
    Err(Error::NoConvergence {
        what,
        terms: max_terms,
    })
}

fn rel_scale(rel_tol: f64, abs_sum: f64) -> f64 {
    rel_tol * abs_sum.max(f64::MIN_POSITIVE)
}

fn check_weight(weight: u8) -> Result<()> {
    if weight > 2 {
        return domain(format!("weight must be 0, 1 or 2, got {weight}"));
    }
    Ok(())
}

fn check_theta_args(x: f64, q: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!(
            "theta argument x must be positive and finite, got {x}"
        ));
    }
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("theta nome q must lie in (0, 1), got {q}"));
    }
    Ok(())
}

/// `Σ n^w q^{n²} xⁿ` over ℤ (or n ≥ 0 when `half`).
fn theta_series(
    what: &'static str,
    x: f64,
    q: f64,
    weight: u8,
    half: bool,
    acc: &SumAccuracy,
) -> Result<SeriesValue> {
    check_theta_args(x, q)?;
    theta_series_ln(what, x.ln(), q.ln(), weight, half, acc)
}

/// As [`theta_series`] with `ln x` and `ln q` given directly, so that nomes
/// below the smallest positive double stay representable.
fn theta_series_ln(
    what: &'static str,
    ln_x: f64,
    ln_q: f64,
    weight: u8,
    half: bool,
    acc: &SumAccuracy,
) -> Result<SeriesValue> {
    if !(ln_x.is_finite() && ln_q < 0.0 && ln_q.is_finite()) {
        return domain(format!(
            "theta needs finite ln x and ln q < 0, got {ln_x}, {ln_q}"
        ));
    }
    let lambda = -ln_q;
    let gamma = ln_x / (2.0 * lambda);
    let env = Envelope {
        lambda,
        gamma,
        c: 0.0,
        weight,
        log_prefactor: lambda * gamma * gamma,
        half,
    };
    sum_outward(what, &env, acc, |n| {
        let nf = n as f64;
        let base = (nf * nf * ln_q + nf * ln_x).exp();
        match weight {
            0 => base,
            1 => nf * base,
            _ => nf * nf * base,
        }
    })
}

/// `Σ (n - c)^w e^{-λ(n-γ)²}` over ℤ (or n ≥ 0 when `half`).
fn gauss_series(
    what: &'static str,
    lambda: f64,
    gamma: f64,
    c: f64,
    weight: u8,
    half: bool,
    acc: &SumAccuracy,
) -> Result<SeriesValue> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!(
            "Gaussian width lambda must be positive, got {lambda}"
        ));
    }
    if !(gamma.is_finite() && c.is_finite()) {
        return domain("Gaussian centre and weight offset must be finite");
    }
    check_weight(weight)?;
    let env = Envelope {
        lambda,
        gamma,
        c,
        weight,
        log_prefactor: 0.0,
        half,
    };
    sum_outward(what, &env, acc, |n| {
        let nf = n as f64;
        let d = nf - gamma;
        let base = (-lambda * d * d).exp();
        match weight {
            0 => base,
            1 => (nf - c) * base,
            _ => (nf - c) * (nf - c) * base,
        }
    })
}

/// Jacobi theta function `θ₃(x, q) = Σ_{n∈ℤ} q^{n²} xⁿ` for `x > 0`, `0 < q < 1`.
pub fn theta3(x: f64, q: f64, acc: &SumAccuracy) -> Result<f64> {
    theta3_series(x, q, acc).map(|s| s.value)
}

pub fn theta3_series(x: f64, q: f64, acc: &SumAccuracy) -> Result<SeriesValue> {
    theta_series("theta3", x, q, 0, false, acc)
}

/// Partial theta function `Θp(x, q) = Σ_{n≥0} q^{n²} xⁿ`.
pub fn partial_theta(x: f64, q: f64, acc: &SumAccuracy) -> Result<f64> {
    partial_theta_series(x, q, acc).map(|s| s.value)
}

pub fn partial_theta_series(x: f64, q: f64, acc: &SumAccuracy) -> Result<SeriesValue> {
    theta_series("partial_theta", x, q, 0, true, acc)
}

/// θ₃ together with `x ∂θ₃/∂x` and `q ∂θ₃/∂q`, each summed termwise.
pub fn theta3_parts(x: f64, q: f64, acc: &SumAccuracy) -> Result<ThetaParts> {
    Ok(ThetaParts {
        value: theta_series("theta3", x, q, 0, false, acc)?.value,
        x_deriv: theta_series("theta3 x-derivative", x, q, 1, false, acc)?.value,
        q_deriv: theta_series("theta3 q-derivative", x, q, 2, false, acc)?.value,
    })
}

/// Θp together with `x ∂Θp/∂x` and `q ∂Θp/∂q`.
pub fn partial_theta_parts(x: f64, q: f64, acc: &SumAccuracy) -> Result<ThetaParts> {
    Ok(ThetaParts {
        value: theta_series("partial_theta", x, q, 0, true, acc)?.value,
        x_deriv: theta_series("partial_theta x-derivative", x, q, 1, true, acc)?.value,
        q_deriv: theta_series("partial_theta q-derivative", x, q, 2, true, acc)?.value,
    })
}

/// θ₃ and its derivative series from `ln x` and `ln q`.
pub fn theta3_parts_ln(ln_x: f64, ln_q: f64, acc: &SumAccuracy) -> Result<ThetaParts> {
    Ok(ThetaParts {
        value: theta_series_ln("theta3", ln_x, ln_q, 0, false, acc)?.value,
        x_deriv: theta_series_ln("theta3 x-derivative", ln_x, ln_q, 1, false, acc)?.value,
        q_deriv: theta_series_ln("theta3 q-derivative", ln_x, ln_q, 2, false, acc)?.value,
    })
}

/// Θp and its derivative series from `ln x` and `ln q`.
pub fn partial_theta_parts_ln(ln_x: f64, ln_q: f64, acc: &SumAccuracy) -> Result<ThetaParts> {
    Ok(ThetaParts {
        value: theta_series_ln("partial_theta", ln_x, ln_q, 0, true, acc)?.value,
        x_deriv: theta_series_ln("partial_theta x-derivative", ln_x, ln_q, 1, true, acc)?.value,
        q_deriv: theta_series_ln("partial_theta q-derivative", ln_x, ln_q, 2, true, acc)?.value,
    })
}

/// `θ₃` from `ln x` and `ln q`.
pub fn theta3_ln(ln_x: f64, ln_q: f64, acc: &SumAccuracy) -> Result<f64> {
    theta_series_ln("theta3", ln_x, ln_q, 0, false, acc).map(|s| s.value)
}

/// `Θp` from `ln x` and `ln q`.
pub fn partial_theta_ln(ln_x: f64, ln_q: f64, acc: &SumAccuracy) -> Result<f64> {
    theta_series_ln("partial_theta", ln_x, ln_q, 0, true, acc).map(|s| s.value)
}

/// `Σ_{n∈ℤ} (n - c)^w e^{-λ(n-γ)²}` by direct summation.
///
/// This is the reference form: it never goes through a theta identity.
pub fn gauss_sum_full(
    lambda: f64,
    gamma: f64,
    c: f64,
    weight: u8,
    acc: &SumAccuracy,
) -> Result<f64> {
    gauss_sum_full_series(lambda, gamma, c, weight, acc).map(|s| s.value)
}

pub fn gauss_sum_full_series(
    lambda: f64,
    gamma: f64,
    c: f64,
    weight: u8,
    acc: &SumAccuracy,
) -> Result<SeriesValue> {
    gauss_series("gauss_sum_full", lambda, gamma, c, weight, false, acc)
}

/// `Σ_{n≥0} (n - c)^w e^{-λ(n-γ)²}` by direct summation.
pub fn gauss_sum_half(
    lambda: f64,
    gamma: f64,
    c: f64,
    weight: u8,
    acc: &SumAccuracy,
) -> Result<f64> {
    gauss_sum_half_series(lambda, gamma, c, weight, acc).map(|s| s.value)
}

pub fn gauss_sum_half_series(
    lambda: f64,
    gamma: f64,
    c: f64,
    weight: u8,
    acc: &SumAccuracy,
) -> Result<SeriesValue> {
    gauss_series("gauss_sum_half", lambda, gamma, c, weight, true, acc)
}
