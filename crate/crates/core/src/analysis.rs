//! Asymptotic variance `V = ∫ψ²f / (∫ψ'f)²` of M-estimators under the
//! mixture noise, closed forms for the x-penalty, and relative efficiency
//! grids.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::noise::MixtureNoiseModel;
use crate::numerics::{
    bisect, integrate_piecewise, normal_pdf_unchecked, q_function, std_normal_pdf, QuadratureSpec,
};
use crate::penalty::{HuberPenalty, Penalty, PenaltyConfig, XPenalty, XScale};

/// `V = numerator / denominator_base²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticVariance {
    /// `∫ψ²f`.
    pub numerator: f64,
    /// `∫ψ'f`.
    pub denominator_base: f64,
    pub value: f64,
}

impl AsymptoticVariance {
    fn from_parts(numerator: f64, denominator_base: f64) -> Result<Self> {
        if !(denominator_base.abs() >= 1e-12) {
            return Err(Error::DegenerateScore {
                denominator: denominator_base,
            });
        }
        Ok(Self {
            numerator,
            denominator_base,
            value: numerator / (denominator_base * denominator_base),
        })
    }
}

/// Which numerator formula the x-penalty closed form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedForm {
    /// Piecewise integration; agrees with quadrature.
    #[default]
    Corrected,
    /// The literal numerator formula, whose `Q(σ/u)` coefficient carries
    /// `σ²/u²` with the wrong sign. Kept for documentation runs.
    LiteralNumerator,
}

/// Tolerances used for all variance integrals.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_subdivisions: 4000,
    }
}

/// Half-width beyond which the widest component's second-moment tail,
/// `2u²[zφ(z) + Q(z)]` with `z = T/u`, falls below `abs_tol/10`.
pub fn truncation_point(noise: &MixtureNoiseModel, abs_tol: f64) -> f64 {
    let widest = noise
        .components()
        .map(|(_, var)| var)
        .fold(0.0_f64, f64::max)
        .sqrt();
    let budget = abs_tol / 10.0 / widest.powi(2).max(1.0);
    let tail = |z: f64| 2.0 * (z * std_normal_pdf(z) + q_function(z)) - budget;
    // tail(0) = 1 - budget > 0 and tail(40) < 0 for any budget above 1e-300.
    let z = bisect(tail, 0.0, 40.0, 1e-6).unwrap_or(40.0);
    (z + 1e-6) * widest
}

fn integration_breaks<P: Penalty + ?Sized>(penalty: &P, half_width: f64) -> Vec<f64> {
    let mut breaks = vec![-half_width];
    let mut kinks: Vec<f64> = penalty
        .kink_points()
        .into_iter()
        .filter(|k| k.abs() < half_width)
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    breaks.extend(kinks);
    breaks.push(half_width);
    breaks
}

/// `V` by adaptive quadrature, split at the penalty's kinks.
pub fn variance_quadrature<P: Penalty + ?Sized>(
    penalty: &P,
    noise: &MixtureNoiseModel,
    spec: &QuadratureSpec,
) -> Result<AsymptoticVariance> {
    let t = truncation_point(noise, spec.abs_tol);
    let breaks = integration_breaks(penalty, t);
    let numerator = integrate_piecewise(
        |x| {
            let p = penalty.psi(x);
            p * p * noise.pdf(x)
        },
        &breaks,
        spec,
    )?;
    let denominator = integrate_piecewise(|x| penalty.psi_prime(x) * noise.pdf(x), &breaks, spec)?;
    AsymptoticVariance::from_parts(numerator, denominator)
}

/// Per-component `(∫ψ², ∫ψ' − 1/σ)` of the x-score against `N(0, u²)`.
fn x_component(sigma: f64, variance: f64) -> (f64, f64) {
    let u = variance.sqrt();
    let q = q_function(sigma / u);
    let dens = normal_pdf_unchecked(sigma, variance);
    let numerator = variance / (sigma * sigma) * (1.0 - 2.0 * q) - 2.0 * variance / sigma * dens
        + 2.0 * sigma * dens
        - 2.0 * sigma * sigma / variance * q;
    let denominator_excess = -2.0 / sigma * q + 2.0 * sigma / variance * q - 2.0 * dens;
    (numerator, denominator_excess)
}

/// The literal numerator formula, evaluated term by term.
fn literal_numerator(sigma: f64, noise: &MixtureNoiseModel) -> f64 {
    let (eps, kappa) = (noise.epsilon(), noise.kappa());
    let v2 = noise.nominal_variance();
    let v = v2.sqrt();
    let s2 = sigma * sigma;
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let q_nom = q_function(sigma / v);
    let q_imp = q_function(sigma / (kappa.sqrt() * v));
    2.0 * (v2 / (2.0 * s2) * (1.0 + (kappa - 1.0) * eps)
        - (v2 / s2 - s2 / v2) * (1.0 - eps) * q_nom
        - (kappa * v2 / s2 - s2 / (kappa * v2)) * eps * q_imp
        + (sigma / v - v / sigma) * (1.0 - eps) / sqrt_2pi * (-s2 / (2.0 * v2)).exp()
        + (sigma / v - kappa * v / sigma) * eps / (2.0 * std::f64::consts::PI * kappa).sqrt()
            * (-s2 / (2.0 * kappa * v2)).exp())
}

/// The literal denominator formula `∫ψ'f`, evaluated term by term.
///
/// Its impulsive density term carries `κ·v` where the component standard
/// deviation is `√κ·v`; it coincides with the correct value only when the
/// impulsive term vanishes (`ε = 0`) or `κ = 1`.
pub fn literal_denominator(sigma: f64, noise: &MixtureNoiseModel) -> f64 {
    let (eps, kappa) = (noise.epsilon(), noise.kappa());
    let v2 = noise.nominal_variance();
    let v = v2.sqrt();
    let s2 = sigma * sigma;
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let q_nom = q_function(sigma / v);
    let q_imp = q_function(sigma / (kappa.sqrt() * v));
    2.0 * (1.0 / (2.0 * sigma)
        + (sigma / v2 - 1.0 / sigma) * (1.0 - eps) * q_nom
        + (sigma / (kappa * v2) - 1.0 / sigma) * eps * q_imp
        - (1.0 - eps) / (sqrt_2pi * v) * (-s2 / (2.0 * v2)).exp()
        - eps / (sqrt_2pi * kappa * v) * (-s2 / (2.0 * kappa * v2)).exp())
}

/// Closed-form `V` of the x-penalty with scale `sigma`.
pub fn x_variance_closed_form(
    sigma: f64,
    noise: &MixtureNoiseModel,
    form: ClosedForm,
) -> Result<AsymptoticVariance> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!(
            "x-penalty scale must be positive, got {sigma}"
        )));
    }
    let mut numerator = 0.0;
    let mut denominator = 1.0 / sigma;
    for (weight, variance) in noise.components() {
        let (n, d) = x_component(sigma, variance);
        numerator += weight * n;
        denominator += weight * d;
    }
    if form == ClosedForm::LiteralNumerator {
        numerator = literal_numerator(sigma, noise);
    }
    AsymptoticVariance::from_parts(numerator, denominator)
}

/// Relative agreement required between the x-penalty closed form and its
/// quadrature cross-check inside [`are`].
const CROSS_CHECK_RTOL: f64 = 1e-7;

/// `V_other / V_x`, with `V_x` from the closed form (checked against
/// quadrature) and `V_other` from quadrature.
pub fn are<P: Penalty + ?Sized>(other: &P, x: &XPenalty, noise: &MixtureNoiseModel) -> Result<f64> {
    Ok(are_detail(
        other,
        x,
        noise,
        ClosedForm::Corrected,
        &default_quadrature(),
    )?
    .are)
}

/// One ARE evaluation with both variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreCell {
    pub epsilon: f64,
    pub kappa: f64,
    pub v_x: AsymptoticVariance,
    pub v_other: AsymptoticVariance,
    pub are: f64,
}

pub fn are_detail<P: Penalty + ?Sized>(
    other: &P,
    x: &XPenalty,
    noise: &MixtureNoiseModel,
    form: ClosedForm,
    spec: &QuadratureSpec,
) -> Result<AreCell> {
    let v_x = x_variance_closed_form(x.sigma(), noise, form)?;
    if form == ClosedForm::Corrected {
        let check = variance_quadrature(x, noise, spec)?;
        let rel = (check.value - v_x.value).abs() / v_x.value.abs();
        if rel > CROSS_CHECK_RTOL {
            return Err(Error::Numeric(format!(
                "closed-form V_x = {} disagrees with quadrature {} (rel {rel:e})",
                v_x.value, check.value
            )));
        }
    }
    let v_other = variance_quadrature(other, noise, spec)?;
    Ok(AreCell {
        epsilon: noise.epsilon(),
        kappa: noise.kappa(),
        v_x,
        v_other,
        are: v_other.value / v_x.value,
    })
}

/// Settings for [`are_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreOptions {
    pub total_variance: f64,
    pub x_scale: XScale,
    /// Competing detector; Huber minimax by default.
    pub other: PenaltyConfig,
    pub form: ClosedForm,
    pub quadrature: QuadratureSpec,
}

impl Default for AreOptions {
    fn default() -> Self {
        Self {
            total_variance: 1.0,
            x_scale: XScale::Total,
            other: PenaltyConfig::Huber(crate::penalty::HuberScale::Minimax),
            form: ClosedForm::Corrected,
            quadrature: default_quadrature(),
        }
    }
}

/// ARE over an `(ε, κ)` grid; cells ordered κ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AreGrid {
    pub epsilons: Vec<f64>,
    pub kappas: Vec<f64>,
    pub cells: Vec<AreCell>,
}

impl AreGrid {
    pub fn cell(&self, epsilon_index: usize, kappa_index: usize) -> &AreCell {
        &self.cells[kappa_index * self.epsilons.len() + epsilon_index]
    }

    pub fn value(&self, epsilon_index: usize, kappa_index: usize) -> f64 {
        self.cell(epsilon_index, kappa_index).are
    }
}

/// For each `(ε, κ)`: calibrate to the total variance, build both
/// penalties from the calibrated model, and evaluate the ARE.
pub fn are_grid(epsilons: &[f64], kappas: &[f64], options: &AreOptions) -> Result<AreGrid> {
    if epsilons.is_empty() || kappas.is_empty() {
        return Err(invalid("ARE grid needs at least one epsilon and one kappa"));
    }
    let coords: Vec<(f64, f64)> = kappas
        .iter()
        .flat_map(|&k| epsilons.iter().map(move |&e| (e, k)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(eps, kappa)| {
            let noise = MixtureNoiseModel::calibrate(eps, kappa, options.total_variance)?;
            let x = match PenaltyConfig::X(options.x_scale).resolve(&noise)? {
                crate::penalty::PenaltyFamily::X(x) => x,
                _ => unreachable!(),
            };
            let other = options.other.resolve(&noise)?;
            are_detail(&other, &x, &noise, options.form, &options.quadrature)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AreGrid {
        epsilons: epsilons.to_vec(),
        kappas: kappas.to_vec(),
        cells,
    })
}

/// Huber minimax and x-penalty for a calibrated model, as used by the
/// default grid.
pub fn default_pair(noise: &MixtureNoiseModel) -> Result<(HuberPenalty, XPenalty)> {
    Ok((
        HuberPenalty::minimax(noise)?,
        XPenalty::new(noise.total_std())?,
    ))
}
