//! M-estimator penalty families `(ρ, ψ = ρ', ψ')`.

use std::fmt;

use crate::error::{invalid, Result};
use crate::noise::MixtureNoiseModel;
use crate::numerics::{bisect, q_function, std_normal_pdf};

/// A penalty `ρ` with its score `ψ = ρ'` and `ψ'`.
///
/// `ψ` must be odd and `ρ` even with `ρ(0) = 0`. `ψ'` may be undefined at
/// the points returned by [`Penalty::kink_points`]; implementations return
/// a one-sided value there.
pub trait Penalty: Send + Sync {
    fn name(&self) -> &'static str;
    fn rho(&self, x: f64) -> f64;
    fn psi(&self, x: f64) -> f64;
    fn psi_prime(&self, x: f64) -> f64;
    /// Points where `ψ'` jumps, in increasing order.
    fn kink_points(&self) -> Vec<f64>;
    /// Step size `μ` for which `μ·sup ψ' ≤ 1`.
    fn default_step(&self) -> f64;
}

/// Least squares: `ρ = x²/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LsPenalty;

impl Penalty for LsPenalty {
    fn name(&self) -> &'static str {
        "ls"
    }
    fn rho(&self, x: f64) -> f64 {
        0.5 * x * x
    }
    fn psi(&self, x: f64) -> f64 {
        x
    }
    fn psi_prime(&self, _x: f64) -> f64 {
        1.0
    }
    fn kink_points(&self) -> Vec<f64> {
        Vec::new()
    }
    fn default_step(&self) -> f64 {
        1.0
    }
}

/// Huber's clipped-linear score with threshold `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberPenalty {
    gamma: f64,
}

impl HuberPenalty {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!(
                "Huber threshold must be positive, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// Minimax threshold for an ε-contaminated `N(0, ν²)`: `γ = k(ε)·ν`.
    /// At ε = 0 the capped threshold is used.
    pub fn minimax(noise: &MixtureNoiseModel) -> Result<Self> {
        let k = if noise.epsilon() > 0.0 {
            huber_threshold(noise.epsilon())?.k
        } else {
            HUBER_K_CAP
        };
        Self::new(k * noise.nominal_std())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Penalty for HuberPenalty {
    fn name(&self) -> &'static str {
        "huber"
    }
    fn rho(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.gamma {
            0.5 * x * x
        } else {
            self.gamma * a - 0.5 * self.gamma * self.gamma
        }
    }
    fn psi(&self, x: f64) -> f64 {
        x.clamp(-self.gamma, self.gamma)
    }
    fn psi_prime(&self, x: f64) -> f64 {
        if x.abs() <= self.gamma {
            1.0
        } else {
            0.0
        }
    }
    fn kink_points(&self) -> Vec<f64> {
        vec![-self.gamma, self.gamma]
    }
    fn default_step(&self) -> f64 {
        1.0
    }
}

/// The redescending score that is linear inside `±σ` and decays as `σ/x`
/// outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XPenalty {
    sigma: f64,
}

impl XPenalty {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid(format!(
                "x-penalty scale must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Penalty for XPenalty {
    fn name(&self) -> &'static str {
        "x"
    }
    fn rho(&self, x: f64) -> f64 {
        x_rho(x, self.sigma)
    }
    fn psi(&self, x: f64) -> f64 {
        x_psi(x, self.sigma)
    }
    fn psi_prime(&self, x: f64) -> f64 {
        x_psi_prime(x, self.sigma)
    }
    fn kink_points(&self) -> Vec<f64> {
        vec![-self.sigma, self.sigma]
    }
    fn default_step(&self) -> f64 {
        self.sigma
    }
}

/// `x/σ` for `|x| ≤ σ`, `σ/x` beyond.
#[inline]
pub fn x_psi(x: f64, sigma: f64) -> f64 {
    if x.abs() <= sigma {
        x / sigma
    } else {
        sigma / x
    }
}

/// `x²/(2σ)` inside, `σ·ln|x| + σ/2 − σ·ln σ` outside; `ρ(0) = 0` and
/// continuous at `±σ`.
#[inline]
pub fn x_rho(x: f64, sigma: f64) -> f64 {
    let a = x.abs();
    if a <= sigma {
        0.5 * x * x / sigma
    } else {
        sigma * (a / sigma).ln() + 0.5 * sigma
    }
}

/// `1/σ` inside (including the kinks), `−σ/x²` outside.
#[inline]
pub fn x_psi_prime(x: f64, sigma: f64) -> f64 {
    if x.abs() <= sigma {
        1.0 / sigma
    } else {
        -sigma / (x * x)
    }
}

/// Largest Huber constant considered; beyond it clipping is inert.
pub const HUBER_K_CAP: f64 = 8.0;

/// Solution of Huber's minimax threshold equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberThreshold {
    pub k: f64,
    /// The root lies beyond [`HUBER_K_CAP`]; `k` was clamped.
    pub capped: bool,
}

/// `2·[φ(k)/k − Q(k)]`, the contamination-balance side of the threshold
/// equation. Equals `2∫ₖ^∞ φ(t)/t² dt`.
pub fn huber_balance(k: f64) -> f64 {
    if k < 3.0 {
        2.0 * (std_normal_pdf(k) / k - q_function(k))
    } else {
        // Q(k) = φ(k)/c with c = k + 1/(k + 2/(k + 3/(k + …))), so
        // φ(k)/k − Q(k) = φ(k)·(c − k)/(k·c) with no cancellation.
        let mut tail = 0.0;
        for n in (2..400).rev() {
            tail = n as f64 / (k + tail);
        }
        let c_minus_k = 1.0 / (k + tail);
        let c = k + c_minus_k;
        2.0 * std_normal_pdf(k) * c_minus_k / (k * c)
    }
}

/// Solve `2·[φ(k)/k − Q(k)] = ε/(1−ε)` for `k`.
pub fn huber_threshold(epsilon: f64) -> Result<HuberThreshold> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let target = epsilon / (1.0 - epsilon);
    if huber_balance(HUBER_K_CAP) >= target {
        return Ok(HuberThreshold {
            k: HUBER_K_CAP,
            capped: true,
        });
    }
    // The balance term diverges like 2φ(0)/k near 0.
    let lo = 1e-6;
    let k = bisect(|k| huber_balance(k) - target, lo, HUBER_K_CAP, 1e-13)?;
    Ok(HuberThreshold { k, capped: false })
}

/// Which scale the x-penalty takes from the noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XScale {
    /// Total standard deviation `√((1−ε)ν² + εκν²)`.
    Total,
    /// Background standard deviation `ν`.
    Nominal,
    Fixed(f64),
}

/// How the Huber threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HuberScale {
    /// `k(ε)·ν` from [`huber_threshold`].
    Minimax,
    Fixed(f64),
}

/// A penalty described independently of a particular noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyConfig {
    Ls,
    Huber(HuberScale),
    X(XScale),
}

impl PenaltyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyConfig::Ls => "ls",
            PenaltyConfig::Huber(_) => "huber",
            PenaltyConfig::X(_) => "x",
        }
    }

    pub fn resolve(&self, noise: &MixtureNoiseModel) -> Result<PenaltyFamily> {
        Ok(match *self {
            PenaltyConfig::Ls => PenaltyFamily::Ls(LsPenalty),
            PenaltyConfig::Huber(HuberScale::Minimax) => {
                PenaltyFamily::Huber(HuberPenalty::minimax(noise)?)
            }
            PenaltyConfig::Huber(HuberScale::Fixed(g)) => {
                PenaltyFamily::Huber(HuberPenalty::new(g)?)
            }
            PenaltyConfig::X(scale) => {
                let sigma = match scale {
                    XScale::Total => noise.total_std(),
                    XScale::Nominal => noise.nominal_std(),
                    XScale::Fixed(s) => s,
                };
                PenaltyFamily::X(XPenalty::new(sigma)?)
            }
        })
    }
}

impl fmt::Display for PenaltyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The built-in families behind one concrete type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyFamily {
    Ls(LsPenalty),
    Huber(HuberPenalty),
    X(XPenalty),
}

macro_rules! dispatch {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            PenaltyFamily::Ls($p) => $e,
            PenaltyFamily::Huber($p) => $e,
            PenaltyFamily::X($p) => $e,
        }
    };
}

impl Penalty for PenaltyFamily {
    fn name(&self) -> &'static str {
        dispatch!(self, p => p.name())
    }
    #[inline]
    fn rho(&self, x: f64) -> f64 {
        dispatch!(self, p => p.rho(x))
    }
    #[inline]
    fn psi(&self, x: f64) -> f64 {
        dispatch!(self, p => p.psi(x))
    }
    #[inline]
    fn psi_prime(&self, x: f64) -> f64 {
        dispatch!(self, p => p.psi_prime(x))
    }
    fn kink_points(&self) -> Vec<f64> {
        dispatch!(self, p => p.kink_points())
    }
    fn default_step(&self) -> f64 {
        dispatch!(self, p => p.default_step())
    }
}
