//! m-sequence spreading codes, the signature matrix `S` and synthesis of
//! received frames `r = S·A·b + n`.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::noise::MixtureNoiseModel;
use crate::numerics::Cholesky;

/// A GF(2) feedback polynomial, bit `i` holding the coefficient of `xⁱ`.
/// `x⁵ + x² + 1` is `0b10_0101`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackPolynomial(pub u32);

impl FeedbackPolynomial {
    /// A known primitive polynomial for each supported degree.
    pub fn primitive(degree: u32) -> Result<Self> {
        let mask = match degree {
            2 => 0x7,
            3 => 0xB,
            4 => 0x13,
            5 => 0x25,
            6 => 0x43,
            7 => 0x83,
            8 => 0x11D,
            9 => 0x211,
            10 => 0x409,
            11 => 0x805,
            12 => 0x1053,
            13 => 0x201B,
            14 => 0x4443,
            15 => 0x8003,
            16 => 0x1100B,
            _ => {
                return Err(invalid(format!(
                    "m-sequence degree must be in [2, 16], got {degree}"
                )))
            }
        };
        Ok(Self(mask))
    }

    pub fn degree(&self) -> u32 {
        31 - self.0.leading_zeros()
    }
}

/// Chip sequence of a maximal-length LFSR, mapped `0 → +1`, `1 → -1`.
///
/// The register holds `(a[n], …, a[n+d-1])` with `a[n]` in bit 0 and the
/// recurrence `a[n+d] = Σ cᵢ·a[n+i]` over the non-leading coefficients.
pub fn generate_m_sequence(
    degree: u32,
    taps: FeedbackPolynomial,
    seed_state: u32,
) -> Result<Vec<f64>> {
    if !(2..=16).contains(&degree) {
        return Err(invalid(format!(
            "m-sequence degree must be in [2, 16], got {degree}"
        )));
    }
    if taps.degree() != degree || taps.0 & 1 == 0 {
        return Err(invalid(format!(
            "feedback polynomial {:#x} does not have degree {degree} with a constant term",
            taps.0
        )));
    }
    let state_mask = (1u32 << degree) - 1;
    let seed_state = seed_state & state_mask;
    if seed_state == 0 {
        return Err(invalid("LFSR seed state must be nonzero"));
    }
    let feedback = taps.0 & state_mask;
    let expected = state_mask as usize;

    let mut state = seed_state;
    let mut chips = Vec::with_capacity(expected);
    for step in 1..=expected {
        chips.push(if state & 1 == 0 { 1.0 } else { -1.0 });
        let bit = (state & feedback).count_ones() & 1;
        state = (state >> 1) | (bit << (degree - 1));
        if state == seed_state && step < expected {
            return Err(Error::NonPrimitivePolynomial {
                degree,
                period: step,
                expected,
            });
        }
    }
    debug_assert_eq!(state, seed_state);
    Ok(chips)
}

/// The default length-`2^degree - 1` sequence: tabulated primitive
/// polynomial, all-ones initial register.
pub fn default_m_sequence(degree: u32) -> Result<Vec<f64>> {
    let taps = FeedbackPolynomial::primitive(degree)?;
    generate_m_sequence(degree, taps, u32::MAX)
}

/// `N × K` matrix of unit-norm signatures, stored column by column, with
/// the Cholesky factor of its Gram matrix `SᵀS`.
#[derive(Debug, Clone)]
pub struct SpreadingMatrix {
    n_chips: usize,
    n_users: usize,
    columns: Vec<f64>,
    gram: Vec<f64>,
    gram_factor: Cholesky,
}

const NORM_TOL: f64 = 1e-12;

impl SpreadingMatrix {
    /// Build from explicit signature columns, each of length `n_chips`.
    pub fn from_columns(n_chips: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let n_users = columns.len();
        if n_chips == 0 || n_users == 0 {
            return Err(invalid(
                "spreading matrix needs at least one chip and one user",
            ));
        }
        if n_users > n_chips {
            return Err(invalid(format!(
                "number of users ({n_users}) exceeds processing gain ({n_chips})"
            )));
        }
        let mut flat = Vec::with_capacity(n_chips * n_users);
        for (k, col) in columns.iter().enumerate() {
            if col.len() != n_chips {
                return Err(invalid(format!(
                    "signature {k} has {} chips, expected {n_chips}",
                    col.len()
                )));
            }
            let norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(invalid(format!(
                    "signature {k} has norm {norm}, expected 1"
                )));
            }
            flat.extend_from_slice(col);
        }
        let mut gram = vec![0.0; n_users * n_users];
        for i in 0..n_users {
            for j in 0..=i {
                let a = &flat[i * n_chips..(i + 1) * n_chips];
                let b = &flat[j * n_chips..(j + 1) * n_chips];
                let v: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                gram[i * n_users + j] = v;
                gram[j * n_users + i] = v;
            }
        }
        let gram_factor = Cholesky::factor(&gram, n_users)?;
        Ok(Self {
            n_chips,
            n_users,
            columns: flat,
            gram,
            gram_factor,
        })
    }

    /// Column `k` is `base` cyclically delayed by `k` chips, scaled by `1/√N`.
    pub fn from_shifted_sequence(base: &[f64], n_users: usize) -> Result<Self> {
        let n = base.len();
        if n_users == 0 || n_users > n {
            return Err(invalid(format!(
                "number of users must be in [1, {n}], got {n_users}"
            )));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let columns: Vec<Vec<f64>> = (0..n_users)
            .map(|k| (0..n).map(|i| base[(i + n - k) % n] * scale).collect())
            .collect();
        Self::from_columns(n, &columns)
    }

    /// Shifted default m-sequence of the given degree.
    pub fn m_sequence(degree: u32, n_users: usize) -> Result<Self> {
        Self::from_shifted_sequence(&default_m_sequence(degree)?, n_users)
    }

    pub fn n_chips(&self) -> usize {
        self.n_chips
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k * self.n_chips..(k + 1) * self.n_chips]
    }

    pub fn entry(&self, chip: usize, user: usize) -> f64 {
        self.columns[user * self.n_chips + chip]
    }

    /// `SᵀS`, row-major `K × K`.
    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn gram_factor(&self) -> &Cholesky {
        &self.gram_factor
    }

    /// `[(SᵀS)⁻¹]ₖₖ`.
    pub fn inverse_gram_diagonal(&self, k: usize) -> f64 {
        self.gram_factor.inverse_column(k)[k]
    }

    /// `out = S·theta`.
    pub fn mul_into(&self, theta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, &t) in theta.iter().enumerate() {
            for (o, &s) in out.iter_mut().zip(self.column(k)) {
                *o += s * t;
            }
        }
    }

    pub fn mul(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_chips];
        self.mul_into(theta, &mut out);
        out
    }

    /// `out = Sᵀ·r`.
    pub fn mul_transpose_into(&self, r: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.column(k).iter().zip(r).map(|(s, x)| s * x).sum();
        }
    }

    pub fn mul_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_users];
        self.mul_transpose_into(r, &mut out);
        out
    }
}

/// One transmitted symbol interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub amplitudes: Vec<f64>,
    pub bits: Vec<i8>,
    pub theta: Vec<f64>,
    pub received: Vec<f64>,
}

fn check_symbols(s: &SpreadingMatrix, amplitudes: &[f64], bits: &[i8]) -> Result<Vec<f64>> {
    let k = s.n_users();
    if amplitudes.len() != k || bits.len() != k {
        return Err(invalid(format!(
            "expected {k} amplitudes and bits, got {} and {}",
            amplitudes.len(),
            bits.len()
        )));
    }
    if let Some(a) = amplitudes.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(invalid(format!("amplitudes must be positive, got {a}")));
    }
    if let Some(b) = bits.iter().find(|b| **b != 1 && **b != -1) {
        return Err(invalid(format!("bits must be +1 or -1, got {b}")));
    }
    Ok(amplitudes
        .iter()
        .zip(bits)
        .map(|(&a, &b)| a * f64::from(b))
        .collect())
}

/// `r = S·(A∘b) + n` with `n` supplied by the caller.
pub fn synthesize_with_noise(
    s: &SpreadingMatrix,
    amplitudes: &[f64],
    bits: &[i8],
    noise: &[f64],
) -> Result<Frame> {
    let theta = check_symbols(s, amplitudes, bits)?;
    if noise.len() != s.n_chips() {
        return Err(invalid(format!(
            "noise vector has length {}, expected {}",
            noise.len(),
            s.n_chips()
        )));
    }
    let mut received = s.mul(&theta);
    for (r, n) in received.iter_mut().zip(noise) {
        *r += n;
    }
    Ok(Frame {
        amplitudes: amplitudes.to_vec(),
        bits: bits.to_vec(),
        theta,
        received,
    })
}

/// `r = S·(A∘b) + n` with `n` drawn from the mixture model.
pub fn synthesize_received<R: Rng + ?Sized>(
    s: &SpreadingMatrix,
    amplitudes: &[f64],
    bits: &[i8],
    noise: &MixtureNoiseModel,
    rng: &mut R,
) -> Result<Frame> {
    let n = noise.sample(rng, s.n_chips());
    synthesize_with_noise(s, amplitudes, bits, &n)
}
