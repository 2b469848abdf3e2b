//! Two-term Gaussian mixture ambient noise.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::numerics::normal_pdf_unchecked;

/// `(1-ε)·N(0, ν²) + ε·N(0, κν²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureNoiseModel {
    epsilon: f64,
    kappa: f64,
    nominal_variance: f64,
}

/// Per-call bookkeeping of which mixture branch produced each draw.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchCounts {
    pub nominal: u64,
    pub impulsive: u64,
}

fn check(epsilon: f64, kappa: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(invalid(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(invalid(format!("kappa must be >= 1, got {kappa}")));
    }
    Ok(())
}

impl MixtureNoiseModel {
    pub fn new(epsilon: f64, kappa: f64, nominal_variance: f64) -> Result<Self> {
        check(epsilon, kappa)?;
        if !(nominal_variance > 0.0) || !nominal_variance.is_finite() {
            return Err(invalid(format!(
                "nominal variance must be positive, got {nominal_variance}"
            )));
        }
        Ok(Self {
            epsilon,
            kappa,
            nominal_variance,
        })
    }

    /// Model with the given total variance: `ν² = σ² / ((1-ε) + εκ)`.
    pub fn calibrate(epsilon: f64, kappa: f64, total_variance: f64) -> Result<Self> {
        check(epsilon, kappa)?;
        if !(total_variance > 0.0) || !total_variance.is_finite() {
            return Err(invalid(format!(
                "total variance must be positive, got {total_variance}"
            )));
        }
        let nominal_variance = total_variance / ((1.0 - epsilon) + epsilon * kappa);
        Self::new(epsilon, kappa, nominal_variance)
    }

    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::new(0.0, 1.0, variance)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Background variance ν².
    pub fn nominal_variance(&self) -> f64 {
        self.nominal_variance
    }

    pub fn nominal_std(&self) -> f64 {
        self.nominal_variance.sqrt()
    }

    pub fn impulsive_variance(&self) -> f64 {
        self.kappa * self.nominal_variance
    }

    /// `(1-ε)ν² + εκν²`.
    pub fn total_variance(&self) -> f64 {
        (1.0 - self.epsilon) * self.nominal_variance
            + self.epsilon * self.kappa * self.nominal_variance
    }

    pub fn total_std(&self) -> f64 {
        self.total_variance().sqrt()
    }

    /// The same mixture shape with every variance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.epsilon, self.kappa, self.nominal_variance * factor)
    }

    /// Mixture components as `(weight, variance)`; zero-weight components
    /// are omitted.
    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> {
        [
            (1.0 - self.epsilon, self.nominal_variance),
            (self.epsilon, self.impulsive_variance()),
        ]
        .into_iter()
        .filter(|&(w, _)| w > 0.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components()
            .map(|(w, var)| w * normal_pdf_unchecked(x, var))
            .sum()
    }

    /// One draw; the flag is true when the impulsive branch fired.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let impulsive = self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon;
        let z: f64 = rng.sample(StandardNormal);
        let var = if impulsive {
            self.impulsive_variance()
        } else {
            self.nominal_variance
        };
        (z * var.sqrt(), impulsive)
    }

    /// Fill `out` with i.i.d. draws and report the branch counts.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> BranchCounts {
        let mut counts = BranchCounts::default();
        for slot in out.iter_mut() {
            let (x, impulsive) = self.draw(rng);
            *slot = x;
            if impulsive {
                counts.impulsive += 1;
            } else {
                counts.nominal += 1;
            }
        }
        counts
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.sample_into(rng, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_pdf, integrate_piecewise, QuadratureSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn calibration_examples() {
        let m = MixtureNoiseModel::calibrate(0.0, 100.0, 1.0).unwrap();
        assert_eq!(m.nominal_variance(), 1.0);
        let m = MixtureNoiseModel::calibrate(0.01, 100.0, 1.0).unwrap();
        assert!((m.nominal_variance() - 1.0 / 1.99).abs() < 1e-15);
        assert!((m.nominal_variance() - 0.502_512_6).abs() < 1e-7);
        let m = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        assert!((m.nominal_variance() - 1.0 / 10.9).abs() < 1e-15);
        assert!((m.nominal_variance() - 0.091_743_1).abs() < 1e-7);
    }

    #[test]
    fn calibration_round_trip_grid() {
        for &eps in &[0.0, 0.001, 0.01, 0.1, 0.3] {
            for &kappa in &[1.0, 10.0, 50.0, 100.0, 1000.0] {
                for &total in &[1.0, 0.37, 12.5] {
                    let m = MixtureNoiseModel::calibrate(eps, kappa, total).unwrap();
                    let rel = (m.total_variance() - total).abs() / total;
                    assert!(rel <= 1e-14, "eps {eps} kappa {kappa}: rel {rel}");
                }
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(MixtureNoiseModel::calibrate(1.0, 10.0, 1.0).is_err());
        assert!(MixtureNoiseModel::calibrate(-0.1, 10.0, 1.0).is_err());
        assert!(MixtureNoiseModel::calibrate(0.1, 0.5, 1.0).is_err());
        assert!(MixtureNoiseModel::calibrate(0.1, 10.0, 0.0).is_err());
        assert!(MixtureNoiseModel::new(0.1, 10.0, -1.0).is_err());
        assert!(MixtureNoiseModel::calibrate(0.5, 1.0, 1.0).is_ok());
    }

    #[test]
    fn degenerate_mixture_is_gaussian() {
        let m = MixtureNoiseModel::new(0.0, 100.0, 0.7).unwrap();
        for &x in &[-3.0, -0.2, 0.0, 1.1, 4.0] {
            assert_eq!(m.pdf(x), gaussian_pdf(x, 0.7).unwrap());
        }
        // κ = 1 collapses regardless of ε.
        let m = MixtureNoiseModel::new(0.4, 1.0, 0.7).unwrap();
        for &x in &[-3.0, 0.0, 1.1] {
            assert!((m.pdf(x) - gaussian_pdf(x, 0.7).unwrap()).abs() < 1e-16);
        }
    }

    #[test]
    fn pdf_is_symmetric_density() {
        let m = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        assert_eq!(m.pdf(2.5), m.pdf(-2.5));
        let spec = QuadratureSpec::default();
        let t = 40.0 * m.impulsive_variance().sqrt();
        let mass = integrate_piecewise(|x| m.pdf(x), &[-t, 0.0, t], &spec).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
        let second = integrate_piecewise(|x| x * x * m.pdf(x), &[-t, 0.0, t], &spec).unwrap();
        assert!((second - m.total_variance()).abs() / m.total_variance() < 1e-8);
        let inf = integrate_piecewise(
            |x| m.pdf(x),
            &[f64::NEG_INFINITY, 0.0, f64::INFINITY],
            &spec,
        )
        .unwrap();
        assert!((inf - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_sampling_variance() {
        let m = MixtureNoiseModel::new(0.0, 100.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = m.sample(&mut rng, 1_000_000);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var - 0.5).abs() / 0.5 < 0.01, "{var}");
    }

    #[test]
    fn mixture_sampling_variance_and_branch_fraction() {
        let m = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 1_000_000usize;
        let mut xs = vec![0.0; n];
        let counts = m.sample_into(&mut rng, &mut xs);
        assert_eq!(counts.nominal + counts.impulsive, n as u64);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.02, "{var}");
        let frac = counts.impulsive as f64 / n as f64;
        let bound = 3.0 * (0.1 * 0.9 / n as f64).sqrt();
        assert!((frac - 0.1).abs() <= bound, "{frac}");
    }

    #[test]
    fn sampling_is_deterministic_given_stream() {
        let m = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        let a = m.sample(&mut ChaCha8Rng::seed_from_u64(5), 64);
        let b = m.sample(&mut ChaCha8Rng::seed_from_u64(5), 64);
        assert_eq!(a, b);
    }
}
