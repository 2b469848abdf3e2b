//! M-estimation multiuser detector: decorrelating start, damped Newton
//! iteration on `Σ ρ(r − Sθ)`, sign decisions.

use crate::error::{invalid, Error, Result};
use crate::penalty::Penalty;
use crate::spreading::SpreadingMatrix;

/// Iteration controls for [`m_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// `μ`.
    pub step_size: f64,
    pub max_iterations: usize,
    /// Threshold on `‖Sᵀψ(r − Sθ̂)‖∞`.
    pub stationarity_tol: f64,
}

impl SolverConfig {
    pub fn new(step_size: f64, max_iterations: usize, stationarity_tol: f64) -> Result<Self> {
        let cfg = Self {
            step_size,
            max_iterations,
            stationarity_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `μ` from the penalty's scale, 100 iterations, tolerance `1e-8·√K`.
    pub fn for_penalty<P: Penalty + ?Sized>(penalty: &P, n_users: usize) -> Self {
        Self {
            step_size: penalty.default_step(),
            max_iterations: 100,
            stationarity_tol: 1e-8 * (n_users as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(invalid(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        if !(self.stationarity_tol > 0.0) {
            return Err(invalid(format!(
                "stationarity tolerance must be positive, got {}",
                self.stationarity_tol
            )));
        }
        Ok(())
    }
}

/// Output of [`m_estimate`] / [`detect`].
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub theta_hat: Vec<f64>,
    pub bits: Vec<i8>,
    /// Number of correction steps applied after the decorrelating start.
    pub iterations: usize,
    pub converged: bool,
    /// `Σ ρ(r − Sθ̂)` at the start and after every step.
    pub objective_trace: Vec<f64>,
    /// `‖Sᵀψ(r − Sθ̂)‖∞` at the returned estimate.
    pub stationarity: f64,
}

fn check_received(s: &SpreadingMatrix, r: &[f64]) -> Result<()> {
    if r.len() != s.n_chips() {
        return Err(invalid(format!(
            "received vector has length {}, expected {}",
            r.len(),
            s.n_chips()
        )));
    }
    Ok(())
}

/// `(SᵀS)⁻¹Sᵀr`: the least-squares estimate of `θ`.
pub fn decorrelate(s: &SpreadingMatrix, r: &[f64]) -> Result<Vec<f64>> {
    check_received(s, r)?;
    let mut theta = s.mul_transpose(r);
    s.gram_factor().solve_in_place(&mut theta);
    Ok(theta)
}

/// `+1` for nonnegative components (zero included), `−1` otherwise.
pub fn decide_bits(theta_hat: &[f64]) -> Vec<i8> {
    theta_hat
        .iter()
        .map(|&t| if t < 0.0 { -1 } else { 1 })
        .collect()
}

/// Reusable buffers for repeated detection with one spreading matrix.
#[derive(Debug, Clone)]
pub struct Workspace {
    theta: Vec<f64>,
    residual: Vec<f64>,
    score: Vec<f64>,
    step: Vec<f64>,
}

impl Workspace {
    pub fn new(s: &SpreadingMatrix) -> Self {
        Self {
            theta: vec![0.0; s.n_users()],
            residual: vec![0.0; s.n_chips()],
            score: vec![0.0; s.n_chips()],
            step: vec![0.0; s.n_users()],
        }
    }

    /// Estimate from the most recent [`Workspace::run`].
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Run the iteration, leaving `θ̂` in the workspace.
    ///
    /// Returns `(iterations, converged, stationarity)`. When `trace` is
    /// given the objective at every iterate is appended to it.
    pub fn run<P: Penalty + ?Sized>(
        &mut self,
        s: &SpreadingMatrix,
        r: &[f64],
        penalty: &P,
        config: &SolverConfig,
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<(usize, bool, f64)> {
        check_received(s, r)?;
        if self.theta.len() != s.n_users() || self.residual.len() != s.n_chips() {
            *self = Self::new(s);
        }
        let factor = s.gram_factor();

        s.mul_transpose_into(r, &mut self.theta);
        factor.solve_in_place(&mut self.theta);

        let mut iterations = 0;
        loop {
            s.mul_into(&self.theta, &mut self.residual);
            let mut objective = 0.0;
            for ((res, sc), &obs) in self.residual.iter_mut().zip(self.score.iter_mut()).zip(r) {
                *res = obs - *res;
                *sc = penalty.psi(*res);
                if trace.is_some() {
                    objective += penalty.rho(*res);
                }
            }
            if self.residual.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite residual after {iterations} iterations"
                )));
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(objective);
            }
            s.mul_transpose_into(&self.score, &mut self.step);
            let stationarity = self.step.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
            if stationarity <= config.stationarity_tol {
                return Ok((iterations, true, stationarity));
            }
            if iterations >= config.max_iterations {
                return Ok((iterations, false, stationarity));
            }
            factor.solve_in_place(&mut self.step);
            for (t, d) in self.theta.iter_mut().zip(&self.step) {
                *t += config.step_size * d;
            }
            iterations += 1;
        }
    }
}

/// `θ̂⁽ⁱ⁺¹⁾ = θ̂⁽ⁱ⁾ + μ(SᵀS)⁻¹Sᵀψ(r − Sθ̂⁽ⁱ⁾)` from the decorrelating
/// estimate, until `‖Sᵀψ‖∞ ≤ tol` or the iteration budget is spent.
///
/// The step ascends `Sᵀψ`, which is minus the gradient of `Σ ρ(r − Sθ)`,
/// so every step is a descent direction of the objective.
pub fn m_estimate<P: Penalty + ?Sized>(
    s: &SpreadingMatrix,
    r: &[f64],
    penalty: &P,
    config: &SolverConfig,
) -> Result<DetectionResult> {
    config.validate()?;
    let mut ws = Workspace::new(s);
    let mut trace = Vec::new();
    let (iterations, converged, stationarity) = ws.run(s, r, penalty, config, Some(&mut trace))?;
    let theta_hat = ws.theta.clone();
    Ok(DetectionResult {
        bits: decide_bits(&theta_hat),
        theta_hat,
        iterations,
        converged,
        objective_trace: trace,
        stationarity,
    })
}

/// [`m_estimate`] followed by [`decide_bits`].
pub fn detect<P: Penalty + ?Sized>(
    s: &SpreadingMatrix,
    r: &[f64],
    penalty: &P,
    config: &SolverConfig,
) -> Result<DetectionResult> {
    m_estimate(s, r, penalty, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::MixtureNoiseModel;
    use crate::penalty::{HuberPenalty, LsPenalty, XPenalty};
    use crate::spreading::synthesize_with_noise;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m_seq() -> SpreadingMatrix {
        SpreadingMatrix::m_sequence(5, 5).unwrap()
    }

    #[test]
    fn decorrelate_noiseless_recovers_theta() {
        let s = m_seq();
        let theta = [1.0, 1.0, -1.0, 1.0, -1.0];
        let r = s.mul(&theta);
        let est = decorrelate(&s, &r).unwrap();
        for (a, b) in est.iter().zip(&theta) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn decorrelate_orthonormal_is_matched_filter() {
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|k| (0..6).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
            .collect();
        let s = SpreadingMatrix::from_columns(6, &cols).unwrap();
        let r = [0.3, -1.2, 2.0, 5.0, 6.0, 7.0];
        assert_eq!(decorrelate(&s, &r).unwrap(), s.mul_transpose(&r));
        assert_eq!(decorrelate(&s, &r).unwrap(), vec![0.3, -1.2, 2.0]);
    }

    #[test]
    fn decide_bits_tie_rule() {
        assert_eq!(decide_bits(&[0.3, -1.2]), vec![1, -1]);
        assert_eq!(decide_bits(&[0.0]), vec![1]);
        assert_eq!(decide_bits(&[-0.0]), vec![1]);
    }

    #[test]
    fn ls_penalty_converges_at_start() {
        let s = m_seq();
        let noise = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        let n = noise.sample(&mut ChaCha8Rng::seed_from_u64(1), 31);
        let f = synthesize_with_noise(&s, &[1.0; 5], &[1, -1, 1, 1, -1], &n).unwrap();
        let cfg = SolverConfig::for_penalty(&LsPenalty, 5);
        let res = detect(&s, &f.received, &LsPenalty, &cfg).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 1);
        let ls = decorrelate(&s, &f.received).unwrap();
        for (a, b) in res.theta_hat.iter().zip(&ls) {
            assert!((a - b).abs() <= 1e-10);
        }
        assert_eq!(res.bits, decide_bits(&ls));
    }

    #[test]
    fn noiseless_frame_is_a_fixed_point() {
        let s = m_seq();
        let bits = [1, 1, -1, 1, -1];
        let f = synthesize_with_noise(&s, &[2.0; 5], &bits, &[0.0; 31]).unwrap();
        let x = XPenalty::new(1.0).unwrap();
        let res = detect(&s, &f.received, &x, &SolverConfig::for_penalty(&x, 5)).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.bits, bits.to_vec());
    }

    #[test]
    fn robust_detectors_descend_and_satisfy_estimating_equations() {
        let s = m_seq();
        let noise = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = XPenalty::new(1.0).unwrap();
        let h = HuberPenalty::minimax(&noise).unwrap();
        for _ in 0..50 {
            let n = noise.sample(&mut rng, 31);
            let f = synthesize_with_noise(&s, &[1.0; 5], &[1, -1, -1, 1, 1], &n).unwrap();
            for p in [&x as &dyn Penalty, &h] {
                let cfg = SolverConfig::for_penalty(p, 5);
                let res = m_estimate(&s, &f.received, p, &cfg).unwrap();
                for w in res.objective_trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12, "{} increased: {:?}", p.name(), w);
                }
                if res.converged {
                    let resid: Vec<f64> = f
                        .received
                        .iter()
                        .zip(s.mul(&res.theta_hat))
                        .map(|(a, b)| p.psi(a - b))
                        .collect();
                    let g = s.mul_transpose(&resid);
                    assert!(g.iter().all(|v| v.abs() <= cfg.stationarity_tol));
                }
            }
        }
    }

    #[test]
    fn negating_signal_and_noise_negates_estimate() {
        let s = m_seq();
        let noise = MixtureNoiseModel::calibrate(0.1, 100.0, 1.0).unwrap();
        let n = noise.sample(&mut ChaCha8Rng::seed_from_u64(3), 31);
        let neg: Vec<f64> = n.iter().map(|v| -v).collect();
        let bits = [1, -1, 1, 1, -1];
        let nbits: Vec<i8> = bits.iter().map(|b| -b).collect();
        let f1 = synthesize_with_noise(&s, &[1.0; 5], &bits, &n).unwrap();
        let f2 = synthesize_with_noise(&s, &[1.0; 5], &nbits, &neg).unwrap();
        let x = XPenalty::new(1.0).unwrap();
        let cfg = SolverConfig::for_penalty(&x, 5);
        let a = m_estimate(&s, &f1.received, &x, &cfg).unwrap();
        let b = m_estimate(&s, &f2.received, &x, &cfg).unwrap();
        for (u, v) in a.theta_hat.iter().zip(&b.theta_hat) {
            assert_eq!(*u, -*v);
        }
    }

    #[test]
    fn errors() {
        let s = m_seq();
        let x = XPenalty::new(1.0).unwrap();
        let cfg = SolverConfig::for_penalty(&x, 5);
        assert!(m_estimate(&s, &[0.0; 30], &x, &cfg).is_err());
        let mut r = vec![0.0; 31];
        r[3] = f64::NAN;
        assert!(matches!(
            m_estimate(&s, &r, &x, &cfg),
            Err(Error::Numeric(_))
        ));
        assert!(SolverConfig::new(0.0, 10, 1e-8).is_err());
        assert!(SolverConfig::new(1.0, 0, 1e-8).is_err());
        assert!(SolverConfig::new(1.0, 10, 0.0).is_err());
    }

    #[test]
    fn default_step_matches_scale() {
        let x = XPenalty::new(0.4).unwrap();
        let cfg = SolverConfig::for_penalty(&x, 4);
        assert_eq!(cfg.step_size, 0.4);
        assert_eq!(cfg.max_iterations, 100);
        assert!((cfg.stationarity_tol - 2e-8).abs() < 1e-22);
    }
}
