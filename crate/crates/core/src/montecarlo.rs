//! Frame-level Monte Carlo BER for user 1 under perfect power control.
//!
//! Frame `t` at SNR point `s` always draws its bits and noise from the
//! stream addressed by `(seed, s, t)`, so every detector in a sweep sees the
//! same channel realizations and results do not depend on thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::detector::{decide_bits, SolverConfig, Workspace};
use crate::error::{invalid, Result};
use crate::noise::MixtureNoiseModel;
use crate::numerics::q_function;
use crate::penalty::{HuberScale, PenaltyConfig, XScale};
use crate::rng::StreamFamily;
use crate::spreading::{synthesize_with_noise, Frame, SpreadingMatrix};

/// `A = σ·10^(snr/20)`, so that `A²/σ² = 10^(snr/10)`.
pub fn snr_to_amplitude(snr_db: f64, total_noise_variance: f64) -> f64 {
    total_noise_variance.sqrt() * 10f64.powf(snr_db / 20.0)
}

/// A detector entry in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedPenalty {
    pub name: String,
    pub config: PenaltyConfig,
    /// Overrides the penalty's default step size `μ`.
    pub step_size: Option<f64>,
}

impl NamedPenalty {
    pub fn new(config: PenaltyConfig) -> Self {
        Self {
            name: config.name().to_string(),
            config,
            step_size: None,
        }
    }

    pub fn ls() -> Self {
        Self::new(PenaltyConfig::Ls)
    }

    pub fn huber_minimax() -> Self {
        Self::new(PenaltyConfig::Huber(HuberScale::Minimax))
    }

    pub fn x_total() -> Self {
        Self::new(PenaltyConfig::X(XScale::Total))
    }
}

/// Everything that determines a BER sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_users: usize,
    pub n_chips: usize,
    pub epsilon: f64,
    pub kappa: f64,
    pub total_variance: f64,
    pub snr_db: Vec<f64>,
    pub penalties: Vec<NamedPenalty>,
    pub seed: u64,
    pub min_errors: u64,
    pub max_frames: u64,
    pub max_iterations: usize,
    /// Multiplies every noise sample; `0` gives a noiseless channel.
    pub noise_gain: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n_users: 5,
            n_chips: 31,
            epsilon: 0.01,
            kappa: 100.0,
            total_variance: 1.0,
            snr_db: (0..=6).map(|i| 2.0 * i as f64).collect(),
            penalties: vec![
                NamedPenalty::ls(),
                NamedPenalty::huber_minimax(),
                NamedPenalty::x_total(),
            ],
            seed: 1,
            min_errors: 100,
            max_frames: 1_000_000,
            max_iterations: 100,
            noise_gain: 1.0,
        }
    }
}

impl ExperimentSpec {
    pub fn noise(&self) -> Result<MixtureNoiseModel> {
        MixtureNoiseModel::calibrate(self.epsilon, self.kappa, self.total_variance)
    }

    pub fn validate(&self, s: &SpreadingMatrix) -> Result<()> {
        if s.n_users() != self.n_users || s.n_chips() != self.n_chips {
            return Err(invalid(format!(
                "spreading matrix is {}x{}, experiment expects {}x{}",
                s.n_chips(),
                s.n_users(),
                self.n_chips,
                self.n_users
            )));
        }
        if self.min_errors == 0 || self.max_frames == 0 {
            return Err(invalid("min_errors and max_frames must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(invalid(format!("SNR points must be finite, got {s}")));
        }
        if !(self.noise_gain >= 0.0) || !self.noise_gain.is_finite() {
            return Err(invalid(format!(
                "noise gain must be nonnegative, got {}",
                self.noise_gain
            )));
        }
        if self.snr_db.len() >= (1 << 24) {
            return Err(invalid("too many SNR points"));
        }
        self.noise()?;
        Ok(())
    }
}

/// BER estimate at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci95_halfwidth: f64,
    /// Frames whose solver hit the iteration cap.
    pub unconverged: u64,
}

impl BerPoint {
    fn new(snr_db: f64, frames: u64, errors: u64, unconverged: u64) -> Self {
        let ber = errors as f64 / frames as f64;
        Self {
            snr_db,
            frames,
            errors,
            ber,
            ci95_halfwidth: 1.96 * (ber * (1.0 - ber) / frames as f64).sqrt(),
            unconverged,
        }
    }
}

/// The bits and received vector of frame `frame` at SNR point `point`.
pub fn frame_realization(
    spec: &ExperimentSpec,
    streams: &StreamFamily,
    s: &SpreadingMatrix,
    noise: &MixtureNoiseModel,
    point: usize,
    frame: u64,
) -> Result<Frame> {
    let amplitude = snr_to_amplitude(spec.snr_db[point], spec.total_variance);
    let mut rng = streams.frame_stream(point as u32, frame);
    let bits: Vec<i8> = (0..s.n_users())
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut n = noise.sample(&mut rng, s.n_chips());
    if spec.noise_gain != 1.0 {
        n.iter_mut().for_each(|v| *v *= spec.noise_gain);
    }
    synthesize_with_noise(s, &vec![amplitude; s.n_users()], &bits, &n)
}

/// First batch size; later batches double up to [`MAX_BATCH`].
const FIRST_BATCH: u64 = 256;
const MAX_BATCH: u64 = 1 << 16;

/// Observer called with every simulated frame (in no particular order).
pub type FrameAudit<'a> = &'a (dyn Fn(u64, &Frame) + Sync);

/// BER of user 1 at SNR point `point` for one detector.
///
/// Frames are simulated until `min_errors` user-1 errors or `max_frames`
/// frames, whichever comes first; the stopping frame is exact.
pub fn run_ber_point(
    spec: &ExperimentSpec,
    point: usize,
    penalty: &NamedPenalty,
    s: &SpreadingMatrix,
) -> Result<BerPoint> {
    run_ber_point_audited(spec, point, penalty, s, None)
}

pub fn run_ber_point_audited(
    spec: &ExperimentSpec,
    point: usize,
    penalty: &NamedPenalty,
    s: &SpreadingMatrix,
    audit: Option<FrameAudit<'_>>,
) -> Result<BerPoint> {
    spec.validate(s)?;
    if point >= spec.snr_db.len() {
        return Err(invalid(format!("SNR point {point} out of range")));
    }
    let noise = spec.noise()?;
    let family = penalty.config.resolve(&noise)?;
    let mut config = SolverConfig::for_penalty(&family, s.n_users());
    config.max_iterations = spec.max_iterations;
    if let Some(mu) = penalty.step_size {
        config.step_size = mu;
    }
    config.validate()?;
    let streams = StreamFamily::new(spec.seed);

    let mut frames = 0u64;
    let mut errors = 0u64;
    let mut unconverged = 0u64;
    let mut batch = FIRST_BATCH;
    while frames < spec.max_frames && errors < spec.min_errors {
        let end = (frames + batch).min(spec.max_frames);
        let outcomes: Vec<(bool, bool)> = (frames..end)
            .into_par_iter()
            .map_init(
                || Workspace::new(s),
                |ws, t| -> Result<(bool, bool)> {
                    let frame = frame_realization(spec, &streams, s, &noise, point, t)?;
                    if let Some(a) = audit {
                        a(t, &frame);
                    }
                    let (_, converged, _) = ws.run(s, &frame.received, &family, &config, None)?;
                    let decided = decide_bits(&ws.theta()[..1])[0];
                    Ok((decided != frame.bits[0], converged))
                },
            )
            .collect::<Result<_>>()?;
        for (error, converged) in outcomes {
            frames += 1;
            errors += u64::from(error);
            unconverged += u64::from(!converged);
            if errors >= spec.min_errors {
                break;
            }
        }
        batch = (batch * 2).min(MAX_BATCH);
    }
    Ok(BerPoint::new(
        spec.snr_db[point],
        frames,
        errors,
        unconverged,
    ))
}

/// BER curves for each configured detector, in configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub curves: Vec<(String, Vec<BerPoint>)>,
}

impl SweepResult {
    pub fn curve(&self, name: &str) -> Option<&[BerPoint]> {
        self.curves
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }
}

/// Run every detector over every SNR point with common random numbers.
pub fn sweep(spec: &ExperimentSpec, s: &SpreadingMatrix) -> Result<SweepResult> {
    spec.validate(s)?;
    let mut curves = Vec::with_capacity(spec.penalties.len());
    for penalty in &spec.penalties {
        let points = (0..spec.snr_db.len())
            .map(|p| run_ber_point(spec, p, penalty, s))
            .collect::<Result<Vec<_>>>()?;
        curves.push((penalty.name.clone(), points));
    }
    Ok(SweepResult { curves })
}

/// Gaussian-noise BER of the decorrelating detector for user `k`:
/// `Q(A / (σ·√[(SᵀS)⁻¹]ₖₖ))`.
pub fn decorrelator_ber(
    s: &SpreadingMatrix,
    user: usize,
    amplitude: f64,
    noise_variance: f64,
) -> f64 {
    let inflation = s.inverse_gram_diagonal(user);
    q_function(amplitude / (noise_variance * inflation).sqrt())
}

/// Smallest SNR on the curve at which the BER is at or below `target`.
pub fn snr_reaching(curve: &[BerPoint], target: f64) -> Option<f64> {
    curve.iter().find(|p| p.ber <= target).map(|p| p.snr_db)
}
