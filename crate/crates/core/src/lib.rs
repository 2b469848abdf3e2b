//! Robust M-estimation multiuser detection for synchronous DS-CDMA under
//! two-term Gaussian mixture (impulsive) noise.
//!
//! The crate covers the signal model `r = S·A·b + n`, the least-squares,
//! Huber minimax and redescending "x" penalties, a damped Newton
//! M-estimator, asymptotic variance / relative efficiency analysis with a
//! quadrature cross-check, and a reproducible Monte Carlo BER engine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod detector;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod numerics;
pub mod penalty;
pub mod rng;
pub mod spreading;

pub use analysis::{AreGrid, AsymptoticVariance, ClosedForm};
pub use detector::{decide_bits, decorrelate, detect, m_estimate, DetectionResult, SolverConfig};
pub use error::{Error, Result};
pub use montecarlo::{BerPoint, ExperimentSpec, NamedPenalty, SweepResult};
pub use noise::MixtureNoiseModel;
pub use numerics::QuadratureSpec;
pub use penalty::{
    HuberPenalty, HuberScale, LsPenalty, Penalty, PenaltyConfig, PenaltyFamily, XPenalty, XScale,
};
pub use spreading::{Frame, SpreadingMatrix};
