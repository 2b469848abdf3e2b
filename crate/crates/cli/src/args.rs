//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::parse;

#[derive(Debug, Parser)]
#[command(
    name = "impulse-mud",
    version,
    about = "Robust multiuser detection in impulsive noise"
)]
pub struct Cli {
    /// Flat key=value file whose entries act as defaults for the command's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo BER of user 1 versus SNR.
    #[command(args_override_self = true)]
    Ber(BerArgs),
    /// Asymptotic relative efficiency of the x-detector over an (epsilon, kappa) grid.
    #[command(args_override_self = true)]
    Are(AreArgs),
    /// Tabulate rho, psi and psi' of a penalty family.
    #[command(args_override_self = true)]
    DumpPsi(DumpPsiArgs),
    /// Write the shifted m-sequence spreading matrix.
    #[command(args_override_self = true)]
    DumpCodes(DumpCodesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Write CSV here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// Manifest path; defaults to `<output>.manifest` when --output is given.
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, value_parser = parse::positive_usize)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BerArgs {
    #[arg(long, default_value = "5", value_parser = parse::positive_usize)]
    pub users: usize,

    /// Processing gain; must be 2^d - 1 for an m-sequence of degree d.
    #[arg(long, default_value = "31", value_parser = parse::positive_usize)]
    pub chips: usize,

    #[arg(long, default_value = "0.01", value_parser = parse::epsilon)]
    pub epsilon: f64,

    #[arg(long, default_value = "100", value_parser = parse::kappa)]
    pub kappa: f64,

    #[arg(long, default_value = "1", value_parser = parse::positive_f64)]
    pub total_variance: f64,

    /// start:stop:step in dB, inclusive.
    #[arg(long, default_value = "0:12:2", allow_hyphen_values = true, value_parser = parse::range)]
    pub snr: Grid,

    /// Comma-separated detectors: ls, huber, x.
    #[arg(long, default_value = "ls,huber,x", value_parser = parse::detectors)]
    pub detectors: DetectorList,

    #[arg(long, env = "IMPULSE_MUD_SEED", default_value = "1")]
    pub seed: u64,

    #[arg(long, default_value = "100", value_parser = parse::positive_u64)]
    pub min_errors: u64,

    #[arg(long, default_value = "1000000", value_parser = parse::positive_u64)]
    pub max_frames: u64,

    #[arg(long, default_value = "100", value_parser = parse::positive_usize)]
    pub max_iterations: usize,

    /// x-detector scale: total, nominal, or a positive number.
    #[arg(long, default_value = "total", value_parser = parse::x_scale)]
    pub x_scale: impulse_mud::XScale,

    /// Huber threshold: minimax, or a positive number.
    #[arg(long, default_value = "minimax", value_parser = parse::huber_scale)]
    pub huber_threshold: impulse_mud::HuberScale,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Args)]
pub struct AreArgs {
    /// Comma-separated epsilons (default: 20 log-spaced points in [1e-3, 0.3]).
    #[arg(long, value_parser = parse::epsilon_list)]
    pub epsilons: Option<EpsilonList>,

    #[arg(long, default_value = "10,50,100,1000", value_parser = parse::kappa_list)]
    pub kappas: KappaList,

    #[arg(long, default_value = "1", value_parser = parse::positive_f64)]
    pub total_variance: f64,

    #[arg(long, default_value = "total", value_parser = parse::x_scale)]
    pub x_scale: impulse_mud::XScale,

    /// Use the literal (uncorrected) numerator formula for V_x.
    #[arg(long)]
    pub verbatim_eq9: bool,

    #[command(flatten)]
    pub out: Output,
}

/// Points of an inclusive `start:stop:step` range.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorList(pub Vec<String>);

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonList(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct KappaList(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    Ls,
    Huber,
    X,
}

#[derive(Debug, Clone, Args)]
pub struct DumpPsiArgs {
    #[arg(long, value_enum, default_value = "x")]
    pub family: Family,

    /// Scale of the x-penalty.
    #[arg(long, default_value = "1", value_parser = parse::positive_f64)]
    pub sigma: f64,

    /// Explicit Huber threshold; overrides --epsilon.
    #[arg(long, value_parser = parse::positive_f64)]
    pub gamma: Option<f64>,

    /// Contamination level for the minimax Huber threshold.
    #[arg(long, default_value = "0.1", value_parser = parse::epsilon)]
    pub epsilon: f64,

    /// Background standard deviation that scales the minimax threshold.
    #[arg(long, default_value = "1", value_parser = parse::positive_f64)]
    pub nominal_std: f64,

    /// start:stop:step, inclusive.
    #[arg(long, default_value = "-5:5:0.01", allow_hyphen_values = true, value_parser = parse::range)]
    pub range: Grid,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, Args)]
pub struct DumpCodesArgs {
    /// m-sequence degree; the code length is 2^degree - 1.
    #[arg(long, default_value = "5", value_parser = clap::value_parser!(u32).range(2..=16))]
    pub degree: u32,

    #[arg(long, default_value = "5", value_parser = parse::positive_usize)]
    pub users: usize,

    /// Feedback polynomial as a hex mask (bit i = coefficient of x^i).
    #[arg(long, value_parser = parse::hex_u32)]
    pub taps: Option<u32>,

    #[command(flatten)]
    pub out: Output,
}
