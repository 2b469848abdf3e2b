//! The four subcommands, each producing a [`Report`].

use impulse_mud::analysis::{are_grid, AreOptions};
use impulse_mud::montecarlo::sweep;
use impulse_mud::penalty::{huber_threshold, HuberPenalty, LsPenalty, PenaltyFamily, XPenalty};
use impulse_mud::spreading::{generate_m_sequence, FeedbackPolynomial};
use impulse_mud::{
    ClosedForm, ExperimentSpec, HuberScale, NamedPenalty, Penalty, PenaltyConfig, SpreadingMatrix,
    XScale,
};

use crate::args::{AreArgs, BerArgs, DumpCodesArgs, DumpPsiArgs, Family};
use crate::format::{g12, sig};
use crate::{CliError, Report};

/// Log-spaced default epsilon axis for `are`.
pub fn default_epsilons() -> Vec<f64> {
    let (lo, hi, n) = (1e-3f64.log10(), 0.3f64.log10(), 20);
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

fn degree_for_chips(chips: usize) -> Result<u32, CliError> {
    let n = chips + 1;
    if !n.is_power_of_two() || !(3..=65535).contains(&chips) {
        return Err(CliError::Usage(format!(
            "--chips must be 2^d - 1 for d in 2..=16, got {chips}"
        )));
    }
    Ok(n.trailing_zeros())
}

fn x_scale_text(s: XScale) -> String {
    match s {
        XScale::Total => "total".into(),
        XScale::Nominal => "nominal".into(),
        XScale::Fixed(v) => g12(v),
    }
}

fn huber_scale_text(s: HuberScale) -> String {
    match s {
        HuberScale::Minimax => "minimax".into(),
        HuberScale::Fixed(v) => g12(v),
    }
}

fn list_text(xs: &[f64]) -> String {
    xs.iter().map(|&x| g12(x)).collect::<Vec<_>>().join(",")
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn ber(a: &BerArgs) -> Result<Report, CliError> {
    let degree = degree_for_chips(a.chips)?;
    if a.users > a.chips {
        return Err(CliError::Usage(format!(
            "--users ({}) cannot exceed --chips ({})",
            a.users, a.chips
        )));
    }
    let s = SpreadingMatrix::m_sequence(degree, a.users)?;
    let penalties = a
        .detectors
        .0
        .iter()
        .map(|d| match d.as_str() {
            "ls" => NamedPenalty::ls(),
            "huber" => NamedPenalty::new(PenaltyConfig::Huber(a.huber_threshold)),
            _ => NamedPenalty::new(PenaltyConfig::X(a.x_scale)),
        })
        .collect();
    let spec = ExperimentSpec {
        n_users: a.users,
        n_chips: a.chips,
        epsilon: a.epsilon,
        kappa: a.kappa,
        total_variance: a.total_variance,
        snr_db: a.snr.0.clone(),
        penalties,
        seed: a.seed,
        min_errors: a.min_errors,
        max_frames: a.max_frames,
        max_iterations: a.max_iterations,
        noise_gain: 1.0,
    };
    let result = sweep(&spec, &s)?;

    let mut csv = String::from("detector,snr_db,frames,errors,ber,ci95\n");
    for (name, curve) in &result.curves {
        for p in curve {
            csv.push_str(&format!(
                "{name},{},{},{},{},{}\n",
                g12(p.snr_db),
                p.frames,
                p.errors,
                g12(p.ber),
                g12(p.ci95_halfwidth)
            ));
        }
    }
    let parameters = vec![
        kv("users", a.users),
        kv("chips", a.chips),
        kv("epsilon", g12(a.epsilon)),
        kv("kappa", g12(a.kappa)),
        kv("total_variance", g12(a.total_variance)),
        kv("snr_db", list_text(&a.snr.0)),
        kv("detectors", a.detectors.0.join(",")),
        kv("min_errors", a.min_errors),
        kv("max_frames", a.max_frames),
        kv("max_iterations", a.max_iterations),
        kv("x_scale", x_scale_text(a.x_scale)),
        kv("huber_threshold", huber_scale_text(a.huber_threshold)),
    ];
    Ok(Report {
        csv,
        parameters,
        seed: Some(a.seed),
    })
}

pub fn are(a: &AreArgs) -> Result<Report, CliError> {
    let epsilons = a
        .epsilons
        .as_ref()
        .map(|e| e.0.clone())
        .unwrap_or_else(default_epsilons);
    let kappas = &a.kappas.0;
    let form = if a.verbatim_eq9 {
        ClosedForm::LiteralNumerator
    } else {
        ClosedForm::Corrected
    };
    let options = AreOptions {
        total_variance: a.total_variance,
        x_scale: a.x_scale,
        form,
        ..AreOptions::default()
    };
    let grid = are_grid(&epsilons, kappas, &options)?;

    let mut csv = String::from("epsilon,kappa,V_x,V_other,ARE\n");
    for c in &grid.cells {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            g12(c.epsilon),
            g12(c.kappa),
            g12(c.v_x.value),
            g12(c.v_other.value),
            g12(c.are)
        ));
    }
    let parameters = vec![
        kv("epsilons", list_text(&epsilons)),
        kv("kappas", list_text(kappas)),
        kv("total_variance", g12(a.total_variance)),
        kv("x_scale", x_scale_text(a.x_scale)),
        kv("other", "huber-minimax"),
        kv("verbatim_eq9", a.verbatim_eq9),
    ];
    Ok(Report {
        csv,
        parameters,
        seed: None,
    })
}

pub fn dump_psi(a: &DumpPsiArgs) -> Result<Report, CliError> {
    let (family, mut parameters) = match a.family {
        Family::Ls => (PenaltyFamily::Ls(LsPenalty), vec![kv("family", "ls")]),
        Family::X => (
            PenaltyFamily::X(XPenalty::new(a.sigma)?),
            vec![kv("family", "x"), kv("sigma", g12(a.sigma))],
        ),
        Family::Huber => {
            let gamma = match a.gamma {
                Some(g) => g,
                None => huber_threshold(a.epsilon)?.k * a.nominal_std,
            };
            let mut p = vec![kv("family", "huber"), kv("gamma", g12(gamma))];
            if a.gamma.is_none() {
                p.push(kv("epsilon", g12(a.epsilon)));
                p.push(kv("nominal_std", g12(a.nominal_std)));
            }
            (PenaltyFamily::Huber(HuberPenalty::new(gamma)?), p)
        }
    };
    let mut csv = String::from("x,rho,psi,psi_prime\n");
    for &x in &a.range.0 {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            g12(x),
            g12(family.rho(x)),
            g12(family.psi(x)),
            g12(family.psi_prime(x))
        ));
    }
    let grid = &a.range.0;
    parameters.push(kv("range_start", g12(grid[0])));
    parameters.push(kv("range_stop", g12(grid[grid.len() - 1])));
    parameters.push(kv("range_points", grid.len()));
    Ok(Report {
        csv,
        parameters,
        seed: None,
    })
}

pub fn dump_codes(a: &DumpCodesArgs) -> Result<Report, CliError> {
    let chips = (1usize << a.degree) - 1;
    if a.users > chips {
        return Err(CliError::Usage(format!(
            "--users ({}) cannot exceed the code length {chips}",
            a.users
        )));
    }
    let taps = match a.taps {
        Some(t) => FeedbackPolynomial(t),
        None => FeedbackPolynomial::primitive(a.degree)?,
    };
    let base = generate_m_sequence(a.degree, taps, (1u32 << a.degree) - 1)?;
    let s = SpreadingMatrix::from_shifted_sequence(&base, a.users)?;

    let header: Vec<String> = (1..=a.users).map(|k| format!("s{k}")).collect();
    let mut csv = header.join(",");
    csv.push('\n');
    for i in 0..chips {
        let row: Vec<String> = (0..a.users).map(|k| sig(s.entry(i, k), 17)).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let parameters = vec![
        kv("degree", a.degree),
        kv("users", a.users),
        kv("taps", format!("0x{:x}", taps.0)),
    ];
    Ok(Report {
        csv,
        parameters,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_epsilon_axis() {
        let e = default_epsilons();
        assert_eq!(e.len(), 20);
        assert!((e[0] - 1e-3).abs() < 1e-15);
        assert!((e[19] - 0.3).abs() < 1e-13);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn chips_must_be_mersenne() {
        assert_eq!(degree_for_chips(31).unwrap(), 5);
        assert_eq!(degree_for_chips(7).unwrap(), 3);
        assert!(matches!(degree_for_chips(30), Err(CliError::Usage(_))));
        assert!(degree_for_chips(1).is_err());
    }
}
