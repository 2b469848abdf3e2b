//! Value parsers shared by the argument definitions.

use impulse_mud::{HuberScale, XScale};

use crate::args::{DetectorList, EpsilonList, Grid, KappaList};

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

pub fn positive_f64(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v <= 0.0 {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(v)
}

pub fn positive_usize(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

pub fn positive_u64(s: &str) -> Result<u64, String> {
    match s.trim().parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

pub fn epsilon(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if !(0.0..1.0).contains(&v) {
        return Err(format!("epsilon must lie in [0, 1), got {v}"));
    }
    Ok(v)
}

pub fn kappa(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v < 1.0 {
        return Err(format!("kappa must be at least 1, got {v}"));
    }
    Ok(v)
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let out = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(item)
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("list is empty".into());
    }
    Ok(out)
}

pub fn epsilon_list(s: &str) -> Result<EpsilonList, String> {
    list(s, epsilon).map(EpsilonList)
}

pub fn kappa_list(s: &str) -> Result<KappaList, String> {
    list(s, kappa).map(KappaList)
}

pub fn detectors(s: &str) -> Result<DetectorList, String> {
    let names = list(s, |t| {
        let t = t.trim().to_ascii_lowercase();
        match t.as_str() {
            "ls" | "huber" | "x" => Ok(t),
            _ => Err(format!("unknown detector `{t}` (expected ls, huber or x)")),
        }
    })?;
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(format!("detector `{n}` listed twice"));
        }
    }
    Ok(DetectorList(names))
}

/// Inclusive `start:stop:step`; points are `start + i·step`.
pub fn range(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("`{s}` is not of the form start:stop:step"));
    };
    let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
    if step <= 0.0 {
        return Err(format!("step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("stop {stop} is below start {start}"));
    }
    let span = (stop - start) / step;
    let n = (span + 1e-9).floor();
    if n > 1e7 {
        return Err(format!("range `{s}` has too many points"));
    }
    Ok(Grid(
        (0..=n as usize).map(|i| start + i as f64 * step).collect(),
    ))
}

pub fn x_scale(s: &str) -> Result<XScale, String> {
    match s.trim() {
        "total" => Ok(XScale::Total),
        "nominal" => Ok(XScale::Nominal),
        v => positive_f64(v)
            .map(XScale::Fixed)
            .map_err(|_| format!("x scale must be total, nominal or a positive number, got `{v}`")),
    }
}

pub fn huber_scale(s: &str) -> Result<HuberScale, String> {
    match s.trim() {
        "minimax" => Ok(HuberScale::Minimax),
        v => positive_f64(v).map(HuberScale::Fixed).map_err(|_| {
            format!("Huber threshold must be minimax or a positive number, got `{v}`")
        }),
    }
}

pub fn hex_u32(s: &str) -> Result<u32, String> {
    let t = s.trim().trim_start_matches("0x").trim_start_matches("0X");
    u32::from_str_radix(t, 16).map_err(|_| format!("`{s}` is not a hex mask"))
}
