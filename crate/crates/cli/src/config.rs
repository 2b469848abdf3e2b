//! Flat `key=value` config files.
//!
//! Each entry becomes `--key=value` inserted directly after the subcommand,
//! so flags given on the command line override it.

use std::path::Path;

use crate::CliError;

const SUBCOMMANDS: [&str; 4] = ["ber", "are", "dump-psi", "dump-codes"];

pub fn parse_config(text: &str) -> Result<Vec<String>, CliError> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!(
                "config line {}: invalid key `{key}`",
                lineno + 1
            )));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => args.push(format!("--{key}={value}")),
        }
    }
    Ok(args)
}

/// Expand `--config FILE` (or `--config=FILE`) in `argv`.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => path = Some(p),
                None => return Err(CliError::Usage("--config needs a file".into())),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let extra = load(Path::new(&path))?;
    let Some(pos) = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(rest);
    };
    let mut out = rest[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[pos + 1..]);
    Ok(out)
}

fn load(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
