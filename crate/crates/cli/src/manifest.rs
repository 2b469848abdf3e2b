//! Run manifests: a flat `key=value` record of everything that determines
//! a command's output, plus a checksum of that output.

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub version: String,
    pub output_sha256: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        parameters: Vec<(String, String)>,
        seed: Option<u64>,
        output: &[u8],
    ) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            output_sha256: hex::encode(Sha256::digest(output)),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command={}\n", self.command));
        out.push_str(&format!("version={}\n", self.version));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed={seed}\n"));
        }
        for (k, v) in &self.parameters {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("output_sha256={}\n", self.output_sha256));
        out
    }
}
