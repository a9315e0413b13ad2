//! Run manifest: what a run produced, under which configuration, with
//! which warnings. Timing fields are the only part that varies between
//! identical runs.

use std::path::Path;

use serde::Serialize;

use stpp_core::error::Result;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub pipeline: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Emitted files, relative to the output directory, sorted.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub total_ms: u128,
}

impl RunManifest {
    pub fn new(
        pipeline: &str,
        config_bytes: &[u8],
        seed: Option<u64>,
        mut files: Vec<String>,
        warnings: Vec<String>,
        total_ms: u128,
    ) -> RunManifest {
        files.sort();
        RunManifest {
            tool: "stpp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: stpp_core::rng::RNG_ALGORITHM.into(),
            pipeline: pipeline.into(),
            config_hash: sha256_hex(config_bytes),
            seed,
            files,
            warnings,
            timing: Timing { total_ms },
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self)
            .map_err(|e| stpp_core::error::Error::Config(format!("manifest encode: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
