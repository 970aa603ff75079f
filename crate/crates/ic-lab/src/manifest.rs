//! Reproducibility manifest embedded in every JSON output: the exact
//! command, parameter echo, seeds, and tool version.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    /// Stringified parameter echo, sorted by key.
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            params: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn output(mut self, path: impl ToString) -> Self {
        self.outputs.push(path.to_string());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let m = RunManifest::new(vec!["ic-lab".into(), "bb84".into()])
            .param("qber", 0.11)
            .seed(7)
            .output("out.json");
        let json = serde_json::to_string(&m).unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
    }
}
