use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::exec::TruncationNote;
use crate::opts::{Preset, Settings};

/// One run of a command or preset, as it was resolved.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub label: String,
    pub settings: Settings,
}

/// Record written next to every set of outputs. `runs` and `preset` are
/// enough to regenerate the outputs with `rerun`.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub preset: Option<Preset>,
    pub runs: Vec<RunEntry>,
    pub versions: BTreeMap<String, String>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub auto_delays: BTreeMap<String, f64>,
    pub truncation: Vec<TruncationNote>,
    pub outputs: Vec<String>,
    pub summary: Vec<String>,
}

impl RunManifest {
    pub fn versions() -> BTreeMap<String, String> {
        BTreeMap::from([
            ("propeller".to_string(), propeller::VERSION.to_string()),
            (
                "propeller-sim".to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            ),
        ])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(s: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opts::{Format, Preset};
    use crate::preset::plan;

    #[test]
    fn manifest_round_trips() {
        let runs = plan(Preset::Fig7, Some(500), 7, Format::Json);
        let m = RunManifest {
            command: "preset fig7".into(),
            preset: Some(Preset::Fig7),
            runs,
            versions: RunManifest::versions(),
            threads: 3,
            wall_time_s: 0.123_456_789_012_345_67,
            auto_delays: BTreeMap::from([("a".into(), 0.019_399_361_075_483_134)]),
            truncation: Vec::new(),
            outputs: vec!["x.json".into()],
            summary: vec!["line".into()],
        };
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), m.to_json());
    }
}
