//! Run manifest written next to the artifacts as `manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use choquard_core::Result;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub status: Status,
    pub seconds: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub stages: Vec<Stage>,
    pub artifacts: Vec<String>,
    pub verdicts: BTreeMap<String, Verdict>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            config: config
                .pairs()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            seed: config.seed,
            started_unix: unix_now(),
            finished_unix: 0,
            stages: Vec::new(),
            artifacts: Vec::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn stage(&mut self, name: impl Into<String>, status: Status, started: Instant, message: impl Into<String>) {
        self.stages.push(Stage {
            name: name.into(),
            status,
            seconds: started.elapsed().as_secs_f64(),
            message: message.into(),
        });
    }

    pub fn artifact(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.artifacts.contains(&name) {
            self.artifacts.push(name);
        }
    }

    pub fn verdict(&mut self, name: impl Into<String>, v: Verdict) {
        self.verdicts.insert(name.into(), v);
    }

    pub fn any_failed(&self) -> bool {
        self.stages.iter().any(|s| s.status == Status::Failed)
    }

    /// Write to `dir/manifest.json`, listing the manifest itself.
    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.artifact(MANIFEST);
        self.finished_unix = unix_now();
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST), text + "\n")?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| choquard_core::Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| choquard_core::Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
