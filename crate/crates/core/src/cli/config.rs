//! Machine configuration files.
//!
//! A TOML document with `m`, `m1`, `e0` and one `[[machines]]` table per
//! machine listing its shared intervals as `[breakpoint, ratio]` pairs:
//!
//! ```toml
//! m = 2
//! m1 = 1
//! e0 = 0.5
//!
//! [[machines]]
//! intervals = [[2.0, 0.5], [4.0, 1.0]]
//!
//! [[machines]]
//! intervals = []
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{CapacityError, MachinePark, MachineTimeline};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed machine config: {0}")]
    Malformed(String),
    #[error("m = {m} but {found} [[machines]] tables are listed")]
    MachineCount { m: usize, found: usize },
    #[error(transparent)]
    Invalid(#[from] CapacityError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub m: usize,
    pub m1: usize,
    pub e0: f64,
    pub machines: Vec<MachineEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineEntry {
    #[serde(default)]
    pub intervals: Vec<(f64, f64)>,
}

impl MachineConfig {
    pub fn from_park(park: &MachinePark) -> Self {
        Self {
            m: park.m(),
            m1: park.m1(),
            e0: park.e0(),
            machines: park
                .machines()
                .iter()
                .map(|mach| MachineEntry {
                    intervals: mach
                        .breakpoints()
                        .iter()
                        .copied()
                        .zip(mach.ratios().iter().copied())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_park(&self) -> Result<MachinePark, ConfigError> {
        if self.m != self.machines.len() {
            return Err(ConfigError::MachineCount {
                m: self.m,
                found: self.machines.len(),
            });
        }
        let machines = self
            .machines
            .iter()
            .enumerate()
            .map(|(i, entry)| MachineTimeline::from_pairs(i, &entry.intervals))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MachinePark::new(machines, self.m1, self.e0)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("machine config serializes")
    }
}

pub fn parse_machine_config_str(text: &str) -> Result<MachinePark, ConfigError> {
    let config: MachineConfig =
        toml::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    config.to_park()
}

/// Reads and validates a machine configuration file.
pub fn parse_machine_config(path: &Path) -> Result<MachinePark, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_machine_config_str(&text)
}
