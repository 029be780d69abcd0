//! One module per experiment. Each exposes a `schema()` naming every
//! accepted key with its typed default, and a `run()` that turns a resolved
//! configuration into a result table. Rows are emitted sorted by the
//! experiment's grid coordinates, then by trial index, so equal
//! configurations always produce byte-identical data rows.

pub mod backscatter;
pub mod decouple;
pub mod retro;
pub mod ua_hotspot;
pub mod ua_locate;
pub mod waveform;

use crate::config::{Schema, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::table::ResultTable;

/// Experiment names as they appear on the command line.
pub const EXPERIMENTS: [&str; 6] = [
    "waveform",
    "decouple",
    "backscatter",
    "retro",
    "ua-hotspot",
    "ua-locate",
];

pub fn schema_for(name: &str) -> Option<Schema> {
    match name {
        "waveform" => Some(waveform::schema()),
        "decouple" => Some(decouple::schema()),
        "backscatter" => Some(backscatter::schema()),
        "retro" => Some(retro::schema()),
        "ua-hotspot" => Some(ua_hotspot::schema()),
        "ua-locate" => Some(ua_locate::schema()),
        _ => None,
    }
}

pub fn run(config: &ScenarioConfig) -> Result<ResultTable> {
    match config.experiment() {
        "waveform" => waveform::run(config),
        "decouple" => decouple::run(config),
        "backscatter" => backscatter::run(config),
        "retro" => retro::run(config),
        "ua-hotspot" => ua_hotspot::run(config),
        "ua-locate" => ua_locate::run(config),
        other => Err(CliError::Config(format!("unknown experiment `{other}`"))),
    }
}

/// Positive trial count shared by the Monte Carlo experiments.
pub(crate) fn positive_count(config: &ScenarioConfig, key: &str) -> Result<usize> {
    let value = config.count(key)?;
    if value == 0 {
        return Err(CliError::Config(format!("`{key}` must be >= 1")));
    }
    Ok(value)
}
