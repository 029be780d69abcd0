//! Library backing the `wpc-lab` binary: schema resolution, experiment
//! dispatch, and CSV emission. Kept separate from the binary so experiment
//! plumbing is unit-testable without spawning processes.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::path::PathBuf;

use config::parse_pairs;
use error::{CliError, Result};

/// Raw command-line inputs for one run, before schema resolution. Dedicated
/// flags override config-file values, which override schema defaults.
#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub set: Vec<String>,
}

/// Where the results landed and how much data they hold.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub experiment: &'static str,
    pub path: PathBuf,
    pub rows: usize,
}

pub fn execute(name: &str, request: &RunRequest) -> Result<RunReport> {
    let schema = experiments::schema_for(name)
        .ok_or_else(|| CliError::Config(format!("unknown experiment `{name}`")))?;

    let mut pairs: Vec<(String, String)> = Vec::new();
    if let Some(path) = &request.config {
        let text = std::fs::read_to_string(path).map_err(|err| {
            CliError::Config(format!("cannot read config file {}: {err}", path.display()))
        })?;
        pairs.extend(parse_pairs(&text)?);
    }
    for item in &request.set {
        let Some((key, value)) = item.split_once('=') else {
            return Err(CliError::Config(format!(
                "--set expects KEY=VALUE, got `{item}`"
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    if let Some(seed) = request.seed {
        pairs.push(("seed".to_string(), seed.to_string()));
    }
    if let Some(trials) = request.trials {
        pairs.push(("trials".to_string(), trials.to_string()));
    }
    if let Some(out) = &request.out {
        pairs.push(("out".to_string(), out.display().to_string()));
    }

    let config = schema.resolve(&pairs)?;
    let mut table = experiments::run(&config)?;
    table.stamp_wall_clock();
    let path = table.write_csv(&config.out_dir()?)?;
    Ok(RunReport {
        experiment: table.experiment(),
        path,
        rows: table.rows().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_out(tag: &str) -> PathBuf {
        std::env::temp_dir().join(format!("wpc-lab-{tag}-{}", std::process::id()))
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let err = execute("warp", &RunRequest::default()).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn malformed_set_item_is_rejected() {
        let request = RunRequest {
            set: vec!["trials".to_string()],
            ..RunRequest::default()
        };
        let err = execute("waveform", &request).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn missing_config_file_is_a_config_error() {
        let request = RunRequest {
            config: Some(PathBuf::from("/nonexistent/lab.conf")),
            ..RunRequest::default()
        };
        let err = execute("waveform", &request).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn trials_flag_is_rejected_where_undefined() {
        let request = RunRequest {
            trials: Some(7),
            ..RunRequest::default()
        };
        let err = execute("backscatter", &request).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("trials"), "{err}");
    }

    #[test]
    fn flags_override_file_values() {
        let dir = temp_out("override");
        std::fs::create_dir_all(&dir).unwrap();
        let conf = dir.join("lab.conf");
        std::fs::write(&conf, "tones = 2\ntrials = 9\nseed = 5\n").unwrap();
        let request = RunRequest {
            config: Some(conf),
            seed: Some(11),
            out: Some(dir.clone()),
            trials: Some(3),
            set: vec!["power=2.0".to_string()],
        };
        let report = execute("waveform", &request).unwrap();
        let text = std::fs::read_to_string(&report.path).unwrap();
        assert!(text.contains("# seed = 11"), "{text}");
        assert!(text.contains("# trials = 3"), "{text}");
        assert!(text.contains("# power = 2"), "{text}");
        assert!(text.contains("# tones = 2"), "{text}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn report_counts_rows_and_places_file() {
        let dir = temp_out("report");
        let request = RunRequest {
            out: Some(dir.clone()),
            set: vec!["antennas=2".to_string(), "trials=16".to_string()],
            ..RunRequest::default()
        };
        let report = execute("retro", &request).unwrap();
        assert_eq!(report.experiment, "retro");
        assert_eq!(report.rows, 1);
        assert!(report.path.ends_with("retro.csv"));
        assert!(report.path.exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
