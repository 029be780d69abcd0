//! Blind localization of mobiles from their superposed observation profile.
//!
//! Each trial drops `mobiles` transmitters uniformly inside the search
//! plane, forms the array observation at the given SNR, scans a regular
//! grid for the best separated matches, and records the worst per-mobile
//! position error. Trials share their mobile and noise substreams across
//! SNR levels, so rows differ only through the noise scale. Columns:
//! `snr_db`, `trial`, `error_wl`.
//!
//! Mobiles that land closer together than the peak separation radius merge
//! into one maximum; the run then stops with a numeric failure rather than
//! reporting a phantom position.

use rand::Rng;

use wpc_core::channel::Point3;
use wpc_core::signal::RandomSource;
use wpc_core::ua::{
    add_observation_noise, locate_peaks, localization_error_wl, observation_profile,
    plane_grid, superposed_observation, UAConfig,
};

use crate::config::{ParamValue, Schema, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::experiments::positive_count;
use crate::table::{Cell, ResultTable};

pub fn schema() -> Schema {
    Schema::new(
        "ua-locate",
        vec![
            ("elements", ParamValue::Int(256)),
            ("radius_wl", ParamValue::Real(50.0)),
            ("wavelength", ParamValue::Real(0.1)),
            (
                "snrs_db",
                ParamValue::RealList(vec![f64::INFINITY, 20.0, 10.0]),
            ),
            ("trials", ParamValue::Int(100)),
            ("mobiles", ParamValue::Int(1)),
            ("span_wl", ParamValue::Real(5.0)),
            ("spacing_wl", ParamValue::Real(0.25)),
        ],
    )
}

pub fn run(config: &ScenarioConfig) -> Result<ResultTable> {
    let wavelength = config.real("wavelength")?;
    let ua = UAConfig::spherical(
        config.count("elements")?,
        config.real("radius_wl")? * wavelength,
        wavelength,
    )?;
    let span_wl = config.real("span_wl")?;
    if !span_wl.is_finite() || span_wl <= 1.0 {
        return Err(CliError::Config(
            "`span_wl` must exceed 1 so mobiles stay inside the grid".into(),
        ));
    }
    let center = Point3::new(0.0, 0.0, 0.0);
    let grid = plane_grid(
        &center,
        span_wl * wavelength,
        config.real("spacing_wl")? * wavelength,
    )?;
    let mut snrs_db = config.real_list("snrs_db")?.to_vec();
    snrs_db.sort_by(f64::total_cmp);
    let trials = positive_count(config, "trials")?;
    let n_mobiles = positive_count(config, "mobiles")?;
    if n_mobiles > 8 {
        return Err(CliError::Config("`mobiles` must be at most 8".into()));
    }
    let base = RandomSource::new(config.seed()?);

    let mut table = ResultTable::for_run(config, &["snr_db", "trial", "error_wl"]);
    for &snr_db in &snrs_db {
        let snr_linear = if snr_db == f64::INFINITY {
            f64::INFINITY
        } else {
            10f64.powf(snr_db / 10.0)
        };
        for trial in 0..trials {
            let trial_source = base.substream(trial as u64);
            // The mobile box stays one wavelength inside the grid so the
            // true position is always representable by a nearby hypothesis.
            let half = (span_wl - 1.0) * wavelength;
            let mut rng = trial_source.substream(0).rng();
            let mobiles: Vec<Point3> = (0..n_mobiles)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-half..=half),
                        rng.gen_range(-half..=half),
                        0.0,
                    )
                })
                .collect();
            let clean = superposed_observation(&ua, &mobiles)?;
            let observed = add_observation_noise(&clean, snr_linear, &trial_source.substream(1))?;
            let profile = observation_profile(&ua, &observed, &grid)?;
            let estimates = locate_peaks(&profile, n_mobiles, wavelength)?;
            let error = localization_error_wl(&estimates, &mobiles, wavelength)?;
            table.push_row(vec![
                Cell::Real(snr_db),
                Cell::Int(trial as i64),
                Cell::Real(error),
            ]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(pairs: &[(&str, &str)]) -> ScenarioConfig {
        let pairs: Vec<(String, String)> = pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        schema().resolve(&pairs).unwrap()
    }

    #[test]
    fn noiseless_trials_land_within_half_a_wavelength() {
        let cfg = resolved(&[("snrs_db", "inf"), ("trials", "5"), ("elements", "128")]);
        let table = run(&cfg).unwrap();
        assert_eq!(table.rows().len(), 5);
        for row in table.rows() {
            match row[2] {
                Cell::Real(err) => assert!(err <= 0.5, "{err}"),
                _ => panic!("error column"),
            }
        }
    }

    #[test]
    fn snr_grid_is_sorted_with_infinity_last() {
        let cfg = resolved(&[
            ("snrs_db", "inf,10"),
            ("trials", "2"),
            ("elements", "64"),
            ("span_wl", "3"),
        ]);
        let table = run(&cfg).unwrap();
        let snr_of = |row: &[Cell]| match row[0] {
            Cell::Real(v) => v,
            _ => panic!("snr column"),
        };
        assert_eq!(snr_of(&table.rows()[0]), 10.0);
        assert_eq!(snr_of(&table.rows()[3]), f64::INFINITY);
    }

    #[test]
    fn tight_span_is_rejected() {
        let cfg = resolved(&[("span_wl", "1")]);
        assert!(matches!(run(&cfg), Err(CliError::Config(_))));
        let cfg = resolved(&[("mobiles", "9")]);
        assert!(matches!(run(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn collocated_mobiles_merge_into_a_numeric_failure() {
        // A 0.2-wavelength box cannot hold two separable peaks.
        let cfg = resolved(&[
            ("mobiles", "2"),
            ("span_wl", "1.2"),
            ("snrs_db", "inf"),
            ("trials", "1"),
            ("elements", "64"),
        ]);
        assert!(matches!(run(&cfg), Err(CliError::Numeric(_))));
    }
}
