//! Hotspot sharpness of a dense spherical array beamforming at its center.
//!
//! Reports the shell-averaged field power versus radial distance, the
//! fitted power-law exponent over the requested window, and the cross-user
//! leakage at each separation. Columns: `record`, `x`, `value`, where
//! `record` selects the quantity, `x` is its abscissa (radius or separation
//! in wavelengths, unused for the exponent), and `value` the measurement.

use wpc_core::channel::Point3;
use wpc_core::signal::RandomSource;
use wpc_core::ua::{
    decay_exponent, interference_vs_separation, radial_power_profile, UAConfig,
};

use crate::config::{ParamValue, Schema, ScenarioConfig};
use crate::error::Result;
use crate::experiments::positive_count;
use crate::table::{Cell, ResultTable};

pub fn schema() -> Schema {
    Schema::new(
        "ua-hotspot",
        vec![
            ("elements", ParamValue::Int(8192)),
            ("radius_wl", ParamValue::Real(100.0)),
            ("wavelength", ParamValue::Real(0.1)),
            ("r_min_wl", ParamValue::Real(2.0)),
            ("r_max_wl", ParamValue::Real(20.0)),
            ("shells", ParamValue::Int(16)),
            ("shell_samples", ParamValue::Int(32)),
            (
                "separations_wl",
                ParamValue::RealList(vec![2.0, 5.0, 10.0, 20.0, 1000.0]),
            ),
            ("leakage_samples", ParamValue::Int(32)),
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
    let target = Point3::new(0.0, 0.0, 0.0);
    let r_min_wl = config.real("r_min_wl")?;
    let r_max_wl = config.real("r_max_wl")?;
    let source = RandomSource::new(config.seed()?);

    let profile = radial_power_profile(
        &ua,
        &target,
        r_min_wl,
        r_max_wl,
        positive_count(config, "shells")?,
        positive_count(config, "shell_samples")?,
        &source.substream(0),
    )?;
    let exponent = decay_exponent(&profile, &target, (r_min_wl, r_max_wl), wavelength)?;

    let mut separations = config.real_list("separations_wl")?.to_vec();
    separations.sort_by(f64::total_cmp);
    let leaks = interference_vs_separation(
        &ua,
        &separations,
        positive_count(config, "leakage_samples")?,
        &source.substream(1),
    )?;

    let mut table = ResultTable::for_run(config, &["record", "x", "value"]);
    for (point, &value) in profile.points().iter().zip(profile.values()) {
        table.push_row(vec![
            Cell::Text("radial_power".into()),
            Cell::Real(point.distance(&target) / wavelength),
            Cell::Real(value),
        ]);
    }
    table.push_row(vec![
        Cell::Text("decay_exponent".into()),
        Cell::Real(0.0),
        Cell::Real(exponent),
    ]);
    for leak in leaks {
        table.push_row(vec![
            Cell::Text("leakage_db".into()),
            Cell::Real(leak.separation_wl),
            Cell::Real(leak.leakage_db),
        ]);
    }
    Ok(table)
}
