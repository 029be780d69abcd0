//! Energy-rate frontier of a duty-cycled passive reflector.
//!
//! Evaluates every (duty cycle, constellation size) pair on the grid and
//! keeps the Pareto-efficient points: no kept point is beaten on both
//! harvested energy and rate by another. Columns: `duty_cycle`,
//! `constellation_size`, `harvested_energy`, `rate_bps`.

use num_complex::Complex64;
use std::f64::consts::TAU;

use wpc_core::backscatter::{
    backscatter_rate, constellation_family, harvested_energy, pareto_front, BackscatterConfig,
    EnergyRatePoint,
};

use crate::config::{ParamValue, Schema, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::table::{Cell, ResultTable};

pub fn schema() -> Schema {
    Schema::new(
        "backscatter",
        vec![
            (
                "duty_cycles",
                ParamValue::RealList((0..=20).map(|i| i as f64 / 20.0).collect()),
            ),
            ("sizes", ParamValue::IntList(vec![2, 4, 8, 16])),
            ("snr", ParamValue::Real(100.0)),
            ("power", ParamValue::Real(1.0)),
            ("efficiency", ParamValue::Real(1.0)),
            ("symbol_rate", ParamValue::Real(1000.0)),
            ("block", ParamValue::Real(1.0)),
            ("constellation", ParamValue::Text("family".into())),
        ],
    )
}

/// Unit-circle phase constellation, the classic fully reflective choice.
/// Harvests nothing while reflecting but never limits the rate grid.
fn psk(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
        .collect()
}

pub fn run(config: &ScenarioConfig) -> Result<ResultTable> {
    let mut sizes = config.count_list("sizes")?;
    sizes.sort_unstable();
    let mut duty_cycles = config.real_list("duty_cycles")?.to_vec();
    duty_cycles.sort_by(f64::total_cmp);
    let snr = config.real("snr")?;
    let kind = config.text("constellation")?;

    let mut grid = Vec::with_capacity(sizes.len() * duty_cycles.len());
    for &m in &sizes {
        let constellation = match kind {
            "family" => constellation_family(m)?,
            "psk" => psk(m),
            other => {
                return Err(CliError::Config(format!(
                    "`constellation` must be `family` or `psk`, got `{other}`"
                )))
            }
        };
        let base = BackscatterConfig::new(
            0.0,
            constellation,
            config.real("power")?,
            config.real("efficiency")?,
            config.real("symbol_rate")?,
            config.real("block")?,
        )?;
        for &duty in &duty_cycles {
            let cfg = base.clone().with_duty_cycle(duty)?;
            grid.push(EnergyRatePoint {
                duty_cycle: duty,
                constellation_size: m,
                harvested_energy: harvested_energy(&cfg),
                rate: backscatter_rate(&cfg, snr)?,
            });
        }
    }

    let mut front = pareto_front(&grid);
    front.sort_by(|a, b| {
        a.duty_cycle
            .total_cmp(&b.duty_cycle)
            .then(a.constellation_size.cmp(&b.constellation_size))
    });

    let mut table = ResultTable::for_run(
        config,
        &["duty_cycle", "constellation_size", "harvested_energy", "rate_bps"],
    );
    for point in front {
        table.push_row(vec![
            Cell::Real(point.duty_cycle),
            Cell::Int(point.constellation_size as i64),
            Cell::Real(point.harvested_energy),
            Cell::Real(point.rate),
        ]);
    }
    Ok(table)
}
