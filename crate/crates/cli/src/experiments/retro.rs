//! Retrodirective beamforming gain audit.
//!
//! For each antenna count, conjugate weights derived from one Rayleigh
//! channel draw are compared against the best and mean of `trials` random
//! unit-power weight draws on the same channel. Columns: `n_antennas`,
//! `retro_power`, `mean_random_power`, `gain`, `gain_over_n`.

use num_complex::Complex64;

use wpc_core::backscatter::retro_gain_audit;
use wpc_core::channel::rayleigh_matrix;
use wpc_core::signal::RandomSource;

use crate::config::{ParamValue, Schema, ScenarioConfig};
use crate::error::Result;
use crate::experiments::positive_count;
use crate::table::{Cell, ResultTable};

pub fn schema() -> Schema {
    Schema::new(
        "retro",
        vec![
            ("antennas", ParamValue::IntList(vec![1, 2, 4, 8, 16])),
            ("trials", ParamValue::Int(10_000)),
        ],
    )
}

/// Offset separating channel-draw substreams from weight-draw substreams.
const WEIGHT_STREAM_BASE: u64 = 1_000;

pub fn run(config: &ScenarioConfig) -> Result<ResultTable> {
    let mut antennas = config.count_list("antennas")?;
    antennas.sort_unstable();
    let trials = positive_count(config, "trials")?;
    let source = RandomSource::new(config.seed()?);

    let mut table = ResultTable::for_run(
        config,
        &["n_antennas", "retro_power", "mean_random_power", "gain", "gain_over_n"],
    );
    for (index, &n) in antennas.iter().enumerate() {
        let channel: Vec<Complex64> = rayleigh_matrix(n, 1, &source.substream(index as u64))?
            .matrix()
            .iter()
            .copied()
            .collect();
        let audit = retro_gain_audit(
            &channel,
            trials,
            &source.substream(WEIGHT_STREAM_BASE + index as u64),
        )?;
        table.push_row(vec![
            Cell::Int(n as i64),
            Cell::Real(audit.retro_power),
            Cell::Real(audit.mean_random_power),
            Cell::Real(audit.gain()),
            Cell::Real(audit.gain() / n as f64),
        ]);
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

    fn real(cell: &Cell) -> f64 {
        match cell {
            Cell::Real(v) => *v,
            _ => panic!("expected a real cell"),
        }
    }

    #[test]
    fn single_antenna_gain_is_exactly_one() {
        let table = run(&resolved(&[("antennas", "1"), ("trials", "32")])).unwrap();
        let rows = table.rows();
        assert_eq!(rows.len(), 1);
        // Any unit weight on one antenna delivers the same power, up to the
        // rounding of each drawn phasor's modulus.
        assert!((real(&rows[0][3]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_tracks_the_antenna_count() {
        let table = run(&resolved(&[("antennas", "16,4"), ("trials", "2000")])).unwrap();
        let rows = table.rows();
        assert_eq!(rows.len(), 2);
        for row in rows {
            let per_antenna = real(&row[4]);
            assert!((0.7..=1.3).contains(&per_antenna), "{per_antenna}");
        }
        // Sorted output: 4 antennas first.
        assert_eq!(rows[0][0], Cell::Int(4));
    }
}
