//! Multisine-versus-carrier harvester comparison.
//!
//! For each tone count the experiment reports the aligned-phase design and
//! the best of `trials` uniform random phase draws, both at the same average
//! power, against a single carrier of that power. Columns: `n_tones`,
//! `phase_policy`, `papr_db`, `dc_output`, `dc_ratio_vs_cw`.

use rand::Rng;
use std::f64::consts::TAU;

use wpc_core::rectenna::{dc_output, RectennaParams};
use wpc_core::signal::{papr, power_db, sample_multisine, MultisineSpec, RandomSource, Waveform};

use crate::config::{ParamValue, Schema, ScenarioConfig};
use crate::error::Result;
use crate::experiments::positive_count;
use crate::table::{Cell, ResultTable};

pub fn schema() -> Schema {
    Schema::new(
        "waveform",
        vec![
            ("tones", ParamValue::IntList(vec![1, 2, 4, 8, 16])),
            ("power", ParamValue::Real(1.0)),
            ("k2", ParamValue::Real(1.0)),
            ("k4", ParamValue::Real(1.0)),
            ("trials", ParamValue::Int(200)),
        ],
    )
}

const TONE_SPACING: f64 = 1_000.0;

fn spacing_for(n: usize) -> f64 {
    if n == 1 { 0.0 } else { TONE_SPACING }
}

fn synthesize(n: usize, amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Waveform> {
    let base = n as f64 * TONE_SPACING;
    let spec = MultisineSpec::new(base, spacing_for(n), amplitudes, phases)?;
    let sample_rate = 20.0 * n as f64 * TONE_SPACING;
    Ok(sample_multisine(&spec, sample_rate, 1)?)
}

pub fn run(config: &ScenarioConfig) -> Result<ResultTable> {
    let mut tones = config.count_list("tones")?;
    tones.sort_unstable();
    let power = config.real("power")?;
    let params = RectennaParams::new(config.real("k2")?, config.real("k4")?)?;
    let trials = positive_count(config, "trials")?;
    let source = RandomSource::new(config.seed()?);

    let mut table = ResultTable::for_run(
        config,
        &["n_tones", "phase_policy", "papr_db", "dc_output", "dc_ratio_vs_cw"],
    );
    for (index, &n) in tones.iter().enumerate() {
        let carrier = synthesize(1, vec![(2.0 * power).sqrt()], vec![0.0])?;
        let dc_cw = dc_output(&carrier, &params);

        let tone_amp = (2.0 * power / n as f64).sqrt();
        let aligned = synthesize(n, vec![tone_amp; n], vec![0.0; n])?;
        let dc_aligned = dc_output(&aligned, &params);
        table.push_row(vec![
            Cell::Int(n as i64),
            Cell::Text("aligned".into()),
            Cell::Real(power_db(papr(&aligned)?)),
            Cell::Real(dc_aligned),
            Cell::Real(dc_aligned / dc_cw),
        ]);

        let mut rng = source.substream(index as u64).rng();
        let mut dc_random = f64::NEG_INFINITY;
        let mut random: Option<Waveform> = None;
        for _ in 0..trials {
            let phases: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
            let waveform = synthesize(n, vec![tone_amp; n], phases)?;
            let dc = dc_output(&waveform, &params);
            if dc > dc_random {
                dc_random = dc;
                random = Some(waveform);
            }
        }
        let random = random.expect("trials >= 1");
        table.push_row(vec![
            Cell::Int(n as i64),
            Cell::Text("random".into()),
            Cell::Real(power_db(papr(&random)?)),
            Cell::Real(dc_random),
            Cell::Real(dc_random / dc_cw),
        ]);
    }
    Ok(table)
}
