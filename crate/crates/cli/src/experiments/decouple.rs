//! Near-far separation sweep over phase compensation error.
//!
//! A strong power-bearing branch and weak data streams share the receiver;
//! the table reports quantization quality before and after the analog
//! combiner at each phase-error level. Columns: `ratio_db`, `adc_bits`,
//! `phase_err_std`, `sqnr_mixed_db`, `sqnr_decoupled_db`, `residual_db`,
//! `effective_rank` (worst rank over the trials).

use wpc_core::decoupler::{robustness_sweep, NearFarScenario};
use wpc_core::signal::{QuantizerSpec, RandomSource};

use crate::config::{ParamValue, Schema, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::experiments::positive_count;
use crate::table::{Cell, ResultTable};

pub fn schema() -> Schema {
    Schema::new(
        "decouple",
        vec![
            ("ratio_db", ParamValue::Real(90.0)),
            ("adc_bits", ParamValue::Int(10)),
            ("n_rx", ParamValue::Int(4)),
            ("m_bs", ParamValue::Int(8)),
            (
                "phase_error_stds",
                ParamValue::RealList(vec![0.0, 0.01, 0.05, 0.1, 0.3]),
            ),
            ("trials", ParamValue::Int(500)),
            ("symbols", ParamValue::Int(1024)),
            ("info_split", ParamValue::Real(0.01)),
        ],
    )
}

pub fn run(config: &ScenarioConfig) -> Result<ResultTable> {
    let ratio_db = config.real("ratio_db")?;
    let bits = u32::try_from(config.int("adc_bits")?)
        .map_err(|_| CliError::Config("`adc_bits` must be >= 1".into()))?;
    let quantizer = QuantizerSpec::new(bits, 1.0)?;
    let scenario = NearFarScenario::new(
        config.count("n_rx")?,
        config.count("m_bs")?,
        ratio_db,
        quantizer,
        0.0,
        RandomSource::new(config.seed()?),
    )?
    .with_info_split_fraction(config.real("info_split")?)?;

    let mut stds = config.real_list("phase_error_stds")?.to_vec();
    stds.sort_by(f64::total_cmp);
    let trials = positive_count(config, "trials")?;
    let symbols = positive_count(config, "symbols")?;

    let points = robustness_sweep(&scenario, &stds, trials, symbols)?;
    let mut table = ResultTable::for_run(
        config,
        &[
            "ratio_db",
            "adc_bits",
            "phase_err_std",
            "sqnr_mixed_db",
            "sqnr_decoupled_db",
            "residual_db",
            "effective_rank",
        ],
    );
    for point in points {
        table.push_row(vec![
            Cell::Real(ratio_db),
            Cell::Int(bits as i64),
            Cell::Real(point.phase_error_std),
            Cell::Real(point.sqnr_mixed_db),
            Cell::Real(point.sqnr_decoupled_db),
            Cell::Real(point.residual_swipt_db),
            Cell::Int(point.min_effective_rank as i64),
        ]);
    }
    Ok(table)
}
