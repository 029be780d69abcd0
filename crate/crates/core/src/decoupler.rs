//! Analog spatial decoupling of a strong power-bearing (SWIPT) signal from a
//! weak information (IT) signal ahead of the ADC.
//!
//! Receiver structure: a phase compensation bank (one unit-modulus multiply
//! per antenna) rotates the SWIPT component onto the all-ones vector, then a
//! Sylvester Hadamard butterfly combines the antennas. The butterfly's first
//! output is the all-ones combination and serves the SWIPT path; the
//! remaining N-1 outputs form the truncated-Hadamard IT path, in which the
//! SWIPT component cancels exactly because every retained row sums to zero.
//! Both stages use only phase shifters and +/-1 additions, so the design is
//! implementable in analog hardware before quantization.
//!
//! The butterfly implementation gives bit-exact cancellation: combining
//! identical values with +/-1 weights through the radix-2 stages produces
//! floating-point zero, not merely a small residual.

use crate::channel::rayleigh_matrix;
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::signal::{QuantizerSpec, RandomSource};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Sylvester Hadamard matrix of order `n` with the all-ones first row
/// removed: an (n-1) x n matrix of +/-1 whose rows sum to zero and satisfy
/// T * T^t = n * I.
pub fn truncated_hadamard(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = vec![vec![1.0f64]];
    let mut size = 1;
    while size < n {
        let mut next = Vec::with_capacity(2 * size);
        for quadrant_row in 0..2 * size {
            let src = &h[quadrant_row % size];
            let mut row = Vec::with_capacity(2 * size);
            row.extend_from_slice(src);
            if quadrant_row < size {
                row.extend_from_slice(src);
            } else {
                row.extend(src.iter().map(|v| -v));
            }
            next.push(row);
        }
        h = next;
        size *= 2;
    }
    Ok(DMatrix::from_fn(n - 1, n, |r, c| h[r + 1][c]))
}

/// Full Walsh-Hadamard butterfly in Sylvester (natural) row order, in place.
fn fwht_in_place(x: &mut [Complex64]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        let mut i = 0;
        while i < n {
            for j in i..i + h {
                let a = x[j];
                let b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// Applies the truncated Hadamard combiner to one antenna snapshot: returns
/// the n-1 outputs of rows 1.. of the Sylvester matrix, computed by the
/// butterfly (additions and subtractions only). A constant input vector maps
/// to exact floating-point zeros.
pub fn apply_truncated_hadamard(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.len() < 2 || !x.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(x.len()));
    }
    let mut buf = x.to_vec();
    fwht_in_place(&mut buf);
    buf.remove(0);
    Ok(buf)
}

/// Multiplies entry n by exp(-j swipt_phases[n]): a bank of phase shifters.
/// Entry magnitudes are preserved (unit-modulus multiplies only).
pub fn phase_compensation(
    received: &[Complex64],
    swipt_phases: &[f64],
) -> Result<Vec<Complex64>> {
    if received.len() != swipt_phases.len() {
        return Err(Error::LengthMismatch {
            left: received.len(),
            right: swipt_phases.len(),
            context: "received vs compensation phases",
        });
    }
    ensure_finite(swipt_phases, "swipt_phases")?;
    Ok(received
        .iter()
        .zip(swipt_phases)
        .map(|(y, &p)| y * Complex64::from_polar(1.0, -p))
        .collect())
}

/// Singular values above this count toward the effective rank.
pub const RANK_TOL: f64 = 1e-8;

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values exceeding `RANK_TOL`.
pub fn effective_rank(m: &DMatrix<Complex64>) -> usize {
    singular_values(m).into_iter().filter(|&s| s > RANK_TOL).count()
}

/// Effective channel seen by the IT path:
/// `T * diag(exp(-j comp_phases)) * G`, of size (N-1) x M. For Rayleigh G
/// this has rank N-1 almost surely; a rank-one G (for example all-ones with
/// zero compensation phases) collapses it to zero, detectable through
/// `effective_rank`.
pub fn effective_it_channel(
    t: &DMatrix<f64>,
    comp_phases: &[f64],
    g: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let n = t.ncols();
    if t.nrows() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "combiner is {}x{}, expected (N-1) x N",
            t.nrows(),
            t.ncols()
        )));
    }
    if comp_phases.len() != n || g.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "combiner order {n} vs {} phases and {} channel rows",
            comp_phases.len(),
            g.nrows()
        )));
    }
    if g.ncols() < n {
        return Err(Error::DimensionMismatch(format!(
            "need at least N={n} transmit streams, got {}",
            g.ncols()
        )));
    }
    let mut rotated = g.clone();
    for (row, &p) in comp_phases.iter().enumerate() {
        let c = Complex64::from_polar(1.0, -p);
        for col in 0..rotated.ncols() {
            rotated[(row, col)] *= c;
        }
    }
    let tc = t.map(|v| Complex64::new(v, 0.0));
    Ok(tc * rotated)
}

/// Near-far experiment description: a SWIPT carrier arrives
/// `swipt_to_it_power_ratio_db` stronger per antenna than the IT signal from
/// an M-antenna base station, and the receiver quantizes with the given ADC.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFarScenario {
    n_rx: usize,
    m_bs: usize,
    swipt_to_it_power_ratio_db: f64,
    quantizer: QuantizerSpec,
    phase_error_std: f64,
    info_split_fraction: f64,
    rng: RandomSource,
}

impl NearFarScenario {
    pub fn new(
        n_rx: usize,
        m_bs: usize,
        swipt_to_it_power_ratio_db: f64,
        quantizer: QuantizerSpec,
        phase_error_std: f64,
        rng: RandomSource,
    ) -> Result<Self> {
        if n_rx < 2 || !n_rx.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n_rx));
        }
        if m_bs < n_rx {
            return Err(invalid(format!(
                "m_bs ({m_bs}) must be >= n_rx ({n_rx}) to excite full rank"
            )));
        }
        if !swipt_to_it_power_ratio_db.is_finite() || swipt_to_it_power_ratio_db < 0.0 {
            return Err(invalid("power ratio must be finite and >= 0 dB"));
        }
        if !phase_error_std.is_finite() || phase_error_std < 0.0 {
            return Err(invalid("phase_error_std must be finite and >= 0"));
        }
        Ok(Self {
            n_rx,
            m_bs,
            swipt_to_it_power_ratio_db,
            quantizer,
            phase_error_std,
            info_split_fraction: 0.01,
            rng,
        })
    }

    /// Fraction of SWIPT-branch power tapped for information decoding; the
    /// rest is harvested. Ratio-based outputs do not depend on it.
    pub fn with_info_split_fraction(mut self, fraction: f64) -> Result<Self> {
        if !fraction.is_finite() || fraction <= 0.0 || fraction > 1.0 {
            return Err(invalid("info_split_fraction must lie in (0, 1]"));
        }
        self.info_split_fraction = fraction;
        Ok(self)
    }

    pub fn with_phase_error_std(mut self, std: f64) -> Result<Self> {
        if !std.is_finite() || std < 0.0 {
            return Err(invalid("phase_error_std must be finite and >= 0"));
        }
        self.phase_error_std = std;
        Ok(self)
    }

    pub fn with_rng(mut self, rng: RandomSource) -> Self {
        self.rng = rng;
        self
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn m_bs(&self) -> usize {
        self.m_bs
    }

    pub fn swipt_to_it_power_ratio_db(&self) -> f64 {
        self.swipt_to_it_power_ratio_db
    }

    pub fn quantizer(&self) -> &QuantizerSpec {
        &self.quantizer
    }

    pub fn phase_error_std(&self) -> f64 {
        self.phase_error_std
    }

    pub fn info_split_fraction(&self) -> f64 {
        self.info_split_fraction
    }

    pub fn rng(&self) -> RandomSource {
        self.rng
    }
}

/// Measurements of one decoupling run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecouplerOutputs {
    /// SQNR of the IT content when the mixed signal is quantized directly.
    pub sqnr_mixed_db: f64,
    /// SQNR of the IT content in the truncated-Hadamard branch outputs.
    pub sqnr_decoupled_db: f64,
    /// Baseline: SQNR of the IT branch signals quantized with no SWIPT
    /// present at all.
    pub sqnr_it_alone_db: f64,
    /// SQNR of the SWIPT stream recovered from the all-ones branch.
    pub sqnr_swipt_branch_db: f64,
    /// SWIPT power leaking into the IT branches, relative to the received
    /// SWIPT power. Exactly -inf with ideal compensation phases.
    pub residual_swipt_power_db: f64,
    /// Rank of the effective IT channel (singular values above `RANK_TOL`).
    /// At most N-1 by construction.
    pub effective_rank: usize,
    pub smallest_singular_value: f64,
}

/// Unit-modulus random-phase symbol stream, the narrowband SWIPT carrier.
pub fn unit_modulus_stream(len: usize, source: &RandomSource) -> Vec<Complex64> {
    let mut rng = source.rng();
    (0..len)
        .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

/// M x len matrix of unit-power complex Gaussian data streams.
pub fn gaussian_streams(m: usize, len: usize, source: &RandomSource) -> DMatrix<Complex64> {
    let mut rng = source.rng();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(m, len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// Quantizes a complex stream with independent I/Q converters after scaling
/// the stream so its larger rail peak spans the ADC's full range (the
/// automatic-gain-control model). Returns the de-scaled quantized stream and
/// the number of saturated rail samples.
fn quantize_complex_full_scale(
    samples: &[Complex64],
    q: &QuantizerSpec,
) -> (Vec<Complex64>, usize) {
    let peak = samples
        .iter()
        .map(|c| c.re.abs().max(c.im.abs()))
        .fold(0.0, f64::max);
    let scale = if peak == 0.0 { 1.0 } else { q.full_scale() / peak };
    let mut clipped = 0;
    let out = samples
        .iter()
        .map(|c| {
            let (re, sat_re) = q.quantize_sample(c.re * scale);
            let (im, sat_im) = q.quantize_sample(c.im * scale);
            clipped += usize::from(sat_re) + usize::from(sat_im);
            Complex64::new(re / scale, im / scale)
        })
        .collect();
    (out, clipped)
}

fn power_sum(streams: &[Vec<Complex64>]) -> f64 {
    streams
        .iter()
        .map(|s| s.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sum()
}

fn pooled_sqnr_db(reference: &[Vec<Complex64>], corrupted: &[Vec<Complex64>]) -> f64 {
    let p_ref = power_sum(reference);
    let p_err: f64 = reference
        .iter()
        .zip(corrupted)
        .map(|(r, c)| {
            r.iter()
                .zip(c)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
        })
        .sum();
    if p_err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (p_ref / p_err).log10()
    }
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (num / den).log10()
    }
}

/// Runs the full near-far pipeline on the given SWIPT symbol stream and IT
/// transmit streams (M x K): Rayleigh IT channel and per-antenna SWIPT
/// phases are drawn from the scenario's random source, the SWIPT component
/// is scaled to the configured power ratio, compensation (with Gaussian
/// phase errors of the configured std) and the Hadamard butterfly are
/// applied, and each branch is quantized independently.
///
/// SQNR convention: the reference is always the IT content of the quantized
/// signal, so quantization noise and any SWIPT residual both count as error.
pub fn decouple(
    scn: &NearFarScenario,
    swipt_stream: &[Complex64],
    it_streams: &DMatrix<Complex64>,
) -> Result<DecouplerOutputs> {
    let n = scn.n_rx;
    let m = scn.m_bs;
    let k = swipt_stream.len();
    if k < 2 {
        return Err(invalid("need at least two symbols"));
    }
    if it_streams.nrows() != m || it_streams.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "IT streams are {}x{}, expected {m}x{k}",
            it_streams.nrows(),
            it_streams.ncols()
        )));
    }

    let g = rayleigh_matrix(n, m, &scn.rng.substream(0))?;
    let mut psi_rng = scn.rng.substream(1).rng();
    let psi: Vec<f64> = (0..n)
        .map(|_| psi_rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    let mut err_rng = scn.rng.substream(2).rng();
    let comp_phases: Vec<f64> = psi
        .iter()
        .map(|&p| {
            let e: f64 = err_rng.sample(StandardNormal);
            p + e * scn.phase_error_std
        })
        .collect();
    let rho = 10f64.powf(scn.swipt_to_it_power_ratio_db / 20.0);

    // Per-antenna IT component, unit average power per antenna: G x / sqrt(M).
    let it_rx = g.matrix() * it_streams * Complex64::new(1.0 / (m as f64).sqrt(), 0.0);
    let it_ant: Vec<Vec<Complex64>> = (0..n)
        .map(|a| (0..k).map(|t| it_rx[(a, t)]).collect())
        .collect();
    let swipt_ant: Vec<Vec<Complex64>> = (0..n)
        .map(|a| {
            let carrier = Complex64::from_polar(rho, psi[a]);
            swipt_stream.iter().map(|d| carrier * d).collect()
        })
        .collect();
    let mixed_ant: Vec<Vec<Complex64>> = (0..n)
        .map(|a| {
            (0..k)
                .map(|t| swipt_ant[a][t] + it_ant[a][t])
                .collect()
        })
        .collect();

    // Direct quantization of the mixed signal: the near-far case.
    let p_it_antennas = power_sum(&it_ant);
    let mut p_qerr_mixed = 0.0;
    for antenna in &mixed_ant {
        let (quantized, _) = quantize_complex_full_scale(antenna, &scn.quantizer);
        p_qerr_mixed += antenna
            .iter()
            .zip(&quantized)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>();
    }
    let sqnr_mixed_db = ratio_db(p_it_antennas, p_qerr_mixed);

    // Analog front end: compensation then butterfly, per time index, for the
    // total signal and for each component separately (the components are
    // needed as references; the hardware only ever sees the total).
    let mut branch_total: Vec<Vec<Complex64>> = vec![Vec::with_capacity(k); n - 1];
    let mut branch_it: Vec<Vec<Complex64>> = vec![Vec::with_capacity(k); n - 1];
    let mut branch_swipt: Vec<Vec<Complex64>> = vec![Vec::with_capacity(k); n - 1];
    let mut sum_total: Vec<Complex64> = Vec::with_capacity(k);
    let mut sum_swipt: Vec<Complex64> = Vec::with_capacity(k);
    let mut snapshot = vec![Complex64::default(); n];
    for t in 0..k {
        for a in 0..n {
            snapshot[a] = mixed_ant[a][t];
        }
        let mut buf = phase_compensation(&snapshot, &comp_phases)?;
        fwht_in_place(&mut buf);
        sum_total.push(buf[0]);
        for r in 1..n {
            branch_total[r - 1].push(buf[r]);
        }

        for a in 0..n {
            snapshot[a] = it_ant[a][t];
        }
        let mut buf = phase_compensation(&snapshot, &comp_phases)?;
        fwht_in_place(&mut buf);
        for r in 1..n {
            branch_it[r - 1].push(buf[r]);
        }

        for a in 0..n {
            snapshot[a] = swipt_ant[a][t];
        }
        let mut buf = phase_compensation(&snapshot, &comp_phases)?;
        fwht_in_place(&mut buf);
        sum_swipt.push(buf[0]);
        for r in 1..n {
            branch_swipt[r - 1].push(buf[r]);
        }
    }

    // IT path: quantize each branch; reference is the branch's IT content.
    let quant_branches: Vec<Vec<Complex64>> = branch_total
        .iter()
        .map(|b| quantize_complex_full_scale(b, &scn.quantizer).0)
        .collect();
    let sqnr_decoupled_db = pooled_sqnr_db(&branch_it, &quant_branches);

    // Baseline: the same branches with the SWIPT signal absent entirely.
    let quant_it_alone: Vec<Vec<Complex64>> = branch_it
        .iter()
        .map(|b| quantize_complex_full_scale(b, &scn.quantizer).0)
        .collect();
    let sqnr_it_alone_db = pooled_sqnr_db(&branch_it, &quant_it_alone);

    // SWIPT leakage into the IT path, relative to received SWIPT power.
    let residual_swipt_power_db = ratio_db(power_sum(&branch_swipt), power_sum(&swipt_ant));

    // SWIPT path: the all-ones branch, a tap of which feeds its own ADC.
    let tap = scn.info_split_fraction.sqrt();
    let swipt_in: Vec<Complex64> = sum_total.iter().map(|c| c * tap).collect();
    let swipt_ref: Vec<Complex64> = sum_swipt.iter().map(|c| c * tap).collect();
    let (swipt_q, _) = quantize_complex_full_scale(&swipt_in, &scn.quantizer);
    let sqnr_swipt_branch_db =
        pooled_sqnr_db(std::slice::from_ref(&swipt_ref), std::slice::from_ref(&swipt_q));

    let t = truncated_hadamard(n)?;
    let g_eff = effective_it_channel(&t, &comp_phases, g.matrix())?;
    let sv = singular_values(&g_eff);
    let smallest_singular_value = sv.last().copied().unwrap_or(0.0);
    let effective_rank = sv.into_iter().filter(|&s| s > RANK_TOL).count();

    Ok(DecouplerOutputs {
        sqnr_mixed_db,
        sqnr_decoupled_db,
        sqnr_it_alone_db,
        sqnr_swipt_branch_db,
        residual_swipt_power_db,
        effective_rank,
        smallest_singular_value,
    })
}

/// One row of the robustness sweep: pooled metrics at a phase-error std.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessPoint {
    pub phase_error_std: f64,
    pub residual_swipt_db: f64,
    pub sqnr_decoupled_db: f64,
    pub sqnr_mixed_db: f64,
    /// Worst effective-channel rank seen across the trials.
    pub min_effective_rank: usize,
}

/// Monte Carlo sweep of `decouple` over phase-error stds with common random
/// numbers: trial t uses the same channel, phases, data, and standardized
/// phase-error draws at every std, so the mean residual is monotone in the
/// std by construction of the model rather than by sampling luck.
pub fn robustness_sweep(
    scn: &NearFarScenario,
    phase_error_stds: &[f64],
    trials: usize,
    symbols_per_trial: usize,
) -> Result<Vec<RobustnessPoint>> {
    if phase_error_stds.is_empty() {
        return Err(invalid("need at least one phase-error std"));
    }
    ensure_finite(phase_error_stds, "phase_error_stds")?;
    if phase_error_stds.iter().any(|&s| s < 0.0) {
        return Err(invalid("phase-error stds must be >= 0"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if symbols_per_trial < 2 {
        return Err(invalid("need at least two symbols per trial"));
    }

    let mut points = Vec::with_capacity(phase_error_stds.len());
    for &std in phase_error_stds {
        let per_trial: Vec<DecouplerOutputs> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let trial_source = scn.rng.substream(trial as u64);
                let scn_t = scn
                    .clone()
                    .with_phase_error_std(std)?
                    .with_rng(trial_source);
                let d1 = unit_modulus_stream(symbols_per_trial, &trial_source.substream(10));
                let x = gaussian_streams(scn.m_bs, symbols_per_trial, &trial_source.substream(11));
                decouple(&scn_t, &d1, &x)
            })
            .collect::<Result<Vec<_>>>()?;

        let lin = |db: f64| {
            if db == f64::NEG_INFINITY {
                0.0
            } else {
                10f64.powf(db / 10.0)
            }
        };
        let n = trials as f64;
        let mean_db = |f: &dyn Fn(&DecouplerOutputs) -> f64| {
            let mean_lin = per_trial.iter().map(|o| lin(f(o))).sum::<f64>() / n;
            if mean_lin == 0.0 {
                f64::NEG_INFINITY
            } else {
                10.0 * mean_lin.log10()
            }
        };
        points.push(RobustnessPoint {
            phase_error_std: std,
            residual_swipt_db: mean_db(&|o| o.residual_swipt_power_db),
            sqnr_decoupled_db: mean_db(&|o| o.sqnr_decoupled_db),
            sqnr_mixed_db: mean_db(&|o| o.sqnr_mixed_db),
            min_effective_rank: per_trial.iter().map(|o| o.effective_rank).min().unwrap_or(0),
        });
    }
    Ok(points)
}
