//! Polynomial diode harvester model and multisine waveform design.
//!
//! The harvester's DC output is the time average of `k2 x^2 + k4 x^4`. The
//! second-order term sees only average power, so with a power budget fixed
//! the design space is the fourth moment: spiky waveforms (high PAPR) win.
//! This module provides the DC evaluation, closed-form moments for multisines
//! on canonical grids, and the two design moves the theory asks for: phase
//! alignment against a known channel and amplitude allocation across tones.
//!
//! Canonical synthesis grid: tones at `base + k * spacing` with
//! `base = n_tones * spacing`. On such grids no fourth-order mixing product
//! of the tones lands on DC, so the closed-form moments used by the
//! optimizers agree exactly with sampled time averages.

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::signal::{sample_multisine, MultisineSpec, RandomSource, Waveform};
use num_complex::Complex64;
use rand::Rng;

/// Diode coefficients of the harvester polynomial `k2 x^2 + k4 x^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectennaParams {
    k2: f64,
    k4: f64,
}

impl RectennaParams {
    pub fn new(k2: f64, k4: f64) -> Result<Self> {
        ensure_positive(k2, "k2")?;
        if !k4.is_finite() || k4 < 0.0 {
            return Err(invalid(format!("k4 must be finite and >= 0, got {k4}")));
        }
        Ok(Self { k2, k4 })
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k4(&self) -> f64 {
        self.k4
    }
}

/// DC component of the rectified waveform: time average of
/// `k2 x^2 + k4 x^4`. The caller is responsible for handing in an integer
/// number of fundamental periods (which `sample_multisine` guarantees);
/// otherwise the average is merely approximate.
pub fn dc_output(waveform: &Waveform, params: &RectennaParams) -> f64 {
    let mut acc = 0.0;
    for &x in waveform.samples() {
        let x2 = x * x;
        acc += params.k2 * x2 + params.k4 * x2 * x2;
    }
    acc / waveform.len() as f64
}

/// Closed-form second and fourth moments (M2, M4) of a multisine with the
/// given per-tone amplitudes and phases, valid on canonical grids
/// (base >= n_tones * spacing, distinct tones). M2 = sum(a^2)/2 and
/// M4 = (3/8) * sum_m |u_m|^2 with u_m = sum_{i+j=m} a_i a_j e^{j(p_i+p_j)}.
pub fn multisine_moments(amplitudes: &[f64], phases: &[f64]) -> Result<(f64, f64)> {
    if amplitudes.is_empty() {
        return Err(invalid("moments need at least one tone"));
    }
    if amplitudes.len() != phases.len() {
        return Err(Error::LengthMismatch {
            left: amplitudes.len(),
            right: phases.len(),
            context: "amplitudes vs phases",
        });
    }
    ensure_finite(amplitudes, "amplitudes")?;
    ensure_finite(phases, "phases")?;
    let n = amplitudes.len();
    let m2 = amplitudes.iter().map(|a| a * a).sum::<f64>() / 2.0;
    let tones: Vec<Complex64> = amplitudes
        .iter()
        .zip(phases)
        .map(|(&a, &p)| Complex64::from_polar(a, p))
        .collect();
    let mut self_conv = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            self_conv[i + j] += tones[i] * tones[j];
        }
    }
    let m4 = 0.375 * self_conv.iter().map(|u| u.norm_sqr()).sum::<f64>();
    Ok((m2, m4))
}

/// Waveform design instance: what the transmitter knows about the channel
/// and how much power and bandwidth it may spend.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformDesignProblem {
    channel_phases: Vec<f64>,
    channel_magnitudes: Vec<f64>,
    power_budget: f64,
    max_tones: usize,
    max_spacing: f64,
}

impl WaveformDesignProblem {
    pub fn new(
        channel_phases: Vec<f64>,
        channel_magnitudes: Vec<f64>,
        power_budget: f64,
        max_tones: usize,
        max_spacing: f64,
    ) -> Result<Self> {
        if channel_phases.is_empty() {
            return Err(invalid("design problem needs at least one tone"));
        }
        if channel_phases.len() != channel_magnitudes.len() {
            return Err(Error::LengthMismatch {
                left: channel_phases.len(),
                right: channel_magnitudes.len(),
                context: "channel phases vs magnitudes",
            });
        }
        if channel_phases.len() > max_tones {
            return Err(invalid(format!(
                "{} tones exceed the bandwidth cap of {max_tones}",
                channel_phases.len()
            )));
        }
        ensure_finite(&channel_phases, "channel_phases")?;
        ensure_finite(&channel_magnitudes, "channel_magnitudes")?;
        if channel_magnitudes.iter().any(|&m| m <= 0.0) {
            return Err(invalid("channel magnitudes must be > 0"));
        }
        ensure_positive(power_budget, "power_budget")?;
        ensure_positive(max_spacing, "max_spacing")?;
        Ok(Self {
            channel_phases,
            channel_magnitudes,
            power_budget,
            max_tones,
            max_spacing,
        })
    }

    pub fn n_tones(&self) -> usize {
        self.channel_phases.len()
    }

    pub fn channel_phases(&self) -> &[f64] {
        &self.channel_phases
    }

    pub fn channel_magnitudes(&self) -> &[f64] {
        &self.channel_magnitudes
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn max_tones(&self) -> usize {
        self.max_tones
    }

    pub fn max_spacing(&self) -> f64 {
        self.max_spacing
    }

    /// Transmit amplitudes of the equal-power split: each tone carries
    /// power_budget / n, i.e. amplitude sqrt(2 P / n).
    pub fn equal_split_amplitudes(&self) -> Vec<f64> {
        let a = (2.0 * self.power_budget / self.n_tones() as f64).sqrt();
        vec![a; self.n_tones()]
    }

    /// Received per-tone amplitudes for the given transmit amplitudes.
    fn received_amplitudes(&self, transmit: &[f64]) -> Vec<f64> {
        transmit
            .iter()
            .zip(&self.channel_magnitudes)
            .map(|(a, h)| a * h)
            .collect()
    }
}

/// Synthesizes the waveform arriving at the harvester for the given transmit
/// phases and amplitudes, on the canonical grid (spacing = max_spacing,
/// base = n * spacing, 20x oversampling, one fundamental period).
pub fn received_waveform(
    prob: &WaveformDesignProblem,
    transmit_phases: &[f64],
    transmit_amplitudes: &[f64],
) -> Result<Waveform> {
    let n = prob.n_tones();
    if transmit_phases.len() != n || transmit_amplitudes.len() != n {
        return Err(Error::LengthMismatch {
            left: transmit_phases.len().min(transmit_amplitudes.len()),
            right: n,
            context: "transmit design vs problem tones",
        });
    }
    let spacing = prob.max_spacing;
    let base = n as f64 * spacing;
    let received_phases: Vec<f64> = transmit_phases
        .iter()
        .zip(&prob.channel_phases)
        .map(|(t, c)| t + c)
        .collect();
    let spec = MultisineSpec::new(
        base,
        if n == 1 { 0.0 } else { spacing },
        prob.received_amplitudes(transmit_amplitudes),
        received_phases,
    )?;
    let fs = 20.0 * n as f64 * spacing;
    sample_multisine(&spec, fs, 1)
}

/// Relative drift allowed between a synthesized waveform's power and its
/// nominal budget before the comparison is considered invalid.
const POWER_TOL: f64 = 1e-3;

/// DC output of the equal-amplitude aligned-phase n-tone multisine divided
/// by the DC output of a single carrier, both at average power `power`.
/// Equals 1 exactly when n = 1 or k4 = 0 and exceeds 1 otherwise.
pub fn compare_multisine_vs_cw(
    n_tones: usize,
    power: f64,
    params: &RectennaParams,
) -> Result<f64> {
    if n_tones == 0 {
        return Err(invalid("n_tones must be >= 1"));
    }
    ensure_positive(power, "power")?;
    let spacing = 1000.0;
    let base = n_tones as f64 * spacing;
    let fs = 20.0 * n_tones as f64 * spacing;

    let multi = MultisineSpec::equal_power_aligned(
        n_tones,
        power,
        base,
        if n_tones == 1 { 0.0 } else { spacing },
    )?;
    let cw = MultisineSpec::new(base, 0.0, vec![(2.0 * power).sqrt()], vec![0.0])?;

    let wm = sample_multisine(&multi, fs, 1)?;
    let wc = sample_multisine(&cw, fs, 1)?;
    for (name, w) in [("multisine", &wm), ("cw", &wc)] {
        let drift = (w.mean_power() - power).abs() / power;
        if drift > POWER_TOL {
            return Err(Error::Numeric(format!(
                "{name} power drifted {drift:.2e} from its budget"
            )));
        }
    }
    Ok(dc_output(&wm, params) / dc_output(&wc, params))
}

/// Transmit phases that align all tones at the harvester: theta_n equals the
/// negated channel phase, normalized to [0, 2 pi).
pub fn optimize_phases(prob: &WaveformDesignProblem) -> Result<Vec<f64>> {
    Ok(prob
        .channel_phases
        .iter()
        .map(|p| (-p).rem_euclid(std::f64::consts::TAU))
        .collect())
}

/// Result of auditing the aligned-phase design against random phase draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAudit {
    pub aligned_dc: f64,
    pub best_random_dc: f64,
    pub draws: usize,
}

/// Evaluates the aligned design against `draws` uniform random transmit
/// phase sets at equal amplitudes, returning both DC values. The aligned
/// design maximizes the fourth moment, so `aligned_dc >= best_random_dc`.
pub fn phase_alignment_audit(
    prob: &WaveformDesignProblem,
    params: &RectennaParams,
    source: &RandomSource,
    draws: usize,
) -> Result<PhaseAudit> {
    if draws == 0 {
        return Err(invalid("audit needs at least one draw"));
    }
    let b = prob.received_amplitudes(&prob.equal_split_amplitudes());
    let aligned_phases = vec![0.0; prob.n_tones()];
    let (m2, m4) = multisine_moments(&b, &aligned_phases)?;
    let aligned_dc = params.k2 * m2 + params.k4 * m4;

    let mut rng = source.rng();
    let mut best_random_dc = f64::NEG_INFINITY;
    for _ in 0..draws {
        let received: Vec<f64> = prob
            .channel_phases
            .iter()
            .map(|c| rng.gen_range(0.0..std::f64::consts::TAU) + c)
            .collect();
        let (m2r, m4r) = multisine_moments(&b, &received)?;
        best_random_dc = best_random_dc.max(params.k2 * m2r + params.k4 * m4r);
    }
    Ok(PhaseAudit {
        aligned_dc,
        best_random_dc,
        draws,
    })
}

/// Outcome of the amplitude allocation search.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSolution {
    /// Transmit amplitudes on the power sphere sum(a^2)/2 = P.
    pub amplitudes: Vec<f64>,
    /// Received DC at those amplitudes (phases aligned).
    pub dc: f64,
    pub iterations: usize,
    /// False only when the iteration cap was hit before the improvement
    /// threshold; the returned iterate is still the best one visited.
    pub converged: bool,
    /// True when the objective is constant over the feasible set (k4 = 0
    /// with equal channel magnitudes), detected by probing.
    pub flat: bool,
}

const IMPROVEMENT_EPS: f64 = 1e-9;
const MAX_ITERATIONS: usize = 10_000;

fn aligned_dc_and_gradient(
    transmit: &[f64],
    prob: &WaveformDesignProblem,
    params: &RectennaParams,
) -> (f64, Vec<f64>) {
    let n = transmit.len();
    let b = prob.received_amplitudes(transmit);
    let m2 = b.iter().map(|v| v * v).sum::<f64>() / 2.0;
    let mut s = vec![0.0; 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            s[i + j] += b[i] * b[j];
        }
    }
    let m4 = 0.375 * s.iter().map(|v| v * v).sum::<f64>();
    let dc = params.k2 * m2 + params.k4 * m4;
    let mut grad = vec![0.0; n];
    for t in 0..n {
        let mut conv_term = 0.0;
        for (m, &sm) in s.iter().enumerate() {
            if m >= t && m - t < n {
                conv_term += sm * b[m - t];
            }
        }
        grad[t] = prob.channel_magnitudes[t] * (params.k2 * b[t] + 1.5 * params.k4 * conv_term);
    }
    (dc, grad)
}

fn project_to_power_sphere(mut u: Vec<f64>, target_norm: f64) -> Vec<f64> {
    for v in &mut u {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        let n = u.len();
        return vec![target_norm / (n as f64).sqrt(); n];
    }
    u.iter().map(|v| v * target_norm / norm).collect()
}

/// Allocates transmit amplitudes over the tones by projected gradient ascent
/// on the received DC, starting from the equal split (so the result never
/// falls below the equal-allocation baseline). Assumes phases are already
/// aligned. Feasible set: sum(a_n^2)/2 = power budget, a_n >= 0.
pub fn optimize_amplitudes(
    prob: &WaveformDesignProblem,
    params: &RectennaParams,
) -> Result<AmplitudeSolution> {
    let n = prob.n_tones();
    let target_norm = (2.0 * prob.power_budget).sqrt();
    let equal = prob.equal_split_amplitudes();
    let (equal_dc, _) = aligned_dc_and_gradient(&equal, prob, params);

    // Probe the vertices: a constant objective across them and the center
    // means the feasible set is flat (k4 = 0 with equal channel gains).
    let mut spread: f64 = 0.0;
    for t in 0..n {
        let mut vertex = vec![0.0; n];
        vertex[t] = target_norm;
        let (vdc, _) = aligned_dc_and_gradient(&vertex, prob, params);
        spread = spread.max((vdc - equal_dc).abs());
    }
    if spread <= IMPROVEMENT_EPS * equal_dc.abs().max(1.0) {
        return Ok(AmplitudeSolution {
            amplitudes: equal,
            dc: equal_dc,
            iterations: 0,
            converged: true,
            flat: true,
        });
    }

    let mut u = equal;
    let mut best_dc = equal_dc;
    let mut converged = false;
    let mut iterations = 0;
    let mut step = 0.0; // set from the first gradient
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (_, grad) = aligned_dc_and_gradient(&u, prob, params);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm == 0.0 {
            converged = true;
            break;
        }
        if step == 0.0 {
            step = 0.25 * target_norm / grad_norm;
        }
        let candidate: Vec<f64> = u.iter().zip(&grad).map(|(v, g)| v + step * g).collect();
        let candidate = project_to_power_sphere(candidate, target_norm);
        let (cdc, _) = aligned_dc_and_gradient(&candidate, prob, params);
        if cdc > best_dc {
            let improvement = cdc - best_dc;
            u = candidate;
            best_dc = cdc;
            step *= 1.5;
            if improvement < IMPROVEMENT_EPS {
                converged = true;
                break;
            }
        } else {
            step *= 0.5;
            if step * grad_norm < 1e-18 * target_norm {
                converged = true;
                break;
            }
        }
    }

    Ok(AmplitudeSolution {
        amplitudes: u,
        dc: best_dc,
        iterations,
        converged,
        flat: false,
    })
}
