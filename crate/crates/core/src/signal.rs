//! Real-valued baseband/RF signal primitives: sampled waveforms, harmonic
//! multisine synthesis, peak-to-average power ratio, mid-rise quantization,
//! SQNR measurement, and the seeded random source used by every stochastic
//! experiment in the crate.
//!
//! Sampling discipline: multisines are synthesized over an integer number of
//! fundamental periods with a sample rate that is an integer multiple of the
//! tone spacing. Under that discipline discrete time averages of x^2 and x^4
//! equal the continuous ones to roundoff, so tests can freeze analytic
//! moments as exact expectations.

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Uniformly sampled real waveform. Invariants: at least two samples, all
/// samples finite, strictly positive sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("waveform must contain at least two samples"));
        }
        ensure_finite(&samples, "samples")?;
        ensure_positive(sample_rate, "sample_rate")?;
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false: construction requires at least two samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Time-average of x^2.
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    /// Largest instantaneous x^2.
    pub fn peak_power(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x * x))
    }
}

/// Multisine on a uniform frequency grid: tone k sits at
/// `base_frequency + k * tone_spacing` with amplitude `amplitudes[k]` and
/// phase `phases[k]`.
///
/// Invariants: at least one tone, matching amplitude/phase lengths, finite
/// non-negative amplitudes (all-zero is allowed and synthesizes the zero
/// waveform), finite phases, positive base frequency, and positive spacing
/// whenever there is more than one tone (a single tone may use zero spacing).
#[derive(Debug, Clone, PartialEq)]
pub struct MultisineSpec {
    base_frequency: f64,
    tone_spacing: f64,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl MultisineSpec {
    pub fn new(
        base_frequency: f64,
        tone_spacing: f64,
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
    ) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("multisine needs at least one tone"));
        }
        if amplitudes.len() != phases.len() {
            return Err(Error::LengthMismatch {
                left: amplitudes.len(),
                right: phases.len(),
                context: "amplitudes vs phases",
            });
        }
        ensure_finite(&amplitudes, "amplitudes")?;
        ensure_finite(&phases, "phases")?;
        if amplitudes.iter().any(|&a| a < 0.0) {
            return Err(invalid("amplitudes must be non-negative"));
        }
        ensure_positive(base_frequency, "base_frequency")?;
        if amplitudes.len() > 1 {
            ensure_positive(tone_spacing, "tone_spacing")?;
        } else if !tone_spacing.is_finite() || tone_spacing < 0.0 {
            return Err(invalid("tone_spacing must be finite and >= 0"));
        }
        Ok(Self {
            base_frequency,
            tone_spacing,
            amplitudes,
            phases,
        })
    }

    /// N equal-amplitude tones with all phases zero, scaled so the waveform's
    /// mean power is `total_power`. This is the phase-aligned design whose
    /// peaks drive a fourth-order rectifier hardest.
    pub fn equal_power_aligned(
        n_tones: usize,
        total_power: f64,
        base_frequency: f64,
        tone_spacing: f64,
    ) -> Result<Self> {
        ensure_positive(total_power, "total_power")?;
        if n_tones == 0 {
            return Err(invalid("multisine needs at least one tone"));
        }
        // Mean power of sum of N cosines at distinct tones is sum(a^2)/2.
        let a = (2.0 * total_power / n_tones as f64).sqrt();
        Self::new(base_frequency, tone_spacing, vec![a; n_tones], vec![0.0; n_tones])
    }

    pub fn n_tones(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn tone_spacing(&self) -> f64 {
        self.tone_spacing
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn tone_frequency(&self, k: usize) -> f64 {
        self.base_frequency + k as f64 * self.tone_spacing
    }

    pub fn highest_frequency(&self) -> f64 {
        self.tone_frequency(self.amplitudes.len() - 1)
    }

    /// Analytic mean power: sum(a_k^2) / 2 for distinct tone frequencies.
    pub fn mean_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>() / 2.0
    }

    /// Fundamental period of the tone comb. For a single tone this is the
    /// tone period; for several tones it is 1 / spacing, which is the comb
    /// period whenever the base lies on the grid.
    pub fn fundamental_period(&self) -> f64 {
        if self.amplitudes.len() == 1 {
            1.0 / self.base_frequency
        } else {
            1.0 / self.tone_spacing
        }
    }
}

/// Oversampling factor required of callers: the sample rate must exceed the
/// highest tone by at least this factor so that squared and fourth-power
/// intermodulation products stay below Nyquist.
pub const MIN_OVERSAMPLING: f64 = 10.0;

/// Relative tolerance for "the sample grid divides the fundamental period".
const GRID_TOL: f64 = 1e-9;

/// Synthesizes `n_periods` fundamental periods of the multisine at
/// `sample_rate`.
///
/// Errors: `Aliasing` when `sample_rate < MIN_OVERSAMPLING * highest tone`;
/// `InvalidArgument` when `n_periods == 0` or the sample rate is not an
/// integer multiple of the fundamental frequency (non-integer grids would
/// silently bias time averages; callers must pick commensurate rates).
pub fn sample_multisine(
    spec: &MultisineSpec,
    sample_rate: f64,
    n_periods: u32,
) -> Result<Waveform> {
    if n_periods == 0 {
        return Err(invalid("n_periods must be >= 1"));
    }
    ensure_positive(sample_rate, "sample_rate")?;
    let bound = MIN_OVERSAMPLING * spec.highest_frequency();
    if sample_rate < bound {
        return Err(Error::Aliasing { sample_rate, bound });
    }
    let samples_per_period = sample_rate * spec.fundamental_period();
    let rounded = samples_per_period.round();
    if (samples_per_period - rounded).abs() > GRID_TOL * samples_per_period {
        return Err(invalid(format!(
            "sample_rate must be an integer multiple of the fundamental frequency \
             (got {samples_per_period} samples per period)"
        )));
    }
    let total = rounded as usize * n_periods as usize;
    let mut samples = Vec::with_capacity(total);
    let two_pi = std::f64::consts::TAU;
    for k in 0..total {
        let t = k as f64 / sample_rate;
        let mut x = 0.0;
        for n in 0..spec.n_tones() {
            x += spec.amplitudes[n] * (two_pi * spec.tone_frequency(n) * t + spec.phases[n]).cos();
        }
        samples.push(x);
    }
    Waveform::new(samples, sample_rate)
}

/// Peak-to-average power ratio (linear, not dB). Errors on zero mean power.
pub fn papr(waveform: &Waveform) -> Result<f64> {
    let mean = waveform.mean_power();
    if mean == 0.0 {
        return Err(Error::ZeroPower("papr"));
    }
    Ok(waveform.peak_power() / mean)
}

/// Mid-rise uniform quantizer: `bits` bits over the symmetric range
/// `[-full_scale, full_scale]`, so the step is `2 * full_scale / 2^bits` and
/// reproduction levels sit at odd multiples of half a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    bits: u32,
    full_scale: f64,
}

impl QuantizerSpec {
    pub fn new(bits: u32, full_scale: f64) -> Result<Self> {
        if bits == 0 || bits > 32 {
            return Err(invalid(format!("bits must be in 1..=32, got {bits}")));
        }
        ensure_positive(full_scale, "full_scale")?;
        Ok(Self { bits, full_scale })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn full_scale(&self) -> f64 {
        self.full_scale
    }

    /// Quantization step.
    pub fn step(&self) -> f64 {
        2.0 * self.full_scale / (1u64 << self.bits) as f64
    }

    /// Largest representable level, `full_scale - step/2`.
    pub fn top_level(&self) -> f64 {
        self.full_scale - self.step() / 2.0
    }

    /// Quantizes one sample; the bool reports saturation.
    pub fn quantize_sample(&self, x: f64) -> (f64, bool) {
        let top = self.top_level();
        let level = self.step() * ((x / self.step()).floor() + 0.5);
        if level > top {
            (top, true)
        } else if level < -top {
            (-top, true)
        } else {
            (level, false)
        }
    }
}

/// Quantization result: the quantized waveform plus how many samples
/// saturated against either rail.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub waveform: Waveform,
    pub clipped: usize,
}

/// Applies the mid-rise quantizer sample-by-sample. Idempotent: quantizing
/// the output again reproduces it exactly and clips nothing.
pub fn quantize(waveform: &Waveform, spec: &QuantizerSpec) -> Quantized {
    let mut clipped = 0usize;
    let samples = waveform
        .samples()
        .iter()
        .map(|&x| {
            let (level, sat) = spec.quantize_sample(x);
            if sat {
                clipped += 1;
            }
            level
        })
        .collect();
    Quantized {
        // Levels are finite by construction, so this cannot fail.
        waveform: Waveform::new(samples, waveform.sample_rate()).expect("quantized levels are finite"),
        clipped,
    }
}

/// Signal-to-quantization-noise ratio in dB between a reference waveform and
/// a degraded copy: `10 log10(P_ref / P_err)`. Returns +inf when the error
/// power is exactly zero. Errors on length or sample-rate mismatch and on a
/// zero-power reference.
pub fn sqnr(reference: &Waveform, degraded: &Waveform) -> Result<f64> {
    if reference.len() != degraded.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: degraded.len(),
            context: "sqnr reference vs degraded",
        });
    }
    if reference.sample_rate() != degraded.sample_rate() {
        return Err(invalid("sqnr operands must share a sample rate"));
    }
    let p_ref = reference.mean_power();
    if p_ref == 0.0 {
        return Err(Error::ZeroPower("sqnr reference"));
    }
    let p_err = reference
        .samples()
        .iter()
        .zip(degraded.samples())
        .map(|(r, d)| (r - d) * (r - d))
        .sum::<f64>()
        / reference.len() as f64;
    if p_err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (p_ref / p_err).log10())
}

/// Ratio in dB of two linear powers; used throughout the crate.
pub fn power_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Seeded, splittable source of random generators.
///
/// A source is identified by `(seed, stream)`. `rng()` always returns a
/// generator positioned at the start of that stream, so repeated calls and
/// repeated runs see identical draws. `substream(i)` derives a statistically
/// independent child source; experiments give each trial its own substream
/// so per-trial draws do not depend on evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Child source `index` of this source. Children of distinct indices and
    /// of distinct parents get distinct streams (up to the 64-bit birthday
    /// bound, irrelevant at experiment scale).
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))),
        }
    }

    /// Fresh generator at the start of this source's stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
