//! Passive backscatter link models: duty-cycled harvest/reflect blocks,
//! reflection-coefficient constellations, the energy-rate frontier, and
//! retrodirective phase-conjugate beamforming.

use crate::error::{invalid, Error, Result};
use crate::signal::RandomSource;
use num_complex::Complex64;
use rand_distr::StandardNormal;

/// Reflection coefficients may exceed the unit circle by this much before
/// the passivity check rejects them (rounding slack only).
const PASSIVITY_TOL: f64 = 1e-9;

/// A duty-cycled backscatter block: the device harvests for a fraction
/// `1 - duty_cycle` of the block and reflects constellation symbols for the
/// rest, harvesting whatever it does not reflect.
#[derive(Debug, Clone, PartialEq)]
pub struct BackscatterConfig {
    duty_cycle: f64,
    reflection_constellation: Vec<Complex64>,
    incident_power: f64,
    harvest_efficiency: f64,
    symbol_rate: f64,
    block_duration: f64,
}

impl BackscatterConfig {
    pub fn new(
        duty_cycle: f64,
        reflection_constellation: Vec<Complex64>,
        incident_power: f64,
        harvest_efficiency: f64,
        symbol_rate: f64,
        block_duration: f64,
    ) -> Result<Self> {
        if !duty_cycle.is_finite() || !(0.0..=1.0).contains(&duty_cycle) {
            return Err(invalid("duty_cycle must lie in [0, 1]"));
        }
        if reflection_constellation.is_empty() {
            return Err(invalid("reflection constellation must be non-empty"));
        }
        for g in &reflection_constellation {
            if !g.re.is_finite() || !g.im.is_finite() {
                return Err(invalid("reflection coefficients must be finite"));
            }
            if g.norm() > 1.0 + PASSIVITY_TOL {
                return Err(Error::ActiveReflection(g.norm()));
            }
        }
        if !incident_power.is_finite() || incident_power <= 0.0 {
            return Err(invalid("incident_power must be finite and > 0"));
        }
        if !harvest_efficiency.is_finite()
            || harvest_efficiency <= 0.0
            || harvest_efficiency > 1.0
        {
            return Err(invalid("harvest_efficiency must lie in (0, 1]"));
        }
        if !symbol_rate.is_finite() || symbol_rate <= 0.0 {
            return Err(invalid("symbol_rate must be finite and > 0"));
        }
        if !block_duration.is_finite() || block_duration <= 0.0 {
            return Err(invalid("block_duration must be finite and > 0"));
        }
        Ok(Self {
            duty_cycle,
            reflection_constellation,
            incident_power,
            harvest_efficiency,
            symbol_rate,
            block_duration,
        })
    }

    pub fn duty_cycle(&self) -> f64 {
        self.duty_cycle
    }

    pub fn reflection_constellation(&self) -> &[Complex64] {
        &self.reflection_constellation
    }

    pub fn incident_power(&self) -> f64 {
        self.incident_power
    }

    pub fn harvest_efficiency(&self) -> f64 {
        self.harvest_efficiency
    }

    pub fn symbol_rate(&self) -> f64 {
        self.symbol_rate
    }

    pub fn block_duration(&self) -> f64 {
        self.block_duration
    }

    /// Average reflected power fraction over uniform constellation use.
    pub fn mean_reflected_fraction(&self) -> f64 {
        self.reflection_constellation
            .iter()
            .map(|g| g.norm_sqr())
            .sum::<f64>()
            / self.reflection_constellation.len() as f64
    }

    pub fn with_duty_cycle(mut self, duty_cycle: f64) -> Result<Self> {
        if !duty_cycle.is_finite() || !(0.0..=1.0).contains(&duty_cycle) {
            return Err(invalid("duty_cycle must lie in [0, 1]"));
        }
        self.duty_cycle = duty_cycle;
        Ok(self)
    }

    pub fn with_constellation(mut self, constellation: Vec<Complex64>) -> Result<Self> {
        if constellation.is_empty() {
            return Err(invalid("reflection constellation must be non-empty"));
        }
        for g in &constellation {
            if g.norm() > 1.0 + PASSIVITY_TOL {
                return Err(Error::ActiveReflection(g.norm()));
            }
        }
        self.reflection_constellation = constellation;
        Ok(self)
    }
}

/// Energy harvested over one block. The harvest-only phase collects the full
/// incident power; while reflecting symbol k the device keeps the
/// non-reflected fraction `1 - |Γ_k|²`, so with uniform symbol use
/// `E = η · P · T · [(1 − δ) + δ · (1 − mean|Γ|²)]`.
pub fn harvested_energy(cfg: &BackscatterConfig) -> f64 {
    let delta = cfg.duty_cycle;
    let harvest_fraction = (1.0 - delta) + delta * (1.0 - cfg.mean_reflected_fraction());
    cfg.harvest_efficiency * cfg.incident_power * cfg.block_duration * harvest_fraction
}

/// Information rate of the reflecting phase: symbols only flow for the duty
/// cycle's fraction of the block, each carrying at most log2(M) bits and no
/// more than the composite link's Shannon limit supports.
pub fn backscatter_rate(cfg: &BackscatterConfig, composite_snr: f64) -> Result<f64> {
    if composite_snr.is_nan() || composite_snr < 0.0 {
        return Err(invalid("composite_snr must be >= 0"));
    }
    let m = cfg.reflection_constellation.len() as f64;
    let per_symbol = m.log2().min((1.0 + composite_snr).log2());
    Ok(cfg.duty_cycle * cfg.symbol_rate * per_symbol)
}

/// Minimum pairwise distance of the packed constellations.
pub const CONSTELLATION_MIN_DISTANCE: f64 = 0.5;

/// Sizes the family is defined for.
pub const CONSTELLATION_SIZES: [usize; 5] = [2, 4, 8, 16, 32];

fn hex_lattice_sorted(count: usize) -> Vec<Complex64> {
    let d = CONSTELLATION_MIN_DISTANCE;
    let reach = 8i32;
    let mut points = Vec::new();
    for i in -reach..=reach {
        for j in -reach..=reach {
            let x = d * (i as f64 + 0.5 * j as f64);
            let y = d * (3f64.sqrt() / 2.0) * j as f64;
            points.push(Complex64::new(x, y));
        }
    }
    // Radius-major order with ties broken by angle; lattice shells are far
    // enough apart that the rounding slack cannot reorder shells.
    points.sort_by(|a, b| {
        let (ra, rb) = (a.norm(), b.norm());
        if (ra - rb).abs() > 1e-9 * ra.max(rb).max(1.0) {
            ra.total_cmp(&rb)
        } else {
            let wrap = |p: &Complex64| {
                let ang = p.im.atan2(p.re);
                if ang < 0.0 {
                    ang + std::f64::consts::TAU
                } else {
                    ang
                }
            };
            wrap(a).total_cmp(&wrap(b))
        }
    });
    points.truncate(count);
    points
}

fn max_radius_after_shift(points: &[Complex64], centroid: Complex64, beta: f64) -> f64 {
    points
        .iter()
        .map(|p| (p - centroid * beta).norm())
        .fold(0.0, f64::max)
}

/// Reflection constellation of size M: the first M hexagonal-lattice points
/// by radius (so pairwise distances are at least `CONSTELLATION_MIN_DISTANCE`
/// exactly), recentred as far toward zero mean as the unit disk allows.
/// Fixing the minimum distance while growing M forces the points outward,
/// which makes the average reflected power grow with M.
///
/// Errors with `PackingInfeasible` when the M points cannot be translated
/// into the unit disk (for this family, M = 32); the caller must reduce the
/// minimum distance to go larger.
pub fn constellation_family(m: usize) -> Result<Vec<Complex64>> {
    if !CONSTELLATION_SIZES.contains(&m) {
        return Err(invalid(format!(
            "constellation size must be one of {CONSTELLATION_SIZES:?}, got {m}"
        )));
    }
    let points = hex_lattice_sorted(m);
    let centroid = points.iter().sum::<Complex64>() / m as f64;

    // Shift by beta * centroid, preferring full mean removal (beta = 1,
    // least average reflected power). max-radius(beta) is convex, so when
    // beta = 1 overflows the disk the feasible betas form one interval:
    // ternary-search the minimum, then bisect for the largest feasible beta.
    let beta = if max_radius_after_shift(&points, centroid, 1.0) <= 1.0 {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if max_radius_after_shift(&points, centroid, m1)
                < max_radius_after_shift(&points, centroid, m2)
            {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let best = 0.5 * (lo + hi);
        if max_radius_after_shift(&points, centroid, best) > 1.0 {
            return Err(Error::PackingInfeasible {
                points: m,
                min_distance: CONSTELLATION_MIN_DISTANCE,
            });
        }
        let (mut lo, mut hi) = (best, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if max_radius_after_shift(&points, centroid, mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(points.iter().map(|p| p - centroid * beta).collect())
}

/// One operating point of the energy-rate tradeoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRatePoint {
    pub duty_cycle: f64,
    pub constellation_size: usize,
    /// Joules per block.
    pub harvested_energy: f64,
    /// Bits per second.
    pub rate: f64,
}

/// Evaluates the (duty cycle, constellation size) grid against the template
/// config and returns the Pareto-dominant points, sorted by increasing rate
/// (hence non-increasing energy). Points that tie in both coordinates are
/// all retained.
pub fn energy_rate_frontier(
    template: &BackscatterConfig,
    duty_cycles: &[f64],
    constellation_sizes: &[usize],
    composite_snr: f64,
) -> Result<Vec<EnergyRatePoint>> {
    if duty_cycles.is_empty() || constellation_sizes.is_empty() {
        return Err(invalid("duty-cycle and constellation grids must be non-empty"));
    }
    let mut grid = Vec::with_capacity(duty_cycles.len() * constellation_sizes.len());
    for &m in constellation_sizes {
        let constellation = constellation_family(m)?;
        for &delta in duty_cycles {
            let cfg = template
                .clone()
                .with_duty_cycle(delta)?
                .with_constellation(constellation.clone())?;
            grid.push(EnergyRatePoint {
                duty_cycle: delta,
                constellation_size: m,
                harvested_energy: harvested_energy(&cfg),
                rate: backscatter_rate(&cfg, composite_snr)?,
            });
        }
    }
    Ok(pareto_front(&grid))
}

fn frontier_order(a: &EnergyRatePoint, b: &EnergyRatePoint) -> std::cmp::Ordering {
    a.rate
        .total_cmp(&b.rate)
        .then(b.harvested_energy.total_cmp(&a.harvested_energy))
        .then(a.duty_cycle.total_cmp(&b.duty_cycle))
        .then(a.constellation_size.cmp(&b.constellation_size))
}

/// Non-dominated subset, sorted by increasing rate then decreasing energy.
pub fn pareto_front(points: &[EnergyRatePoint]) -> Vec<EnergyRatePoint> {
    let mut sorted: Vec<EnergyRatePoint> = points.to_vec();
    sorted.sort_by(|a, b| {
        b.rate
            .total_cmp(&a.rate)
            .then(b.harvested_energy.total_cmp(&a.harvested_energy))
    });
    let mut front: Vec<EnergyRatePoint> = Vec::new();
    let mut best_energy = f64::NEG_INFINITY;
    let mut i = 0;
    while i < sorted.len() {
        // Group points of equal rate; only the group's max-energy points can
        // be non-dominated, and only if they beat every higher-rate energy.
        let mut j = i;
        while j < sorted.len() && sorted[j].rate == sorted[i].rate {
            j += 1;
        }
        let group_max = sorted[i].harvested_energy;
        if group_max > best_energy {
            for p in &sorted[i..j] {
                if p.harvested_energy == group_max {
                    front.push(*p);
                }
            }
            best_energy = group_max;
        }
        i = j;
    }
    front.sort_by(frontier_order);
    front
}

/// Phase-conjugate transmit weights from a received pilot: `conj(p)/‖p‖`.
/// The transmission retraces the pilot's channel and combines coherently at
/// its origin without any location knowledge.
pub fn retrodirective_weights(pilot_received: &[Complex64]) -> Result<Vec<Complex64>> {
    if pilot_received.is_empty() {
        return Err(invalid("pilot must be non-empty"));
    }
    if pilot_received
        .iter()
        .any(|p| !p.re.is_finite() || !p.im.is_finite())
    {
        return Err(invalid("pilot entries must be finite"));
    }
    let norm = pilot_received.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroPower("pilot"));
    }
    Ok(pilot_received.iter().map(|p| p.conj() / norm).collect())
}

/// Power delivered through channel `h` by transmit weights `w`: `|wᵀh|²`
/// (reciprocal channel, so the downlink reuses the uplink coefficients).
pub fn beamformed_power(weights: &[Complex64], channel: &[Complex64]) -> Result<f64> {
    if weights.len() != channel.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: channel.len(),
            context: "weights vs channel",
        });
    }
    if weights.is_empty() {
        return Err(invalid("need at least one antenna"));
    }
    let s: Complex64 = weights.iter().zip(channel).map(|(w, h)| w * h).sum();
    Ok(s.norm_sqr())
}

/// Uniformly random unit-norm weight vector (isotropic on the sphere).
pub fn random_unit_weights(n: usize, source: &RandomSource) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(invalid("need at least one antenna"));
    }
    let mut rng = source.rng();
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| {
                use rand::Rng;
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(v.into_iter().map(|z| z / norm).collect());
        }
    }
}

/// Monte Carlo comparison of retrodirective weights against isotropic random
/// weights on the same channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetroAudit {
    pub retro_power: f64,
    pub mean_random_power: f64,
    pub max_random_power: f64,
    pub draws: usize,
}

impl RetroAudit {
    /// Beamforming gain of conjugation over isotropic transmission.
    pub fn gain(&self) -> f64 {
        self.retro_power / self.mean_random_power
    }
}

pub fn retro_gain_audit(
    channel: &[Complex64],
    draws: usize,
    source: &RandomSource,
) -> Result<RetroAudit> {
    if draws == 0 {
        return Err(invalid("need at least one draw"));
    }
    let weights = retrodirective_weights(channel)?;
    let retro_power = beamformed_power(&weights, channel)?;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for draw in 0..draws {
        let w = random_unit_weights(channel.len(), &source.substream(draw as u64))?;
        let p = beamformed_power(&w, channel)?;
        sum += p;
        max = max.max(p);
    }
    Ok(RetroAudit {
        retro_power,
        mean_random_power: sum / draws as f64,
        max_random_power: max,
        draws,
    })
}
