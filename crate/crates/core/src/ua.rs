//! Ubiquitous-array experiments: conjugate-beamformed energy hotspots with
//! decay-law fits, and blind localization from channel observation profiles.

use crate::channel::{free_space_gain, steering_vector, ArrayGeometry, Point3};
use crate::error::{invalid, Error, Result};
use crate::signal::RandomSource;
use crate::stats::linear_fit;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// A deployed array with optional spherical-shell metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct UAConfig {
    geometry: ArrayGeometry,
    sphere_radius: Option<f64>,
}

/// Elements required before the radial decay-law machinery is meaningful.
pub const MIN_DECAY_ELEMENTS: usize = 16;

impl UAConfig {
    pub fn new(geometry: ArrayGeometry) -> Result<Self> {
        Self::build(geometry, None)
    }

    fn build(geometry: ArrayGeometry, sphere_radius: Option<f64>) -> Result<Self> {
        let mut positions: Vec<&Point3> = geometry.element_positions().iter().collect();
        positions.sort_by(|a, b| {
            a.x.total_cmp(&b.x)
                .then(a.y.total_cmp(&b.y))
                .then(a.z.total_cmp(&b.z))
        });
        for w in positions.windows(2) {
            if w[0].x == w[1].x && w[0].y == w[1].y && w[0].z == w[1].z {
                return Err(invalid("array elements must occupy distinct positions"));
            }
        }
        Ok(Self {
            geometry,
            sphere_radius,
        })
    }

    /// Near-uniform spherical shell of `n` elements via the Fibonacci
    /// lattice, centered at the origin.
    pub fn spherical(n: usize, radius: f64, wavelength: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("need at least one element"));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(invalid("sphere radius must be finite and > 0"));
        }
        let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let positions: Vec<Point3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r_xy = (1.0 - z * z).max(0.0).sqrt();
                let az = golden_angle * i as f64;
                Point3::new(radius * r_xy * az.cos(), radius * r_xy * az.sin(), radius * z)
            })
            .collect();
        Self::build(ArrayGeometry::new(positions, wavelength)?, Some(radius))
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn n_elements(&self) -> usize {
        self.geometry.n_elements()
    }

    pub fn wavelength(&self) -> f64 {
        self.geometry.wavelength()
    }

    pub fn sphere_radius(&self) -> Option<f64> {
        self.sphere_radius
    }
}

/// Conjugate (matched-filter) transmit weights for a target point:
/// `w = conj(g) / ‖g‖` where `g` is the vector of free-space gains, so total
/// transmit power is one and delivered power at the target is maximal among
/// unit-norm weight vectors.
pub fn conjugate_weights(ua: &UAConfig, target: &Point3) -> Result<Vec<Complex64>> {
    let wavelength = ua.wavelength();
    let gains: Vec<Complex64> = ua
        .geometry()
        .element_positions()
        .iter()
        .map(|&pos| free_space_gain(pos, *target, wavelength))
        .collect::<Result<_>>()?;
    let norm = gains.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroPower("target gains"));
    }
    Ok(gains.iter().map(|g| g.conj() / norm).collect())
}

/// Power density (normalized) radiated by the weighted array at a point:
/// `|Σ_n w_n g_n(p)|²`.
pub fn field_value(ua: &UAConfig, weights: &[Complex64], point: &Point3) -> Result<f64> {
    let positions = ua.geometry().element_positions();
    if weights.len() != positions.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: positions.len(),
            context: "weights vs elements",
        });
    }
    let wavelength = ua.wavelength();
    let mut sum = Complex64::default();
    for (w, &pos) in weights.iter().zip(positions) {
        sum += w * free_space_gain(pos, *point, wavelength)?;
    }
    Ok(sum.norm_sqr())
}

/// Power-density samples over a set of evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    points: Vec<Point3>,
    values: Vec<f64>,
}

impl FieldMap {
    pub fn new(points: Vec<Point3>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("field map needs at least one point"));
        }
        if points.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: values.len(),
                context: "points vs values",
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("field values must be finite and >= 0"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("field points must be finite"));
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the largest value (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Evaluates the conjugate-beamformed field of `ua` aimed at `target` over
/// the grid. Grid evaluation order does not affect the result.
pub fn hotspot_field(ua: &UAConfig, target: &Point3, grid: &[Point3]) -> Result<FieldMap> {
    if grid.is_empty() {
        return Err(invalid("grid must be non-empty"));
    }
    let weights = conjugate_weights(ua, target)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|p| field_value(ua, &weights, p))
        .collect::<Result<_>>()?;
    FieldMap::new(grid.to_vec(), values)
}

fn unit_direction(rng: &mut impl Rng) -> Point3 {
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let n = (x * x + y * y + z * z).sqrt();
        if n > 1e-12 {
            return Point3::new(x / n, y / n, z / n);
        }
    }
}

/// Shell-averaged radial power profile around `target`: `n_shells` radii
/// geometrically spaced over `[r_min_wl, r_max_wl]` wavelengths, each value
/// the mean field over `samples_per_shell` random directions with the
/// sample radius jittered uniformly by ±λ/2. The returned map places shell
/// k's value at `target + r_k·x̂` so distances to the target reproduce the
/// shell radii exactly.
///
/// The averaging is what makes the fitted exponent meaningful: the focused
/// field carries a standing-wave factor oscillating with period λ/2 in
/// radius (hitting exact zeros), and a λ-wide radial window integrates that
/// factor to its mean so only the smooth envelope remains. Any single ray
/// oscillates too wildly to fit.
pub fn radial_power_profile(
    ua: &UAConfig,
    target: &Point3,
    r_min_wl: f64,
    r_max_wl: f64,
    n_shells: usize,
    samples_per_shell: usize,
    source: &RandomSource,
) -> Result<FieldMap> {
    if ua.n_elements() < MIN_DECAY_ELEMENTS {
        return Err(invalid(format!(
            "radial profiles need at least {MIN_DECAY_ELEMENTS} elements, got {}",
            ua.n_elements()
        )));
    }
    if !(r_min_wl.is_finite() && r_max_wl.is_finite()) || r_min_wl <= 0.0 || r_max_wl <= r_min_wl {
        return Err(invalid("need 0 < r_min_wl < r_max_wl"));
    }
    if n_shells < 2 {
        return Err(invalid("need at least two shells"));
    }
    if samples_per_shell == 0 {
        return Err(invalid("need at least one sample per shell"));
    }
    let weights = conjugate_weights(ua, target)?;
    let wavelength = ua.wavelength();
    let ratio = r_max_wl / r_min_wl;
    let shells: Vec<(Point3, f64)> = (0..n_shells)
        .into_par_iter()
        .map(|k| {
            let r_wl = r_min_wl * ratio.powf(k as f64 / (n_shells - 1) as f64);
            let r = r_wl * wavelength;
            let mut rng = source.substream(k as u64).rng();
            let mut acc = 0.0;
            for _ in 0..samples_per_shell {
                let dir = unit_direction(&mut rng);
                let rs = r + wavelength * rng.gen_range(-0.5..0.5);
                let p = target.translated(rs * dir.x, rs * dir.y, rs * dir.z);
                acc += field_value(ua, &weights, &p)?;
            }
            Ok((
                target.translated(r, 0.0, 0.0),
                acc / samples_per_shell as f64,
            ))
        })
        .collect::<Result<_>>()?;
    let (points, values) = shells.into_iter().unzip();
    FieldMap::new(points, values)
}

/// Least-squares exponent of power vs distance-from-target on a log-log
/// scale, over map points whose radial distance lies in
/// `[r_min_wl, r_max_wl]` wavelengths.
///
/// Errors with `InsufficientRadialSpan` unless the usable samples cover at
/// least one decade of distance and number at least eight.
pub fn decay_exponent(
    map: &FieldMap,
    target: &Point3,
    r_range_wl: (f64, f64),
    wavelength: f64,
) -> Result<f64> {
    let (r_min_wl, r_max_wl) = r_range_wl;
    if !(r_min_wl.is_finite() && r_max_wl.is_finite()) || r_min_wl <= 0.0 || r_max_wl <= r_min_wl {
        return Err(invalid("need 0 < r_min_wl < r_max_wl"));
    }
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(invalid("wavelength must be finite and > 0"));
    }
    let slack = 1.0 + 1e-9;
    let mut log_r = Vec::new();
    let mut log_p = Vec::new();
    for (p, &v) in map.points().iter().zip(map.values()) {
        let r_wl = p.distance(target) / wavelength;
        if r_wl >= r_min_wl / slack && r_wl <= r_max_wl * slack && v > 0.0 {
            log_r.push(r_wl.ln());
            log_p.push(v.ln());
        }
    }
    if log_r.len() < 8 {
        return Err(Error::InsufficientRadialSpan(format!(
            "only {} usable radial samples in [{r_min_wl}, {r_max_wl}] wavelengths",
            log_r.len()
        )));
    }
    let spread = log_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - log_r.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < (10.0f64).ln() * (1.0 - 1e-9) {
        return Err(Error::InsufficientRadialSpan(format!(
            "radial samples span a factor of {:.3}, need a full decade",
            spread.exp()
        )));
    }
    let (slope, _) = linear_fit(&log_r, &log_p)?;
    Ok(slope)
}

/// Normalized matching of an observation against hypothesized locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationProfile {
    points: Vec<Point3>,
    values: Vec<f64>,
}

impl ObservationProfile {
    pub fn new(points: Vec<Point3>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("profile needs at least one hypothesis"));
        }
        if points.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: values.len(),
                context: "hypotheses vs values",
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("profile values must be finite and >= 0"));
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Modulus of the normalized inner product between the observation and the
/// spatial signature of each hypothesized location: values in [0, 1], equal
/// to 1 exactly when the observation is a scaled signature of that point.
pub fn observation_profile(
    ua: &UAConfig,
    observed: &[Complex64],
    hypotheses: &[Point3],
) -> Result<ObservationProfile> {
    if observed.len() != ua.n_elements() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: ua.n_elements(),
            context: "observation vs elements",
        });
    }
    if hypotheses.is_empty() {
        return Err(invalid("need at least one hypothesis"));
    }
    let obs_norm = observed.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if obs_norm == 0.0 {
        return Err(Error::ZeroPower("observation"));
    }
    let values: Vec<f64> = hypotheses
        .par_iter()
        .map(|h| {
            let sig = steering_vector(ua.geometry(), *h)?;
            let sig_norm = sig.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let inner: Complex64 = observed
                .iter()
                .zip(sig.iter())
                .map(|(o, s)| o.conj() * s)
                .sum();
            Ok((inner.norm() / (obs_norm * sig_norm)).min(1.0))
        })
        .collect::<Result<_>>()?;
    ObservationProfile::new(hypotheses.to_vec(), values)
}

/// Greedy non-maximum suppression: repeatedly takes the highest remaining
/// profile point and suppresses everything within two wavelengths of it, so
/// the returned points are local maxima mutually separated by more than 2λ,
/// ordered by decreasing profile value.
///
/// Errors with `TooFewPeaks` when fewer than `k` survive suppression.
pub fn locate_peaks(profile: &ObservationProfile, k: usize, wavelength: f64) -> Result<Vec<Point3>> {
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(invalid("wavelength must be finite and > 0"));
    }
    let radius = 2.0 * wavelength;
    let mut order: Vec<usize> = (0..profile.len()).collect();
    order.sort_by(|&a, &b| profile.values()[b].total_cmp(&profile.values()[a]).then(a.cmp(&b)));
    let mut peaks: Vec<Point3> = Vec::with_capacity(k);
    for idx in order {
        let candidate = profile.points()[idx];
        if peaks.iter().all(|p| p.distance(&candidate) > radius) {
            peaks.push(candidate);
            if peaks.len() == k {
                return Ok(peaks);
            }
        }
    }
    Err(Error::TooFewPeaks {
        found: peaks.len(),
        requested: k,
    })
}

/// Noiseless array observation of one or more mobiles: the superposition of
/// their spatial signatures.
pub fn superposed_observation(ua: &UAConfig, mobiles: &[Point3]) -> Result<Vec<Complex64>> {
    if mobiles.is_empty() {
        return Err(invalid("need at least one mobile"));
    }
    let mut acc = vec![Complex64::default(); ua.n_elements()];
    for mobile in mobiles {
        let sig = steering_vector(ua.geometry(), *mobile)?;
        for (a, s) in acc.iter_mut().zip(sig.iter()) {
            *a += s;
        }
    }
    Ok(acc)
}

/// Adds circularly symmetric complex Gaussian noise at the given total-power
/// SNR (signal power summed over elements divided by noise power summed over
/// elements). An infinite SNR leaves the observation untouched.
pub fn add_observation_noise(
    observed: &[Complex64],
    snr_linear: f64,
    source: &RandomSource,
) -> Result<Vec<Complex64>> {
    if snr_linear.is_nan() || snr_linear <= 0.0 {
        return Err(invalid("snr must be > 0 (may be infinite)"));
    }
    if snr_linear.is_infinite() {
        return Ok(observed.to_vec());
    }
    let signal_power: f64 = observed.iter().map(|z| z.norm_sqr()).sum();
    if signal_power == 0.0 {
        return Err(Error::ZeroPower("observation"));
    }
    let sigma = (signal_power / (observed.len() as f64 * snr_linear)).sqrt();
    let scale = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = source.rng();
    Ok(observed
        .iter()
        .map(|z| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            z + Complex64::new(re * scale, im * scale)
        })
        .collect())
}

/// Worst localization error over true positions, in wavelengths: for each
/// truth, the distance to its nearest estimate.
pub fn localization_error_wl(
    estimates: &[Point3],
    truths: &[Point3],
    wavelength: f64,
) -> Result<f64> {
    if estimates.is_empty() || truths.is_empty() {
        return Err(invalid("need at least one estimate and one truth"));
    }
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(invalid("wavelength must be finite and > 0"));
    }
    Ok(truths
        .iter()
        .map(|t| {
            estimates
                .iter()
                .map(|e| e.distance(t))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        / wavelength)
}

/// Cross-hotspot leakage at one separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakagePoint {
    pub separation_wl: f64,
    /// Beam-1 power around user 2 relative to beam-1's own peak, in dB.
    pub leakage_db: f64,
}

/// For two users separated by each listed distance (user 1 at the array
/// centroid), beamforms at user 1 and reports the field power around user
/// 2's position relative to the peak. The off-target power is averaged over
/// `samples_per_point` directions on a half-wavelength shell around user 2,
/// which smooths sidelobe ripple so the decay trend is visible.
pub fn interference_vs_separation(
    ua: &UAConfig,
    separations_wl: &[f64],
    samples_per_point: usize,
    source: &RandomSource,
) -> Result<Vec<LeakagePoint>> {
    if separations_wl.is_empty() {
        return Err(invalid("need at least one separation"));
    }
    if samples_per_point == 0 {
        return Err(invalid("need at least one sample per separation"));
    }
    for &s in separations_wl {
        if !s.is_finite() || s < 2.0 {
            return Err(invalid(format!(
                "separations must be >= 2 wavelengths, got {s}"
            )));
        }
    }
    let wavelength = ua.wavelength();
    let user1 = ua.geometry().centroid();
    let weights = conjugate_weights(ua, &user1)?;
    let peak = field_value(ua, &weights, &user1)?;
    if peak == 0.0 {
        return Err(Error::ZeroPower("beam peak"));
    }
    let jitter = 0.5 * wavelength;
    separations_wl
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let user2 = user1.translated(s * wavelength, 0.0, 0.0);
            let mut rng = source.substream(i as u64).rng();
            let mut acc = 0.0;
            for _ in 0..samples_per_point {
                let dir = unit_direction(&mut rng);
                let p = user2.translated(jitter * dir.x, jitter * dir.y, jitter * dir.z);
                acc += field_value(ua, &weights, &p)?;
            }
            let mean = acc / samples_per_point as f64;
            Ok(LeakagePoint {
                separation_wl: s,
                leakage_db: 10.0 * (mean / peak).log10(),
            })
        })
        .collect()
}

/// Uniform planar grid in the z = center.z plane: spacing `spacing` out to
/// `half_span` on each side of the center in x and y.
pub fn plane_grid(center: &Point3, half_span: f64, spacing: f64) -> Result<Vec<Point3>> {
    if !half_span.is_finite() || half_span <= 0.0 || !spacing.is_finite() || spacing <= 0.0 {
        return Err(invalid("half_span and spacing must be finite and > 0"));
    }
    let steps = (half_span / spacing).floor() as i64;
    let mut grid = Vec::with_capacity(((2 * steps + 1) * (2 * steps + 1)) as usize);
    for i in -steps..=steps {
        for j in -steps..=steps {
            grid.push(center.translated(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backscatter::random_unit_weights;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    const WL: f64 = 0.1;

    fn spherical(n: usize, radius_wl: f64) -> UAConfig {
        UAConfig::spherical(n, radius_wl * WL, WL).unwrap()
    }

    #[test]
    fn config_places_elements_on_sphere_and_rejects_duplicates() {
        let ua = spherical(128, 50.0);
        assert_eq!(ua.n_elements(), 128);
        assert_eq!(ua.sphere_radius(), Some(5.0));
        for p in ua.geometry().element_positions() {
            let r = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
            assert_relative_eq!(r, 5.0, max_relative = 1e-12);
        }
        let dup = ArrayGeometry::new(
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, 0.0)],
            WL,
        )
        .unwrap();
        assert!(UAConfig::new(dup).is_err());
        assert!(UAConfig::spherical(0, 1.0, WL).is_err());
    }

    #[test]
    fn conjugate_weights_are_unit_power() {
        let ua = spherical(64, 30.0);
        let w = conjugate_weights(&ua, &Point3::new(0.0, 0.0, 0.0)).unwrap();
        let total: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        assert!((total - 1.0).abs() <= 1e-12);
        // Near-field guard: a target on top of an element is rejected.
        let on_element = ua.geometry().element_positions()[0];
        assert!(matches!(
            conjugate_weights(&ua, &on_element),
            Err(Error::NearField { .. })
        ));
    }

    #[test]
    fn hotspot_at_target_is_the_matched_filter_power() {
        let ua = spherical(64, 30.0);
        let target = Point3::new(0.2, -0.1, 0.05);
        let gains: Vec<Complex64> = ua
            .geometry()
            .element_positions()
            .iter()
            .map(|&p| free_space_gain(p, target, WL).unwrap())
            .collect();
        let expected: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
        let map = hotspot_field(&ua, &target, &[target]).unwrap();
        assert_eq!(map.len(), 1);
        assert_relative_eq!(map.values()[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn single_element_field_follows_inverse_square_law() {
        let geom = ArrayGeometry::new(vec![Point3::new(0.0, 0.0, 0.0)], WL).unwrap();
        let ua = UAConfig::new(geom).unwrap();
        let target = Point3::new(1.0, 0.0, 0.0);
        let map = hotspot_field(
            &ua,
            &target,
            &[Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)],
        )
        .unwrap();
        assert_relative_eq!(map.values()[0] / map.values()[1], 4.0, max_relative = 1e-9);
    }

    #[test]
    fn hotspot_drops_off_target_per_decay_law() {
        // Field 5 wavelengths off a center hotspot sits at least
        // 20*log10(5) - 6 dB below the peak.
        let ua = spherical(256, 50.0);
        let target = Point3::new(0.0, 0.0, 0.0);
        let weights = conjugate_weights(&ua, &target).unwrap();
        let peak = field_value(&ua, &weights, &target).unwrap();
        let mut rng = RandomSource::new(3).rng();
        let r = 5.0 * WL;
        let mut acc = 0.0;
        let samples = 64;
        for _ in 0..samples {
            let dir = unit_direction(&mut rng);
            let rs = r + WL * rng.gen_range(-0.5..0.5);
            let p = target.translated(rs * dir.x, rs * dir.y, rs * dir.z);
            acc += field_value(&ua, &weights, &p).unwrap();
        }
        let drop_db = 10.0 * (peak / (acc / samples as f64)).log10();
        assert!(drop_db >= 20.0 * 5f64.log10() - 6.0, "drop {drop_db} dB");
    }

    #[test]
    fn hotspot_peak_lands_on_grid_point_nearest_target() {
        let ua = spherical(256, 50.0);
        let mut rng = RandomSource::new(11).rng();
        for _ in 0..20 {
            let target = Point3::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            );
            let grid = plane_grid(&target, 2.0 * WL, WL / 4.0).unwrap();
            let map = hotspot_field(&ua, &target, &grid).unwrap();
            let peak_idx = map.argmax();
            let nearest = grid
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    a.distance(&target).total_cmp(&b.distance(&target))
                })
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(peak_idx, nearest);
        }
    }

    #[test]
    fn conjugate_weights_beat_random_weights_at_target() {
        let ua = spherical(64, 30.0);
        let target = Point3::new(0.3, 0.1, -0.2);
        let weights = conjugate_weights(&ua, &target).unwrap();
        let best = field_value(&ua, &weights, &target).unwrap();
        for draw in 0..1000u64 {
            let w = random_unit_weights(64, &RandomSource::new(55).substream(draw)).unwrap();
            let p = field_value(&ua, &w, &target).unwrap();
            assert!(p <= best * (1.0 + 1e-12), "draw {draw}: {p} > {best}");
        }
    }

    #[test]
    fn analytic_power_laws_are_recovered_exactly() {
        let target = Point3::new(0.0, 0.0, 0.0);
        let n = 24;
        let (mut points, mut v2, mut v4) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..n {
            let r_wl = 2.0 * (10.0f64).powf(k as f64 / (n - 1) as f64);
            points.push(Point3::new(r_wl * WL, 0.0, 0.0));
            v2.push(r_wl.powi(-2));
            v4.push(r_wl.powi(-4));
        }
        let map2 = FieldMap::new(points.clone(), v2).unwrap();
        let map4 = FieldMap::new(points, v4).unwrap();
        let e2 = decay_exponent(&map2, &target, (2.0, 20.0), WL).unwrap();
        let e4 = decay_exponent(&map4, &target, (2.0, 20.0), WL).unwrap();
        assert!((e2 + 2.0).abs() <= 1e-3, "r^-2 fit gave {e2}");
        assert!((e4 + 4.0).abs() <= 1e-3, "r^-4 fit gave {e4}");
    }

    #[test]
    fn decay_requires_a_full_decade_and_enough_points() {
        let target = Point3::new(0.0, 0.0, 0.0);
        let points: Vec<Point3> = (0..16)
            .map(|k| Point3::new((2.0 + k as f64 * 0.4) * WL, 0.0, 0.0))
            .collect();
        let values: Vec<f64> = points.iter().map(|p| p.x.powi(-2)).collect();
        let map = FieldMap::new(points, values).unwrap();
        // Samples reach only 8 wavelengths: less than a decade.
        assert!(matches!(
            decay_exponent(&map, &target, (2.0, 8.0), WL),
            Err(Error::InsufficientRadialSpan(_))
        ));
        // Window admits fewer than eight samples.
        assert!(matches!(
            decay_exponent(&map, &target, (2.0, 3.0), WL),
            Err(Error::InsufficientRadialSpan(_))
        ));
    }

    #[test]
    fn dense_spherical_array_shows_inverse_square_decay() {
        let ua = spherical(8192, 100.0);
        let target = Point3::new(0.0, 0.0, 0.0);
        let profile =
            radial_power_profile(&ua, &target, 2.0, 20.0, 16, 32, &RandomSource::new(2)).unwrap();
        let exponent = decay_exponent(&profile, &target, (2.0, 20.0), WL).unwrap();
        assert!(
            (-2.3..=-1.7).contains(&exponent),
            "fitted exponent {exponent}"
        );
    }

    #[test]
    fn radial_profile_contracts() {
        let tiny = spherical(8, 10.0);
        let origin = Point3::new(0.0, 0.0, 0.0);
        assert!(radial_power_profile(&tiny, &origin, 2.0, 20.0, 16, 8, &RandomSource::new(0))
            .is_err());
        let ua = spherical(64, 10.0);
        assert!(radial_power_profile(&ua, &origin, 2.0, 2.0, 16, 8, &RandomSource::new(0))
            .is_err());
        assert!(radial_power_profile(&ua, &origin, 2.0, 20.0, 1, 8, &RandomSource::new(0))
            .is_err());
    }

    #[test]
    fn profile_peaks_at_true_signature() {
        let ua = spherical(128, 50.0);
        let spot = Point3::new(0.3, -0.2, 0.1);
        let sig = steering_vector(ua.geometry(), spot).unwrap();
        let observed: Vec<Complex64> = sig.iter().cloned().collect();
        let hypotheses = vec![spot, Point3::new(1.0, 1.0, 0.0), Point3::new(-2.0, 0.4, 0.3)];
        let profile = observation_profile(&ua, &observed, &hypotheses).unwrap();
        assert_relative_eq!(profile.values()[0], 1.0, max_relative = 1e-12);
        for v in profile.values() {
            assert!((0.0..=1.0).contains(v));
        }
        assert!(observation_profile(&ua, &observed[..5], &hypotheses).is_err());
    }

    #[test]
    fn random_observation_stays_below_matching_threshold() {
        let ua = spherical(1024, 50.0);
        let mut hyp_rng = RandomSource::new(19).rng();
        let hypotheses: Vec<Point3> = (0..400)
            .map(|_| {
                Point3::new(
                    hyp_rng.gen_range(-1.0..1.0),
                    hyp_rng.gen_range(-1.0..1.0),
                    hyp_rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        for seed in 0..5u64 {
            let mut rng = RandomSource::new(100 + seed).rng();
            let observed: Vec<Complex64> = (0..1024)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect();
            let profile = observation_profile(&ua, &observed, &hypotheses).unwrap();
            let max = profile.values().iter().cloned().fold(0.0, f64::max);
            assert!(max < 0.2, "seed {seed}: max profile {max}");
        }
    }

    #[test]
    fn two_mobiles_are_separated_and_located() {
        let ua = spherical(256, 50.0);
        let m1 = Point3::new(-1.5 * WL * 10.0, 0.0, 0.0);
        let m2 = Point3::new(1.5 * WL * 10.0, 0.0, 0.0);
        assert_relative_eq!(m1.distance(&m2) / WL, 30.0, max_relative = 1e-12);
        let observed = superposed_observation(&ua, &[m1, m2]).unwrap();
        let center = Point3::new(0.0, 0.0, 0.0);
        let grid = plane_grid(&center, 20.0 * WL, WL / 4.0).unwrap();
        let profile = observation_profile(&ua, &observed, &grid).unwrap();
        let peaks = locate_peaks(&profile, 2, WL).unwrap();
        let err = localization_error_wl(&peaks, &[m1, m2], WL).unwrap();
        assert!(err <= 0.5, "worst error {err} wavelengths");
    }

    #[test]
    fn peak_finding_contracts() {
        // Injected analytic peak: k = 1 returns exactly that grid point.
        let points: Vec<Point3> = (0..25)
            .map(|i| Point3::new(i as f64 * WL, 0.0, 0.0))
            .collect();
        let mut values = vec![0.1; 25];
        values[17] = 0.9;
        let profile = ObservationProfile::new(points.clone(), values).unwrap();
        let peaks = locate_peaks(&profile, 1, WL).unwrap();
        assert_eq!(peaks[0], points[17]);

        // All points within the suppression radius: only one peak exists.
        let close: Vec<Point3> = (0..5)
            .map(|i| Point3::new(i as f64 * 0.1 * WL, 0.0, 0.0))
            .collect();
        let profile = ObservationProfile::new(close, vec![0.5, 0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!(matches!(
            locate_peaks(&profile, 2, WL),
            Err(Error::TooFewPeaks {
                found: 1,
                requested: 2
            })
        ));
    }

    #[test]
    fn localization_error_degrades_with_noise() {
        let ua = spherical(256, 50.0);
        let center = Point3::new(0.0, 0.0, 0.0);
        let grid = plane_grid(&center, 5.0 * WL, WL / 4.0).unwrap();
        let snrs = [f64::INFINITY, 100.0, 10.0];
        let trials = 100;
        let mut means = Vec::new();
        for &snr in &snrs {
            let mut total = 0.0;
            for trial in 0..trials {
                let source = RandomSource::new(400).substream(trial);
                let mut rng = source.substream(0).rng();
                let mobile = Point3::new(
                    rng.gen_range(-4.0 * WL..4.0 * WL),
                    rng.gen_range(-4.0 * WL..4.0 * WL),
                    0.0,
                );
                let clean = superposed_observation(&ua, &[mobile]).unwrap();
                let observed =
                    add_observation_noise(&clean, snr, &source.substream(1)).unwrap();
                let profile = observation_profile(&ua, &observed, &grid).unwrap();
                let peaks = locate_peaks(&profile, 1, WL).unwrap();
                total += localization_error_wl(&peaks, &[mobile], WL).unwrap();
            }
            means.push(total / trials as f64);
        }
        assert!(means[0] <= 0.5, "noiseless mean error {} wavelengths", means[0]);
        assert!(means[1] >= means[0] - 1e-12 && means[2] >= means[1] - 1e-12, "{means:?}");
    }

    #[test]
    fn leakage_decreases_with_separation() {
        // Dense array: its field tracks the decaying envelope well past the
        // largest tested separation instead of bottoming out in sidelobes.
        let ua = spherical(8192, 100.0);
        let seps = [2.0, 5.0, 10.0, 20.0];
        let pts = interference_vs_separation(&ua, &seps, 32, &RandomSource::new(8)).unwrap();
        for w in pts.windows(2) {
            assert!(
                w[1].leakage_db < w[0].leakage_db,
                "leakage not strictly decreasing: {pts:?}"
            );
        }
        let far = interference_vs_separation(&ua, &[1000.0], 32, &RandomSource::new(8)).unwrap();
        assert!(far[0].leakage_db < -40.0, "far leakage {}", far[0].leakage_db);
        assert!(interference_vs_separation(&ua, &[1.0], 32, &RandomSource::new(8)).is_err());
        assert!(interference_vs_separation(&ua, &[], 32, &RandomSource::new(8)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn profile_values_always_normalized(
            seed in 0u64..500,
            n_pow in 4u32..7,
        ) {
            let n = 1usize << n_pow;
            let ua = spherical(n, 40.0);
            let mut rng = RandomSource::new(seed).rng();
            let observed: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect();
            let hypotheses: Vec<Point3> = (0..20)
                .map(|_| Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ))
                .collect();
            let profile = observation_profile(&ua, &observed, &hypotheses).unwrap();
            for v in profile.values() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
    }
}
