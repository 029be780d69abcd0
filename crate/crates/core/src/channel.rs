//! Propagation and channel generation: free-space gains over explicit 3D
//! geometry, steering vectors, i.i.d. Rayleigh matrices, and the dyadic
//! (product) channel seen by a backscatter link.
//!
//! Conventions: channel entries are unitless voltage gains. The free-space
//! model is far-field only and is guarded by a near-field exclusion ball of
//! radius lambda/10 around each element.

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::signal::RandomSource;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Point in 3D space, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn translated(&self, dx: f64, dy: f64, dz: f64) -> Point3 {
        Point3::new(self.x + dx, self.y + dy, self.z + dz)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Antenna array: explicit element positions plus the operating wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    element_positions: Vec<Point3>,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(element_positions: Vec<Point3>, wavelength: f64) -> Result<Self> {
        if element_positions.is_empty() {
            return Err(invalid("array needs at least one element"));
        }
        if let Some(i) = element_positions.iter().position(|p| !p.is_finite()) {
            return Err(invalid(format!("element position {i} is not finite")));
        }
        ensure_positive(wavelength, "wavelength")?;
        Ok(Self {
            element_positions,
            wavelength,
        })
    }

    /// Uniform linear array along the x axis, centered on the origin,
    /// spacing given in wavelengths.
    pub fn uniform_linear(n: usize, spacing_wl: f64, wavelength: f64) -> Result<Self> {
        ensure_positive(spacing_wl, "spacing_wl")?;
        ensure_positive(wavelength, "wavelength")?;
        if n == 0 {
            return Err(invalid("array needs at least one element"));
        }
        let d = spacing_wl * wavelength;
        let offset = (n as f64 - 1.0) / 2.0;
        let positions = (0..n)
            .map(|i| Point3::new((i as f64 - offset) * d, 0.0, 0.0))
            .collect();
        Self::new(positions, wavelength)
    }

    pub fn element_positions(&self) -> &[Point3] {
        &self.element_positions
    }

    pub fn n_elements(&self) -> usize {
        self.element_positions.len()
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Radius of the excluded near-field ball around each element.
    pub fn near_field_radius(&self) -> f64 {
        self.wavelength / 10.0
    }

    /// Arithmetic mean of the element positions.
    pub fn centroid(&self) -> Point3 {
        let n = self.element_positions.len() as f64;
        let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
        for p in &self.element_positions {
            x += p.x;
            y += p.y;
            z += p.z;
        }
        Point3::new(x / n, y / n, z / n)
    }
}

/// Provenance of a channel matrix; carried so downstream code can assert it
/// is composing the intended kinds of links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelTag {
    FreeSpace,
    Rayleigh,
    Dyadic,
}

/// Complex N x M gain matrix with provenance tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    matrix: DMatrix<Complex64>,
    tag: ChannelTag,
}

impl ChannelMatrix {
    pub fn new(matrix: DMatrix<Complex64>, tag: ChannelTag) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "channel matrix must have positive dimensions".into(),
            ));
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("channel matrix entries must be finite"));
        }
        Ok(Self { matrix, tag })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn tag(&self) -> ChannelTag {
        self.tag
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Far-field free-space gain between two points:
/// `(lambda / (4 pi d)) * exp(-j 2 pi d / lambda)`.
///
/// Errors with `NearField` when `d <= lambda / 10`, which also covers
/// coincident points.
pub fn free_space_gain(tx: Point3, rx: Point3, wavelength: f64) -> Result<Complex64> {
    ensure_positive(wavelength, "wavelength")?;
    if !tx.is_finite() || !rx.is_finite() {
        return Err(invalid("free_space_gain endpoints must be finite"));
    }
    let d = tx.distance(&rx);
    let minimum = wavelength / 10.0;
    if d <= minimum {
        return Err(Error::NearField {
            distance: d,
            minimum,
        });
    }
    let magnitude = wavelength / (4.0 * std::f64::consts::PI * d);
    let phase = -std::f64::consts::TAU * d / wavelength;
    Ok(Complex64::from_polar(magnitude, phase))
}

/// Spatial signature of `point` across the array: entry n is the free-space
/// gain from element n to the point. Errors if any element sees the point
/// inside its near-field ball.
pub fn steering_vector(geometry: &ArrayGeometry, point: Point3) -> Result<DVector<Complex64>> {
    let gains = geometry
        .element_positions()
        .iter()
        .map(|&e| free_space_gain(e, point, geometry.wavelength()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(gains))
}

/// One circularly symmetric complex Gaussian draw with E|h|^2 = 1.
pub(crate) fn standard_complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// N x M matrix of i.i.d. CN(0, 1) entries. Draw order is row-major, real
/// part before imaginary part, so a fixed source always reproduces the same
/// matrix.
pub fn rayleigh_matrix(n: usize, m: usize, source: &RandomSource) -> Result<ChannelMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::DimensionMismatch(
            "rayleigh_matrix dimensions must be >= 1".into(),
        ));
    }
    let mut rng = source.rng();
    let mut rows = Vec::with_capacity(n * m);
    for _ in 0..n * m {
        rows.push(standard_complex_gaussian(&mut rng));
    }
    ChannelMatrix::new(DMatrix::from_row_slice(n, m, &rows), ChannelTag::Rayleigh)
}

/// Tolerance on |scatter| to absorb roundoff in unit-modulus constructions.
const PASSIVITY_TOL: f64 = 1e-9;

/// Composite backscatter channel `H_UL * diag(scatter * downlink_gains[k])`:
/// the downlink gain to tag antenna k, scaled by the common reflection
/// coefficient, then radiated back through the uplink matrix.
pub fn dyadic_channel(
    h_ul: &ChannelMatrix,
    downlink_gains: &DVector<Complex64>,
    scatter: Complex64,
) -> Result<ChannelMatrix> {
    if scatter.norm() > 1.0 + PASSIVITY_TOL {
        return Err(Error::ActiveReflection(scatter.norm()));
    }
    if h_ul.ncols() != downlink_gains.len() {
        return Err(Error::DimensionMismatch(format!(
            "uplink has {} columns but downlink supplies {} gains",
            h_ul.ncols(),
            downlink_gains.len()
        )));
    }
    if downlink_gains.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(invalid("downlink gains must be finite"));
    }
    let mut composite = h_ul.matrix().clone();
    for k in 0..composite.ncols() {
        let d = scatter * downlink_gains[k];
        for r in 0..composite.nrows() {
            composite[(r, k)] *= d;
        }
    }
    ChannelMatrix::new(composite, ChannelTag::Dyadic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_statistic, ks_two_sample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const WL: f64 = 0.3;

    #[test]
    fn gain_at_one_wavelength() {
        let g = free_space_gain(Point3::new(0.0, 0.0, 0.0), Point3::new(WL, 0.0, 0.0), WL).unwrap();
        // |g| = 1/(4 pi), phase = -2 pi = 0 mod 2 pi.
        assert_relative_eq!(g.norm(), 0.07957747154594767, max_relative = 1e-12);
        assert!(g.arg().abs() < 1e-12 || (g.arg().abs() - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn doubling_distance_halves_magnitude() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let g1 = free_space_gain(a, Point3::new(1.0, 0.0, 0.0), WL).unwrap();
        let g2 = free_space_gain(a, Point3::new(2.0, 0.0, 0.0), WL).unwrap();
        assert_relative_eq!(g2.norm() / g1.norm(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn phase_at_one_meter() {
        // d = 1 m, lambda = 0.3 m: -2 pi / 0.3 = -20.9439510239...,
        // congruent to -2.0943951023931953 rad.
        let g = free_space_gain(Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0), 0.3).unwrap();
        assert_relative_eq!(g.arg(), -2.0943951023931953, epsilon = 1e-9);
    }

    #[test]
    fn near_field_is_rejected() {
        let a = Point3::new(0.0, 0.0, 0.0);
        assert!(matches!(
            free_space_gain(a, Point3::new(WL / 10.0, 0.0, 0.0), WL),
            Err(Error::NearField { .. })
        ));
        assert!(matches!(
            free_space_gain(a, a, WL),
            Err(Error::NearField { .. })
        ));
        assert!(free_space_gain(a, Point3::new(WL / 9.0, 0.0, 0.0), WL).is_ok());
    }

    #[test]
    fn steering_single_element_equals_gain() {
        let geom = ArrayGeometry::new(vec![Point3::new(0.0, 0.0, 0.0)], WL).unwrap();
        let p = Point3::new(1.0, 2.0, 3.0);
        let v = steering_vector(&geom, p).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0], free_space_gain(Point3::new(0.0, 0.0, 0.0), p, WL).unwrap());
    }

    #[test]
    fn steering_symmetry_for_equidistant_elements() {
        let geom = ArrayGeometry::new(
            vec![Point3::new(-1.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)],
            WL,
        )
        .unwrap();
        let v = steering_vector(&geom, Point3::new(0.0, 5.0, 0.0)).unwrap();
        assert_relative_eq!(v[0].norm(), v[1].norm(), max_relative = 1e-12);
        assert_relative_eq!(v[0].arg(), v[1].arg(), epsilon = 1e-12);
    }

    #[test]
    fn broadside_far_field_phases_flatten() {
        let geom = ArrayGeometry::uniform_linear(8, 0.5, WL).unwrap();
        let far = Point3::new(0.0, 1e6 * WL, 0.0);
        let v = steering_vector(&geom, far).unwrap();
        let ref_phase = v[0].arg();
        for g in v.iter() {
            let mut d = (g.arg() - ref_phase).abs();
            if d > std::f64::consts::PI {
                d = std::f64::consts::TAU - d;
            }
            assert!(d < 1e-3, "phase spread {d}");
        }
    }

    #[test]
    fn steering_rejects_near_field_on_any_element() {
        let geom = ArrayGeometry::uniform_linear(4, 0.5, WL).unwrap();
        let on_top = geom.element_positions()[2];
        assert!(matches!(
            steering_vector(&geom, on_top),
            Err(Error::NearField { .. })
        ));
    }

    #[test]
    fn rayleigh_mean_square_is_unit() {
        let h = rayleigh_matrix(200, 500, &RandomSource::new(11)).unwrap();
        let mean: f64 =
            h.matrix().iter().map(|c| c.norm_sqr()).sum::<f64>() / (200.0 * 500.0);
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn rayleigh_magnitude_matches_closed_form_cdf() {
        // |h| for CN(0,1) is Rayleigh(sigma^2 = 1/2): F(r) = 1 - exp(-r^2).
        let h = rayleigh_matrix(100, 1000, &RandomSource::new(3)).unwrap();
        let mags: Vec<f64> = h.matrix().iter().map(|c| c.norm()).collect();
        let d = ks_statistic(&mags, |r| {
            if r <= 0.0 {
                0.0
            } else {
                1.0 - (-r * r).exp()
            }
        })
        .unwrap();
        assert!(d < 0.01, "KS = {d}");
    }

    #[test]
    fn rayleigh_is_deterministic_per_source() {
        let s = RandomSource::new(99).substream(4);
        let a = rayleigh_matrix(5, 7, &s).unwrap();
        let b = rayleigh_matrix(5, 7, &s).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = rayleigh_matrix(5, 7, &RandomSource::new(99).substream(5)).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn dyadic_scalar_case_and_zero_reflection() {
        let h = ChannelMatrix::new(
            DMatrix::from_row_slice(1, 1, &[Complex64::new(0.3, 0.4)]),
            ChannelTag::Rayleigh,
        )
        .unwrap();
        let g = DVector::from_vec(vec![Complex64::new(0.0, 2.0)]);
        // |h_ul| |Gamma| |h_dl| with |Gamma| <= 1... use 0.5.
        let comp = dyadic_channel(&h, &g, Complex64::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(comp.matrix()[(0, 0)].norm(), 0.5 * 0.5 * 2.0, max_relative = 1e-12);
        assert_eq!(comp.tag(), ChannelTag::Dyadic);

        let zero = dyadic_channel(&h, &g, Complex64::new(0.0, 0.0)).unwrap();
        assert!(zero.matrix().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dyadic_contracts() {
        let h = rayleigh_matrix(2, 3, &RandomSource::new(1)).unwrap();
        let g = DVector::from_vec(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(matches!(
            dyadic_channel(&h, &g, Complex64::new(1.1, 0.0)),
            Err(Error::ActiveReflection(_))
        ));
        let short = DVector::from_vec(vec![Complex64::new(1.0, 0.0); 2]);
        assert!(matches!(
            dyadic_channel(&h, &short, Complex64::new(0.5, 0.0)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dyadic_siso_matches_product_of_rayleighs() {
        // Composite |h| for a SISO dyadic link with Gamma = 1 against an
        // independently generated product of two Rayleigh magnitudes.
        let n = 100_000usize;
        let ul = rayleigh_matrix(n, 1, &RandomSource::new(21).substream(0)).unwrap();
        let dl = rayleigh_matrix(n, 1, &RandomSource::new(21).substream(1)).unwrap();
        let composite: Vec<f64> = (0..n)
            .map(|i| (ul.matrix()[(i, 0)] * dl.matrix()[(i, 0)]).norm())
            .collect();

        let oa = rayleigh_matrix(n, 1, &RandomSource::new(77).substream(0)).unwrap();
        let ob = rayleigh_matrix(n, 1, &RandomSource::new(77).substream(1)).unwrap();
        let oracle: Vec<f64> = (0..n)
            .map(|i| oa.matrix()[(i, 0)].norm() * ob.matrix()[(i, 0)].norm())
            .collect();

        let d = ks_two_sample(&composite, &oracle).unwrap();
        assert!(d < 0.02, "KS = {d}");
    }

    #[test]
    fn dyadic_near_zero_mass_exceeds_rayleigh() {
        let n = 100_000usize;
        let ul = rayleigh_matrix(n, 1, &RandomSource::new(5).substream(0)).unwrap();
        let dl = rayleigh_matrix(n, 1, &RandomSource::new(5).substream(1)).unwrap();
        let ray = rayleigh_matrix(n, 1, &RandomSource::new(5).substream(2)).unwrap();
        let dy_pow: Vec<f64> = (0..n)
            .map(|i| (ul.matrix()[(i, 0)] * dl.matrix()[(i, 0)]).norm_sqr())
            .collect();
        let ray_pow: Vec<f64> = ray.matrix().iter().map(|c| c.norm_sqr()).collect();
        let mean_dy = dy_pow.iter().sum::<f64>() / n as f64;
        let mean_ray = ray_pow.iter().sum::<f64>() / n as f64;
        let frac = |v: &[f64], thresh: f64| v.iter().filter(|&&p| p < thresh).count() as f64 / n as f64;
        let dy_frac = frac(&dy_pow, 0.1 * mean_dy);
        let ray_frac = frac(&ray_pow, 0.1 * mean_ray);
        assert!(
            dy_frac > ray_frac,
            "near-zero mass: dyadic {dy_frac} vs rayleigh {ray_frac}"
        );
    }

    #[test]
    fn geometry_contracts() {
        assert!(ArrayGeometry::new(vec![], WL).is_err());
        assert!(ArrayGeometry::new(vec![Point3::new(f64::NAN, 0.0, 0.0)], WL).is_err());
        assert!(ArrayGeometry::new(vec![Point3::new(0.0, 0.0, 0.0)], 0.0).is_err());
        assert!(ArrayGeometry::uniform_linear(0, 0.5, WL).is_err());
        let geom = ArrayGeometry::uniform_linear(4, 0.5, WL).unwrap();
        assert_eq!(geom.n_elements(), 4);
        let c = geom.centroid();
        assert!(c.x.abs() < 1e-12 && c.y == 0.0 && c.z == 0.0);
    }

    proptest! {
        #[test]
        fn inverse_distance_law_is_exact(d in 0.1f64..1e4, wl in 0.01f64..1.0) {
            prop_assume!(d > wl / 5.0);
            let a = Point3::new(0.0, 0.0, 0.0);
            let g1 = free_space_gain(a, Point3::new(d, 0.0, 0.0), wl).unwrap();
            let g2 = free_space_gain(a, Point3::new(2.0 * d, 0.0, 0.0), wl).unwrap();
            prop_assert!((g2.norm() / g1.norm() - 0.5).abs() <= 1e-12);
        }

        #[test]
        fn dyadic_is_linear_in_scatter(seed in 0u64..500, alpha in 0.01f64..1.0) {
            let h = rayleigh_matrix(3, 4, &RandomSource::new(seed)).unwrap();
            let g = rayleigh_matrix(4, 1, &RandomSource::new(seed).substream(1)).unwrap();
            let gains = DVector::from_iterator(4, g.matrix().iter().cloned());
            let base = dyadic_channel(&h, &gains, Complex64::new(0.9, 0.0)).unwrap();
            let scaled = dyadic_channel(&h, &gains, Complex64::new(0.9 * alpha, 0.0)).unwrap();
            for (b, s) in base.matrix().iter().zip(scaled.matrix().iter()) {
                prop_assert!((s - b * alpha).norm() <= 1e-12 * b.norm().max(1e-30));
            }
        }
    }
}
