//! Geometry of the unit sphere: points, stereographic projection, chordal
//! caps and sampled configurations.
//!
//! Caps are parameterized by their chord radius `r`, so that the cap
//! `{p : |p - c| <= r}` has area `pi r^2`. Membership is evaluated with the
//! equivalent dot-product form `<c, p> >= 1 - r^2 / 2`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to the north pole have no stereographic image.
pub const NORTH_POLE_TOL: f64 = 1e-12;

/// A point on the unit sphere, renormalized on construction.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint {
    x: f64,
    y: f64,
    z: f64,
}

impl SpherePoint {
    pub const SOUTH_POLE: SpherePoint = SpherePoint { x: 0.0, y: 0.0, z: -1.0 };
    pub const NORTH_POLE: SpherePoint = SpherePoint { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)` onto the sphere. Fails on zero or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::domain(format!(
                "cannot normalize ({x}, {y}, {z}) onto the sphere"
            )));
        }
        Ok(SpherePoint { x: x / norm, y: y / norm, z: z / norm })
    }

    /// Builds a point from coordinates already known to be unit length
    /// (up to rounding), renormalizing anyway.
    pub(crate) fn from_unit(x: f64, y: f64, z: f64) -> Self {
        let norm = (x * x + y * y + z * z).sqrt();
        SpherePoint { x: x / norm, y: y / norm, z: z / norm }
    }

    /// Takes unit-length coordinates verbatim.
    pub(crate) fn verbatim(x: f64, y: f64, z: f64) -> Self {
        SpherePoint { x, y, z }
    }

    /// Point at height `z` and azimuth `phi`.
    pub fn from_height_azimuth(z: f64, phi: f64) -> Self {
        let z = z.clamp(-1.0, 1.0);
        let rho = (1.0 - z * z).max(0.0).sqrt();
        Self::from_unit(rho * phi.cos(), rho * phi.sin(), z)
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn antipode(&self) -> SpherePoint {
        SpherePoint { x: -self.x, y: -self.y, z: -self.z }
    }
}

impl fmt::Debug for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpherePoint({}, {}, {})", self.x, self.y, self.z)
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        SpherePoint::new(v[0], v[1], v[2])
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        p.to_array()
    }
}

/// A point of the complex plane, `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub re: f64,
    pub im: f64,
}

impl PlanePoint {
    pub fn new(re: f64, im: f64) -> Self {
        PlanePoint { re, im }
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl From<num_complex::Complex64> for PlanePoint {
    fn from(c: num_complex::Complex64) -> Self {
        PlanePoint { re: c.re, im: c.im }
    }
}

impl From<PlanePoint> for num_complex::Complex64 {
    fn from(p: PlanePoint) -> Self {
        num_complex::Complex64::new(p.re, p.im)
    }
}

/// Stereographic projection from the north pole onto the equatorial plane.
pub fn project(p: &SpherePoint) -> Result<PlanePoint> {
    let one_minus_z = 1.0 - p.z;
    if one_minus_z < NORTH_POLE_TOL {
        return Err(Error::NorthPole);
    }
    // Near the north pole 1 - z cancels; use (x^2 + y^2) / (1 + z) instead.
    let denom = if p.z > 0.0 {
        (p.x * p.x + p.y * p.y) / (1.0 + p.z)
    } else {
        one_minus_z
    };
    Ok(PlanePoint { re: p.x / denom, im: p.y / denom })
}

/// Inverse stereographic projection. Very large `|z|` maps to the north pole.
pub fn inverse_project(w: &PlanePoint) -> SpherePoint {
    let r2 = w.norm_sqr();
    if !r2.is_finite() {
        return SpherePoint::NORTH_POLE;
    }
    if r2 <= 1.0 {
        let d = 1.0 + r2;
        SpherePoint::from_unit(2.0 * w.re / d, 2.0 * w.im / d, (r2 - 1.0) / d)
    } else {
        // divide through by |z|^2 to keep everything bounded
        let inv = 1.0 / r2;
        let d = 1.0 + inv;
        SpherePoint::from_unit(
            2.0 * w.re * inv / d,
            2.0 * w.im * inv / d,
            (1.0 - inv) / d,
        )
    }
}

/// Euclidean (chordal) distance in R^3.
#[inline]
pub fn chord_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt().min(2.0)
}

/// Chordal distance computed from stereographic images.
pub fn chord_distance_planar(z: &PlanePoint, w: &PlanePoint) -> f64 {
    let dr = z.re - w.re;
    let di = z.im - w.im;
    2.0 * (dr * dr + di * di).sqrt() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
}

/// A closed spherical cap `{p : |p - center| <= chord_radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    center: SpherePoint,
    chord_radius: f64,
}

impl Cap {
    /// Requires `0 < chord_radius < 2`.
    pub fn new(center: SpherePoint, chord_radius: f64) -> Result<Self> {
        if !(chord_radius > 0.0 && chord_radius < 2.0) {
            return Err(Error::domain(format!(
                "cap chord radius must lie in (0, 2), got {chord_radius}"
            )));
        }
        Ok(Cap { center, chord_radius })
    }

    /// Like [`Cap::new`] but also admits the degenerate radii 0 and 2; used
    /// for witness caps reported by estimators.
    pub(crate) fn from_parts(center: SpherePoint, chord_radius: f64) -> Self {
        Cap { center, chord_radius: chord_radius.clamp(0.0, 2.0) }
    }

    /// The cap `{p : <center, p> >= height}`.
    pub(crate) fn from_height(center: SpherePoint, height: f64) -> Self {
        let r = (2.0 * (1.0 - height)).max(0.0).sqrt();
        Self::from_parts(center, r)
    }

    pub fn center(&self) -> SpherePoint {
        self.center
    }

    pub fn chord_radius(&self) -> f64 {
        self.chord_radius
    }

    pub fn area(&self) -> f64 {
        PI * self.chord_radius * self.chord_radius
    }

    /// Area of the complementary cap; `area + complement_area == 4 pi`.
    pub fn complement_area(&self) -> f64 {
        4.0 * PI - self.area()
    }

    /// Fraction of the sphere covered, `alpha = area / 4 pi`.
    pub fn alpha(&self) -> f64 {
        self.chord_radius * self.chord_radius / 4.0
    }

    /// Dot-product threshold: `p` is in the cap iff `<center, p> >= height`.
    pub fn height(&self) -> f64 {
        1.0 - 0.5 * self.chord_radius * self.chord_radius
    }

    /// Closed membership.
    #[inline]
    pub fn contains(&self, p: &SpherePoint) -> bool {
        self.center.dot(p) >= self.height()
    }

    /// Closed membership evaluated through the chordal distance.
    pub fn contains_by_distance(&self, p: &SpherePoint) -> bool {
        chord_distance(&self.center, p) <= self.chord_radius
    }
}

/// Cap of the given area about `center`; requires `0 < area < 4 pi`.
pub fn cap_from_area(center: SpherePoint, area: f64) -> Result<Cap> {
    if !(area > 0.0 && area < 4.0 * PI) {
        return Err(Error::domain(format!("cap area must lie in (0, 4pi), got {area}")));
    }
    Cap::new(center, (area / PI).sqrt())
}

/// One sampled point set together with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<SpherePoint>,
    sampler_id: String,
    seed: u64,
}

impl Configuration {
    /// Requires at least one point and no exactly repeated points.
    pub fn new(points: Vec<SpherePoint>, sampler_id: impl Into<String>, seed: u64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("a configuration needs at least one point"));
        }
        let mut keys: Vec<(u64, u64, u64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits(), i))
            .collect();
        keys.sort_unstable();
        for w in keys.windows(2) {
            if (w[0].0, w[0].1, w[0].2) == (w[1].0, w[1].1, w[1].2) {
                return Err(Error::CoincidentPoints { i: w[0].3, j: w[1].3, distance: 0.0 });
            }
        }
        Ok(Configuration { points, sampler_id: sampler_id.into(), seed })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sampler_id(&self) -> &str {
        &self.sampler_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Applies `rot` to every point, keeping provenance.
    pub fn rotated(&self, rot: &Rotation) -> Configuration {
        Configuration {
            points: self.points.iter().map(|p| rot.apply(p)).collect(),
            sampler_id: self.sampler_id.clone(),
            seed: self.seed,
        }
    }
}

/// A proper rotation of R^3 stored as a row-major matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    /// Rotation from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n > 1e-300) {
            return Err(Error::domain("zero quaternion"));
        }
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Ok(Rotation {
            m: [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ],
        })
    }

    pub fn from_axis_angle(axis: SpherePoint, angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self::from_quaternion(c, s * axis.x, s * axis.y, s * axis.z)
            .expect("unit axis gives a nonzero quaternion")
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        let m = &self.m;
        SpherePoint::from_unit(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
        )
    }
}

/// `count` points of the spherical Fibonacci lattice.
pub fn fibonacci_lattice(count: usize) -> Vec<SpherePoint> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let g = count as f64;
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / g;
            SpherePoint::from_height_azimuth(z, golden_angle * i as f64)
        })
        .collect()
}

/// An orthonormal pair spanning the tangent plane at `p`.
pub(crate) fn tangent_frame(p: &SpherePoint) -> ([f64; 3], [f64; 3]) {
    let a = if p.x.abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let pv = p.to_array();
    let u = normalize3(cross3(&pv, &a));
    let v = cross3(&pv, &u);
    (u, v)
}

#[inline]
pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(&a, &a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sp(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::new(x, y, z).unwrap()
    }

    #[test]
    fn projection_examples() {
        let o = project(&SpherePoint::SOUTH_POLE).unwrap();
        assert_abs_diff_eq!(o.re, 0.0);
        assert_abs_diff_eq!(o.im, 0.0);
        let e = project(&sp(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(e.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.im, 0.0);
        assert!(matches!(project(&SpherePoint::NORTH_POLE), Err(Error::NorthPole)));
    }

    #[test]
    fn inverse_projection_examples() {
        let s = inverse_project(&PlanePoint::new(0.0, 0.0));
        assert_eq!(s.to_array(), [0.0, 0.0, -1.0]);
        let e = inverse_project(&PlanePoint::new(1.0, 0.0));
        assert_abs_diff_eq!(e.x(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.z(), 0.0, epsilon = 1e-15);
        for r in [1e3, 1e8, 1e160, f64::INFINITY] {
            let far = inverse_project(&PlanePoint::new(r, -r));
            assert!(1.0 - far.z() < 1e-5, "r = {r}: {far:?}");
        }
    }

    #[test]
    fn chord_distance_examples() {
        let p = sp(0.3, -0.2, 0.5);
        assert_eq!(chord_distance(&p, &p), 0.0);
        assert_abs_diff_eq!(chord_distance(&p, &p.antipode()), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            chord_distance(&SpherePoint::SOUTH_POLE, &sp(1.0, 0.0, 0.0)),
            2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn cap_from_area_examples() {
        let c = SpherePoint::SOUTH_POLE;
        assert_abs_diff_eq!(cap_from_area(c, 2.0 * PI).unwrap().chord_radius(), 2f64.sqrt());
        assert_abs_diff_eq!(cap_from_area(c, PI).unwrap().chord_radius(), 1.0);
        assert!(cap_from_area(c, 0.0).is_err());
        assert!(cap_from_area(c, 4.0 * PI).is_err());
        // A disk of radius r about the origin is the south-pole cap with
        // alpha = r^2 / (1 + r^2).
        for r in [0.1, 0.7, 1.0, 2.5] {
            let alpha = r * r / (1.0 + r * r);
            let cap = cap_from_area(c, 4.0 * PI * alpha).unwrap();
            let edge = inverse_project(&PlanePoint::new(r, 0.0));
            assert_abs_diff_eq!(chord_distance(&c, &edge), cap.chord_radius(), epsilon = 1e-12);
            assert!(cap.contains(&inverse_project(&PlanePoint::new(0.0, 0.99 * r))));
            assert!(!cap.contains(&inverse_project(&PlanePoint::new(0.0, 1.01 * r))));
        }
    }

    #[test]
    fn configuration_rejects_duplicates_and_empty() {
        let p = sp(0.0, 1.0, 0.0);
        assert!(Configuration::new(vec![], "t", 0).is_err());
        assert!(matches!(
            Configuration::new(vec![p, sp(1.0, 0.0, 0.0), p], "t", 0),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn fibonacci_lattice_is_balanced() {
        let pts = fibonacci_lattice(1000);
        let mz: f64 = pts.iter().map(|p| p.z()).sum::<f64>() / 1000.0;
        assert_abs_diff_eq!(mz, 0.0, epsilon = 1e-12);
    }

    fn arb_point() -> impl Strategy<Value = SpherePoint> {
        (-1.0f64..1.0, 0.0f64..(2.0 * PI))
            .prop_map(|(z, phi)| SpherePoint::from_height_azimuth(z, phi))
    }

    proptest! {
        #[test]
        fn points_are_unit(x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0) {
            prop_assume!(x * x + y * y + z * z > 1e-6);
            let p = sp(x, y, z);
            prop_assert!((p.dot(&p) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn projection_round_trip(p in arb_point()) {
            prop_assume!(1.0 - p.z() > 1e-6);
            let q = inverse_project(&project(&p).unwrap());
            prop_assert!(chord_distance(&p, &q) < 1e-10);
        }

        #[test]
        fn chordal_identity(p in arb_point(), q in arb_point()) {
            prop_assume!(1.0 - p.z() > 1e-6 && 1.0 - q.z() > 1e-6);
            let (z, w) = (project(&p).unwrap(), project(&q).unwrap());
            let lhs = chord_distance(&p, &q);
            let rhs = chord_distance_planar(&z, &w);
            prop_assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }

        #[test]
        fn membership_forms_agree(c in arb_point(), p in arb_point(), r in 0.01f64..1.99) {
            let cap = Cap::new(c, r).unwrap();
            let margin = (chord_distance(&c, &p) - r).abs();
            prop_assume!(margin > 1e-12);
            prop_assert_eq!(cap.contains(&p), cap.contains_by_distance(&p));
        }

        #[test]
        fn cap_area_complement(c in arb_point(), r in 0.01f64..1.99) {
            let cap = Cap::new(c, r).unwrap();
            prop_assert!((cap.area() + cap.complement_area() - 4.0 * PI).abs() < 1e-12);
        }

        #[test]
        fn rotation_preserves_distance(p in arb_point(), q in arb_point(), axis in arb_point(), angle in 0.0f64..6.3) {
            let rot = Rotation::from_axis_angle(axis, angle);
            let d0 = chord_distance(&p, &q);
            let d1 = chord_distance(&rot.apply(&p), &rot.apply(&q));
            prop_assert!((d0 - d1).abs() < 1e-12);
        }
    }
}
