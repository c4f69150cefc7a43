//! Coordinate conventions, RIS element placement, wave vectors and array
//! response vectors.
//!
//! Angles follow one parameterization on both sides of the surface: the unit
//! vector of `(azimuth, elevation)` is
//! `[cos(el) cos(az), cos(el) sin(az), sin(el)]`, azimuth measured in the
//! horizontal plane from the broadside normal `+x`, elevation from the
//! horizontal plane (positive up).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier the prototype presets are designed around.
pub const DESIGN_FREQUENCY_HZ: f64 = 3.5e9;

pub fn wavelength_at(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Cartesian 3-vector in meters (positions) or unitless (directions).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A point in the global right-handed frame, in meters.
pub type Position = Vec3;

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Azimuth/elevation pair in degrees.
///
/// Azimuth lies in `[-180, 180]` and elevation in `[-90, 90]`. Directions on
/// the reflecting side of the RIS have azimuth in `[-90, 90]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDirection", into = "RawDirection")]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDirection {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl TryFrom<RawDirection> for Direction {
    type Error = Error;
    fn try_from(raw: RawDirection) -> Result<Self> {
        Direction::new(raw.azimuth_deg, raw.elevation_deg)
    }
}

impl From<Direction> for RawDirection {
    fn from(d: Direction) -> Self {
        RawDirection {
            azimuth_deg: d.azimuth_deg,
            elevation_deg: d.elevation_deg,
        }
    }
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite direction ({azimuth_deg}, {elevation_deg})"
            )));
        }
        if !(-180.0..=180.0).contains(&azimuth_deg) {
            return Err(Error::InvalidArgument(format!(
                "azimuth {azimuth_deg} deg outside [-180, 180]"
            )));
        }
        if !(-90.0..=90.0).contains(&elevation_deg) {
            return Err(Error::InvalidArgument(format!(
                "elevation {elevation_deg} deg outside [-90, 90]"
            )));
        }
        Ok(Self {
            azimuth_deg,
            elevation_deg,
        })
    }

    pub fn from_radians(azimuth: f64, elevation: f64) -> Result<Self> {
        Self::new(azimuth.to_degrees(), elevation.to_degrees())
    }

    /// Horizontal direction, elevation zero.
    pub fn azimuth(azimuth_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg, 0.0)
    }

    pub const fn broadside() -> Self {
        Self {
            azimuth_deg: 0.0,
            elevation_deg: 0.0,
        }
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    pub fn azimuth_rad(&self) -> f64 {
        self.azimuth_deg.to_radians()
    }

    pub fn elevation_rad(&self) -> f64 {
        self.elevation_deg.to_radians()
    }

    pub fn unit_vector(&self) -> Vec3 {
        let (az, el) = (self.azimuth_rad(), self.elevation_rad());
        Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }

    /// Mirror image through the RIS plane: the direction a flat surface
    /// reflects a wave arriving from `self` into.
    pub fn specular(&self) -> Self {
        Self {
            azimuth_deg: -self.azimuth_deg,
            elevation_deg: -self.elevation_deg,
        }
    }
}

/// Regular planar RIS grid in the plane `x = center.x`.
///
/// Element `(row, col)` sits at
/// `center + (0, (col - (n_cols-1)/2) * pitch_y, ((n_rows-1)/2 - row) * pitch_z)`;
/// row 0 is the top row. Flat indices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_rows: usize,
    pub n_cols: usize,
    pub pitch_y: f64,
    pub pitch_z: f64,
    pub center: Position,
}

impl ArrayGeometry {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        pitch_y: f64,
        pitch_z: f64,
        center: Position,
    ) -> Result<Self> {
        let geom = Self {
            n_rows,
            n_cols,
            pitch_y,
            pitch_z,
            center,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Square pitch, centered at the origin.
    pub fn uniform(n_rows: usize, n_cols: usize, pitch: f64) -> Result<Self> {
        Self::new(n_rows, n_cols, pitch, pitch, Vec3::default())
    }

    /// Four 16x16 tiles in a 2x2 arrangement at half-wavelength pitch for the
    /// design frequency.
    pub fn prototype() -> Self {
        let pitch = wavelength_at(DESIGN_FREQUENCY_HZ) / 2.0;
        Self {
            n_rows: 32,
            n_cols: 32,
            pitch_y: pitch,
            pitch_z: pitch,
            center: Vec3::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "array must have at least one row and column, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        if !(self.pitch_y > 0.0 && self.pitch_y.is_finite())
            || !(self.pitch_z > 0.0 && self.pitch_z.is_finite())
        {
            return Err(Error::InvalidGeometry(format!(
                "pitch must be positive, got ({}, {})",
                self.pitch_y, self.pitch_z
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidGeometry("non-finite center".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    pub fn position(&self, row: usize, col: usize) -> Position {
        let dy = (col as f64 - (self.n_cols as f64 - 1.0) / 2.0) * self.pitch_y;
        let dz = ((self.n_rows as f64 - 1.0) / 2.0 - row as f64) * self.pitch_z;
        self.center + Vec3::new(0.0, dy, dz)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        fingerprint_json(self)
    }
}

pub(crate) fn fingerprint_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("plain data serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Element positions in row-major order (row 0 on top).
pub fn element_positions(geom: &ArrayGeometry) -> Result<Vec<Position>> {
    geom.validate()?;
    Ok((0..geom.n_rows)
        .flat_map(|r| (0..geom.n_cols).map(move |c| (r, c)))
        .map(|(r, c)| geom.position(r, c))
        .collect())
}

/// `k = (2 pi / lambda) * unit(dir)`, in rad/m.
pub fn wave_vector(dir: Direction, wavelength: f64) -> Result<Vec3> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(dir.unit_vector() * (2.0 * PI / wavelength))
}

/// Plane-wave array response: entry `i` is `exp(-j k(dir) . u_i)`.
pub fn array_response(
    geom: &ArrayGeometry,
    dir: Direction,
    wavelength: f64,
) -> Result<Vec<Complex64>> {
    let k = wave_vector(dir, wavelength)?;
    Ok(element_positions(geom)?
        .into_iter()
        .map(|u| Complex64::cis(-k.dot(u)))
        .collect())
}

/// Direction of `to - from` and the Euclidean distance between the points.
pub fn direction_between(from: Position, to: Position) -> Result<(Direction, f64)> {
    let v = to - from;
    let distance = v.norm();
    if !distance.is_finite() {
        return Err(Error::InvalidArgument("non-finite position".into()));
    }
    if distance <= 1e-12 * from.norm().max(to.norm()).max(1.0) {
        return Err(Error::DegenerateGeometry(format!(
            "coincident points {from:?} and {to:?}"
        )));
    }
    let elevation = (v.z / distance).clamp(-1.0, 1.0).asin();
    let horizontal = v.x.hypot(v.y);
    let azimuth = if horizontal == 0.0 { 0.0 } else { v.y.atan2(v.x) };
    Ok((Direction::from_radians(azimuth, elevation)?, distance))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 0.0857;

    #[test]
    fn single_element_at_center() {
        let g = ArrayGeometry::uniform(1, 1, LAMBDA / 2.0).unwrap();
        assert_eq!(element_positions(&g).unwrap(), vec![Vec3::default()]);
    }

    #[test]
    fn pair_is_symmetric_about_center() {
        let d = 0.05;
        let g = ArrayGeometry::new(1, 2, d, d, Vec3::default()).unwrap();
        let p = element_positions(&g).unwrap();
        assert_eq!(p[0], Vec3::new(0.0, -d / 2.0, 0.0));
        assert_eq!(p[1], Vec3::new(0.0, d / 2.0, 0.0));
    }

    #[test]
    fn row_zero_is_on_top() {
        let g = ArrayGeometry::uniform(3, 1, 1.0).unwrap();
        let p = element_positions(&g).unwrap();
        assert!(p[0].z > p[1].z && p[1].z > p[2].z);
        assert_eq!(p[1].z, 0.0);
    }

    #[test]
    fn nearest_neighbour_distance_matches_pitch() {
        let pitch = 0.0428;
        let g = ArrayGeometry::uniform(2, 2, pitch).unwrap();
        let p = element_positions(&g).unwrap();
        assert_eq!(p.len(), 4);
        for (i, a) in p.iter().enumerate() {
            let nearest = p
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| a.distance(*b))
                .fold(f64::INFINITY, f64::min);
            assert!((nearest - pitch).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(matches!(
            ArrayGeometry::uniform(0, 4, 0.01),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            ArrayGeometry::uniform(4, 4, 0.0),
            Err(Error::InvalidGeometry(_))
        ));
        let bad = ArrayGeometry {
            pitch_z: -1.0,
            ..ArrayGeometry::prototype()
        };
        assert!(element_positions(&bad).is_err());
    }

    #[test]
    fn prototype_preset() {
        let g = ArrayGeometry::prototype();
        assert_eq!((g.n_rows, g.n_cols, g.len()), (32, 32, 1024));
        assert!((g.pitch_y - 0.042827494).abs() < 1e-6);
    }

    #[test]
    fn wave_vector_axis_cases() {
        let k0 = 2.0 * PI / LAMBDA;
        let k = wave_vector(Direction::broadside(), LAMBDA).unwrap();
        assert_eq!(k, Vec3::new(k0, 0.0, 0.0));
        let k = wave_vector(Direction::new(0.0, 90.0).unwrap(), LAMBDA).unwrap();
        assert!(k.x.abs() < 1e-12 * k0 && k.y.abs() < 1e-12 && (k.z - k0).abs() < 1e-12 * k0);
    }

    #[test]
    fn wave_vector_rejects_bad_wavelength() {
        assert!(wave_vector(Direction::broadside(), 0.0).is_err());
        assert!(wave_vector(Direction::broadside(), -1.0).is_err());
        assert!(wave_vector(Direction::broadside(), f64::NAN).is_err());
    }

    #[test]
    fn array_response_small_cases() {
        let g = ArrayGeometry::uniform(1, 1, LAMBDA / 2.0).unwrap();
        let a = array_response(&g, Direction::new(37.0, -12.0).unwrap(), LAMBDA).unwrap();
        assert_eq!(a, vec![Complex64::new(1.0, 0.0)]);

        let g = ArrayGeometry::uniform(1, 2, LAMBDA / 2.0).unwrap();
        let a = array_response(&g, Direction::broadside(), LAMBDA).unwrap();
        assert_eq!(a, vec![Complex64::new(1.0, 0.0); 2]);

        let a = array_response(&g, Direction::azimuth(90.0).unwrap(), LAMBDA).unwrap();
        let ratio = a[1] / a[0];
        assert!((ratio - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn direction_between_examples() {
        let origin = Vec3::default();
        let (d, r) = direction_between(origin, Vec3::new(8.5, 0.0, 0.0)).unwrap();
        assert_eq!((d.azimuth_deg(), d.elevation_deg(), r), (0.0, 0.0, 8.5));

        let a = 15f64.to_radians();
        let tx = Vec3::new(8.5 * a.cos(), -8.5 * a.sin(), 0.0);
        let (d, r) = direction_between(origin, tx).unwrap();
        assert!((d.azimuth_deg() + 15.0).abs() < 1e-12);
        assert!((r - 8.5).abs() < 1e-12);

        let (d, r) = direction_between(origin, Vec3::new(0.0, 0.0, 2.6)).unwrap();
        assert_eq!(d.elevation_deg(), 90.0);
        assert!((r - 2.6).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            direction_between(p, p),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(0.0, 91.0).is_err());
        assert!(Direction::new(181.0, 0.0).is_err());
        assert!(Direction::new(f64::NAN, 0.0).is_err());
        let d: Direction = serde_json::from_str(r#"{"azimuth_deg":10.0,"elevation_deg":5.0}"#).unwrap();
        assert_eq!(d, Direction::new(10.0, 5.0).unwrap());
        assert!(serde_json::from_str::<Direction>(r#"{"azimuth_deg":10.0,"elevation_deg":95.0}"#).is_err());
    }

    #[test]
    fn specular_mirrors_tangential_components() {
        let d = Direction::new(-15.0, 7.0).unwrap();
        let (u, m) = (d.unit_vector(), d.specular().unit_vector());
        assert!((u.x - m.x).abs() < 1e-15);
        assert!((u.y + m.y).abs() < 1e-15);
        assert!((u.z + m.z).abs() < 1e-15);
    }
}
