//! Ray-based cascaded channel model.
//!
//! Each link segment (Tx to RIS, RIS to Rx, Tx to Rx) is traced with the image
//! method: the line-of-sight ray, one ground bounce off the plane `z = 0` and
//! one single-bounce ray per vertical wall reflector. Ray amplitudes use the
//! free-space factor `lambda / (4 pi d)` at the RIS-center distance together
//! with the Tx/Rx antenna gains at the ray's local departure/arrival angles.
//! Per-element phases come from either the plane-wave array response at the
//! ray's arrival direction ([`Wavefront::Planar`]) or the exact distance from
//! the (image) source to every element ([`Wavefront::Spherical`]).
//!
//! `h_r` is stored conjugated, so that `h_r^H Theta h_g` is the physical
//! Tx-RIS-Rx transfer function with `Theta = diag(w^H)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{config_to_phase_vector, ConfigMatrix, Polarization, ReflectionModel};
use crate::error::{Error, Result};
use crate::geometry::{
    direction_between, element_positions, fingerprint_json, ArrayGeometry, Direction, Position, Vec3, SPEED_OF_LIGHT,
};
use crate::pattern::ElementPattern;
use crate::units::power_to_db;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wavefront {
    /// Plane wave per ray at the RIS, phases from the array response.
    #[default]
    Planar,
    /// Exact per-element path length from the (image) source.
    Spherical,
}

/// Uniform frequency grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub n_points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            f_start_hz: 3.4e9,
            f_stop_hz: 3.6e9,
            n_points: 801,
        }
    }
}

impl FrequencyGrid {
    pub fn new(f_start_hz: f64, f_stop_hz: f64, n_points: usize) -> Result<Self> {
        let g = Self {
            f_start_hz,
            f_stop_hz,
            n_points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn single(frequency_hz: f64) -> Self {
        Self {
            f_start_hz: frequency_hz,
            f_stop_hz: frequency_hz,
            n_points: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.n_points >= 1
            && self.f_start_hz > 0.0
            && self.f_stop_hz.is_finite()
            && if self.n_points == 1 {
                self.f_stop_hz >= self.f_start_hz
            } else {
                self.f_stop_hz > self.f_start_hz
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScenario(format!("invalid frequency grid {self:?}")))
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.f_start_hz];
        }
        let step = (self.f_stop_hz - self.f_start_hz) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| {
                if i == self.n_points - 1 {
                    self.f_stop_hz
                } else {
                    self.f_start_hz + i as f64 * step
                }
            })
            .collect()
    }

    pub fn center_hz(&self) -> f64 {
        0.5 * (self.f_start_hz + self.f_stop_hz)
    }
}

/// Where a node's antenna points.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boresight {
    /// At the RIS center, wherever the node is placed.
    #[default]
    TowardRis,
    /// Fixed global direction vector.
    Vector(Vec3),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub position: Position,
    pub antenna: ElementPattern,
    #[serde(default)]
    pub boresight: Boresight,
}

impl Node {
    pub fn boresight_vector(&self, ris_center: Position) -> Vec3 {
        match self.boresight {
            Boresight::TowardRis => ris_center - self.position,
            Boresight::Vector(v) => v,
        }
    }
}

/// Flat ground at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ground {
    pub reflection: Complex64,
}

impl Default for Ground {
    fn default() -> Self {
        Self {
            reflection: Complex64::new(-1.0, 0.0),
        }
    }
}

/// Infinitely tall vertical plane whose footprint is the horizontal segment
/// `a -> b` (meters, `[x, y]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallReflector {
    #[serde(default)]
    pub name: String,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub reflection: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Complex noise variance `E|z|^2`.
    pub variance: f64,
    pub seed: u64,
}

impl NoiseConfig {
    /// `n` circularly-symmetric complex Gaussian draws, reproducible from the
    /// seed.
    pub fn draws(&self, n: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, (self.variance / 2.0).sqrt()).expect("validated variance");
        (0..n)
            .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect()
    }
}

fn default_true() -> bool {
    true
}

/// Placement of Tx, Rx and RIS plus the propagation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub ris: ArrayGeometry,
    /// Unit-cell pattern used by the radiation-pattern model.
    #[serde(default)]
    pub ris_element: ElementPattern,
    pub tx: Node,
    pub rx: Node,
    #[serde(default)]
    pub ground: Option<Ground>,
    #[serde(default)]
    pub reflectors: Vec<WallReflector>,
    #[serde(default = "default_true")]
    pub direct_link: bool,
    #[serde(default)]
    pub frequencies: FrequencyGrid,
    #[serde(default)]
    pub wavefront: Wavefront,
    #[serde(default)]
    pub polarization: Polarization,
    /// Rx azimuth grid used by the experiments (degrees, ascending).
    #[serde(default)]
    pub rx_azimuths_deg: Vec<f64>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::InvalidScenario(format!("malformed scenario JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.ris.validate()?;
        self.frequencies.validate()?;
        self.ris_element.validate()?;
        let c = self.ris.center;
        for (label, node) in [("tx", &self.tx), ("rx", &self.rx)] {
            node.antenna.validate()?;
            if !node.position.is_finite() {
                return Err(Error::InvalidScenario(format!("{label} position is not finite")));
            }
            if node.position.x - c.x <= 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "{label} must lie in front of the RIS (x > {})",
                    c.x
                )));
            }
            if let Boresight::Vector(v) = node.boresight {
                if v.normalized().is_none() {
                    return Err(Error::InvalidScenario(format!("{label} boresight is degenerate")));
                }
            }
        }
        if let Some(g) = &self.ground {
            check_reflection("ground", g.reflection)?;
            let lowest = self.ris.position(self.ris.n_rows - 1, 0).z;
            if self.tx.position.z <= 0.0 || self.rx.position.z <= 0.0 || lowest <= 0.0 {
                return Err(Error::InvalidScenario(
                    "all nodes and RIS elements must be above ground (z > 0)".into(),
                ));
            }
        }
        for w in &self.reflectors {
            check_reflection(&w.name, w.reflection)?;
            if !w.a.iter().chain(&w.b).all(|v| v.is_finite()) {
                return Err(Error::InvalidScenario(format!("reflector {:?} is not finite", w.name)));
            }
        }
        if let Some(n) = &self.noise {
            if !(n.variance >= 0.0 && n.variance.is_finite()) {
                return Err(Error::InvalidScenario("noise variance must be >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.ris.len()
    }

    /// Direction from the RIS center toward the Tx, and its distance.
    pub fn tx_direction(&self) -> Result<(Direction, f64)> {
        direction_between(self.ris.center, self.tx.position)
    }

    /// Direction from the RIS center toward the Rx, and its distance.
    pub fn rx_direction(&self) -> Result<(Direction, f64)> {
        direction_between(self.ris.center, self.rx.position)
    }

    /// True angle of arrival: the Rx azimuth seen from the RIS center.
    pub fn rx_azimuth_deg(&self) -> Result<f64> {
        Ok(self.rx_direction()?.0.azimuth_deg())
    }

    /// Incidence direction in the pattern-model convention (specular image
    /// of the Tx direction).
    pub fn incidence_direction(&self) -> Result<Direction> {
        Ok(self.tx_direction()?.0.specular())
    }

    /// Copy with the Rx moved to `azimuth_deg`, keeping its horizontal range
    /// and height relative to the RIS center.
    pub fn with_rx_azimuth(&self, azimuth_deg: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&azimuth_deg) {
            return Err(Error::InvalidArgument(format!(
                "Rx azimuth {azimuth_deg} deg is outside [-90, 90]"
            )));
        }
        let c = self.ris.center;
        let rel = self.rx.position - c;
        let range = rel.x.hypot(rel.y);
        if range == 0.0 {
            return Err(Error::DegenerateGeometry("Rx has no horizontal range".into()));
        }
        let az = azimuth_deg.to_radians();
        let mut s = self.clone();
        s.rx.position = c + Vec3::new(range * az.cos(), range * az.sin(), rel.z);
        s.validate()?;
        Ok(s)
    }

    /// Copy evaluated at a single frequency.
    pub fn at_frequency(&self, frequency_hz: f64) -> Self {
        let mut s = self.clone();
        s.frequencies = FrequencyGrid::single(frequency_hz);
        s
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_json(self)
    }

    /// Fingerprint of everything except the Rx placement and the experiment
    /// grid, identifying the environment a codebook was built for.
    pub fn environment_fingerprint(&self) -> String {
        let mut s = self.clone();
        s.name.clear();
        s.rx.position = Vec3::default();
        s.rx_azimuths_deg.clear();
        s.noise = None;
        fingerprint_json(&s)
    }
}

fn check_reflection(label: &str, c: Complex64) -> Result<()> {
    if c.norm() <= 1.0 + 1e-12 && c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!(
            "reflection coefficient of {label:?} must have modulus <= 1, got {c}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    TxToRis,
    RisToRx,
    TxToRx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayKind {
    Los,
    GroundBounce,
    WallReflection,
    /// Line of sight between Tx and Rx.
    Direct,
}

/// Specular reflection about the ground or a vertical wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mirror {
    Ground,
    Wall { point: Vec3, normal: Vec3 },
}

impl Mirror {
    pub fn reflect(&self, p: Position) -> Position {
        match *self {
            Mirror::Ground => Vec3::new(p.x, p.y, -p.z),
            Mirror::Wall { point, normal } => p - normal * (2.0 * (p - point).dot(normal)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub kind: RayKind,
    pub start: Position,
    pub end: Position,
    pub bounce: Option<Position>,
    /// Unfolded length, meters.
    pub path_length: f64,
    /// Product of reflection coefficients along the path.
    pub reflection: Complex64,
    /// Unit vector leaving `start`.
    pub departure: Vec3,
    /// Unit vector at `end` pointing back along the incoming ray.
    pub arrival: Vec3,
    pub mirror: Option<Mirror>,
}

impl Ray {
    /// `reflection * lambda / (4 pi L) * exp(-j 2 pi f L / c)`, antenna gains
    /// excluded.
    pub fn phasor(&self, frequency_hz: f64) -> Complex64 {
        let lambda = SPEED_OF_LIGHT / frequency_hz;
        let phase = -2.0 * PI * frequency_hz * self.path_length / SPEED_OF_LIGHT;
        self.reflection * Complex64::cis(phase) * (lambda / (4.0 * PI * self.path_length))
    }
}

fn los_ray(kind: RayKind, start: Position, end: Position) -> Option<Ray> {
    let v = end - start;
    let departure = v.normalized()?;
    Some(Ray {
        kind,
        start,
        end,
        bounce: None,
        path_length: v.norm(),
        reflection: Complex64::new(1.0, 0.0),
        departure,
        arrival: -departure,
        mirror: None,
    })
}

fn bounce_ray(
    kind: RayKind,
    start: Position,
    end: Position,
    bounce: Position,
    mirror: Mirror,
    reflection: Complex64,
) -> Option<Ray> {
    let image = mirror.reflect(start);
    let path_length = end.distance(image);
    let departure = (bounce - start).normalized()?;
    let arrival = (bounce - end).normalized()?;
    Some(Ray {
        kind,
        start,
        end,
        bounce: Some(bounce),
        path_length,
        reflection,
        departure,
        arrival,
        mirror: Some(mirror),
    })
}

fn ground_ray(start: Position, end: Position, ground: &Ground) -> Option<Ray> {
    if start.z <= 0.0 || end.z <= 0.0 {
        return None;
    }
    let image = Mirror::Ground.reflect(start);
    let t = start.z / (start.z + end.z);
    let bounce = image + (end - image) * t;
    bounce_ray(RayKind::GroundBounce, start, end, bounce, Mirror::Ground, ground.reflection)
}

fn wall_ray(start: Position, end: Position, wall: &WallReflector) -> Option<Ray> {
    let a = Vec3::new(wall.a[0], wall.a[1], 0.0);
    let along = Vec3::new(wall.b[0] - wall.a[0], wall.b[1] - wall.a[1], 0.0);
    let len2 = along.dot(along);
    if !(len2 > 0.0) {
        return None;
    }
    let normal = Vec3::new(-along.y, along.x, 0.0).normalized()?;
    let side_start = (start - a).dot(normal);
    let side_end = (end - a).dot(normal);
    if !(side_start * side_end > 0.0) {
        return None;
    }
    let mirror = Mirror::Wall { point: a, normal };
    let image = mirror.reflect(start);
    let t = side_start / (side_start + side_end);
    let bounce = image + (end - image) * t;
    let s = (bounce - a).dot(along) / len2;
    if !(0.0..=1.0).contains(&s) {
        return None;
    }
    bounce_ray(RayKind::WallReflection, start, end, bounce, mirror, wall.reflection)
}

/// Rays of one link segment: the LoS ray first, then the ground bounce (if
/// enabled and geometrically valid), then one ray per reflector whose
/// specular point falls on its footprint. Invalid bounces are dropped.
pub fn trace_rays(s: &Scenario, segment: Segment) -> Result<Vec<Ray>> {
    let c = s.ris.center;
    let (start, end, kind) = match segment {
        Segment::TxToRis => (s.tx.position, c, RayKind::Los),
        Segment::RisToRx => (c, s.rx.position, RayKind::Los),
        Segment::TxToRx => (s.tx.position, s.rx.position, RayKind::Direct),
    };
    let los = los_ray(kind, start, end)
        .ok_or_else(|| Error::DegenerateGeometry(format!("segment {segment:?} has coincident endpoints")))?;
    let mut rays = vec![los];
    if let Some(g) = &s.ground {
        rays.extend(ground_ray(start, end, g));
    }
    rays.extend(s.reflectors.iter().filter_map(|w| wall_ray(start, end, w)));
    Ok(rays)
}

/// Channels at one frequency. `h_r` is stored conjugated (see module docs).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub frequency_hz: f64,
    pub h_g: Vec<Complex64>,
    pub h_r: Vec<Complex64>,
    pub h_d: Complex64,
}

/// A RIS-side ray with its frequency-independent amplitude and per-element
/// path lengths.
struct ElementRay {
    /// `reflection * sqrt(G) / (4 pi L)`; multiply by `lambda`.
    weight: Complex64,
    lengths: Vec<f64>,
}

struct LinkModel {
    tx_ris: Vec<ElementRay>,
    ris_rx: Vec<ElementRay>,
    /// `(weight, L)` for each direct-link ray.
    direct: Vec<(Complex64, f64)>,
    n: usize,
}

impl LinkModel {
    fn new(s: &Scenario) -> Result<Self> {
        s.validate()?;
        let c = s.ris.center;
        let positions = element_positions(&s.ris)?;
        let tx_bore = s.tx.boresight_vector(c);
        let rx_bore = s.rx.boresight_vector(c);

        let element_ray = |ray: &Ray, node: Position, gain: f64| -> ElementRay {
            let image = ray.mirror.map_or(node, |m| m.reflect(node));
            let lengths = match s.wavefront {
                Wavefront::Spherical => positions.iter().map(|u| image.distance(*u)).collect(),
                Wavefront::Planar => {
                    let toward = (image - c).normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0));
                    positions.iter().map(|u| ray.path_length - toward.dot(*u - c)).collect()
                }
            };
            ElementRay {
                weight: ray.reflection * gain.sqrt() / (4.0 * PI * ray.path_length),
                lengths,
            }
        };

        let tx_ris = trace_rays(s, Segment::TxToRis)?
            .iter()
            .map(|r| element_ray(r, s.tx.position, s.tx.antenna.gain_toward(tx_bore, r.departure)))
            .collect();
        let ris_rx = trace_rays(s, Segment::RisToRx)?
            .iter()
            .map(|r| element_ray(r, s.rx.position, s.rx.antenna.gain_toward(rx_bore, r.arrival)))
            .collect();
        let direct = if s.direct_link {
            trace_rays(s, Segment::TxToRx)?
                .iter()
                .map(|r| {
                    let g = s.tx.antenna.gain_toward(tx_bore, r.departure) * s.rx.antenna.gain_toward(rx_bore, r.arrival);
                    (r.reflection * g.sqrt() / (4.0 * PI * r.path_length), r.path_length)
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            tx_ris,
            ris_rx,
            direct,
            n: positions.len(),
        })
    }

    fn sum_rays(rays: &[ElementRay], n: usize, frequency_hz: f64) -> Vec<Complex64> {
        let lambda = SPEED_OF_LIGHT / frequency_hz;
        let k = 2.0 * PI / lambda;
        let mut h = vec![Complex64::new(0.0, 0.0); n];
        for ray in rays {
            let w = ray.weight * lambda;
            for (hi, l) in h.iter_mut().zip(&ray.lengths) {
                *hi += w * Complex64::cis(-k * l);
            }
        }
        h
    }

    fn realize(&self, frequency_hz: f64) -> ChannelRealization {
        let lambda = SPEED_OF_LIGHT / frequency_hz;
        let k = 2.0 * PI / lambda;
        let h_g = Self::sum_rays(&self.tx_ris, self.n, frequency_hz);
        let h_r = Self::sum_rays(&self.ris_rx, self.n, frequency_hz)
            .into_iter()
            .map(|h| h.conj())
            .collect();
        let h_d = self
            .direct
            .iter()
            .map(|(w, l)| w * lambda * Complex64::cis(-k * l))
            .sum();
        ChannelRealization {
            frequency_hz,
            h_g,
            h_r,
            h_d,
        }
    }
}

/// Channels of `s` at a single frequency.
pub fn assemble_channels(s: &Scenario, frequency_hz: f64) -> Result<ChannelRealization> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid frequency {frequency_hz}")));
    }
    Ok(LinkModel::new(s)?.realize(frequency_hz))
}

/// `y = (h_r^H diag(w^H) h_g + h_d) s + z` for explicit coefficients `w`.
pub fn received_signal_for_phases(
    ch: &ChannelRealization,
    omega: &[Complex64],
    symbol: Complex64,
    noise: Complex64,
) -> Result<Complex64> {
    let n = ch.h_g.len();
    for len in [ch.h_r.len(), omega.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let cascade: Complex64 = ch
        .h_r
        .iter()
        .zip(omega)
        .zip(&ch.h_g)
        .map(|((hr, w), hg)| hr.conj() * w.conj() * hg)
        .sum();
    Ok((cascade + ch.h_d) * symbol + noise)
}

/// Received sample for configuration `phi` on the chosen polarization.
pub fn received_signal(
    ch: &ChannelRealization,
    phi: &ConfigMatrix,
    refl: &ReflectionModel,
    polarization: Polarization,
    symbol: Complex64,
    noise: Complex64,
) -> Result<Complex64> {
    let w = config_to_phase_vector(phi, polarization, refl);
    received_signal_for_phases(ch, w.as_slice(), symbol, noise)
}

/// Precomputed cascaded channels over a scenario's whole frequency grid, for
/// repeated power evaluations of different configurations.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    frequencies: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    polarization: Polarization,
    /// `conj(h_r,i) * h_g,i`, frequency-major.
    cascade: Vec<Complex64>,
    direct: Vec<Complex64>,
}

impl ChannelSet {
    pub fn new(s: &Scenario) -> Result<Self> {
        let model = LinkModel::new(s)?;
        let realizations: Vec<ChannelRealization> = s
            .frequencies
            .frequencies()
            .into_par_iter()
            .map(|f| model.realize(f))
            .collect();
        Ok(Self::from_realizations(&realizations, &s.ris, s.polarization))
    }

    pub fn from_realizations(
        realizations: &[ChannelRealization],
        geom: &ArrayGeometry,
        polarization: Polarization,
    ) -> Self {
        let mut cascade = Vec::with_capacity(realizations.len() * geom.len());
        for ch in realizations {
            cascade.extend(ch.h_r.iter().zip(&ch.h_g).map(|(hr, hg)| hr.conj() * hg));
        }
        Self {
            frequencies: realizations.iter().map(|c| c.frequency_hz).collect(),
            n_rows: geom.n_rows,
            n_cols: geom.n_cols,
            polarization,
            cascade,
            direct: realizations.iter().map(|c| c.h_d).collect(),
        }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn n_elements(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    /// Linear received power `|h_r^H diag(w^H) h_g + h_d|^2` per frequency.
    pub fn per_frequency_power(&self, omega: &[Complex64]) -> Result<Vec<f64>> {
        let n = self.n_elements();
        if omega.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: omega.len(),
            });
        }
        let w_conj: Vec<Complex64> = omega.iter().map(|w| w.conj()).collect();
        Ok(self
            .cascade
            .par_chunks(n)
            .zip(self.direct.par_iter())
            .map(|(row, d)| {
                let y: Complex64 = row.iter().zip(&w_conj).map(|(c, w)| c * w).sum();
                (y + d).norm_sqr()
            })
            .collect())
    }

    /// Mean received power over the grid, in dB.
    pub fn power_db(&self, omega: &[Complex64]) -> Result<f64> {
        let p = self.per_frequency_power(omega)?;
        Ok(power_to_db(p.iter().sum::<f64>() / p.len() as f64))
    }

    pub fn check_config(&self, phi: &ConfigMatrix) -> Result<()> {
        if phi.n_rows() != self.n_rows || phi.n_element_cols() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows * 2 * self.n_cols,
                got: phi.n_bits(),
            });
        }
        Ok(())
    }

    pub fn wideband_power(&self, phi: &ConfigMatrix, refl: &ReflectionModel) -> Result<f64> {
        self.check_config(phi)?;
        self.power_db(config_to_phase_vector(phi, self.polarization, refl).as_slice())
    }

    /// Per-frequency received power of `phi`, in dB.
    pub fn per_frequency_power_db(&self, phi: &ConfigMatrix, refl: &ReflectionModel) -> Result<Vec<f64>> {
        self.check_config(phi)?;
        let w = config_to_phase_vector(phi, self.polarization, refl);
        Ok(self.per_frequency_power(w.as_slice())?.into_iter().map(power_to_db).collect())
    }
}

/// `10 log10(mean_f |h_r^H Theta h_g + h_d|^2)` over the scenario's grid.
/// Noise is not part of the metric.
pub fn wideband_power(s: &Scenario, phi: &ConfigMatrix, refl: &ReflectionModel) -> Result<f64> {
    ChannelSet::new(s)?.wideband_power(phi, refl)
}

/// Noisy received samples `y_t = (h_r^H Theta h_g + h_d) s_t + z_t` for a
/// symbol sequence.
pub fn received_samples(
    ch: &ChannelRealization,
    omega: &[Complex64],
    symbols: &[Complex64],
    noise: &NoiseConfig,
) -> Result<Vec<Complex64>> {
    let z = noise.draws(symbols.len());
    symbols
        .iter()
        .zip(z)
        .map(|(s, z)| received_signal_for_phases(ch, omega, *s, z))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    MaxTo0,
    MinTo0,
}

/// Shift dB values so that the maximum (or minimum) becomes exactly 0.
pub fn normalize_powers(values: &[f64], mode: NormalizeMode) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot normalize an empty list".into()));
    }
    let reference = match mode {
        NormalizeMode::MaxTo0 => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        NormalizeMode::MinTo0 => values.iter().copied().fold(f64::INFINITY, f64::min),
    };
    Ok(values.iter().map(|v| v - reference).collect())
}
