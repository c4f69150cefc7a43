#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use ris_core::channel::{Boresight, FrequencyGrid, Ground, Node, Scenario, Wavefront};
use ris_core::config::Polarization;
use ris_core::geometry::{ArrayGeometry, Vec3};
use ris_core::pattern::ElementPattern;

pub fn node_at(azimuth_deg: f64, range: f64, height: f64, antenna: ElementPattern) -> Node {
    let a = azimuth_deg.to_radians();
    Node {
        position: Vec3::new(range * a.cos(), range * a.sin(), height),
        antenna,
        boresight: Boresight::TowardRis,
    }
}

/// Free-space scenario with the RIS centered at `(0, 0, height)`.
pub fn los_scenario(geom: ArrayGeometry, tx_az: f64, rx_az: f64, frequencies: FrequencyGrid) -> Scenario {
    let h = geom.center.z;
    Scenario {
        name: "los".into(),
        ris: geom,
        ris_element: ElementPattern::default(),
        tx: node_at(tx_az, 8.5, h, ElementPattern::Isotropic),
        rx: node_at(rx_az, 8.5, h, ElementPattern::Isotropic),
        ground: None,
        reflectors: vec![],
        direct_link: false,
        frequencies,
        wavefront: Wavefront::Planar,
        polarization: Polarization::H,
        rx_azimuths_deg: vec![],
        noise: None,
    }
}

/// Scenario with random placement, antennas and environment on a small
/// array.
pub fn random_scenario(rng: &mut impl Rng, n_rows: usize, n_cols: usize) -> Scenario {
    let h = rng.random_range(0.8..2.0);
    let pitch = rng.random_range(0.02..0.06);
    let geom = ArrayGeometry::new(n_rows, n_cols, pitch, pitch, Vec3::new(0.0, 0.0, h)).unwrap();
    let grid = FrequencyGrid::new(3.4e9, 3.6e9, rng.random_range(2..12)).unwrap();
    let mut s = los_scenario(geom, rng.random_range(-70.0..70.0), rng.random_range(-70.0..70.0), grid);
    s.tx.position.z = rng.random_range(0.5..2.5);
    s.rx.position.z = rng.random_range(0.5..2.5);
    s.tx.position = s.tx.position * rng.random_range(0.3..1.5);
    s.rx.position = s.rx.position * rng.random_range(0.3..1.5);
    s.tx.position.z = s.tx.position.z.max(0.2);
    s.rx.position.z = s.rx.position.z.max(0.2);
    if rng.random_bool(0.5) {
        s.tx.antenna = ElementPattern::cosine_hpbw(rng.random_range(15.0..90.0)).unwrap();
        s.rx.antenna = ElementPattern::cosine_hpbw(rng.random_range(15.0..90.0)).unwrap();
    }
    if rng.random_bool(0.5) {
        s.ground = Some(Ground {
            reflection: Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(-PI..PI)),
        });
    }
    s.direct_link = rng.random_bool(0.5);
    if rng.random_bool(0.5) {
        s.wavefront = Wavefront::Spherical;
    }
    s
}

pub fn random_unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::cis(rng.random_range(-PI..PI))
}
