//! Comparisons against independently coded direct-summation oracles.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::channel::{assemble_channels, received_signal, ChannelRealization, FrequencyGrid, Ground, Wavefront};
use ris_core::config::{ConfigMatrix, Polarization, ReflectionModel};
use ris_core::geometry::{ArrayGeometry, Direction, Vec3, SPEED_OF_LIGHT};
use ris_core::optimizer::continuous_optimal_config;
use ris_core::pattern::array_factor;

fn oracle_position(g: &ArrayGeometry, r: usize, c: usize) -> [f64; 3] {
    [
        g.center.x,
        g.center.y + (c as f64 - 0.5 * (g.n_cols as f64 - 1.0)) * g.pitch_y,
        g.center.z + (0.5 * (g.n_rows as f64 - 1.0) - r as f64) * g.pitch_z,
    ]
}

fn oracle_k(az_deg: f64, el_deg: f64, lambda: f64) -> [f64; 3] {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    let k = 2.0 * PI / lambda;
    [k * el.cos() * az.cos(), k * el.cos() * az.sin(), k * el.sin()]
}

fn oracle_array_factor(w: &[Complex64], aoa: (f64, f64), aod: (f64, f64), g: &ArrayGeometry, lambda: f64) -> f64 {
    let ki = oracle_k(aoa.0, aoa.1, lambda);
    let ko = oracle_k(aod.0, aod.1, lambda);
    let mut re = 0.0;
    let mut im = 0.0;
    let mut i = 0;
    for r in 0..g.n_rows {
        for c in 0..g.n_cols {
            let u = oracle_position(g, r, c);
            let phase = -(ki[0] * u[0] + ki[1] * u[1] + ki[2] * u[2]) + (ko[0] * u[0] + ko[1] * u[1] + ko[2] * u[2]);
            let term = w[i] * Complex64::new(phase.cos(), phase.sin());
            re += term.re;
            im += term.im;
            i += 1;
        }
    }
    re * re + im * im
}

fn random_geometry(rng: &mut impl Rng, max_side: usize, max_n: usize) -> ArrayGeometry {
    loop {
        let (r, c) = (rng.random_range(1..=max_side), rng.random_range(1..=max_side));
        if r * c <= max_n {
            return ArrayGeometry::new(
                r,
                c,
                rng.random_range(0.01..0.1),
                rng.random_range(0.01..0.1),
                Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)),
            )
            .unwrap();
        }
    }
}

fn random_angles(rng: &mut impl Rng) -> (f64, f64) {
    (rng.random_range(-90.0..=90.0), rng.random_range(-90.0..=90.0))
}

#[test]
fn array_factor_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let g = random_geometry(&mut rng, 16, 16);
        let lambda = rng.random_range(0.03..0.3);
        let (aoa, aod) = (random_angles(&mut rng), random_angles(&mut rng));
        let w: Vec<_> = (0..g.len())
            .map(|_| Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-PI..PI)))
            .collect();
        let got = array_factor(
            &w,
            Direction::new(aoa.0, aoa.1).unwrap(),
            Direction::new(aod.0, aod.1).unwrap(),
            &g,
            lambda,
        )
        .unwrap();
        let want = oracle_array_factor(&w, aoa, aod, &g, lambda);
        assert!((got - want).abs() <= 1e-10 * want.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn received_signal_matches_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n_rows = rng.random_range(1..=4);
        let n_cols = rng.random_range(1..=4);
        let n = n_rows * n_cols;
        let scale = 10f64.powf(rng.random_range(-4.0..0.0));
        let draw = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        let ch = ChannelRealization {
            frequency_hz: 3.5e9,
            h_g: (0..n).map(|_| draw(&mut rng)).collect(),
            h_r: (0..n).map(|_| draw(&mut rng)).collect(),
            h_d: draw(&mut rng),
        };
        let states: Vec<Vec<u8>> = (0..n_rows).map(|_| (0..2 * n_cols).map(|_| rng.random_range(0..2)).collect()).collect();
        let phi = ConfigMatrix::from_rows(&states).unwrap();
        let refl = ReflectionModel::new(
            Complex64::from_polar(rng.random_range(0.1..1.0), rng.random_range(-PI..PI)),
            Complex64::from_polar(rng.random_range(0.1..1.0), rng.random_range(-PI..PI)),
        )
        .unwrap();
        let pol = if rng.random_bool(0.5) { Polarization::H } else { Polarization::V };
        let symbol = draw(&mut rng) / scale;
        let noise = draw(&mut rng);

        // Theta = diag(w^H) as an explicit matrix
        let offset = if pol == Polarization::H { 0 } else { 1 };
        let mut theta = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for r in 0..n_rows {
            for c in 0..n_cols {
                let i = r * n_cols + c;
                let state = states[r][2 * c + offset];
                theta[i][i] = refl.states[state as usize].conj();
            }
        }
        let mut cascade = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += theta[i][j] * ch.h_g[j];
            }
            cascade += ch.h_r[i].conj() * row;
        }
        let want = (cascade + ch.h_d) * symbol + noise;
        let got = received_signal(&ch, &phi, &refl, pol, symbol, noise).unwrap();
        assert!((got - want).norm() <= 1e-12 * want.norm().max(scale), "{got} vs {want}");
    }
}

#[test]
fn coherent_gain_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let g = random_geometry(&mut rng, 16, 256);
        let lambda = rng.random_range(0.03..0.3);
        let (aoa, aod) = (random_angles(&mut rng), random_angles(&mut rng));
        let (aoa, aod) = (Direction::new(aoa.0, aoa.1).unwrap(), Direction::new(aod.0, aod.1).unwrap());
        let w = continuous_optimal_config(aoa, aod, &g, lambda).unwrap();
        assert!(w.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
        let n2 = (g.len() * g.len()) as f64;
        let a = array_factor(&w, aoa, aod, &g, lambda).unwrap();
        assert!((a - n2).abs() <= 1e-9 * n2);
    }
}

#[test]
fn random_phases_never_beat_the_continuous_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let g = ArrayGeometry::new(2, 3, 0.04, 0.04, Vec3::default()).unwrap();
    let lambda = 0.0857;
    for _ in 0..5 {
        let (aoa, aod) = (random_angles(&mut rng), random_angles(&mut rng));
        let (aoa, aod) = (Direction::new(aoa.0, aoa.1).unwrap(), Direction::new(aod.0, aod.1).unwrap());
        let opt = array_factor(&continuous_optimal_config(aoa, aod, &g, lambda).unwrap(), aoa, aod, &g, lambda).unwrap();
        for _ in 0..10_000 {
            let w: Vec<_> = (0..6).map(|_| common::random_unit(&mut rng)).collect();
            assert!(array_factor(&w, aoa, aod, &g, lambda).unwrap() <= opt * (1.0 + 1e-12));
        }
    }
}

/// Per-element LoS plus ground-bounce sum with the bounce point located
/// explicitly on the ground and the two legs measured separately.
#[test]
fn spherical_channel_matches_explicit_ray_sum() {
    let geom = ArrayGeometry::new(3, 4, 0.05, 0.05, Vec3::new(0.0, 0.0, 1.2)).unwrap();
    let mut s = common::los_scenario(geom.clone(), -20.0, 30.0, FrequencyGrid::single(3.5e9));
    s.wavefront = Wavefront::Spherical;
    let gamma = Complex64::new(-0.7, 0.2);
    s.ground = Some(Ground { reflection: gamma });
    let f = 3.55e9;
    let ch = assemble_channels(&s, f).unwrap();
    let lambda = SPEED_OF_LIGHT / f;
    let k = 2.0 * PI / lambda;
    let tx = s.tx.position;
    let c = geom.center;
    let d_los = tx.distance(c);
    let d_ground = {
        // bounce point on z = 0 along the tx -> center line, by similar triangles
        let t = tx.z / (tx.z + c.z);
        let b = Vec3::new(tx.x + (c.x - tx.x) * t, tx.y + (c.y - tx.y) * t, 0.0);
        tx.distance(b) + b.distance(c)
    };
    for r in 0..geom.n_rows {
        for col in 0..geom.n_cols {
            let p = oracle_position(&geom, r, col);
            let u = Vec3::new(p[0], p[1], p[2]);
            let l1 = tx.distance(u);
            let t = tx.z / (tx.z + u.z);
            let b = Vec3::new(tx.x + (u.x - tx.x) * t, tx.y + (u.y - tx.y) * t, 0.0);
            let l2 = tx.distance(b) + b.distance(u);
            let want = Complex64::from_polar(lambda / (4.0 * PI * d_los), -k * l1)
                + gamma * Complex64::from_polar(lambda / (4.0 * PI * d_ground), -k * l2);
            let got = ch.h_g[geom.index(r, col)];
            assert!((got - want).norm() < 1e-12 * want.norm().max(1e-6), "{got} vs {want}");
        }
    }
}
