//! Element gain models, the power-domain array factor and the overall RIS
//! radiation pattern.
//!
//! The overall pattern is `G = A(aoa -> aod) * G0(aoa) * G0(aod)` with
//! `A = |w^T (a(aoa) . conj(a(aod)))|^2`. Here `aoa` is the incidence
//! direction expressed on the reflecting side, i.e. [`Direction::specular`] of
//! the direction toward the transmitter; with that convention a uniform
//! configuration peaks at `aod == aoa`, and for 1-bit configurations `A`
//! equals the line-of-sight cascaded power of [`crate::channel`] up to the
//! path gain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{array_response, element_positions, wave_vector, ArrayGeometry, Direction, Vec3};
use crate::units::{db_to_power, power_to_db};

/// Linear power gain model of a single radiating element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementPattern {
    Isotropic,
    /// `peak * max(cos psi, 0)^(2q)`, `psi` the angle off boresight.
    CosineQ { q: f64, peak_gain_dbi: f64 },
    /// 3GPP TR 38.901 single-element pattern with equal horizontal and
    /// vertical 3 dB beamwidths. The front-to-back limit equals `slav_db`.
    Tr38901 {
        peak_gain_dbi: f64,
        slav_db: f64,
        beamwidth_deg: f64,
    },
}

impl Default for ElementPattern {
    fn default() -> Self {
        Self::ris_element()
    }
}

impl ElementPattern {
    /// Default RIS unit-cell model: `cos^2`, 5 dBi peak.
    pub const fn ris_element() -> Self {
        Self::CosineQ {
            q: 1.0,
            peak_gain_dbi: 5.0,
        }
    }

    /// Cosine-power pattern with the given half-power beamwidth. The peak is
    /// set to the pattern's directivity, `2(2q + 1)`.
    pub fn cosine_hpbw(hpbw_deg: f64) -> Result<Self> {
        if !(hpbw_deg > 0.0 && hpbw_deg < 180.0) {
            return Err(Error::InvalidArgument(format!(
                "half-power beamwidth must lie in (0, 180) deg, got {hpbw_deg}"
            )));
        }
        let q = 0.5f64.ln() / (2.0 * (hpbw_deg / 2.0).to_radians().cos().ln());
        let peak = 2.0 * (2.0 * q + 1.0);
        Ok(Self::CosineQ {
            q,
            peak_gain_dbi: power_to_db(peak),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Isotropic => true,
            Self::CosineQ { q, peak_gain_dbi } => q >= 0.0 && q.is_finite() && peak_gain_dbi.is_finite(),
            Self::Tr38901 {
                peak_gain_dbi,
                slav_db,
                beamwidth_deg,
            } => peak_gain_dbi.is_finite() && slav_db >= 0.0 && beamwidth_deg > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid element pattern {self:?}")))
        }
    }

    /// Gain at local azimuth/elevation (radians) relative to boresight.
    pub fn gain_local(&self, azimuth: f64, elevation: f64) -> f64 {
        match *self {
            Self::Isotropic => 1.0,
            Self::CosineQ { q, peak_gain_dbi } => {
                let c = elevation.cos() * azimuth.cos();
                if c <= 0.0 {
                    0.0
                } else {
                    db_to_power(peak_gain_dbi) * c.powf(2.0 * q)
                }
            }
            Self::Tr38901 {
                peak_gain_dbi,
                slav_db,
                beamwidth_deg,
            } => {
                let zenith = 90.0 - elevation.to_degrees();
                let vertical = -(12.0 * ((zenith - 90.0) / beamwidth_deg).powi(2)).min(slav_db);
                let horizontal = -(12.0 * (azimuth.to_degrees() / beamwidth_deg).powi(2)).min(slav_db);
                db_to_power(peak_gain_dbi - (-(vertical + horizontal)).min(slav_db))
            }
        }
    }

    /// Gain of an element whose boresight is `boresight`, toward `toward`
    /// (neither needs to be normalized). Local elevation is measured against
    /// the global vertical.
    pub fn gain_toward(&self, boresight: Vec3, toward: Vec3) -> f64 {
        let (az, el) = local_angles(boresight, toward);
        self.gain_local(az, el)
    }
}

/// Local (azimuth, elevation) of `dir` in the frame whose x axis is
/// `boresight` and whose z axis is as close to global `+z` as possible.
pub(crate) fn local_angles(boresight: Vec3, dir: Vec3) -> (f64, f64) {
    let (Some(b), Some(d)) = (boresight.normalized(), dir.normalized()) else {
        return (0.0, 0.0);
    };
    let h = Vec3::new(0.0, 0.0, 1.0)
        .cross(b)
        .normalized()
        .unwrap_or(Vec3::new(0.0, 1.0, 0.0));
    let v = b.cross(h);
    let az = d.dot(h).atan2(d.dot(b));
    let el = d.dot(v).clamp(-1.0, 1.0).asin();
    (az, el)
}

/// Linear gain of a RIS element toward `dir` (RIS frame).
pub fn element_gain(pattern: &ElementPattern, dir: Direction) -> f64 {
    pattern.gain_local(dir.azimuth_rad(), dir.elevation_rad())
}

fn check_len(omega: &[Complex64], geom: &ArrayGeometry) -> Result<()> {
    if omega.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            got: omega.len(),
        });
    }
    Ok(())
}

/// Power-domain array factor `|w^T (a(aoa) . conj(a(aod)))|^2`.
pub fn array_factor(
    omega: &[Complex64],
    aoa: Direction,
    aod: Direction,
    geom: &ArrayGeometry,
    wavelength: f64,
) -> Result<f64> {
    check_len(omega, geom)?;
    let a_in = array_response(geom, aoa, wavelength)?;
    let a_out = array_response(geom, aod, wavelength)?;
    let sum: Complex64 = omega
        .iter()
        .zip(a_in.iter().zip(&a_out))
        .map(|(w, (ai, ao))| w * ai * ao.conj())
        .sum();
    Ok(sum.norm_sqr())
}

/// `A(aoa -> aod) * G0(aoa) * G0(aod)`.
pub fn overall_gain(
    omega: &[Complex64],
    aoa: Direction,
    aod: Direction,
    geom: &ArrayGeometry,
    wavelength: f64,
    element: &ElementPattern,
) -> Result<f64> {
    let af = array_factor(omega, aoa, aod, geom, wavelength)?;
    Ok(af * element_gain(element, aoa) * element_gain(element, aod))
}

/// Overall gain sampled along azimuth at fixed elevation, in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCut {
    pub azimuths_deg: Vec<f64>,
    pub elevation_deg: f64,
    pub gains_db: Vec<f64>,
    /// Peak shifted to exactly 0 dB.
    pub normalized: bool,
}

impl PatternCut {
    pub fn len(&self) -> usize {
        self.gains_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains_db.is_empty()
    }

    pub fn peak_db(&self) -> f64 {
        self.gains_db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn normalize(&mut self) {
        let peak = self.peak_db();
        for g in &mut self.gains_db {
            *g -= peak;
        }
        self.normalized = true;
    }

    /// Two columns: `azimuth_deg,gain_dB`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("azimuth_deg,gain_dB\n");
        for (az, g) in self.azimuths_deg.iter().zip(&self.gains_db) {
            out.push_str(&format!("{az},{g}\n"));
        }
        out
    }
}

/// Evenly spaced azimuths from `start` to `stop` inclusive.
pub fn azimuth_grid(start_deg: f64, stop_deg: f64, step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || stop_deg < start_deg {
        return Err(Error::InvalidArgument(format!(
            "bad azimuth grid [{start_deg}, {stop_deg}] step {step_deg}"
        )));
    }
    let n = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start_deg + i as f64 * step_deg).collect())
}

#[allow(clippy::too_many_arguments)]
pub fn pattern_cut(
    omega: &[Complex64],
    aoa: Direction,
    geom: &ArrayGeometry,
    wavelength: f64,
    element: &ElementPattern,
    azimuths_deg: &[f64],
    elevation_deg: f64,
    normalize: bool,
) -> Result<PatternCut> {
    if azimuths_deg.is_empty() {
        return Err(Error::InvalidArgument("empty azimuth grid".into()));
    }
    check_len(omega, geom)?;
    let positions = element_positions(geom)?;
    let k_in = wave_vector(aoa, wavelength)?;
    // w_i * a_i(aoa), reused for every sample
    let weighted: Vec<Complex64> = omega
        .iter()
        .zip(&positions)
        .map(|(w, u)| w * Complex64::cis(-k_in.dot(*u)))
        .collect();
    let g_in = element_gain(element, aoa);
    let gains_db = azimuths_deg
        .iter()
        .map(|&az| {
            let aod = Direction::new(az, elevation_deg)?;
            let k_out = wave_vector(aod, wavelength)?;
            let sum: Complex64 = weighted
                .iter()
                .zip(&positions)
                .map(|(wa, u)| wa * Complex64::cis(k_out.dot(*u)))
                .sum();
            Ok(power_to_db(sum.norm_sqr() * g_in * element_gain(element, aod)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut cut = PatternCut {
        azimuths_deg: azimuths_deg.to_vec(),
        elevation_deg,
        gains_db,
        normalized: false,
    };
    if normalize {
        cut.normalize();
    }
    Ok(cut)
}

/// Grid direction of maximum gain; ties go to the smaller azimuth.
pub fn main_lobe_direction(cut: &PatternCut) -> Result<Direction> {
    let idx = main_lobe_index(cut)?;
    Direction::new(cut.azimuths_deg[idx], cut.elevation_deg)
}

pub(crate) fn main_lobe_index(cut: &PatternCut) -> Result<usize> {
    if cut.is_empty() || cut.azimuths_deg.len() != cut.gains_db.len() {
        return Err(Error::InvalidArgument("empty or malformed pattern cut".into()));
    }
    let mut best = 0;
    for i in 1..cut.len() {
        let (g, gb) = (cut.gains_db[i], cut.gains_db[best]);
        if g > gb || (g == gb && cut.azimuths_deg[i] < cut.azimuths_deg[best]) {
            best = i;
        }
    }
    Ok(best)
}

/// Half-power beamwidth of a `cos^(2q)` pattern, the inverse of
/// [`ElementPattern::cosine_hpbw`].
pub fn cosine_q_hpbw_deg(q: f64) -> f64 {
    2.0 * 0.5f64.powf(1.0 / (2.0 * q)).acos().to_degrees()
}
