//! Beam-sweeping codebooks, the bottom-row extension transform, AoA
//! estimation and frequency-selectivity reports.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{normalize_powers, ChannelSet, NormalizeMode, Scenario};
use crate::config::{config_to_phase_vector, quantize_states, ConfigMatrix, ReflectionModel};
use crate::error::{Error, Result};
use crate::geometry::{wavelength_at, ArrayGeometry, Direction};
use crate::optimizer::{column_row_scan_with, continuous_optimal_config, Objective};
use crate::pattern::{main_lobe_index, pattern_cut};

/// Rows rewritten by the bottom-row extension when no count is given.
pub fn default_extension_rows(n_rows: usize) -> usize {
    n_rows / 4
}

/// Main-lobe drift above which a codebook entry is flagged, degrees.
pub const DEFAULT_DRIFT_THRESHOLD_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Scan,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookEntry {
    pub target_azimuth_deg: f64,
    pub config: ConfigMatrix,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub entries: Vec<CodebookEntry>,
    /// Tx direction seen from the RIS center at build time.
    pub tx_direction: Direction,
    pub geometry_fingerprint: String,
    /// Environment fingerprint of the scenario used by scan builds.
    #[serde(default)]
    pub scenario_fingerprint: Option<String>,
}

impl Codebook {
    pub fn new(
        entries: Vec<CodebookEntry>,
        tx_direction: Direction,
        geometry_fingerprint: String,
        scenario_fingerprint: Option<String>,
    ) -> Result<Self> {
        let cb = Self {
            entries,
            tx_direction,
            geometry_fingerprint,
            scenario_fingerprint,
        };
        cb.validate()?;
        Ok(cb)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidArgument("codebook is empty".into()));
        }
        check_angles(&self.angles())?;
        let (r, c) = (self.entries[0].config.n_rows(), self.entries[0].config.n_cols());
        if self.entries.iter().any(|e| e.config.n_rows() != r || e.config.n_cols() != c) {
            return Err(Error::InvalidArgument("codebook entries differ in size".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.target_azimuth_deg).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cb: Codebook =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed codebook JSON: {e}")))?;
        cb.validate()?;
        Ok(cb)
    }

    /// Error when the codebook was built for a different RIS geometry.
    pub fn check_geometry(&self, geom: &ArrayGeometry) -> Result<()> {
        if self.geometry_fingerprint != geom.fingerprint() {
            return Err(Error::IncompatibleCodebook(
                "codebook was built for a different RIS geometry".into(),
            ));
        }
        Ok(())
    }
}

fn check_angles(angles: &[f64]) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::InvalidArgument("no codebook angles given".into()));
    }
    if let Some(a) = angles.iter().find(|a| !(-90.0..=90.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!("angle {a} deg is outside [-90, 90]")));
    }
    if angles.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("codebook angles must be strictly increasing".into()));
    }
    Ok(())
}

/// One column-row scan per angle, with the Rx moved to that azimuth at the
/// scenario's range and height.
pub fn build_codebook_scan(
    base: &Scenario,
    rx_angles_deg: &[f64],
    objective: Objective,
    iterations: usize,
    refl: &ReflectionModel,
) -> Result<Codebook> {
    check_angles(rx_angles_deg)?;
    base.validate()?;
    let entries = rx_angles_deg
        .par_iter()
        .map(|&angle| {
            let s = base.with_rx_azimuth(angle)?;
            let channels = ChannelSet::new(&s)?;
            let (config, _) = column_row_scan_with(&channels, s.ris.n_rows, s.ris.n_cols, objective, iterations, refl)?;
            Ok(CodebookEntry {
                target_azimuth_deg: angle,
                config,
                provenance: Provenance::Scan,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(
        entries,
        base.tx_direction()?.0,
        base.ris.fingerprint(),
        Some(base.environment_fingerprint()),
    )
}

/// Quantized continuous optimum per angle, both polarizations set alike.
/// The incidence direction is the specular image of `tx_dir`, so the entry
/// at the specular angle is the uniform surface.
pub fn build_codebook_model(
    tx_dir: Direction,
    rx_angles_deg: &[f64],
    geom: &ArrayGeometry,
    wavelength: f64,
    refl: &ReflectionModel,
) -> Result<Codebook> {
    check_angles(rx_angles_deg)?;
    refl.validate()?;
    let aoa = tx_dir.specular();
    let entries = rx_angles_deg
        .iter()
        .map(|&angle| {
            let omega = continuous_optimal_config(aoa, Direction::azimuth(angle)?, geom, wavelength)?;
            let states = quantize_states(&omega, refl)?;
            Ok(CodebookEntry {
                target_azimuth_deg: angle,
                config: ConfigMatrix::from_element_states(geom.n_rows, geom.n_cols, &states)?,
                provenance: Provenance::Model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(entries, tx_dir, geom.fingerprint(), None)
}

/// Overwrite the bottom `k_rows` rows with the row directly above them, per
/// column.
pub fn case2_row_extension(phi: &ConfigMatrix, k_rows: usize) -> Result<ConfigMatrix> {
    let n = phi.n_rows();
    if k_rows >= n {
        return Err(Error::InvalidArgument(format!(
            "cannot extend {k_rows} rows of a {n}-row configuration"
        )));
    }
    let mut out = phi.clone();
    let source = phi.row(n - k_rows - 1).to_vec();
    for r in n - k_rows..n {
        for (c, &s) in source.iter().enumerate() {
            out.set(r, c, s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub objective: Objective,
    pub entry_angles_deg: Vec<f64>,
    pub raw_db: Vec<f64>,
    pub metrics_db: Vec<f64>,
    pub chosen: usize,
    pub estimated_azimuth_deg: f64,
    pub true_azimuth_deg: f64,
    pub error_deg: f64,
    /// Whether the codebook was built for this environment.
    pub scenario_matches: bool,
}

impl SweepReport {
    fn from_metrics(angles: Vec<f64>, raw_db: Vec<f64>, objective: Objective, true_azimuth_deg: f64) -> Result<Self> {
        if angles.is_empty() || angles.len() != raw_db.len() {
            return Err(Error::InvalidArgument("empty or mismatched sweep".into()));
        }
        let mode = match objective {
            Objective::Maximize => NormalizeMode::MaxTo0,
            Objective::Minimize => NormalizeMode::MinTo0,
        };
        let metrics_db = normalize_powers(&raw_db, mode)?;
        // first extremum wins, which is the smaller angle
        let mut chosen = 0;
        for i in 1..raw_db.len() {
            if objective.improves(raw_db[i], raw_db[chosen]) {
                chosen = i;
            }
        }
        let estimated = angles[chosen];
        Ok(Self {
            objective,
            estimated_azimuth_deg: estimated,
            true_azimuth_deg,
            error_deg: round_angle(estimated - true_azimuth_deg).abs(),
            entry_angles_deg: angles,
            raw_db,
            metrics_db,
            chosen,
            scenario_matches: true,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("entry_angle_deg,metric_dB_normalized,chosen,true_angle_deg,error_deg\n");
        for (i, (a, m)) in self.entry_angles_deg.iter().zip(&self.metrics_db).enumerate() {
            let _ = writeln!(
                out,
                "{a},{m},{},{},{}",
                i == self.chosen,
                self.true_azimuth_deg,
                self.error_deg
            );
        }
        out
    }
}

/// Angle differences are reported to 1e-9 degree so that positions placed
/// by trigonometry read back as exact grid angles.
fn round_angle(deg: f64) -> f64 {
    (deg * 1e9).round() / 1e9
}

/// Apply every entry, measure the wideband metric and pick the extremum.
pub fn beam_sweep_estimate(
    s: &Scenario,
    cb: &Codebook,
    objective: Objective,
    refl: &ReflectionModel,
) -> Result<SweepReport> {
    cb.validate()?;
    cb.check_geometry(&s.ris)?;
    let channels = ChannelSet::new(s)?;
    let raw = cb
        .entries
        .par_iter()
        .map(|e| channels.wideband_power(&e.config, refl))
        .collect::<Result<Vec<_>>>()?;
    let mut report = SweepReport::from_metrics(cb.angles(), raw, objective, round_angle(s.rx_azimuth_deg()?))?;
    report.scenario_matches = cb.scenario_fingerprint.as_deref() == Some(s.environment_fingerprint().as_str());
    Ok(report)
}

/// Gap between the best and second-best normalized metric.
pub fn second_best_margin(r: &SweepReport) -> Result<f64> {
    if r.metrics_db.len() < 2 {
        return Err(Error::InvalidArgument("margin needs at least two entries".into()));
    }
    let best = r.metrics_db[r.chosen];
    let second = r
        .metrics_db
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != r.chosen)
        .map(|(_, &m)| m)
        .reduce(|a, b| if r.objective.improves(b, a) { b } else { a })
        .expect("at least one other entry");
    Ok((best - second).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySelectivity {
    pub target_azimuth_deg: f64,
    /// Main-lobe azimuth per frequency.
    pub peaks_deg: Vec<f64>,
    /// Normalized cut per frequency, on the report's azimuth grid.
    pub cuts_db: Vec<Vec<f64>>,
    pub drift_deg: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub frequencies_hz: Vec<f64>,
    pub azimuths_deg: Vec<f64>,
    pub threshold_deg: f64,
    pub entries: Vec<EntrySelectivity>,
}

impl FrequencyReport {
    pub fn flagged(&self) -> Vec<f64> {
        self.entries.iter().filter(|e| e.flagged).map(|e| e.target_azimuth_deg).collect()
    }

    pub fn max_drift_deg(&self) -> f64 {
        self.entries.iter().map(|e| e.drift_deg).fold(0.0, f64::max)
    }

    /// One row per entry: peak per frequency, drift and flag.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("entry_angle_deg");
        for f in &self.frequencies_hz {
            let _ = write!(out, ",peak_deg_at_{f}");
        }
        out.push_str(",drift_deg,flagged\n");
        for e in &self.entries {
            let _ = write!(out, "{}", e.target_azimuth_deg);
            for p in &e.peaks_deg {
                let _ = write!(out, ",{p}");
            }
            let _ = writeln!(out, ",{},{}", e.drift_deg, e.flagged);
        }
        out
    }

    /// Long format: entry, frequency, azimuth, normalized gain.
    pub fn cuts_csv(&self) -> String {
        let mut out = String::from("entry_angle_deg,frequency_hz,azimuth_deg,gain_dB\n");
        for e in &self.entries {
            for (f, cut) in self.frequencies_hz.iter().zip(&e.cuts_db) {
                for (a, g) in self.azimuths_deg.iter().zip(cut) {
                    let _ = writeln!(out, "{},{f},{a},{g}", e.target_azimuth_deg);
                }
            }
        }
        out
    }
}

/// Model pattern cut of every entry at each frequency (horizontal plane,
/// incidence from the scenario's Tx) and the spread of its main-lobe
/// azimuth across frequencies.
pub fn frequency_selectivity_report(
    s: &Scenario,
    cb: &Codebook,
    frequencies_hz: &[f64],
    azimuths_deg: &[f64],
    threshold_deg: f64,
    refl: &ReflectionModel,
) -> Result<FrequencyReport> {
    if frequencies_hz.is_empty() {
        return Err(Error::InvalidArgument("no frequencies given".into()));
    }
    if let Some(f) = frequencies_hz.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid frequency {f}")));
    }
    cb.validate()?;
    cb.check_geometry(&s.ris)?;
    let aoa = s.incidence_direction()?;
    let entries = cb
        .entries
        .par_iter()
        .map(|e| {
            let omega = config_to_phase_vector(&e.config, s.polarization, refl);
            let mut peaks = Vec::with_capacity(frequencies_hz.len());
            let mut cuts = Vec::with_capacity(frequencies_hz.len());
            for &f in frequencies_hz {
                let cut = pattern_cut(
                    omega.as_slice(),
                    aoa,
                    &s.ris,
                    wavelength_at(f),
                    &s.ris_element,
                    azimuths_deg,
                    0.0,
                    true,
                )?;
                peaks.push(cut.azimuths_deg[main_lobe_index(&cut)?]);
                cuts.push(cut.gains_db);
            }
            let hi = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = peaks.iter().copied().fold(f64::INFINITY, f64::min);
            let drift = hi - lo;
            Ok(EntrySelectivity {
                target_azimuth_deg: e.target_azimuth_deg,
                peaks_deg: peaks,
                cuts_db: cuts,
                drift_deg: drift,
                flagged: drift > threshold_deg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyReport {
        frequencies_hz: frequencies_hz.to_vec(),
        azimuths_deg: azimuths_deg.to_vec(),
        threshold_deg,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(metrics: &[f64], objective: Objective) -> SweepReport {
        let angles = (0..metrics.len()).map(|i| 5.0 * i as f64).collect();
        SweepReport::from_metrics(angles, metrics.to_vec(), objective, 0.0).unwrap()
    }

    #[test]
    fn margin_examples() {
        assert_eq!(second_best_margin(&report(&[0.0, -5.0, -7.0], Objective::Maximize)).unwrap(), 5.0);
        assert_eq!(second_best_margin(&report(&[-3.0, -3.0, -7.0], Objective::Maximize)).unwrap(), 0.0);
        assert_eq!(second_best_margin(&report(&[-40.0, -42.0, -50.0], Objective::Minimize)).unwrap(), 8.0);
        assert!(second_best_margin(&report(&[-1.0], Objective::Maximize)).is_err());
    }

    #[test]
    fn ties_pick_smaller_angle() {
        let r = report(&[-3.0, -1.0, -1.0], Objective::Maximize);
        assert_eq!(r.chosen, 1);
        assert_eq!(r.estimated_azimuth_deg, 5.0);
        assert_eq!(r.metrics_db, vec![-2.0, 0.0, 0.0]);
        let m = report(&[-3.0, -9.0, -9.0], Objective::Minimize);
        assert_eq!(m.chosen, 1);
        assert_eq!(m.metrics_db, vec![6.0, 0.0, 0.0]);
    }

    #[test]
    fn sweep_csv_layout() {
        let r = report(&[-2.0, -1.0], Objective::Maximize);
        assert_eq!(
            r.to_csv(),
            "entry_angle_deg,metric_dB_normalized,chosen,true_angle_deg,error_deg\n0,-1,false,0,5\n5,0,true,0,5\n"
        );
    }

    #[test]
    fn extension_examples() {
        let phi = ConfigMatrix::from_rows(&[
            vec![0, 0, 0, 0],
            vec![0, 1, 1, 0],
            vec![1, 1, 0, 0],
            vec![1, 0, 1, 1],
        ])
        .unwrap();
        assert_eq!(case2_row_extension(&phi, 0).unwrap(), phi);
        let ext = case2_row_extension(&phi, 2).unwrap();
        assert_eq!(ext.row(2), phi.row(1));
        assert_eq!(ext.row(3), phi.row(1));
        assert_eq!(ext.row(0), phi.row(0));
        assert_eq!(case2_row_extension(&ext, 2).unwrap(), ext);
        assert!(case2_row_extension(&phi, 4).is_err());
        assert_eq!(default_extension_rows(32), 8);
    }

    #[test]
    fn codebook_angle_checks() {
        let geom = ArrayGeometry::uniform(2, 2, 0.04).unwrap();
        let refl = ReflectionModel::default();
        let tx = Direction::azimuth(-15.0).unwrap();
        assert!(build_codebook_model(tx, &[], &geom, 0.0857, &refl).is_err());
        assert!(build_codebook_model(tx, &[10.0, 5.0], &geom, 0.0857, &refl).is_err());
        assert!(build_codebook_model(tx, &[95.0], &geom, 0.0857, &refl).is_err());
        let cb = build_codebook_model(tx, &[0.0, 15.0], &geom, 0.0857, &refl).unwrap();
        assert!(cb.entries[1].config.bits().iter().all(|&b| b == 1));
        assert_eq!(Codebook::from_json(&cb.to_json()).unwrap(), cb);
        let other = ArrayGeometry::uniform(2, 3, 0.04).unwrap();
        assert!(matches!(cb.check_geometry(&other), Err(Error::IncompatibleCodebook(_))));
    }
}
