//! The experiment families. Each writes CSV results, the resolved spec and a
//! metadata sidecar into the spec's output directory.

use std::fmt::Write as _;
use std::path::PathBuf;

use ris_core::channel::{normalize_powers, ChannelSet, NormalizeMode, Scenario};
use ris_core::codebook::{
    beam_sweep_estimate, build_codebook_model, build_codebook_scan, case2_row_extension, default_extension_rows,
    frequency_selectivity_report, second_best_margin, Codebook, DEFAULT_DRIFT_THRESHOLD_DEG,
};
use ris_core::config::{config_to_phase_vector, ReflectionModel};
use ris_core::geometry::wavelength_at;
use ris_core::optimizer::{column_row_scan, enumerate_powers, exhaustive_oracle, fraction_better, Objective};
use ris_core::pattern::{azimuth_grid, main_lobe_direction, pattern_cut, PatternCut};
use serde::Serialize;
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::output::{Header, OutputDir};
use crate::presets::{load_codebook, load_scenario};
use crate::spec::{CodebookSource, ExperimentKind, ExperimentSpec};

/// Azimuth step of model pattern cuts, degrees.
pub const PATTERN_STEP_DEG: f64 = 0.5;
/// Azimuth step used to locate main lobes in the frequency experiment.
pub const DRIFT_STEP_DEG: f64 = 0.25;
/// Frequencies compared by the frequency experiment by default, Hz.
pub const DEFAULT_FREQUENCIES_HZ: [f64; 3] = [3.5e9, 3.55e9, 3.6e9];
/// Largest configuration the oracle experiment enumerates, bits.
pub const ORACLE_MAX_BITS: usize = 20;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Codebook for `s` according to `source`.
pub fn obtain_codebook(
    s: &Scenario,
    source: &CodebookSource,
    objective: Objective,
    iterations: usize,
    refl: &ReflectionModel,
) -> Result<Codebook> {
    let cb = match source {
        CodebookSource::Scan => build_codebook_scan(s, &s.rx_azimuths_deg, objective, iterations, refl)?,
        CodebookSource::Model => build_codebook_model(
            s.tx_direction()?.0,
            &s.rx_azimuths_deg,
            &s.ris,
            wavelength_at(s.frequencies.center_hz()),
            refl,
        )?,
        CodebookSource::File(path) => load_codebook(path)?,
    };
    cb.check_geometry(&s.ris)?;
    Ok(cb)
}

pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let spec = spec.resolved()?;
    let s = load_scenario(&spec.scenario)?;
    let header = Header::new(spec.experiment.as_str(), s.fingerprint(), spec.seed);
    let mut out = OutputDir::create(&spec.out, header)?;
    out.write_json("spec.json", &spec)?;
    let refl = ReflectionModel::default();
    let summary = match spec.experiment {
        ExperimentKind::Pattern => pattern(&spec, &s, &refl, &mut out)?,
        ExperimentKind::Sweep => sweep(&spec, &s, &refl, &mut out)?,
        ExperimentKind::Freq => freq(&spec, &s, &refl, &mut out)?,
        ExperimentKind::Oracle => oracle(&spec, &s, &refl, &mut out)?,
    };
    let dir = out.root().to_path_buf();
    let files = out.finish(&summary)?;
    Ok(RunOutput { dir, files, summary })
}

fn angle_tag(deg: f64) -> String {
    format!("{deg}").replace('-', "m").replace('.', "p")
}

fn cut_peak(cut: &PatternCut) -> Result<f64> {
    Ok(main_lobe_direction(cut)?.azimuth_deg())
}

fn pattern(spec: &ExperimentSpec, s: &Scenario, refl: &ReflectionModel, out: &mut OutputDir) -> Result<serde_json::Value> {
    let cb = obtain_codebook(s, &spec.codebook, spec.objective, spec.iterations, refl)?;
    let k_rows = spec.case2_rows.unwrap_or_else(|| default_extension_rows(s.ris.n_rows));
    let grid = azimuth_grid(-90.0, 90.0, PATTERN_STEP_DEG)?;
    let lambda = wavelength_at(s.frequencies.center_hz());
    let aoa = s.incidence_direction()?;

    // measured cut: wideband power of each entry at every Rx position
    let channels = s
        .rx_azimuths_deg
        .iter()
        .map(|&a| ChannelSet::new(&s.with_rx_azimuth(a)?))
        .collect::<ris_core::Result<Vec<_>>>()?;

    let mut summary = String::from("entry_angle_deg,case1_peak_deg,case2_peak_deg,measured_peak_deg,case2_changed\n");
    for e in &cb.entries {
        let tag = angle_tag(e.target_azimuth_deg);
        let case2 = case2_row_extension(&e.config, k_rows)?;
        let mut peaks = Vec::new();
        for (label, phi) in [("case1", &e.config), ("case2", &case2)] {
            let w = config_to_phase_vector(phi, s.polarization, refl);
            let cut = pattern_cut(w.as_slice(), aoa, &s.ris, lambda, &s.ris_element, &grid, 0.0, true)?;
            peaks.push(cut_peak(&cut)?);
            out.write_csv(&format!("pattern/entry_{tag}_{label}.csv"), &cut.to_csv())?;
        }
        let raw = channels
            .iter()
            .map(|c| c.wideband_power(&e.config, refl))
            .collect::<ris_core::Result<Vec<_>>>()?;
        let measured = PatternCut {
            azimuths_deg: s.rx_azimuths_deg.clone(),
            elevation_deg: 0.0,
            gains_db: normalize_powers(&raw, NormalizeMode::MaxTo0)?,
            normalized: true,
        };
        peaks.push(cut_peak(&measured)?);
        out.write_csv(&format!("pattern/entry_{tag}_measured.csv"), &measured.to_csv())?;
        let _ = writeln!(
            summary,
            "{},{},{},{},{}",
            e.target_azimuth_deg,
            peaks[0],
            peaks[1],
            peaks[2],
            case2 != e.config
        );
    }
    out.write_csv("pattern/summary.csv", &summary)?;
    Ok(json!({
        "entries": cb.len(),
        "case2_rows": k_rows,
        "column_constant_entries": cb.entries.iter().filter(|e| e.config.is_column_constant()).count(),
    }))
}

#[derive(Serialize)]
struct SweepRow {
    true_angle_deg: f64,
    estimated_angle_deg: f64,
    error_deg: f64,
    second_best_margin_db: Option<f64>,
}

fn sweep(spec: &ExperimentSpec, s: &Scenario, refl: &ReflectionModel, out: &mut OutputDir) -> Result<serde_json::Value> {
    let cb = obtain_codebook(s, &spec.codebook, spec.objective, spec.iterations, refl)?;
    let mut rows = Vec::new();
    let mut summary = String::from("true_angle_deg,estimated_angle_deg,error_deg,second_best_margin_dB\n");
    let mut matches = true;
    for &a in &s.rx_azimuths_deg {
        let report = beam_sweep_estimate(&s.with_rx_azimuth(a)?, &cb, spec.objective, refl)?;
        matches &= report.scenario_matches;
        out.write_csv(&format!("sweep/rx_{}.csv", angle_tag(a)), &report.to_csv())?;
        let margin = second_best_margin(&report).ok();
        let _ = writeln!(
            summary,
            "{},{},{},{}",
            report.true_azimuth_deg,
            report.estimated_azimuth_deg,
            report.error_deg,
            margin.map(|m| m.to_string()).unwrap_or_default()
        );
        rows.push(SweepRow {
            true_angle_deg: report.true_azimuth_deg,
            estimated_angle_deg: report.estimated_azimuth_deg,
            error_deg: report.error_deg,
            second_best_margin_db: margin,
        });
    }
    out.write_csv("sweep/summary.csv", &summary)?;
    let max_error = rows.iter().map(|r| r.error_deg).fold(0.0, f64::max);
    let min_margin = rows.iter().filter_map(|r| r.second_best_margin_db).reduce(f64::min);
    Ok(json!({
        "objective": spec.objective.as_str(),
        "codebook_entries": cb.len(),
        "codebook_matches_scenario": matches,
        "max_error_deg": max_error,
        "min_second_best_margin_db": min_margin,
        "positions": rows,
    }))
}

fn freq(spec: &ExperimentSpec, s: &Scenario, refl: &ReflectionModel, out: &mut OutputDir) -> Result<serde_json::Value> {
    let cb = obtain_codebook(s, &spec.codebook, spec.objective, spec.iterations, refl)?;
    let freqs = spec.frequencies_hz.clone().unwrap_or_else(|| DEFAULT_FREQUENCIES_HZ.to_vec());
    let grid = azimuth_grid(-90.0, 90.0, DRIFT_STEP_DEG)?;
    let report = frequency_selectivity_report(s, &cb, &freqs, &grid, DEFAULT_DRIFT_THRESHOLD_DEG, refl)?;
    out.write_csv("freq/summary.csv", &report.summary_csv())?;
    out.write_csv("freq/cuts.csv", &report.cuts_csv())?;
    Ok(json!({
        "frequencies_hz": freqs,
        "threshold_deg": report.threshold_deg,
        "max_drift_deg": report.max_drift_deg(),
        "flagged_entries_deg": report.flagged(),
    }))
}

fn oracle(spec: &ExperimentSpec, s: &Scenario, refl: &ReflectionModel, out: &mut OutputDir) -> Result<serde_json::Value> {
    let powers = enumerate_powers(s, refl, ORACLE_MAX_BITS)?;
    let (best_phi, best) = exhaustive_oracle(s, spec.objective, refl, ORACLE_MAX_BITS)?;
    let (scan_phi, trace) = column_row_scan(s, spec.objective, spec.iterations, refl)?;
    let scan = trace.final_db();
    let gap = match spec.objective {
        Objective::Maximize => best - scan,
        Objective::Minimize => scan - best,
    };
    let monotone = trace.is_monotone();
    if gap < 0.0 || !monotone {
        return Err(HarnessError::Invalid(format!(
            "oracle invariant violated: gap {gap} dB, monotone trace {monotone}"
        )));
    }
    let better = fraction_better(&powers, scan, spec.objective);
    out.write_csv(
        "oracle/gap.csv",
        &format!(
            "objective,configurations,oracle_dB,scan_dB,gap_dB,fraction_better\n{},{},{best},{scan},{gap},{better}\n",
            spec.objective.as_str(),
            powers.len()
        ),
    )?;
    out.write_csv("oracle/trace.csv", &trace.to_csv())?;
    out.write_text("oracle/oracle_config.txt", &best_phi.to_text_grid())?;
    out.write_text("oracle/scan_config.txt", &scan_phi.to_text_grid())?;
    Ok(json!({
        "configurations": powers.len(),
        "oracle_db": best,
        "scan_db": scan,
        "gap_db": gap,
        "fraction_better": better,
        "trace_monotone": monotone,
    }))
}
