//! Phase optimization: continuous optimum, column-row greedy scanning and an
//! exhaustive oracle for tiny arrays.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, Scenario};
use crate::config::{ConfigMatrix, ReflectionModel};
use crate::error::{Error, Result};
use crate::geometry::{array_response, ArrayGeometry, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Maximize,
    Minimize,
}

impl Objective {
    /// Strict improvement of `candidate` over `best`; ties do not count.
    pub fn improves(self, candidate: f64, best: f64) -> bool {
        match self {
            Objective::Maximize => candidate > best,
            Objective::Minimize => candidate < best,
        }
    }

    /// `candidate` is at least as good as `reference`.
    pub fn not_worse(self, candidate: f64, reference: f64) -> bool {
        !self.improves(reference, candidate)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Maximize => "max",
            Objective::Minimize => "min",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "maximize" => Ok(Objective::Maximize),
            "min" | "minimize" => Ok(Objective::Minimize),
            other => Err(Error::InvalidArgument(format!("unknown objective {other:?}"))),
        }
    }
}

/// `w` with `w^T = (a(aoa) . conj(a(aod)))^H`, which makes every term of the
/// array-factor sum equal to one.
pub fn continuous_optimal_config(
    aoa: Direction,
    aod: Direction,
    geom: &ArrayGeometry,
    wavelength: f64,
) -> Result<Vec<Complex64>> {
    let a_in = array_response(geom, aoa, wavelength)?;
    let a_out = array_response(geom, aod, wavelength)?;
    Ok(a_in.iter().zip(&a_out).map(|(ai, ao)| ai.conj() * ao).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    ColumnPair,
    Row,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::ColumnPair => "column_pair",
            StepKind::Row => "row",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub iteration: usize,
    pub step_kind: StepKind,
    /// 1-based: first column of the pair (1, 3, 5, ...) or the row number.
    pub index: usize,
    pub candidate_db: f64,
    pub accepted: bool,
    pub best_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTrace {
    pub objective: Objective,
    pub baseline_db: f64,
    pub records: Vec<ScanRecord>,
}

impl ScanTrace {
    pub fn final_db(&self) -> f64 {
        self.records.last().map_or(self.baseline_db, |r| r.best_db)
    }

    /// Best-so-far never moves against the objective.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.baseline_db;
        for r in &self.records {
            if self.objective.improves(prev, r.best_db) {
                return false;
            }
            prev = r.best_db;
        }
        true
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step_kind,index,candidate_dB,accepted,best_dB\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.step_kind.as_str(),
                r.index,
                r.candidate_db,
                r.accepted,
                r.best_db
            );
        }
        out
    }
}

/// Greedy column-row scan starting from the all-0 surface: invert each
/// column pair, then each full row, keeping a change only when it strictly
/// improves the wideband metric. Both passes repeat `iterations` times.
pub fn column_row_scan(
    s: &Scenario,
    objective: Objective,
    iterations: usize,
    refl: &ReflectionModel,
) -> Result<(ConfigMatrix, ScanTrace)> {
    let channels = ChannelSet::new(s)?;
    column_row_scan_with(&channels, s.ris.n_rows, s.ris.n_cols, objective, iterations, refl)
}

/// [`column_row_scan`] against precomputed channels.
pub fn column_row_scan_with(
    channels: &ChannelSet,
    n_rows: usize,
    n_element_cols: usize,
    objective: Objective,
    iterations: usize,
    refl: &ReflectionModel,
) -> Result<(ConfigMatrix, ScanTrace)> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be >= 1".into()));
    }
    refl.validate()?;
    let mut phi = ConfigMatrix::zeros(n_rows, n_element_cols);
    let baseline = channels.wideband_power(&phi, refl)?;
    let mut best = baseline;
    let mut records = Vec::with_capacity(iterations * (n_rows + n_element_cols));

    let mut try_step = |phi: &mut ConfigMatrix, kind: StepKind, index: usize, iteration: usize| -> Result<()> {
        let flip = |phi: &mut ConfigMatrix| match kind {
            StepKind::ColumnPair => phi.flip_column_pair(index),
            StepKind::Row => phi.flip_row(index),
        };
        flip(phi);
        let candidate = channels.wideband_power(phi, refl)?;
        let accepted = objective.improves(candidate, best);
        if accepted {
            best = candidate;
        } else {
            flip(phi);
        }
        records.push(ScanRecord {
            iteration: iteration + 1,
            step_kind: kind,
            index: match kind {
                StepKind::ColumnPair => 2 * index + 1,
                StepKind::Row => index + 1,
            },
            candidate_db: candidate,
            accepted,
            best_db: best,
        });
        Ok(())
    };

    for it in 0..iterations {
        for k in 0..n_element_cols {
            try_step(&mut phi, StepKind::ColumnPair, k, it)?;
        }
        for r in 0..n_rows {
            try_step(&mut phi, StepKind::Row, r, it)?;
        }
    }
    Ok((
        phi,
        ScanTrace {
            objective,
            baseline_db: baseline,
            records,
        },
    ))
}

/// Wideband metric of every configuration, indexed as in
/// [`ConfigMatrix::from_index`].
pub fn enumerate_powers(s: &Scenario, refl: &ReflectionModel, max_bits: usize) -> Result<Vec<f64>> {
    let n_bits = s.ris.n_rows * 2 * s.ris.n_cols;
    if max_bits > 20 || n_bits > max_bits {
        return Err(Error::Refused(format!(
            "exhaustive search over {n_bits} bits exceeds the limit of {} bits",
            max_bits.min(20)
        )));
    }
    let channels = ChannelSet::new(s)?;
    (0..1u64 << n_bits)
        .into_par_iter()
        .map(|idx| channels.wideband_power(&ConfigMatrix::from_index(s.ris.n_rows, s.ris.n_cols, idx), refl))
        .collect()
}

/// Global optimum by enumeration. Ties go to the smallest configuration
/// index, so the answer does not depend on evaluation order.
pub fn exhaustive_oracle(
    s: &Scenario,
    objective: Objective,
    refl: &ReflectionModel,
    max_bits: usize,
) -> Result<(ConfigMatrix, f64)> {
    let powers = enumerate_powers(s, refl, max_bits)?;
    let mut best = 0;
    for (i, &p) in powers.iter().enumerate().skip(1) {
        if objective.improves(p, powers[best]) {
            best = i;
        }
    }
    Ok((
        ConfigMatrix::from_index(s.ris.n_rows, s.ris.n_cols, best as u64),
        powers[best],
    ))
}

/// Fraction of enumerated configurations strictly better than `value`.
pub fn fraction_better(powers: &[f64], value: f64, objective: Objective) -> f64 {
    if powers.is_empty() {
        return 0.0;
    }
    powers.iter().filter(|&&p| objective.improves(p, value)).count() as f64 / powers.len() as f64
}
