//! Bundled scenarios and scenario/codebook file loading.

use std::path::Path;

use ris_core::channel::Scenario;
use ris_core::codebook::Codebook;

use crate::error::{HarnessError, Result};

/// Open-air setup: Tx at -15 deg, Tx/Rx 8.5 m from the RIS, everything at
/// 1.3 m over a perfectly reflecting ground, Rx grid 0..60 deg step 5.
pub const OUTDOOR_JSON: &str = include_str!("../scenarios/outdoor.json");

/// Room setup: Tx at -15 deg and 5.5 m, Rx at 8.5 m on 0..45 deg step 15,
/// walls on all sides including the one the RIS is mounted on.
pub const INDOOR_JSON: &str = include_str!("../scenarios/indoor.json");

pub fn outdoor() -> Scenario {
    Scenario::from_json(OUTDOOR_JSON).expect("bundled outdoor scenario is valid")
}

pub fn indoor() -> Scenario {
    Scenario::from_json(INDOOR_JSON).expect("bundled indoor scenario is valid")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let s = Scenario::from_json(&read(path)?)?;
    if s.rx_azimuths_deg.is_empty() {
        return Err(HarnessError::Invalid(format!(
            "{}: scenario has no rx_azimuths_deg grid",
            path.display()
        )));
    }
    Ok(s)
}

pub fn load_codebook(path: &Path) -> Result<Codebook> {
    Ok(Codebook::from_json(&read(path)?)?)
}
