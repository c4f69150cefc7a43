//! Binary dual-polarized configuration matrix and its mapping to per-element
//! reflection coefficients.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which half of each column pair drives the simulated polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    #[default]
    H,
    V,
}

impl Polarization {
    fn offset(self) -> usize {
        match self {
            Self::H => 0,
            Self::V => 1,
        }
    }
}

/// Binary state matrix of size `n_rows x 2*n_element_cols`.
///
/// Columns `2k` and `2k + 1` hold the horizontal and vertical polarization
/// states of physical element column `k`. State 0 is the `-pi/2` phase state,
/// state 1 the `+pi/2` one (see [`ReflectionModel`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct ConfigMatrix {
    n_rows: usize,
    n_cols: usize,
    bits: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct ConfigRepr {
    rows: usize,
    cols: usize,
    grid: Vec<String>,
}

impl TryFrom<ConfigRepr> for ConfigMatrix {
    type Error = Error;
    fn try_from(repr: ConfigRepr) -> Result<Self> {
        let m = ConfigMatrix::from_text_grid(&repr.grid.join("\n"))?;
        if m.n_rows != repr.rows || m.n_cols != repr.cols {
            return Err(Error::DimensionMismatch {
                expected: repr.rows * repr.cols,
                got: m.bits.len(),
            });
        }
        Ok(m)
    }
}

impl From<ConfigMatrix> for ConfigRepr {
    fn from(m: ConfigMatrix) -> Self {
        ConfigRepr {
            rows: m.n_rows,
            cols: m.n_cols,
            grid: m.row_strings(),
        }
    }
}

impl ConfigMatrix {
    /// All-zero matrix for an `n_rows x n_element_cols` element grid.
    pub fn zeros(n_rows: usize, n_element_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols: 2 * n_element_cols,
            bits: vec![0; n_rows * 2 * n_element_cols],
        }
    }

    /// Matrix from explicit rows of 0/1 states; every row must have the same
    /// even length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 || !n_cols.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "configuration must be non-empty with an even column count, got {n_rows}x{n_cols}"
            )));
        }
        let mut bits = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            if let Some(b) = row.iter().find(|&&b| b > 1) {
                return Err(Error::InvalidArgument(format!("state {b} is not binary")));
            }
            bits.extend_from_slice(row);
        }
        Ok(Self { n_rows, n_cols, bits })
    }

    /// Both polarizations of element `i` (row-major) set to `states[i]`.
    pub fn from_element_states(n_rows: usize, n_element_cols: usize, states: &[u8]) -> Result<Self> {
        if states.len() != n_rows * n_element_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_element_cols,
                got: states.len(),
            });
        }
        let mut m = Self::zeros(n_rows, n_element_cols);
        for (i, &s) in states.iter().enumerate() {
            if s > 1 {
                return Err(Error::InvalidArgument(format!("state {s} is not binary")));
            }
            let (r, c) = (i / n_element_cols, i % n_element_cols);
            m.set(r, 2 * c, s);
            m.set(r, 2 * c + 1, s);
        }
        Ok(m)
    }

    /// Bits in row-major order from the low bits of `index`; bit `b` of the
    /// index is flat position `b`.
    pub fn from_index(n_rows: usize, n_element_cols: usize, index: u64) -> Self {
        let mut m = Self::zeros(n_rows, n_element_cols);
        for (b, bit) in m.bits.iter_mut().enumerate() {
            *bit = ((index >> b) & 1) as u8;
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Number of state columns (twice the element columns).
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_element_cols(&self) -> usize {
        self.n_cols / 2
    }

    pub fn n_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.n_cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, state: u8) {
        self.bits[row * self.n_cols + col] = state & 1;
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.bits[row * self.n_cols..(row + 1) * self.n_cols]
    }

    /// Invert state columns `2k` and `2k + 1` over every row.
    pub fn flip_column_pair(&mut self, element_col: usize) {
        for r in 0..self.n_rows {
            let base = r * self.n_cols + 2 * element_col;
            self.bits[base] ^= 1;
            self.bits[base + 1] ^= 1;
        }
    }

    /// Invert every state of one row, both polarizations.
    pub fn flip_row(&mut self, row: usize) {
        for b in &mut self.bits[row * self.n_cols..(row + 1) * self.n_cols] {
            *b ^= 1;
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
            ..self.clone()
        }
    }

    /// True when every column holds a single state across all rows.
    pub fn is_column_constant(&self) -> bool {
        (1..self.n_rows).all(|r| self.row(r) == self.row(0))
    }

    pub fn row_strings(&self) -> Vec<String> {
        (0..self.n_rows)
            .map(|r| self.row(r).iter().map(|&b| if b == 1 { '1' } else { '0' }).collect())
            .collect()
    }

    /// One line per row of `0`/`1` characters, newline-terminated.
    pub fn to_text_grid(&self) -> String {
        let mut s = self.row_strings().join("\n");
        s.push('\n');
        s
    }

    pub fn from_text_grid(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(Error::InvalidArgument(format!("unexpected character {other:?} in grid"))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    /// Element states of the chosen polarization, row-major.
    pub fn element_states(&self, polarization: Polarization) -> Vec<u8> {
        let off = polarization.offset();
        (0..self.n_rows)
            .flat_map(|r| (0..self.n_element_cols()).map(move |c| (r, c)))
            .map(|(r, c)| self.get(r, 2 * c + off))
            .collect()
    }
}

impl fmt::Display for ConfigMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text_grid())
    }
}

/// Complex reflection coefficient applied by each binary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionModel {
    pub states: [Complex64; 2],
}

impl Default for ReflectionModel {
    fn default() -> Self {
        Self {
            states: [Complex64::cis(-FRAC_PI_2), Complex64::cis(FRAC_PI_2)],
        }
    }
}

impl ReflectionModel {
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self> {
        let m = Self { states: [c0, c1] };
        m.validate()?;
        Ok(m)
    }

    /// Default phases with per-state amplitudes, modeling phase-dependent
    /// amplitude loss.
    pub fn with_amplitudes(a0: f64, a1: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(a0, -FRAC_PI_2), Complex64::from_polar(a1, FRAC_PI_2))
    }

    pub fn validate(&self) -> Result<()> {
        for c in self.states {
            if !(c.norm() <= 1.0 + 1e-12) || !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "reflection coefficient {c} must have modulus <= 1"
                )));
            }
        }
        Ok(())
    }

    pub fn coefficient(&self, state: u8) -> Complex64 {
        self.states[(state & 1) as usize]
    }
}

/// Per-element reflection coefficients `w`, length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(pub Vec<Complex64>);

impl PhaseVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse of the state mapping: index of the matching state for every
    /// entry, `None` if some entry is not one of the model's coefficients.
    pub fn to_states(&self, refl: &ReflectionModel) -> Option<Vec<u8>> {
        self.0
            .iter()
            .map(|w| {
                if *w == refl.states[1] {
                    Some(1)
                } else if *w == refl.states[0] {
                    Some(0)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Select one polarization of each column pair, flatten row-major and map
/// states to reflection coefficients.
pub fn config_to_phase_vector(phi: &ConfigMatrix, polarization: Polarization, refl: &ReflectionModel) -> PhaseVector {
    PhaseVector(
        phi.element_states(polarization)
            .into_iter()
            .map(|s| refl.coefficient(s))
            .collect(),
    )
}

/// Snap every entry to the state coefficient nearest in phase. Exact ties
/// (within 1e-12 rad) go to state 1.
pub fn quantize_1bit(omega: &[Complex64], refl: &ReflectionModel) -> Result<PhaseVector> {
    quantize_states(omega, refl).map(|states| PhaseVector(states.into_iter().map(|s| refl.coefficient(s)).collect()))
}

pub(crate) fn quantize_states(omega: &[Complex64], refl: &ReflectionModel) -> Result<Vec<u8>> {
    let [c0, c1] = refl.states;
    omega
        .iter()
        .map(|w| {
            if w.norm() == 0.0 || !w.norm().is_finite() {
                return Err(Error::InvalidArgument(format!("cannot quantize entry {w}")));
            }
            let d0 = (w * c0.conj()).arg().abs();
            let d1 = (w * c1.conj()).arg().abs();
            Ok(if d1 <= d0 + 1e-12 { 1 } else { 0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    #[test]
    fn zero_matrix_maps_to_state_zero() {
        let refl = ReflectionModel::default();
        let m = ConfigMatrix::zeros(3, 4);
        assert_eq!((m.n_rows(), m.n_cols()), (3, 8));
        let w = config_to_phase_vector(&m, Polarization::H, &refl);
        assert_eq!(w.len(), 12);
        assert!(w.0.iter().all(|&c| c == refl.states[0]));
    }

    #[test]
    fn first_row_layout() {
        let refl = ReflectionModel::default();
        let m = ConfigMatrix::from_rows(&[vec![1, 1, 1, 1], vec![0, 0, 0, 0]]).unwrap();
        let w = config_to_phase_vector(&m, Polarization::H, &refl);
        assert_eq!(w.0, vec![refl.states[1], refl.states[1], refl.states[0], refl.states[0]]);
    }

    #[test]
    fn polarization_selects_column_halves() {
        let m = ConfigMatrix::from_rows(&[vec![1, 0, 0, 1]]).unwrap();
        assert_eq!(m.element_states(Polarization::H), vec![1, 0]);
        assert_eq!(m.element_states(Polarization::V), vec![0, 1]);
    }

    #[test]
    fn flips() {
        let mut m = ConfigMatrix::zeros(2, 3);
        m.flip_column_pair(1);
        assert_eq!(m.row_strings(), vec!["001100", "001100"]);
        assert!(m.is_column_constant());
        m.flip_row(1);
        assert_eq!(m.row_strings(), vec!["001100", "110011"]);
        assert!(!m.is_column_constant());
        m.flip_row(1);
        m.flip_column_pair(1);
        assert_eq!(m, ConfigMatrix::zeros(2, 3));
    }

    #[test]
    fn text_grid_round_trip() {
        let m = ConfigMatrix::from_rows(&[vec![0, 1, 1, 0], vec![1, 1, 0, 0]]).unwrap();
        assert_eq!(m.to_text_grid(), "0110\n1100\n");
        assert_eq!(ConfigMatrix::from_text_grid(&m.to_text_grid()).unwrap(), m);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"rows":2,"cols":4,"grid":["0110","1100"]}"#);
        assert_eq!(serde_json::from_str::<ConfigMatrix>(&json).unwrap(), m);
    }

    #[test]
    fn malformed_grids_rejected() {
        assert!(ConfigMatrix::from_text_grid("012\n").is_err());
        assert!(ConfigMatrix::from_text_grid("010\n").is_err());
        assert!(ConfigMatrix::from_text_grid("0101\n01\n").is_err());
        assert!(ConfigMatrix::from_text_grid("").is_err());
        assert!(serde_json::from_str::<ConfigMatrix>(r#"{"rows":3,"cols":4,"grid":["0110","1100"]}"#).is_err());
    }

    #[test]
    fn quantization_examples() {
        let refl = ReflectionModel::default();
        let q = quantize_1bit(
            &[j(), Complex64::cis(std::f64::consts::FRAC_PI_4), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), -j()],
            &refl,
        )
        .unwrap();
        assert_eq!(q.to_states(&refl).unwrap(), vec![1, 1, 1, 1, 0]);
        assert!(quantize_1bit(&[Complex64::new(0.0, 0.0)], &refl).is_err());
    }

    #[test]
    fn reflection_model_bounds() {
        assert!(ReflectionModel::with_amplitudes(0.8, 1.0).is_ok());
        assert!(ReflectionModel::with_amplitudes(1.2, 1.0).is_err());
        let r = ReflectionModel::default();
        assert!((r.states[0] - (-j())).norm() < 1e-15);
        assert!((r.states[1] - j()).norm() < 1e-15);
    }

    #[test]
    fn element_state_expansion() {
        let m = ConfigMatrix::from_element_states(2, 2, &[1, 0, 0, 1]).unwrap();
        assert_eq!(m.row_strings(), vec!["1100", "0011"]);
        assert!(ConfigMatrix::from_element_states(2, 2, &[1, 0, 0]).is_err());
    }

    #[test]
    fn index_bit_order() {
        let m = ConfigMatrix::from_index(1, 2, 0b0101);
        assert_eq!(m.bits(), &[1, 0, 1, 0]);
    }
}
