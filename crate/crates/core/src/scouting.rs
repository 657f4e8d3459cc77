//! Scouting-logic reads on a memristive array.
//!
//! Raising several word lines at once with read voltage `V_r` makes each
//! column current the sum of the selected cells' conductances:
//! `I = V_r · Σ 1/R(cell)`. With `n` rows selected and `k` of them in the
//! low-resistance state the current takes one of `n + 1` discrete levels,
//! and the sense-amplifier reference decides which gate the read computes:
//!
//! * OR: reference between the 0-low and 1-low levels,
//! * AND: reference between the (n-1)-low and n-low levels,
//! * XOR (two rows): a window between the 0-low and 2-low levels.
//!
//! Results go to an output vector; the array itself is never written by a
//! read.

use std::fmt;

use thiserror::Error;

use crate::bits::BitVector;
use crate::crossbar::{Column, CrossbarError, DeviceParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoutingError {
    #[error("array dimensions must be positive, got {rows}x{cols}")]
    EmptyArray { rows: usize, cols: usize },
    #[error("no rows selected")]
    NoRows,
    #[error("row {0} selected twice")]
    DuplicateRow(usize),
    #[error("row {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("column {col} out of range for {cols} columns")]
    ColumnOutOfRange { col: usize, cols: usize },
    #[error("read voltage must be positive, got {0}")]
    InvalidReadVoltage(f64),
    #[error("{gate} is not supported for {rows} rows: {reason}")]
    UnsupportedGate {
        gate: Gate,
        rows: usize,
        reason: String,
    },
    #[error("sense configuration does not separate the levels of a {rows}-row read: {reason}")]
    InconsistentSense { rows: usize, reason: String },
    #[error(transparent)]
    Device(#[from] CrossbarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Or,
    And,
    Xor,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::Or, Gate::And, Gate::Xor];

    /// Expected output when `low_cells` of `rows` selected cells are 1.
    pub fn truth(self, low_cells: usize, rows: usize) -> bool {
        match self {
            Gate::Or => low_cells > 0,
            Gate::And => low_cells == rows,
            Gate::Xor => low_cells % 2 == 1,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::Or => "OR",
            Gate::And => "AND",
            Gate::Xor => "XOR",
        })
    }
}

/// Sense-amplifier reference placement for one gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseConfig {
    pub gate: Gate,
    /// Row count the references were placed for.
    pub num_rows: usize,
    /// A, the only reference for OR and AND; lower window edge for XOR.
    pub ref_low: f64,
    /// A, upper window edge for XOR.
    pub ref_high: Option<f64>,
    /// Smallest ratio between a reference and its nearer current level.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoutOptions {
    /// Allow AND over more than two rows.
    pub extended_and: bool,
    /// Smallest acceptable ratio between two levels a reference separates.
    pub min_level_ratio: f64,
}

impl Default for ScoutOptions {
    fn default() -> Self {
        ScoutOptions {
            extended_and: false,
            min_level_ratio: 1.25,
        }
    }
}

pub const DEFAULT_READ_VOLTAGE: f64 = 0.4;

/// Column current with `rows` selected cells of which `low_cells` are 1.
pub fn current_level(params: &DeviceParams, read_voltage: f64, rows: usize, low_cells: usize) -> f64 {
    let high_cells = rows - low_cells;
    read_voltage * (low_cells as f64 / params.r_low + high_cells as f64 / params.r_high)
}

fn geometric_mean(a: f64, b: f64) -> f64 {
    (a * b).sqrt()
}

/// Places each reference at the geometric mean of the two levels it
/// separates.
pub fn default_references(
    params: &DeviceParams,
    read_voltage: f64,
    num_rows: usize,
    gate: Gate,
) -> Result<SenseConfig, ScoutingError> {
    default_references_with(params, read_voltage, num_rows, gate, &ScoutOptions::default())
}

pub fn default_references_with(
    params: &DeviceParams,
    read_voltage: f64,
    num_rows: usize,
    gate: Gate,
    options: &ScoutOptions,
) -> Result<SenseConfig, ScoutingError> {
    params.validate()?;
    if read_voltage.is_nan() || read_voltage <= 0.0 {
        return Err(ScoutingError::InvalidReadVoltage(read_voltage));
    }
    if num_rows == 0 {
        return Err(ScoutingError::NoRows);
    }
    let level = |k| current_level(params, read_voltage, num_rows, k);
    let unsupported = |reason: &str| ScoutingError::UnsupportedGate {
        gate,
        rows: num_rows,
        reason: reason.to_string(),
    };
    let check_window = |lo: f64, hi: f64| {
        let ratio = hi / lo;
        if ratio >= options.min_level_ratio {
            Ok(())
        } else {
            Err(unsupported(&format!(
                "adjacent levels differ by only {ratio:.3}x (minimum {})",
                options.min_level_ratio
            )))
        }
    };
    let (ref_low, ref_high) = match gate {
        Gate::Or => {
            check_window(level(0), level(1))?;
            (geometric_mean(level(0), level(1)), None)
        }
        Gate::And => {
            if num_rows < 2 {
                return Err(unsupported("AND needs at least two rows"));
            }
            if num_rows > 2 && !options.extended_and {
                return Err(unsupported("AND over more than two rows is not enabled"));
            }
            check_window(level(num_rows - 1), level(num_rows))?;
            (geometric_mean(level(num_rows - 1), level(num_rows)), None)
        }
        Gate::Xor => {
            if num_rows != 2 {
                return Err(unsupported("XOR is defined for exactly two rows"));
            }
            check_window(level(0), level(1))?;
            check_window(level(1), level(2))?;
            (
                geometric_mean(level(0), level(1)),
                Some(geometric_mean(level(1), level(2))),
            )
        }
    };
    let mut config = SenseConfig {
        gate,
        num_rows,
        ref_low,
        ref_high,
        margin: f64::INFINITY,
    };
    config.margin = config.margin_for(params, read_voltage, num_rows)?;
    Ok(config)
}

impl SenseConfig {
    /// Smallest reference-to-level ratio for a read of `rows` rows, or an
    /// error if some reference does not fall strictly between the levels
    /// it must separate.
    pub fn margin_for(
        &self,
        params: &DeviceParams,
        read_voltage: f64,
        rows: usize,
    ) -> Result<f64, ScoutingError> {
        let level = |k| current_level(params, read_voltage, rows, k);
        let inconsistent = |reason: String| ScoutingError::InconsistentSense { rows, reason };
        if rows == 0 {
            return Err(ScoutingError::NoRows);
        }
        if self.gate != Gate::Or && rows != self.num_rows {
            return Err(inconsistent(format!(
                "{} references were placed for {} rows",
                self.gate, self.num_rows
            )));
        }
        let between = |r: f64, lo: f64, hi: f64| -> Result<f64, ScoutingError> {
            if lo < r && r < hi {
                Ok((r / lo).min(hi / r))
            } else {
                Err(inconsistent(format!("reference {r:e} A is not inside ({lo:e}, {hi:e}) A")))
            }
        };
        match self.gate {
            Gate::Or => between(self.ref_low, level(0), level(1)),
            Gate::And => between(self.ref_low, level(rows - 1), level(rows)),
            Gate::Xor => {
                let high = self
                    .ref_high
                    .ok_or_else(|| inconsistent("XOR needs an upper reference".into()))?;
                Ok(between(self.ref_low, level(0), level(1))?.min(between(high, level(1), level(2))?))
            }
        }
    }

    /// Sense-amplifier decision for a column current.
    pub fn decide(&self, current: f64) -> bool {
        match (self.gate, self.ref_high) {
            (Gate::Xor, Some(high)) => self.ref_low < current && current < high,
            _ => current > self.ref_low,
        }
    }
}

/// A rows × cols array of two-state cells, stored as crossbar columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoutArray {
    columns: Vec<Column>,
    rows: usize,
    params: DeviceParams,
    read_voltage: f64,
}

impl ScoutArray {
    pub fn new(
        rows: usize,
        cols: usize,
        params: DeviceParams,
        read_voltage: f64,
    ) -> Result<Self, ScoutingError> {
        if rows == 0 || cols == 0 {
            return Err(ScoutingError::EmptyArray { rows, cols });
        }
        params.validate()?;
        if read_voltage.is_nan() || read_voltage <= 0.0 {
            return Err(ScoutingError::InvalidReadVoltage(read_voltage));
        }
        Ok(ScoutArray {
            columns: vec![Column::new(rows, params); cols],
            rows,
            params,
            read_voltage,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn read_voltage(&self) -> f64 {
        self.read_voltage
    }

    pub fn column(&self, col: usize) -> &Column {
        &self.columns[col]
    }

    fn check_col(&self, col: usize) -> Result<(), ScoutingError> {
        if col < self.cols() {
            Ok(())
        } else {
            Err(ScoutingError::ColumnOutOfRange { col, cols: self.cols() })
        }
    }

    pub fn program(&mut self, row: usize, col: usize, bit: bool) -> Result<(), ScoutingError> {
        self.check_col(col)?;
        if row >= self.rows {
            return Err(ScoutingError::RowOutOfRange { row, rows: self.rows });
        }
        self.columns[col].program(row, bit)?;
        Ok(())
    }

    /// Programs a whole row from `bits` (one bit per column).
    pub fn program_row(&mut self, row: usize, bits: &BitVector) -> Result<(), ScoutingError> {
        if bits.len() != self.cols() {
            return Err(ScoutingError::ColumnOutOfRange {
                col: bits.len(),
                cols: self.cols(),
            });
        }
        for (col, bit) in bits.iter().enumerate() {
            self.program(row, col, bit)?;
        }
        Ok(())
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.columns[col].cell(row)
    }

    fn check_rows(&self, rows: &[usize]) -> Result<(), ScoutingError> {
        if rows.is_empty() {
            return Err(ScoutingError::NoRows);
        }
        let mut seen = BitVector::zeros(self.rows);
        for &row in rows {
            if row >= self.rows {
                return Err(ScoutingError::RowOutOfRange { row, rows: self.rows });
            }
            if seen.get(row) {
                return Err(ScoutingError::DuplicateRow(row));
            }
            seen.set(row, true);
        }
        Ok(())
    }

    /// `I = V_r · Σ 1/R(cell)` over the selected rows of `col`.
    pub fn column_current(&self, rows: &[usize], col: usize) -> Result<f64, ScoutingError> {
        self.check_rows(rows)?;
        self.check_col(col)?;
        Ok(self.current_unchecked(rows, col))
    }

    fn current_unchecked(&self, rows: &[usize], col: usize) -> f64 {
        let column = &self.columns[col];
        self.read_voltage * rows.iter().map(|&r| 1.0 / column.cell_resistance(r)).sum::<f64>()
    }

    /// Reads every column with the selected rows raised together.
    pub fn scouting_read(&self, rows: &[usize], sense: &SenseConfig) -> Result<BitVector, ScoutingError> {
        self.check_rows(rows)?;
        sense.margin_for(&self.params, self.read_voltage, rows.len())?;
        Ok(BitVector::from_bits(
            (0..self.cols()).map(|col| sense.decide(self.current_unchecked(rows, col))),
        ))
    }
}

/// One line of a two-row gate truth table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRow {
    pub gate: Gate,
    pub bits: (bool, bool),
    pub current: f64,
    pub output: bool,
}

/// Two-row truth tables for every gate, read through a 2 × 4 array holding
/// the four input combinations in its columns.
pub fn gate_truth_tables(params: &DeviceParams, read_voltage: f64) -> Result<Vec<TruthRow>, ScoutingError> {
    let combos = [(false, false), (false, true), (true, false), (true, true)];
    let mut array = ScoutArray::new(2, combos.len(), *params, read_voltage)?;
    for (col, &(a, b)) in combos.iter().enumerate() {
        array.program(0, col, a)?;
        array.program(1, col, b)?;
    }
    let mut out = Vec::new();
    for gate in Gate::ALL {
        let sense = default_references(params, read_voltage, 2, gate)?;
        let outputs = array.scouting_read(&[0, 1], &sense)?;
        for (col, &bits) in combos.iter().enumerate() {
            out.push(TruthRow {
                gate,
                bits,
                current: array.column_current(&[0, 1], col)?,
                output: outputs.get(col),
            });
        }
    }
    Ok(out)
}
