//! 1T1R column model.
//!
//! A column is a bit line with one configurable cell per row. Logic 1 is the
//! low-resistance state. Evaluation pre-charges the bit line, raises the
//! selected word lines and lets any conducting cell discharge it; the sense
//! amplifier output (inverted relative to the bit line) is therefore the
//! wired-OR of the selected configuration bits.
//!
//! Timing uses a single-pole RC model: the bit line capacitance discharges
//! through the parallel conductance of the selected cell paths, and the
//! sense amplifier fires once the line reaches `v_read_done`, so
//! `t = R·C·ln(v_precharge / v_read_done)`. The per-cell capacitance is
//! fitted per backend against reference discharge times.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::BitVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossbarError {
    #[error("row {row} out of range for a {len}-cell column")]
    RowOutOfRange { row: usize, len: usize },
    #[error("selection has {found} rows, column has {expected} cells")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("invalid device profile: {0}")]
    InvalidParams(String),
    #[error("unknown backend '{0}' (expected rram or sram)")]
    UnknownBackend(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, CrossbarError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CrossbarError::NonPositive { name, value })
    }
}

/// Two-state resistive device and read-circuit voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Ω
    pub r_low: f64,
    /// Ω
    pub r_high: f64,
    /// V. Magnitudes only; SET/RESET polarity is not modeled.
    pub v_set: f64,
    pub v_reset: f64,
    pub v_precharge: f64,
    /// Bit-line level at which the sense amplifier reads a 1.
    pub v_read_done: f64,
    pub v_reference: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            r_low: 1e3,
            r_high: 100e6,
            v_set: 1.3,
            v_reset: 0.5,
            v_precharge: 0.4,
            v_read_done: 0.1,
            v_reference: 0.25,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<(), CrossbarError> {
        positive("r_low", self.r_low)?;
        positive("r_high", self.r_high)?;
        positive("v_set", self.v_set)?;
        positive("v_reset", self.v_reset)?;
        positive("v_precharge", self.v_precharge)?;
        positive("v_read_done", self.v_read_done)?;
        positive("v_reference", self.v_reference)?;
        if self.r_low >= self.r_high {
            return Err(CrossbarError::InvalidParams(format!(
                "r_low ({}) must be below r_high ({})",
                self.r_low, self.r_high
            )));
        }
        if !(self.v_read_done < self.v_reference && self.v_reference < self.v_precharge) {
            return Err(CrossbarError::InvalidParams(
                "expected v_read_done < v_reference < v_precharge".into(),
            ));
        }
        Ok(())
    }

    /// Resistance of a cell configured to `bit`.
    pub fn resistance(&self, bit: bool) -> f64 {
        if bit {
            self.r_low
        } else {
            self.r_high
        }
    }

    /// Whether the pre-charge level stays below both write thresholds.
    pub fn read_is_non_destructive(&self) -> bool {
        self.v_precharge < self.v_set.min(self.v_reset)
    }

    /// `ln(v_precharge / v_read_done)`, the number of time constants a
    /// sensed discharge takes.
    pub fn discharge_swing(&self) -> f64 {
        (self.v_precharge / self.v_read_done).ln()
    }
}

/// `t = R·C·ln(v_precharge / v_read_done)`.
pub fn discharge_time(
    params: &DeviceParams,
    path_resistance: f64,
    capacitance: f64,
) -> Result<f64, CrossbarError> {
    positive("path resistance", path_resistance)?;
    positive("bit-line capacitance", capacitance)?;
    Ok(path_resistance * capacitance * params.discharge_swing())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// 1T1R cells: one access transistor in series with the device.
    Rram,
    /// SRAM-cell switches: two series transistors in the discharge path.
    Sram,
}

impl Backend {
    pub const ALL: [Backend; 2] = [Backend::Rram, Backend::Sram];

    /// Access transistors in series along one cell's discharge path.
    pub fn series_transistors(self) -> u32 {
        match self {
            Backend::Rram => 1,
            Backend::Sram => 2,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Rram => "rram",
            Backend::Sram => "sram",
        })
    }
}

impl FromStr for Backend {
    type Err = CrossbarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rram" => Ok(Backend::Rram),
            "sram" => Ok(Backend::Sram),
            _ => Err(CrossbarError::UnknownBackend(s.to_string())),
        }
    }
}

/// Per-evaluation cost of one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnCost {
    /// s
    pub discharge_time: f64,
    /// J
    pub energy_per_eval: f64,
    pub backend: Backend,
}

/// Electrical parameters of the discharge path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcParams {
    /// Ω per access transistor.
    pub r_transistor_on: f64,
    /// Capacitance contributed per cell, F, fitted per backend.
    pub c_cell_rram: f64,
    pub c_cell_sram: f64,
}

impl RcParams {
    pub fn c_cell(&self, backend: Backend) -> f64 {
        match backend {
            Backend::Rram => self.c_cell_rram,
            Backend::Sram => self.c_cell_sram,
        }
    }
}

/// Cost constants plus the RC parameters fitted to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub device: DeviceParams,
    pub rc: RcParams,
    /// Column length the calibration targets refer to.
    pub calibration_cells: usize,
    pub rram: ColumnCost,
    pub sram: ColumnCost,
}

pub const DEFAULT_TRANSISTOR_ON_RESISTANCE: f64 = 2e3;
pub const DEFAULT_CALIBRATION_CELLS: usize = 256;

impl Default for CostModel {
    fn default() -> Self {
        let device = DeviceParams::default();
        let rram = ColumnCost {
            discharge_time: 104e-12,
            energy_per_eval: 2.09e-15,
            backend: Backend::Rram,
        };
        let sram = ColumnCost {
            discharge_time: 161e-12,
            energy_per_eval: 5.16e-15,
            backend: Backend::Sram,
        };
        let rc = calibrate(
            &device,
            DEFAULT_TRANSISTOR_ON_RESISTANCE,
            DEFAULT_CALIBRATION_CELLS,
            rram.discharge_time,
            sram.discharge_time,
        )
        .expect("default profile calibrates");
        CostModel {
            device,
            rc,
            calibration_cells: DEFAULT_CALIBRATION_CELLS,
            rram,
            sram,
        }
    }
}

impl CostModel {
    pub fn column_cost(&self, backend: Backend) -> ColumnCost {
        match backend {
            Backend::Rram => self.rram,
            Backend::Sram => self.sram,
        }
    }

    pub fn validate(&self) -> Result<(), CrossbarError> {
        self.device.validate()?;
        positive("r_transistor_on", self.rc.r_transistor_on)?;
        positive("c_cell_rram", self.rc.c_cell_rram)?;
        positive("c_cell_sram", self.rc.c_cell_sram)?;
        for cost in [self.rram, self.sram] {
            positive("discharge_time", cost.discharge_time)?;
            positive("energy_per_eval", cost.energy_per_eval)?;
        }
        if self.calibration_cells == 0 {
            return Err(CrossbarError::InvalidParams("calibration_cells must be positive".into()));
        }
        Ok(())
    }

    /// Refits the per-cell capacitances to the current cost table.
    pub fn recalibrate(&mut self) -> Result<(), CrossbarError> {
        self.rc = calibrate(
            &self.device,
            self.rc.r_transistor_on,
            self.calibration_cells,
            self.rram.discharge_time,
            self.sram.discharge_time,
        )?;
        Ok(())
    }

    /// Modeled discharge time of the calibration scenario: a column of
    /// `calibration_cells` cells, only the first one configured to 1, all
    /// rows selected.
    pub fn modeled_slowest_discharge(&self, backend: Backend) -> Result<f64, CrossbarError> {
        let column = Column::slowest_case(self.calibration_cells, self.device);
        let all = BitVector::ones(self.calibration_cells);
        column
            .discharge_time(&all, backend, &self.rc)?
            .ok_or_else(|| CrossbarError::InvalidParams("calibration column does not discharge".into()))
    }
}

/// Fits the per-cell capacitance of each backend so the slowest-case column
/// of `cells` cells discharges in the given target times.
pub fn calibrate(
    device: &DeviceParams,
    r_transistor_on: f64,
    cells: usize,
    rram_target: f64,
    sram_target: f64,
) -> Result<RcParams, CrossbarError> {
    device.validate()?;
    positive("r_transistor_on", r_transistor_on)?;
    positive("rram target", rram_target)?;
    positive("sram target", sram_target)?;
    if cells == 0 {
        return Err(CrossbarError::InvalidParams("calibration column has no cells".into()));
    }
    let column = Column::slowest_case(cells, *device);
    let all = BitVector::ones(cells);
    let fit = |backend: Backend| -> Result<f64, CrossbarError> {
        let r = column
            .path_resistance(&all, backend, r_transistor_on)?
            .expect("slowest case has a conducting cell");
        Ok(rram_or_sram(backend, rram_target, sram_target) / (r * device.discharge_swing()) / cells as f64)
    };
    Ok(RcParams {
        r_transistor_on,
        c_cell_rram: fit(Backend::Rram)?,
        c_cell_sram: fit(Backend::Sram)?,
    })
}

fn rram_or_sram(backend: Backend, rram: f64, sram: f64) -> f64 {
    match backend {
        Backend::Rram => rram,
        Backend::Sram => sram,
    }
}

pub const DEFAULT_ENDURANCE_BUDGET: u64 = 1_000_000;

/// One bit line with its configured cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    cells: BitVector,
    pulses: Vec<u64>,
    params: DeviceParams,
    endurance_budget: u64,
}

impl Column {
    /// A column with every cell in the high-resistance (0) state.
    pub fn new(len: usize, params: DeviceParams) -> Self {
        Column {
            cells: BitVector::zeros(len),
            pulses: vec![0; len],
            params,
            endurance_budget: DEFAULT_ENDURANCE_BUDGET,
        }
    }

    /// First cell 1, the rest 0.
    pub fn slowest_case(len: usize, params: DeviceParams) -> Self {
        let mut c = Column::new(len, params);
        if len > 0 {
            c.cells.set(0, true);
        }
        c
    }

    pub fn with_endurance_budget(mut self, budget: u64) -> Self {
        self.endurance_budget = budget;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn cells(&self) -> &BitVector {
        &self.cells
    }

    pub fn cell(&self, row: usize) -> bool {
        self.cells.get(row)
    }

    /// Resistance of the device in `row`.
    pub fn cell_resistance(&self, row: usize) -> f64 {
        self.params.resistance(self.cells.get(row))
    }

    /// Applies one programming pulse to `row`.
    ///
    /// Every pulse counts against the cell's endurance budget, even when the
    /// cell already holds `bit`. Exceeding the budget only logs a warning.
    pub fn program(&mut self, row: usize, bit: bool) -> Result<(), CrossbarError> {
        if row >= self.len() {
            return Err(CrossbarError::RowOutOfRange { row, len: self.len() });
        }
        self.cells.set(row, bit);
        self.pulses[row] += 1;
        if self.pulses[row] == self.endurance_budget + 1 {
            log::warn!(
                "cell {row} exceeded its endurance budget of {} writes",
                self.endurance_budget
            );
        }
        Ok(())
    }

    /// Programs every cell from `bits`, one pulse per cell.
    pub fn program_all(&mut self, bits: &BitVector) -> Result<(), CrossbarError> {
        if bits.len() != self.len() {
            return Err(CrossbarError::LengthMismatch {
                expected: self.len(),
                found: bits.len(),
            });
        }
        for (row, bit) in bits.iter().enumerate() {
            self.program(row, bit)?;
        }
        Ok(())
    }

    pub fn pulses(&self, row: usize) -> u64 {
        self.pulses[row]
    }

    pub fn total_pulses(&self) -> u64 {
        self.pulses.iter().sum()
    }

    /// Rows programmed more often than the endurance budget allows.
    pub fn worn_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.pulses
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > self.endurance_budget)
            .map(|(row, _)| row)
    }

    fn check_selection(&self, active_rows: &BitVector) -> Result<(), CrossbarError> {
        if active_rows.len() == self.len() {
            Ok(())
        } else {
            Err(CrossbarError::LengthMismatch {
                expected: self.len(),
                found: active_rows.len(),
            })
        }
    }

    /// Sense-amplifier output: 1 iff some selected cell is configured 1.
    pub fn evaluate(&self, active_rows: &BitVector) -> Result<bool, CrossbarError> {
        self.check_selection(active_rows)?;
        Ok(self.cells.intersects(active_rows))
    }

    /// Equivalent resistance between bit line and ground with `active_rows`
    /// selected, or `None` if nothing conducts.
    ///
    /// Under RRAM every selected cell conducts through its device and one
    /// access transistor. Under SRAM only cells storing 1 conduct, through
    /// two series transistors.
    pub fn path_resistance(
        &self,
        active_rows: &BitVector,
        backend: Backend,
        r_transistor_on: f64,
    ) -> Result<Option<f64>, CrossbarError> {
        self.check_selection(active_rows)?;
        let series = backend.series_transistors() as f64 * r_transistor_on;
        let conductance: f64 = active_rows
            .iter_ones()
            .filter_map(|row| match backend {
                Backend::Rram => Some(1.0 / (self.cell_resistance(row) + series)),
                Backend::Sram => self.cells.get(row).then(|| 1.0 / series),
            })
            .sum();
        Ok((conductance > 0.0).then(|| 1.0 / conductance))
    }

    pub fn capacitance(&self, backend: Backend, rc: &RcParams) -> f64 {
        self.len() as f64 * rc.c_cell(backend)
    }

    /// Time for the selected rows to pull the bit line down to
    /// `v_read_done`, or `None` if nothing conducts.
    pub fn discharge_time(
        &self,
        active_rows: &BitVector,
        backend: Backend,
        rc: &RcParams,
    ) -> Result<Option<f64>, CrossbarError> {
        match self.path_resistance(active_rows, backend, rc.r_transistor_on)? {
            None => Ok(None),
            Some(r) => discharge_time(&self.params, r, self.capacitance(backend, rc)).map(Some),
        }
    }

    /// Bit-line voltage `t` seconds after the word lines rise.
    pub fn bitline_voltage(
        &self,
        active_rows: &BitVector,
        backend: Backend,
        rc: &RcParams,
        t: f64,
    ) -> Result<f64, CrossbarError> {
        let v0 = self.params.v_precharge;
        Ok(match self.path_resistance(active_rows, backend, rc.r_transistor_on)? {
            None => v0,
            Some(r) => v0 * (-t / (r * self.capacitance(backend, rc))).exp(),
        })
    }

    /// Analog read: compares the bit line against `v_reference` at `t`.
    pub fn sense(
        &self,
        active_rows: &BitVector,
        backend: Backend,
        rc: &RcParams,
        t: f64,
    ) -> Result<bool, CrossbarError> {
        Ok(self.bitline_voltage(active_rows, backend, rc, t)? < self.params.v_reference)
    }
}
