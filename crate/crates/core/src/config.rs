//! `key = value` profile shared by the crossbar, scouting and efficiency
//! models.
//!
//! One assignment per line, `#` starts a comment. Keys are dotted paths such
//! as `device.r_low` or `arch.dram.energy`; the full list is what
//! [`Profile::to_text`] prints. Unknown and repeated keys are errors. When a
//! profile does not pin `rc.c_cell_rram` / `rc.c_cell_sram`, the per-cell
//! capacitances are refitted to the profile's discharge-time targets.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::crossbar::{CostModel, CrossbarError, DEFAULT_ENDURANCE_BUDGET};
use crate::perfmodel::{ArchParams, Component, PerfError, SweepRange, SweepPlan, Workload};
use crate::scouting::DEFAULT_READ_VOLTAGE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' is set twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for '{key}': {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error(transparent)]
    Device(#[from] CrossbarError),
    #[error(transparent)]
    Model(#[from] PerfError),
}

/// Every tunable of the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub costs: CostModel,
    pub arch: ArchParams,
    pub workload: Workload,
    pub sweep: SweepPlan,
    pub read_voltage: f64,
    pub endurance_budget: u64,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            costs: CostModel::default(),
            arch: ArchParams::default(),
            workload: Workload::default(),
            sweep: SweepPlan::default(),
            read_voltage: DEFAULT_READ_VOLTAGE,
            endurance_budget: DEFAULT_ENDURANCE_BUDGET,
        }
    }
}

const COMPONENTS: [&str; 5] = ["alu", "l1", "l2", "dram", "crossbar"];

fn component_mut<'a>(arch: &'a mut ArchParams, name: &str) -> Option<&'a mut Component> {
    Some(match name {
        "alu" => &mut arch.alu,
        "l1" => &mut arch.l1,
        "l2" => &mut arch.l2,
        "dram" => &mut arch.dram,
        "crossbar" => &mut arch.crossbar,
        _ => return None,
    })
}

fn component<'a>(arch: &'a ArchParams, name: &str) -> &'a Component {
    match name {
        "alu" => &arch.alu,
        "l1" => &arch.l1,
        "l2" => &arch.l2,
        "dram" => &arch.dram,
        _ => &arch.crossbar,
    }
}

fn parse_f64(value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("'{value}' is not a finite number"))
}

fn parse_int<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("'{value}' is not a non-negative integer"))
}

/// `start,stop,step` or a single value.
fn parse_range(value: &str) -> Result<SweepRange, String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [v] => Ok(SweepRange::single(parse_f64(v)?)),
        [a, b, c] => Ok(SweepRange {
            start: parse_f64(a)?,
            stop: parse_f64(b)?,
            step: parse_f64(c)?,
        }),
        _ => Err("expected start,stop,step or a single value".into()),
    }
}

impl Profile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut profile = Profile::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected key = value, found '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            match profile.set(key, value) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
                Err(message) => {
                    return Err(ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        message,
                    })
                }
            }
        }
        if !seen.contains("rc.c_cell_rram") || !seen.contains("rc.c_cell_sram") {
            let pinned = profile.costs.rc;
            profile.costs.recalibrate()?;
            if seen.contains("rc.c_cell_rram") {
                profile.costs.rc.c_cell_rram = pinned.c_cell_rram;
            }
            if seen.contains("rc.c_cell_sram") {
                profile.costs.rc.c_cell_sram = pinned.c_cell_sram;
            }
        }
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.costs.validate()?;
        self.arch.validate()?;
        self.workload.validate()?;
        self.sweep.m1.values("m1")?;
        self.sweep.m2.values("m2")?;
        self.sweep.acc.values("acc")?;
        if self.read_voltage.is_nan() || self.read_voltage <= 0.0 {
            return Err(CrossbarError::NonPositive {
                name: "scout.read_voltage",
                value: self.read_voltage,
            }
            .into());
        }
        Ok(())
    }

    /// Returns `Ok(false)` for an unknown key.
    fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
        let f = || parse_f64(value);
        let d = &mut self.costs.device;
        match key {
            "device.r_low" => d.r_low = f()?,
            "device.r_high" => d.r_high = f()?,
            "device.v_set" => d.v_set = f()?,
            "device.v_reset" => d.v_reset = f()?,
            "device.v_precharge" => d.v_precharge = f()?,
            "device.v_read_done" => d.v_read_done = f()?,
            "device.v_reference" => d.v_reference = f()?,
            "rc.r_transistor_on" => self.costs.rc.r_transistor_on = f()?,
            "rc.c_cell_rram" => self.costs.rc.c_cell_rram = f()?,
            "rc.c_cell_sram" => self.costs.rc.c_cell_sram = f()?,
            "rc.calibration_cells" => self.costs.calibration_cells = parse_int(value)?,
            "cost.rram.discharge_time" => self.costs.rram.discharge_time = f()?,
            "cost.rram.energy" => self.costs.rram.energy_per_eval = f()?,
            "cost.sram.discharge_time" => self.costs.sram.discharge_time = f()?,
            "cost.sram.energy" => self.costs.sram.energy_per_eval = f()?,
            "endurance.budget" => self.endurance_budget = parse_int(value)?,
            "scout.read_voltage" => self.read_voltage = f()?,
            "arch.cores" => self.arch.cores = parse_int(value)?,
            "arch.l1_size_kib" => self.arch.l1_size_kib = parse_int(value)?,
            "arch.l2_size_kib" => self.arch.l2_size_kib = parse_int(value)?,
            "arch.dram_size_mib" => self.arch.dram_size_mib = parse_int(value)?,
            "workload.instructions" => self.workload.instruction_count = parse_int(value)?,
            "workload.acc" => self.workload.fraction_accelerated = f()?,
            "workload.m1" => self.workload.miss_rate_l1 = f()?,
            "workload.m2" => self.workload.miss_rate_l2 = f()?,
            "workload.memory_fraction" => self.workload.memory_fraction = f()?,
            "workload.offload_memory_fraction" => self.workload.offload_memory_fraction = f()?,
            "sweep.m1" => self.sweep.m1 = parse_range(value)?,
            "sweep.m2" => self.sweep.m2 = parse_range(value)?,
            "sweep.acc" => self.sweep.acc = parse_range(value)?,
            _ => {
                let Some((name, field)) = key.strip_prefix("arch.").and_then(|k| k.split_once('.')) else {
                    return Ok(false);
                };
                let Some(c) = component_mut(&mut self.arch, name) else {
                    return Ok(false);
                };
                match field {
                    "latency" => c.latency = f()?,
                    "energy" => c.energy = f()?,
                    "static_fraction" => c.static_fraction = f()?,
                    "area" => c.area = f()?,
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    /// Full profile in the format [`Profile::parse`] reads back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        // an empty key writes a comment line
        let mut put = |key: &str, value: String| {
            let line = if key.is_empty() { value } else { format!("{key} = {value}") };
            writeln!(out, "{line}").expect("writing to a String cannot fail");
        };
        let d = &self.costs.device;
        put("", "# device, ohm and volt".into());
        put("device.r_low", e(d.r_low));
        put("device.r_high", e(d.r_high));
        put("device.v_set", e(d.v_set));
        put("device.v_reset", e(d.v_reset));
        put("device.v_precharge", e(d.v_precharge));
        put("device.v_read_done", e(d.v_read_done));
        put("device.v_reference", e(d.v_reference));
        put("", "# column cost targets, s and J".into());
        put("cost.rram.discharge_time", e(self.costs.rram.discharge_time));
        put("cost.rram.energy", e(self.costs.rram.energy_per_eval));
        put("cost.sram.discharge_time", e(self.costs.sram.discharge_time));
        put("cost.sram.energy", e(self.costs.sram.energy_per_eval));
        put("", "# fitted discharge path, ohm and farad per cell".into());
        put("rc.r_transistor_on", e(self.costs.rc.r_transistor_on));
        put("rc.calibration_cells", self.costs.calibration_cells.to_string());
        put("rc.c_cell_rram", e(self.costs.rc.c_cell_rram));
        put("rc.c_cell_sram", e(self.costs.rc.c_cell_sram));
        put("endurance.budget", self.endurance_budget.to_string());
        put("scout.read_voltage", e(self.read_voltage));
        put("", "# efficiency model, ns, pJ and mm2".into());
        for name in COMPONENTS {
            let c = component(&self.arch, name);
            put(&format!("arch.{name}.latency"), e(c.latency));
            put(&format!("arch.{name}.energy"), e(c.energy));
            put(&format!("arch.{name}.static_fraction"), e(c.static_fraction));
            put(&format!("arch.{name}.area"), e(c.area));
        }
        put("arch.cores", self.arch.cores.to_string());
        put("arch.l1_size_kib", self.arch.l1_size_kib.to_string());
        put("arch.l2_size_kib", self.arch.l2_size_kib.to_string());
        put("arch.dram_size_mib", self.arch.dram_size_mib.to_string());
        let w = &self.workload;
        put("workload.instructions", w.instruction_count.to_string());
        put("workload.acc", e(w.fraction_accelerated));
        put("workload.m1", e(w.miss_rate_l1));
        put("workload.m2", e(w.miss_rate_l2));
        put("workload.memory_fraction", e(w.memory_fraction));
        put("workload.offload_memory_fraction", e(w.offload_memory_fraction));
        let range = |r: &SweepRange| format!("{},{},{}", e(r.start), e(r.stop), e(r.step));
        put("sweep.m1", range(&self.sweep.m1));
        put("sweep.m2", range(&self.sweep.m2));
        put("sweep.acc", range(&self.sweep.acc));
        out
    }
}

fn e(v: f64) -> String {
    format!("{v:e}")
}
