//! Analytic efficiency model of a multicore processor versus the same
//! processor with a memristive CIM accelerator, plus cost aggregation for
//! automata-processor runs.
//!
//! Units: time in ns, energy in pJ, area in mm². With those,
//! `η_E` is pJ/op, `η_PE = 1000 / η_E` is MOPs/mW and `η_PA` is MOPs/mm².
//!
//! Per-operation cost of an instruction stream whose memory-instruction
//! share is `x`:
//!
//! ```text
//! C(x)   = (1 - x)·ALU + x·MEM
//! MEM    = L1 + m1·(L2 + m2·DRAM)
//! ```
//!
//! Energies of each level are scaled by `1 + static_fraction` to account for
//! leakage. A workload splits into a resident part (share `1 - %Acc`, memory
//! share `memory_fraction`) and an offloadable part (share `%Acc`, memory
//! share `offload_memory_fraction`). The multicore runs both parts through
//! the hierarchy, the accelerated machine runs the offloadable part as
//! crossbar operations, which bypass the caches and DRAM.

use std::fmt::Write as _;

use thiserror::Error;

use crate::crossbar::ColumnCost;
use crate::engine::RunResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: String, value: f64 },
    #[error("{name} must be within [0, 1], got {value}")]
    FractionOutOfRange { name: String, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: String, value: f64 },
    #[error("DRAM access energy {dram} pJ is below L1 access energy {l1} pJ")]
    DramCheaperThanL1 { l1: f64, dram: f64 },
    #[error("core count must be positive")]
    NoCores,
    #[error("run statistics report {found} column evaluations, expected {expected} for {steps} steps")]
    InconsistentStats { steps: u64, expected: u64, found: u64 },
    #[error("invalid sweep range for {name}: {reason}")]
    InvalidRange { name: &'static str, reason: String },
}

fn check_positive(name: &str, value: f64) -> Result<(), PerfError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(PerfError::NonPositive {
            name: name.to_string(),
            value,
        })
    }
}

fn check_fraction(name: &str, value: f64) -> Result<(), PerfError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(PerfError::FractionOutOfRange {
            name: name.to_string(),
            value,
        })
    }
}

/// One hardware component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    /// ns per operation or access.
    pub latency: f64,
    /// pJ per operation or access, dynamic.
    pub energy: f64,
    /// Static energy as a fraction of dynamic energy.
    pub static_fraction: f64,
    /// mm².
    pub area: f64,
}

impl Component {
    pub fn total_energy(&self) -> f64 {
        self.energy * (1.0 + self.static_fraction)
    }

    fn validate(&self, name: &str) -> Result<(), PerfError> {
        check_positive(&format!("{name}.latency"), self.latency)?;
        check_positive(&format!("{name}.energy"), self.energy)?;
        check_positive(&format!("{name}.area"), self.area)?;
        if !(self.static_fraction >= 0.0 && self.static_fraction.is_finite()) {
            return Err(PerfError::Negative {
                name: format!("{name}.static_fraction"),
                value: self.static_fraction,
            });
        }
        Ok(())
    }
}

/// Architecture profile shared by both machines.
///
/// Defaults are modeling assumptions. The only anchored values are the
/// energy ratios of a cache load and a DRAM load to an ALU operation
/// (50× and 6400×). Areas are placeholders of plausible magnitude; the
/// crossbar area in particular has no published basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchParams {
    pub alu: Component,
    pub l1: Component,
    pub l2: Component,
    pub dram: Component,
    pub crossbar: Component,
    pub cores: u32,
    /// Documentation only.
    pub l1_size_kib: u32,
    pub l2_size_kib: u32,
    pub dram_size_mib: u32,
}

pub const DEFAULT_MEMORY_STATIC_FRACTION: f64 = 0.3;

impl Default for ArchParams {
    fn default() -> Self {
        let memory = |latency, energy, area| Component {
            latency,
            energy,
            static_fraction: DEFAULT_MEMORY_STATIC_FRACTION,
            area,
        };
        ArchParams {
            alu: Component {
                latency: 1.0,
                energy: 1.0,
                static_fraction: 0.0,
                area: 0.5,
            },
            l1: memory(2.0, 50.0, 0.2),
            l2: memory(10.0, 50.0, 1.0),
            dram: memory(100.0, 6400.0, 50.0),
            crossbar: Component {
                latency: 1.0,
                energy: 2.0,
                static_fraction: 0.0,
                area: 20.0,
            },
            cores: 4,
            l1_size_kib: 32,
            l2_size_kib: 256,
            dram_size_mib: 4096,
        }
    }
}

impl ArchParams {
    pub fn validate(&self) -> Result<(), PerfError> {
        self.alu.validate("alu")?;
        self.l1.validate("l1")?;
        self.l2.validate("l2")?;
        self.dram.validate("dram")?;
        self.crossbar.validate("crossbar")?;
        if self.cores == 0 {
            return Err(PerfError::NoCores);
        }
        if self.dram.energy < self.l1.energy {
            return Err(PerfError::DramCheaperThanL1 {
                l1: self.l1.energy,
                dram: self.dram.energy,
            });
        }
        Ok(())
    }

    /// Area of the conventional machine: per-core ALU and L1, shared L2
    /// and DRAM.
    pub fn multicore_area(&self) -> f64 {
        self.cores as f64 * (self.alu.area + self.l1.area) + self.l2.area + self.dram.area
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workload {
    pub instruction_count: u64,
    /// %Acc, share of instructions the accelerator can take.
    pub fraction_accelerated: f64,
    pub miss_rate_l1: f64,
    pub miss_rate_l2: f64,
    /// Memory-instruction share of the resident part.
    pub memory_fraction: f64,
    /// Memory-instruction share of the offloadable part.
    pub offload_memory_fraction: f64,
}

impl Default for Workload {
    fn default() -> Self {
        Workload {
            instruction_count: 1_000_000,
            fraction_accelerated: 0.7,
            miss_rate_l1: 0.0,
            miss_rate_l2: 0.0,
            memory_fraction: 0.25,
            offload_memory_fraction: 1.0,
        }
    }
}

impl Workload {
    pub fn validate(&self) -> Result<(), PerfError> {
        check_fraction("fraction_accelerated", self.fraction_accelerated)?;
        check_fraction("miss_rate_l1", self.miss_rate_l1)?;
        check_fraction("miss_rate_l2", self.miss_rate_l2)?;
        check_fraction("memory_fraction", self.memory_fraction)?;
        check_fraction("offload_memory_fraction", self.offload_memory_fraction)?;
        Ok(())
    }
}

/// Time and energy of one average operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpCost {
    pub time: f64,
    pub energy: f64,
}

/// Metrics of one architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchMetrics {
    pub time_per_op: f64,
    /// pJ/op.
    pub eta_e: f64,
    /// MOPs/mW.
    pub eta_pe: f64,
    /// MOPs, all cores.
    pub throughput: f64,
    pub area: f64,
    /// MOPs/mm².
    pub eta_pa: f64,
    /// Whole workload, ns and pJ.
    pub total_time: f64,
    pub total_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub workload: Workload,
    pub multicore: ArchMetrics,
    pub mvp: ArchMetrics,
}

impl EfficiencyReport {
    pub fn eta_pe_ratio(&self) -> f64 {
        self.mvp.eta_pe / self.multicore.eta_pe
    }

    pub fn eta_e_ratio(&self) -> f64 {
        self.multicore.eta_e / self.mvp.eta_e
    }

    pub fn eta_pa_ratio(&self) -> f64 {
        self.mvp.eta_pa / self.multicore.eta_pa
    }
}

/// Average access to the memory hierarchy.
pub fn memory_access_cost(arch: &ArchParams, w: &Workload) -> OpCost {
    let (m1, m2) = (w.miss_rate_l1, w.miss_rate_l2);
    OpCost {
        time: arch.l1.latency + m1 * (arch.l2.latency + m2 * arch.dram.latency),
        energy: arch.l1.total_energy()
            + m1 * (arch.l2.total_energy() + m2 * arch.dram.total_energy()),
    }
}

/// `C(x)` for memory-instruction share `x`.
pub fn instruction_mix_cost(arch: &ArchParams, w: &Workload, memory_share: f64) -> OpCost {
    let mem = memory_access_cost(arch, w);
    OpCost {
        time: (1.0 - memory_share) * arch.alu.latency + memory_share * mem.time,
        energy: (1.0 - memory_share) * arch.alu.total_energy() + memory_share * mem.energy,
    }
}

fn compose(arch: &ArchParams, w: &Workload, accelerated: OpCost, area: f64) -> ArchMetrics {
    let p = w.fraction_accelerated;
    let resident = instruction_mix_cost(arch, w, w.memory_fraction);
    let time = (1.0 - p) * resident.time + p * accelerated.time;
    let energy = (1.0 - p) * resident.energy + p * accelerated.energy;
    let throughput = arch.cores as f64 * 1e3 / time;
    let n = w.instruction_count as f64;
    ArchMetrics {
        time_per_op: time,
        eta_e: energy,
        eta_pe: 1e3 / energy,
        throughput,
        area,
        eta_pa: throughput / area,
        // instructions are spread evenly over the cores
        total_time: n * time / arch.cores as f64,
        total_energy: n * energy,
    }
}

pub fn multicore_metrics(arch: &ArchParams, w: &Workload) -> Result<ArchMetrics, PerfError> {
    arch.validate()?;
    w.validate()?;
    let offloadable = instruction_mix_cost(arch, w, w.offload_memory_fraction);
    Ok(compose(arch, w, offloadable, arch.multicore_area()))
}

pub fn mvp_metrics(arch: &ArchParams, w: &Workload) -> Result<ArchMetrics, PerfError> {
    arch.validate()?;
    w.validate()?;
    let crossbar = OpCost {
        time: arch.crossbar.latency,
        energy: arch.crossbar.total_energy(),
    };
    let mut area = arch.multicore_area();
    if w.fraction_accelerated > 0.0 {
        area += arch.crossbar.area;
    }
    Ok(compose(arch, w, crossbar, area))
}

pub fn compare(arch: &ArchParams, w: &Workload) -> Result<EfficiencyReport, PerfError> {
    Ok(EfficiencyReport {
        workload: *w,
        multicore: multicore_metrics(arch, w)?,
        mvp: mvp_metrics(arch, w)?,
    })
}

/// Inclusive range `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn single(value: f64) -> Self {
        SweepRange {
            start: value,
            stop: value,
            step: 1.0,
        }
    }

    pub fn values(&self, name: &'static str) -> Result<Vec<f64>, PerfError> {
        let invalid = |reason: &str| PerfError::InvalidRange {
            name,
            reason: reason.to_string(),
        };
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(invalid("stop must not be below start"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("step must be positive"));
        }
        // tolerate accumulated rounding in (stop - start) / step
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(invalid("more than a million points"));
        }
        Ok((0..count)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPlan {
    pub m1: SweepRange,
    pub m2: SweepRange,
    pub acc: SweepRange,
}

impl Default for SweepPlan {
    fn default() -> Self {
        let misses = SweepRange {
            start: 0.0,
            stop: 0.6,
            step: 0.1,
        };
        SweepPlan {
            m1: misses,
            m2: misses,
            acc: SweepRange::single(0.7),
        }
    }
}

/// Evaluates every grid point, varying `acc` slowest and `m2` fastest.
pub fn sweep(arch: &ArchParams, base: &Workload, plan: &SweepPlan) -> Result<Vec<EfficiencyReport>, PerfError> {
    let m1s = plan.m1.values("m1")?;
    let m2s = plan.m2.values("m2")?;
    let accs = plan.acc.values("acc")?;
    let mut out = Vec::with_capacity(m1s.len() * m2s.len() * accs.len());
    for &acc in &accs {
        for &m1 in &m1s {
            for &m2 in &m2s {
                let w = Workload {
                    fraction_accelerated: acc,
                    miss_rate_l1: m1,
                    miss_rate_l2: m2,
                    ..*base
                };
                out.push(compare(arch, &w)?);
            }
        }
    }
    Ok(out)
}

pub const SWEEP_CSV_HEADER: &str = "m1,m2,acc,multicore_eta_pe,multicore_eta_e,multicore_eta_pa,\
mvp_eta_pe,mvp_eta_e,mvp_eta_pa,eta_pe_ratio";

pub fn sweep_csv(reports: &[EfficiencyReport]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let w = &r.workload;
        let (a, b) = (&r.multicore, &r.mvp);
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            w.miss_rate_l1,
            w.miss_rate_l2,
            w.fraction_accelerated,
            a.eta_pe,
            a.eta_e,
            a.eta_pa,
            b.eta_pe,
            b.eta_e,
            b.eta_pa,
            r.eta_pe_ratio()
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Counters an engine run reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub steps: u64,
    pub column_evaluations: u64,
}

impl From<&RunResult> for RunStats {
    fn from(r: &RunResult) -> Self {
        RunStats {
            steps: r.steps as u64,
            column_evaluations: r.column_evaluations,
        }
    }
}

/// Latency in s and energy in J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunCost {
    pub latency: f64,
    pub energy: f64,
}

/// Columns of one step evaluate in parallel, so latency grows with steps
/// and energy with column evaluations.
pub fn ap_run_cost(stats: &RunStats, cost: &ColumnCost, num_states: usize) -> Result<RunCost, PerfError> {
    let expected = stats.steps * num_states as u64;
    if stats.column_evaluations != expected {
        return Err(PerfError::InconsistentStats {
            steps: stats.steps,
            expected,
            found: stats.column_evaluations,
        });
    }
    Ok(RunCost {
        latency: stats.steps as f64 * cost.discharge_time,
        energy: stats.column_evaluations as f64 * cost.energy_per_eval,
    })
}
