// SPDX-License-Identifier: Apache-2.0

//! Modular accelerator pipelines with per-stage software or FPGA fallback.
//!
//! A pipeline is a chain of stages. Healthy stages run in hardware and pass
//! data directly to their neighbours; a faulted stage is bypassed and its
//! work is done by a fallback. Every maximal run of healthy hardware stages
//! costs one crossing into hardware and one back out, `2·T` cycles.

mod calibrate;
mod files;
mod functional;
mod placement;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{lower_to_ir, CycleIr, InterpError};
use crate::numeric::Real;
use crate::sema::TypedModule;

pub use calibrate::{calibrate_transmission, Calibration, Observation, DEFAULT_RESIDUAL_BOUND};
pub use files::{CalibrationPoint, ScenarioFile};
pub use functional::{run_functional, ExecPath, FunctionalRun, StageTrace};
pub use placement::Placement;
pub use sweep::{sweep, GridSpec, SweepRow};

/// Default range of hot-spare FPGA speedups over software.
pub const FPGA_SPEEDUP_RANGE: (f64, f64) = (35.0, 200.0);

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("a pipeline needs at least one stage")]
    EmptyPipeline,
    #[error("stage {stage}: need 1 <= hw_cycles <= sw_cycles, got hw={hw} sw={sw}")]
    InvalidStage { stage: usize, hw: u64, sw: u64 },
    #[error("invalid pipeline parameters: {0}")]
    InvalidParameters(String),
    #[error("fault at stage {stage} is outside a {n}-stage pipeline")]
    FaultOutOfRange { stage: usize, n: usize },
    #[error("{k} faults cannot be placed in a {n}-stage pipeline")]
    TooManyFaults { k: usize, n: usize },
    #[error("stage {stage} is faulted and has no queue configuration")]
    StageIsFaulted { stage: usize },
    #[error("FPGA speedup {0} is outside the supported range")]
    InvalidFpgaSpeedup(f64),
    #[error("stage {stage} is not backed by a module")]
    NotModuleBacked { stage: usize },
    #[error("stage {stage} -> {next}: {detail}")]
    InterfaceMismatch { stage: usize, next: usize, detail: String },
    #[error("stage {stage}: valid never asserted within {max_cycles} cycles")]
    StageNeverValid { stage: usize, max_cycles: u64 },
    #[error("stage {stage}: {source}")]
    Interp { stage: usize, source: InterpError },
    #[error("no observations to calibrate against")]
    NoObservations,
    #[error(
        "no transmission latency fits: best T={best_t:.1} leaves a relative error of {max_residual:.3} (bound {bound})"
    )]
    NoFeasibleT { best_t: f64, max_residual: f64, bound: f64 },
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
}

/// A typechecked module together with its IR.
#[derive(Clone, Debug)]
pub struct CompiledStage {
    pub typed: TypedModule,
    pub ir: CycleIr,
}

impl CompiledStage {
    pub fn new(typed: TypedModule) -> Arc<Self> {
        let ir = lower_to_ir(&typed);
        Arc::new(CompiledStage { typed, ir })
    }
}

#[derive(Clone, Debug)]
pub enum StageSpec {
    Synthetic { hw_cycles: u64, sw_cycles: u64 },
    ModuleBacked { module: Arc<CompiledStage>, hw_cycles: u64, sw_cycles: u64 },
}

impl StageSpec {
    pub fn hw_cycles(&self) -> u64 {
        match self {
            StageSpec::Synthetic { hw_cycles, .. } | StageSpec::ModuleBacked { hw_cycles, .. } => *hw_cycles,
        }
    }

    pub fn sw_cycles(&self) -> u64 {
        match self {
            StageSpec::Synthetic { sw_cycles, .. } | StageSpec::ModuleBacked { sw_cycles, .. } => *sw_cycles,
        }
    }

    pub fn module(&self) -> Option<&Arc<CompiledStage>> {
        match self {
            StageSpec::ModuleBacked { module, .. } => Some(module),
            StageSpec::Synthetic { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineSpec {
    stages: Vec<StageSpec>,
}

fn div_ceil_f(num: u64, den: f64) -> u64 {
    (num as f64 / den).ceil() as u64
}

impl PipelineSpec {
    pub fn new(stages: Vec<StageSpec>) -> Result<Self, PipelineError> {
        if stages.is_empty() {
            return Err(PipelineError::EmptyPipeline);
        }
        for (i, s) in stages.iter().enumerate() {
            let (hw, sw) = (s.hw_cycles(), s.sw_cycles());
            if hw == 0 || sw < hw {
                return Err(PipelineError::InvalidStage { stage: i, hw, sw });
            }
        }
        Ok(PipelineSpec { stages })
    }

    /// `n` identical stages splitting `sw_total` software cycles, each
    /// accelerated `speedup`-fold: sw = ⌈C/n⌉, hw = ⌈C/(n·S)⌉.
    pub fn uniform(sw_total: u64, n: usize, speedup: f64) -> Result<Self, PipelineError> {
        if n == 0 {
            return Err(PipelineError::EmptyPipeline);
        }
        if !speedup.is_finite() || speedup < 1.0 {
            return Err(PipelineError::InvalidParameters(format!("speedup must be at least 1, got {speedup}")));
        }
        let hw = div_ceil_f(sw_total, n as f64 * speedup).max(1);
        Self::uniform_with_hw(sw_total, n, hw)
    }

    /// Like [`PipelineSpec::uniform`] but with a fixed hardware cost per stage.
    pub fn uniform_with_hw(sw_total: u64, n: usize, hw_per_stage: u64) -> Result<Self, PipelineError> {
        if n == 0 {
            return Err(PipelineError::EmptyPipeline);
        }
        let sw = sw_total.div_ceil(n as u64);
        Self::new(vec![StageSpec::Synthetic { hw_cycles: hw_per_stage, sw_cycles: sw }; n])
    }

    pub fn stages(&self) -> &[StageSpec] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Cycles of the all-software implementation.
    pub fn sw_total_cycles(&self) -> u64 {
        self.stages.iter().map(StageSpec::sw_cycles).sum()
    }

    pub fn hw_total_cycles(&self) -> u64 {
        self.stages.iter().map(StageSpec::hw_cycles).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    #[serde(alias = "sw")]
    Software,
    Fpga,
}

impl fmt::Display for Fallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fallback::Software => "sw",
            Fallback::Fpga => "fpga",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FpgaRouting {
    /// FPGA traffic goes through the software queues: two extra crossings.
    #[serde(alias = "through-sw")]
    ThroughSoftware,
    /// The FPGA links straight to its hardware neighbours.
    Direct,
}

impl fmt::Display for FpgaRouting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FpgaRouting::ThroughSoftware => "through-sw",
            FpgaRouting::Direct => "direct",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyParams {
    /// Cycles per software/hardware crossing.
    pub transmission: u64,
    pub fpga_speedup: f64,
    pub routing: FpgaRouting,
}

impl LatencyParams {
    /// Software-only fallback; the FPGA fields take neutral defaults.
    pub fn software(transmission: u64) -> Self {
        LatencyParams { transmission, fpga_speedup: FPGA_SPEEDUP_RANGE.0, routing: FpgaRouting::ThroughSoftware }
    }

    /// Checks `fpga_speedup` against [`FPGA_SPEEDUP_RANGE`].
    pub fn new(transmission: u64, fpga_speedup: f64, routing: FpgaRouting) -> Result<Self, PipelineError> {
        let (lo, hi) = FPGA_SPEEDUP_RANGE;
        if !(lo..=hi).contains(&fpga_speedup) {
            return Err(PipelineError::InvalidFpgaSpeedup(fpga_speedup));
        }
        Ok(LatencyParams { transmission, fpga_speedup, routing })
    }
}

/// Faulted stages and the fallback serving each.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultScenario {
    faults: BTreeMap<usize, Fallback>,
}

impl FaultScenario {
    pub fn healthy() -> Self {
        Self::default()
    }

    pub fn with(stages: impl IntoIterator<Item = usize>, fallback: Fallback) -> Self {
        FaultScenario { faults: stages.into_iter().map(|s| (s, fallback)).collect() }
    }

    pub fn software(stages: impl IntoIterator<Item = usize>) -> Self {
        Self::with(stages, Fallback::Software)
    }

    pub fn insert(&mut self, stage: usize, fallback: Fallback) {
        self.faults.insert(stage, fallback);
    }

    pub fn is_faulted(&self, stage: usize) -> bool {
        self.faults.contains_key(&stage)
    }

    pub fn fallback(&self, stage: usize) -> Option<Fallback> {
        self.faults.get(&stage).copied()
    }

    /// Faulted stage indices in ascending order.
    pub fn mask(&self) -> impl Iterator<Item = usize> + '_ {
        self.faults.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<(), PipelineError> {
        match self.faults.keys().find(|&&s| s >= n) {
            Some(&stage) => Err(PipelineError::FaultOutOfRange { stage, n }),
            None => Ok(()),
        }
    }

    /// Whether traffic around `stage` goes through the software queues.
    fn detours(&self, stage: usize, routing: FpgaRouting) -> bool {
        match self.fallback(stage) {
            None => false,
            Some(Fallback::Software) => true,
            Some(Fallback::Fpga) => routing == FpgaRouting::ThroughSoftware,
        }
    }
}

/// Two-bit queue configuration of a healthy stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConfigBits(pub u8);

impl ConfigBits {
    /// High bit: pull input from the software (consumer) queue.
    pub fn pulls_from_software(self) -> bool {
        self.0 & 0b10 != 0
    }

    /// Low bit: push output to the software (producer) queue.
    pub fn pushes_to_software(self) -> bool {
        self.0 & 0b01 != 0
    }
}

impl fmt::Display for ConfigBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0b{:02b}", self.0)
    }
}

/// Queue configuration for a healthy `stage`: it pulls from software when
/// it is the head or its predecessor is bypassed, and pushes to software
/// when it is the tail or its successor is bypassed. A stage served by a
/// directly-linked FPGA is not a bypass.
pub fn config_bits(
    scenario: &FaultScenario,
    pipeline: &PipelineSpec,
    stage: usize,
    routing: FpgaRouting,
) -> Result<ConfigBits, PipelineError> {
    let n = pipeline.len();
    if stage >= n {
        return Err(PipelineError::FaultOutOfRange { stage, n });
    }
    if scenario.is_faulted(stage) {
        return Err(PipelineError::StageIsFaulted { stage });
    }
    let pull = stage == 0 || scenario.detours(stage - 1, routing);
    let push = stage + 1 == n || scenario.detours(stage + 1, routing);
    Ok(ConfigBits(((pull as u8) << 1) | push as u8))
}

/// Number of maximal runs of consecutive stages in `0..n` not in `mask`.
pub fn healthy_segments(mask: impl IntoIterator<Item = usize>, n: usize) -> usize {
    let mut faulted = vec![false; n];
    for s in mask {
        if s < n {
            faulted[s] = true;
        }
    }
    let mut segments = 0;
    let mut in_run = false;
    for f in faulted {
        if !f && !in_run {
            segments += 1;
        }
        in_run = !f;
    }
    segments
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleBreakdown {
    pub hw_cycles: u64,
    pub fallback_cycles: u64,
    pub crossing_cycles: u64,
    pub total_cycles: u64,
    pub healthy_segments: usize,
}

/// Cycle accounting for one item through the pipeline.
///
/// Healthy stages cost their hardware cycles. A software fallback costs the
/// stage's software cycles; an FPGA fallback costs ⌈sw/s⌉, plus `2·T` for
/// its own queue pair when routed through software. A directly-linked FPGA
/// joins the surrounding hardware segment. Each healthy segment adds `2·T`.
pub fn total_cycles(p: &PipelineSpec, f: &FaultScenario, l: &LatencyParams) -> Result<CycleBreakdown, PipelineError> {
    f.validate(p.len())?;
    let t2 = 2 * l.transmission;
    let mut b = CycleBreakdown::default();
    for (i, stage) in p.stages().iter().enumerate() {
        match f.fallback(i) {
            None => b.hw_cycles += stage.hw_cycles(),
            Some(Fallback::Software) => b.fallback_cycles += stage.sw_cycles(),
            Some(Fallback::Fpga) => {
                b.fallback_cycles += div_ceil_f(stage.sw_cycles(), l.fpga_speedup);
                if l.routing == FpgaRouting::ThroughSoftware {
                    b.crossing_cycles += t2;
                }
            }
        }
    }
    let detours = (0..p.len()).filter(|&i| f.detours(i, l.routing));
    b.healthy_segments = healthy_segments(detours, p.len());
    b.crossing_cycles += t2 * b.healthy_segments as u64;
    b.total_cycles = b.hw_cycles + b.fallback_cycles + b.crossing_cycles;
    Ok(b)
}

/// Software cycles over pipeline cycles.
pub fn speedup(p: &PipelineSpec, f: &FaultScenario, l: &LatencyParams) -> Result<f64, PipelineError> {
    speedup_as::<f64>(p, f, l)
}

pub fn speedup_as<F: Real>(p: &PipelineSpec, f: &FaultScenario, l: &LatencyParams) -> Result<F, PipelineError> {
    let b = total_cycles(p, f, l)?;
    Ok(F::of_u64(p.sw_total_cycles()) / F::of_u64(b.total_cycles))
}
