// SPDX-License-Identifier: Apache-2.0

//! JSON inputs: single-run scenarios and calibration points.

use serde::{Deserialize, Serialize};

use super::{
    Fallback, FaultScenario, FpgaRouting, LatencyParams, Observation, PipelineError, PipelineSpec, Placement,
    FPGA_SPEEDUP_RANGE,
};
use crate::numeric::Real;

fn default_speedup() -> f64 {
    100.0
}

fn default_fpga_speedup() -> f64 {
    FPGA_SPEEDUP_RANGE.0
}

fn default_fallback() -> Fallback {
    Fallback::Software
}

fn default_routing() -> FpgaRouting {
    FpgaRouting::ThroughSoftware
}

fn default_placement() -> Placement {
    Placement::Interior
}

fn build_pipeline(c: u64, n: usize, s: f64, hw: Option<u64>) -> Result<PipelineSpec, PipelineError> {
    match hw {
        Some(hw) => PipelineSpec::uniform_with_hw(c, n, hw),
        None => PipelineSpec::uniform(c, n, s),
    }
}

/// One uniform pipeline, its faulted stages and latency parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub sw_cycles: u64,
    pub stages: usize,
    #[serde(default = "default_speedup")]
    pub speedup: f64,
    #[serde(default)]
    pub transmission: u64,
    /// Faulted stage indices.
    #[serde(default)]
    pub faults: Vec<usize>,
    #[serde(default = "default_fallback")]
    pub fallback: Fallback,
    #[serde(default = "default_fpga_speedup")]
    pub fpga_speedup: f64,
    #[serde(default = "default_routing")]
    pub routing: FpgaRouting,
    #[serde(default)]
    pub hw_per_stage: Option<u64>,
}

impl ScenarioFile {
    pub fn build(&self) -> Result<(PipelineSpec, FaultScenario, LatencyParams), PipelineError> {
        let p = build_pipeline(self.sw_cycles, self.stages, self.speedup, self.hw_per_stage)?;
        let f = FaultScenario::with(self.faults.iter().copied(), self.fallback);
        f.validate(p.len())?;
        let l = LatencyParams::new(self.transmission, self.fpga_speedup, self.routing)?;
        Ok((p, f, l))
    }
}

/// An observed speedup for a uniform pipeline with `faults` placed faults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationPoint {
    pub sw_cycles: u64,
    pub stages: usize,
    #[serde(default = "default_speedup")]
    pub speedup: f64,
    pub faults: usize,
    #[serde(default = "default_placement")]
    pub placement: Placement,
    pub target: f64,
    #[serde(default)]
    pub hw_per_stage: Option<u64>,
}

impl CalibrationPoint {
    pub fn observation<F: Real>(&self) -> Result<Observation<F>, PipelineError> {
        let p = build_pipeline(self.sw_cycles, self.stages, self.speedup, self.hw_per_stage)?;
        let f = FaultScenario::software(self.placement.positions(self.stages, self.faults)?);
        Ok(Observation::software(p, f, F::of(self.target)))
    }
}
