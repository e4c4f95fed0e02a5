// SPDX-License-Identifier: Apache-2.0

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    total_cycles, Fallback, FaultScenario, FpgaRouting, LatencyParams, PipelineError, PipelineSpec, Placement,
};

/// Cartesian grid of pipeline configurations.
///
/// Points are enumerated with `sw_cycles` varying slowest and `routing`
/// fastest, in field order. Points asking for more faults than stages are
/// skipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sw_cycles: Vec<u64>,
    pub stages: Vec<usize>,
    pub speedup: Vec<f64>,
    pub transmission: Vec<u64>,
    pub faults: Vec<usize>,
    pub placement: Vec<Placement>,
    pub fallback: Vec<Fallback>,
    pub fpga_speedup: Vec<f64>,
    pub routing: Vec<FpgaRouting>,
    /// Fixed per-stage hardware cycles instead of C/(n·S).
    #[serde(default)]
    pub hw_per_stage: Option<u64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            sw_cycles: Vec::new(),
            stages: Vec::new(),
            speedup: vec![100.0],
            transmission: vec![0],
            faults: vec![0],
            placement: vec![Placement::Interior],
            fallback: vec![Fallback::Software],
            fpga_speedup: vec![super::FPGA_SPEEDUP_RANGE.0],
            routing: vec![FpgaRouting::ThroughSoftware],
            hw_per_stage: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "C")]
    pub sw_cycles: u64,
    #[serde(rename = "n")]
    pub stages: usize,
    #[serde(rename = "S")]
    pub speedup: f64,
    #[serde(rename = "T")]
    pub transmission: u64,
    pub faults: usize,
    pub placement: String,
    pub fallback: String,
    pub fpga_speedup: f64,
    pub routing: String,
    pub hw_cycles: u64,
    pub fallback_cycles: u64,
    pub crossing_cycles: u64,
    pub total_cycles: u64,
    #[serde(rename = "speedup")]
    pub achieved: f64,
}

struct Point {
    c: u64,
    n: usize,
    s: f64,
    t: u64,
    k: usize,
    placement: Placement,
    fallback: Fallback,
    fpga: f64,
    routing: FpgaRouting,
}

impl GridSpec {
    fn points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for &c in &self.sw_cycles {
            for &n in &self.stages {
                for &s in &self.speedup {
                    for &t in &self.transmission {
                        for &k in &self.faults {
                            for placement in &self.placement {
                                for &fallback in &self.fallback {
                                    for &fpga in &self.fpga_speedup {
                                        for &routing in &self.routing {
                                            let fits = match placement {
                                                Placement::Explicit(v) => v.iter().all(|&x| x < n),
                                                _ => k <= n,
                                            };
                                            if fits {
                                                pts.push(Point {
                                                    c,
                                                    n,
                                                    s,
                                                    t,
                                                    k,
                                                    placement: placement.clone(),
                                                    fallback,
                                                    fpga,
                                                    routing,
                                                });
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        pts
    }
}

fn eval(grid: &GridSpec, p: &Point) -> Result<SweepRow, PipelineError> {
    let pipeline = match grid.hw_per_stage {
        Some(hw) => PipelineSpec::uniform_with_hw(p.c, p.n, hw)?,
        None => PipelineSpec::uniform(p.c, p.n, p.s)?,
    };
    let positions = p.placement.positions(p.n, p.k)?;
    let k = positions.len();
    let scenario = FaultScenario::with(positions, p.fallback);
    let latency = LatencyParams::new(p.t, p.fpga, p.routing)?;
    let b = total_cycles(&pipeline, &scenario, &latency)?;
    Ok(SweepRow {
        sw_cycles: p.c,
        stages: p.n,
        speedup: p.s,
        transmission: p.t,
        faults: k,
        placement: p.placement.to_string(),
        fallback: p.fallback.to_string(),
        fpga_speedup: p.fpga,
        routing: p.routing.to_string(),
        hw_cycles: b.hw_cycles,
        fallback_cycles: b.fallback_cycles,
        crossing_cycles: b.crossing_cycles,
        total_cycles: b.total_cycles,
        achieved: pipeline.sw_total_cycles() as f64 / b.total_cycles as f64,
    })
}

/// Evaluates every grid point, in parallel, returning rows in grid order.
pub fn sweep(grid: &GridSpec) -> Result<Vec<SweepRow>, PipelineError> {
    grid.points().par_iter().map(|p| eval(grid, p)).collect()
}

fn parse_list<T>(val: &str, one: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    val.split(',').map(|x| one(x.trim())).collect()
}

/// Integers as a list, with `lo..hi:step` (inclusive) ranges allowed.
fn parse_ints<T: TryFrom<u64>>(val: &str) -> Result<Vec<T>, String> {
    let mut out = Vec::new();
    for item in val.split(',') {
        let item = item.trim();
        let num =
            |s: &str| -> Result<u64, String> { s.replace('_', "").parse::<u64>().map_err(|e| format!("`{s}`: {e}")) };
        let conv = |v: u64| T::try_from(v).map_err(|_| format!("{v} is out of range"));
        match item.split_once("..") {
            Some((lo, rest)) => {
                let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
                let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
                if step == 0 || lo > hi {
                    return Err(format!("bad range `{item}`"));
                }
                let mut v = lo;
                while v <= hi {
                    out.push(conv(v)?);
                    v += step;
                }
            }
            None => out.push(conv(num(item)?)?),
        }
    }
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

pub(crate) fn parse_fallback(s: &str) -> Result<Fallback, String> {
    match s {
        "sw" | "software" => Ok(Fallback::Software),
        "fpga" => Ok(Fallback::Fpga),
        _ => Err(format!("unknown fallback `{s}`")),
    }
}

pub(crate) fn parse_routing(s: &str) -> Result<FpgaRouting, String> {
    match s {
        "through-sw" | "through-software" => Ok(FpgaRouting::ThroughSoftware),
        "direct" => Ok(FpgaRouting::Direct),
        _ => Err(format!("unknown routing `{s}`")),
    }
}

impl FromStr for GridSpec {
    type Err = PipelineError;

    /// `key=v1,v2;key=...` with keys `C`, `n`, `S`, `T`, `faults`,
    /// `placement`, `fallback`, `s` (FPGA speedup), `routing` and `hw`.
    /// Integer keys accept `lo..hi:step`. `C` and `n` are required.
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let mut g = GridSpec::default();
        let bad = |m: String| PipelineError::InvalidGrid(m);
        for clause in spec.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let (key, val) =
                clause.split_once('=').ok_or_else(|| bad(format!("expected key=values, got `{clause}`")))?;
            let val = val.trim();
            match key.trim() {
                "C" => g.sw_cycles = parse_ints(val).map_err(bad)?,
                "n" => g.stages = parse_ints(val).map_err(bad)?,
                "S" => g.speedup = parse_list(val, parse_f64).map_err(bad)?,
                "T" => g.transmission = parse_ints(val).map_err(bad)?,
                "faults" => g.faults = parse_ints(val).map_err(bad)?,
                "placement" => g.placement = parse_list(val, |s| s.parse()).map_err(bad)?,
                "fallback" => g.fallback = parse_list(val, parse_fallback).map_err(bad)?,
                "s" => g.fpga_speedup = parse_list(val, parse_f64).map_err(bad)?,
                "routing" => g.routing = parse_list(val, parse_routing).map_err(bad)?,
                "hw" => {
                    let v: Vec<u64> = parse_ints(val).map_err(bad)?;
                    match v.as_slice() {
                        [hw] => g.hw_per_stage = Some(*hw),
                        _ => return Err(bad("`hw` takes a single value".into())),
                    }
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        if g.sw_cycles.is_empty() || g.stages.is_empty() {
            return Err(bad("`C` and `n` are required".into()));
        }
        Ok(g)
    }
}
