// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::{Fallback, FaultScenario, PipelineError, PipelineSpec};
use crate::ir::{run_until_valid, InterpError, Values};

/// Who evaluated a stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExecPath {
    Hardware,
    Software,
    Fpga,
}

impl fmt::Display for ExecPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExecPath::Hardware => "hw",
            ExecPath::Software => "sw",
            ExecPath::Fpga => "fpga",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageTrace {
    pub stage: usize,
    pub path: ExecPath,
    pub cycles: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalRun {
    pub outputs: Values,
    pub trace: Vec<StageTrace>,
}

fn check_interfaces(p: &PipelineSpec) -> Result<(), PipelineError> {
    let modules = p
        .stages()
        .iter()
        .enumerate()
        .map(|(i, s)| s.module().ok_or(PipelineError::NotModuleBacked { stage: i }))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, w) in modules.windows(2).enumerate() {
        let produced: Vec<(&str, _)> = w[0].ir.outputs.iter().map(|o| (o.name.as_str(), o.ty)).collect();
        let mut consumed: Vec<(&str, _)> = w[1].ir.inputs.iter().map(|p| (p.name.as_str(), p.ty)).collect();
        let mut produced_sorted = produced.clone();
        produced_sorted.sort_by_key(|x| x.0);
        consumed.sort_by_key(|x| x.0);
        if produced_sorted != consumed {
            let show = |v: &[(&str, crate::lang::VType)]| {
                v.iter().map(|(n, t)| format!("{n} : {t}")).collect::<Vec<_>>().join(", ")
            };
            return Err(PipelineError::InterfaceMismatch {
                stage: i,
                next: i + 1,
                detail: format!("outputs ({}) do not match inputs ({})", show(&produced_sorted), show(&consumed)),
            });
        }
    }
    Ok(())
}

/// Runs `input` through every stage in order, each to its first valid
/// cycle. Faulted stages run the same semantics on their fallback path, so
/// the result does not depend on the fault mask; only the trace does.
pub fn run_functional(
    p: &PipelineSpec,
    f: &FaultScenario,
    input: &Values,
    max_cycles: u64,
) -> Result<FunctionalRun, PipelineError> {
    f.validate(p.len())?;
    check_interfaces(p)?;
    let mut values = input.clone();
    let mut trace = Vec::with_capacity(p.len());
    for (i, stage) in p.stages().iter().enumerate() {
        let m = stage.module().expect("checked above");
        let run = run_until_valid(&m.ir, &values, max_cycles).map_err(|e| match e {
            InterpError::NeverValid { max_cycles } => PipelineError::StageNeverValid { stage: i, max_cycles },
            source => PipelineError::Interp { stage: i, source },
        })?;
        let path = match f.fallback(i) {
            None => ExecPath::Hardware,
            Some(Fallback::Software) => ExecPath::Software,
            Some(Fallback::Fpga) => ExecPath::Fpga,
        };
        trace.push(StageTrace { stage: i, path, cycles: run.cycles });
        values = run.outputs;
    }
    Ok(FunctionalRun { outputs: values, trace })
}
