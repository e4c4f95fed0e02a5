// SPDX-License-Identifier: Apache-2.0

//! Viscosity accelerator language toolchain and Oobleck fault models.
//!
//! - [`lang`]: lexer, parser and pretty-printer.
//! - [`sema`]: type checking.
//! - [`ir`]: per-cycle dataflow IR and its reference interpreter.
//! - [`emit`]: C, Verilog and interface-descriptor backends.
//! - [`pipeline`]: fault-tolerant accelerator chains: cycle model,
//!   calibration, functional composition, sweeps.
//! - [`fleet`]: data-center replacement and purchase simulations.

pub mod corpus;
pub mod emit;
pub mod fleet;
pub mod ir;
pub mod lang;
pub mod numeric;
pub mod pipeline;
pub mod sema;

pub use emit::{emit_hdl, emit_interface_descriptor, emit_software, EmitError};
pub use fleet::{DcScenario, FleetResult};
pub use ir::{lower_to_ir, run_until_valid, step, CycleIr, Value, Values};
pub use lang::{parse_module, pretty_print, ModuleAst, ParseError};
pub use numeric::Real;
pub use pipeline::{total_cycles, CycleBreakdown, FaultScenario, LatencyParams, PipelineError, PipelineSpec};
pub use sema::{typecheck, Diagnostics, TypedModule};

/// Calibration result in double precision.
pub type Calibration = pipeline::Calibration<f64>;
/// Calibration observation in double precision.
pub type Observation = pipeline::Observation<f64>;
/// Speedup ratio (software cycles over pipeline cycles).
pub type Speedup = f64;

/// Parses and typechecks `source`, rendering any diagnostic as text with
/// its location.
pub fn check_source(source: &str) -> Result<TypedModule, String> {
    let ast = parse_module(source).map_err(|e| e.to_string())?;
    typecheck(&ast).map_err(|d| d.to_string())
}
