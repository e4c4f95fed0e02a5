// SPDX-License-Identifier: Apache-2.0

//! Text backends: C source, Verilog, and the interface descriptor.

mod c;
mod iface;
mod verilog;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use c::emit_software;
pub use iface::emit_interface_descriptor;
pub use verilog::emit_hdl;

use crate::ir::{CycleIr, Op};
use crate::lang::Span;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("{span}: dynamic array indexing is not supported by the HDL backend")]
    DynamicArrayIndexUnsupported { span: Span },
}

/// Names for the registers an emitter materializes.
///
/// A register inherits the source variable it was first bound to. When a
/// variable is rebound, the final binding keeps the bare name and earlier
/// ones become `name__1`, `name__2`, ...; unnamed registers are `t__N`.
/// Source identifiers never contain `__`, so these cannot collide.
pub(crate) fn register_names(ir: &CycleIr, escape: impl Fn(&str) -> String) -> Vec<String> {
    let mut versions: HashMap<&str, usize> = HashMap::new();
    for inst in &ir.insts {
        if let Some(n) = &inst.name {
            *versions.entry(n.as_str()).or_default() += 1;
        }
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    ir.insts
        .iter()
        .enumerate()
        .map(|(i, inst)| match &inst.name {
            Some(n) => {
                let k = seen.entry(n.as_str()).or_default();
                *k += 1;
                if *k == versions[n.as_str()] {
                    escape(n)
                } else {
                    format!("{n}__{k}")
                }
            }
            None => format!("t__{i}"),
        })
        .collect()
}

/// Leaves are referenced in place rather than bound to a local.
pub(crate) fn is_leaf(op: &Op) -> bool {
    matches!(op, Op::Input { .. } | Op::State { .. } | Op::Word(_) | Op::Flag(_))
}

/// Escapes identifiers that collide with `reserved` by prefixing `v_`.
pub(crate) fn escaper(reserved: HashSet<String>) -> impl Fn(&str) -> String {
    move |name: &str| {
        if reserved.contains(name) {
            format!("v_{name}")
        } else {
            name.to_string()
        }
    }
}
