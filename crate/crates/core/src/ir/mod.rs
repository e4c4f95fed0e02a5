// SPDX-License-Identifier: Apache-2.0

//! Per-cycle dataflow IR.
//!
//! A [`CycleIr`] is a flat list of instructions in dependency order, one
//! virtual register per instruction. Arrays are scalarized: every port, state
//! slot and local array is a vector of 64-bit registers. State reads observe
//! the value from the start of the cycle; next-state values commit together
//! at the end of the cycle.

mod interp;
mod lower;

use std::fmt;

pub use interp::{initial_state, run_until_valid, step, InterpError, RunOutcome, StepResult, Value, Values};
pub use lower::lower_to_ir;

use crate::lang::{BinOp, UnOp, VType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VReg(pub u32);

impl VReg {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Scalar register type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarTy {
    Word,
    Flag,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    /// Element `elem` of input port `port` (element 0 for scalars).
    Input {
        port: usize,
        elem: usize,
    },
    /// Element `elem` of state slot `slot`, as of the start of the cycle.
    State {
        slot: usize,
        elem: usize,
    },
    Word(u64),
    Flag(bool),
    Unary(UnOp, VReg),
    Binary(BinOp, VReg, VReg),
    Select(VReg, VReg, VReg),
    /// Faults the cycle when `index >= len`; evaluates to `true` otherwise.
    CheckIndex {
        index: VReg,
        len: usize,
    },
}

impl Op {
    pub fn operands(&self) -> Vec<VReg> {
        match *self {
            Op::Input { .. } | Op::State { .. } | Op::Word(_) | Op::Flag(_) => Vec::new(),
            Op::Unary(_, a) => vec![a],
            Op::Binary(_, a, b) => vec![a, b],
            Op::Select(c, a, b) => vec![c, a, b],
            Op::CheckIndex { index, .. } => vec![index],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inst {
    pub op: Op,
    pub ty: ScalarTy,
    /// Source variable this value was first bound to, if any.
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub ty: VType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutPort {
    pub name: String,
    pub ty: VType,
    pub elems: Vec<VReg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSlot {
    pub name: String,
    pub ty: VType,
    /// Reset value per element; flags are stored as 0 or 1.
    pub init: Vec<u64>,
    /// Next-state value per element. An element never written with `@` maps
    /// to its own state read.
    pub next: Vec<VReg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleIr {
    pub name: String,
    pub insts: Vec<Inst>,
    pub inputs: Vec<Port>,
    pub outputs: Vec<OutPort>,
    pub state: Vec<StateSlot>,
    pub valid: VReg,
    pub ready: VReg,
}

impl CycleIr {
    pub fn inst(&self, r: VReg) -> &Inst {
        &self.insts[r.index()]
    }

    pub fn is_sequential(&self) -> bool {
        !self.state.is_empty()
    }

    /// Number of times each register is read by instructions, outputs,
    /// next-state values and the handshake expressions.
    pub fn use_counts(&self) -> Vec<usize> {
        let mut uses = vec![0usize; self.insts.len()];
        for inst in &self.insts {
            for r in inst.op.operands() {
                uses[r.index()] += 1;
            }
        }
        for o in &self.outputs {
            for r in &o.elems {
                uses[r.index()] += 1;
            }
        }
        for s in &self.state {
            for r in &s.next {
                uses[r.index()] += 1;
            }
        }
        uses[self.valid.index()] += 1;
        uses[self.ready.index()] += 1;
        uses
    }
}

pub(crate) fn op_mnemonic_unary(op: UnOp) -> &'static str {
    match op {
        UnOp::BitNot => "not",
        UnOp::Not => "lnot",
        UnOp::Neg => "neg",
    }
}

pub(crate) fn op_mnemonic_binary(op: BinOp) -> &'static str {
    match op {
        BinOp::And => "and",
        BinOp::Or => "or",
        BinOp::Xor => "xor",
        BinOp::Add => "add",
        BinOp::Sub => "sub",
        BinOp::Mul => "mul",
        BinOp::Shl => "shl",
        BinOp::Shr => "shr",
        BinOp::Eq => "eq",
        BinOp::Ne => "ne",
        BinOp::Lt => "ult",
        BinOp::Le => "ule",
        BinOp::Gt => "ugt",
        BinOp::Ge => "uge",
        BinOp::LogicAnd => "land",
        BinOp::LogicOr => "lor",
    }
}

fn fmt_regs(regs: &[VReg]) -> String {
    if regs.len() == 1 {
        regs[0].to_string()
    } else {
        let parts: Vec<String> = regs.iter().map(|r| r.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}

/// Line-oriented dump, one primitive per line (`dst = op src...`).
impl fmt::Display for CycleIr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {}", self.name)?;
        for p in &self.inputs {
            writeln!(f, "input {} : {}", p.name, p.ty)?;
        }
        for p in &self.outputs {
            writeln!(f, "output {} : {}", p.name, p.ty)?;
        }
        for s in &self.state {
            let init: Vec<String> = s.init.iter().map(|v| format!("{v:#x}")).collect();
            writeln!(f, "state {} : {} = {}", s.name, s.ty, init.join(", "))?;
        }
        for (i, inst) in self.insts.iter().enumerate() {
            let rhs = match &inst.op {
                Op::Input { port, elem } => match self.inputs[*port].ty {
                    VType::IntArray(_) => format!("input {}[{}]", self.inputs[*port].name, elem),
                    _ => format!("input {}", self.inputs[*port].name),
                },
                Op::State { slot, elem } => match self.state[*slot].ty {
                    VType::IntArray(_) => format!("state {}[{}]", self.state[*slot].name, elem),
                    _ => format!("state {}", self.state[*slot].name),
                },
                Op::Word(v) => format!("const {v:#x}"),
                Op::Flag(b) => format!("const {b}"),
                Op::Unary(op, a) => format!("{} {}", op_mnemonic_unary(*op), a),
                Op::Binary(op, a, b) => format!("{} {}, {}", op_mnemonic_binary(*op), a, b),
                Op::Select(c, a, b) => format!("select {c}, {a}, {b}"),
                Op::CheckIndex { index, len } => format!("check_index {index}, {len}"),
            };
            let ty = match inst.ty {
                ScalarTy::Word => "w",
                ScalarTy::Flag => "f",
            };
            match &inst.name {
                Some(n) => writeln!(f, "v{i}:{ty} = {rhs}  ; {n}")?,
                None => writeln!(f, "v{i}:{ty} = {rhs}")?,
            }
        }
        for s in &self.state {
            writeln!(f, "next {} = {}", s.name, fmt_regs(&s.next))?;
        }
        for o in &self.outputs {
            writeln!(f, "out {} = {}", o.name, fmt_regs(&o.elems))?;
        }
        writeln!(f, "valid = {}", self.valid)?;
        writeln!(f, "ready = {}", self.ready)
    }
}
