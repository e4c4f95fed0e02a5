// SPDX-License-Identifier: Apache-2.0

//! Reference cycle interpreter over [`CycleIr`].

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{CycleIr, Op, ScalarTy, VReg};
use crate::lang::{BinOp, UnOp, VType};

/// A port or state value. Words are unsigned 64-bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Word(u64),
    Flag(bool),
    WordArray(Vec<u64>),
}

impl Value {
    pub fn ty(&self) -> VType {
        match self {
            Value::Word(_) => VType::Int,
            Value::Flag(_) => VType::Bool,
            Value::WordArray(v) => VType::IntArray(v.len()),
        }
    }

    pub fn as_word(&self) -> Option<u64> {
        match self {
            Value::Word(w) => Some(*w),
            _ => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match self {
            Value::Flag(b) => Some(*b),
            _ => None,
        }
    }

    fn from_elems(ty: VType, elems: &[u64]) -> Value {
        match ty {
            VType::Int => Value::Word(elems[0]),
            VType::Bool => Value::Flag(elems[0] != 0),
            VType::IntArray(_) => Value::WordArray(elems.to_vec()),
        }
    }

    fn elems(&self) -> Vec<u64> {
        match self {
            Value::Word(w) => vec![*w],
            Value::Flag(b) => vec![*b as u64],
            Value::WordArray(v) => v.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Word(w) => write!(f, "{w}"),
            Value::Flag(b) => write!(f, "{b}"),
            Value::WordArray(v) => {
                let parts: Vec<String> = v.iter().map(|w| w.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

/// Named port values.
pub type Values = BTreeMap<String, Value>;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("missing input `{name}`")]
    MissingInput { name: String },
    #[error("input `{name}` expects {expected}, got {found}")]
    InputType { name: String, expected: VType, found: VType },
    #[error("state vector does not match the module's registers")]
    StateShape,
    #[error("internal fault: {reg} holds a value of the wrong kind")]
    TypeErrorAtRuntime { reg: VReg },
    #[error("index {index} is out of range for an array of length {len}")]
    IndexOutOfRange { index: u64, len: usize },
    #[error("valid never asserted within {max_cycles} cycles")]
    NeverValid { max_cycles: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepResult {
    pub next_state: Vec<Value>,
    pub outputs: Values,
    pub valid: bool,
    pub ready: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub outputs: Values,
    /// Cycles stepped, including the one on which valid asserted.
    pub cycles: u64,
    pub ready: bool,
}

/// Reset values of every state slot.
pub fn initial_state(ir: &CycleIr) -> Vec<Value> {
    ir.state.iter().map(|s| Value::from_elems(s.ty, &s.init)).collect()
}

fn word(regs: &[u64], tys: &[ScalarTy], r: VReg) -> Result<u64, InterpError> {
    match tys[r.index()] {
        ScalarTy::Word => Ok(regs[r.index()]),
        ScalarTy::Flag => Err(InterpError::TypeErrorAtRuntime { reg: r }),
    }
}

fn flag(regs: &[u64], tys: &[ScalarTy], r: VReg) -> Result<bool, InterpError> {
    match tys[r.index()] {
        ScalarTy::Flag => Ok(regs[r.index()] != 0),
        ScalarTy::Word => Err(InterpError::TypeErrorAtRuntime { reg: r }),
    }
}

fn shift_left(a: u64, b: u64) -> u64 {
    if b >= 64 {
        0
    } else {
        a << b
    }
}

fn shift_right(a: u64, b: u64) -> u64 {
    if b >= 64 {
        0
    } else {
        a >> b
    }
}

/// Evaluates one cycle. `state` holds the values at the start of the cycle.
pub fn step(ir: &CycleIr, state: &[Value], inputs: &Values) -> Result<StepResult, InterpError> {
    if state.len() != ir.state.len() || state.iter().zip(&ir.state).any(|(v, s)| v.ty() != s.ty) {
        return Err(InterpError::StateShape);
    }
    let mut input_elems = Vec::with_capacity(ir.inputs.len());
    for port in &ir.inputs {
        let v = inputs.get(&port.name).ok_or_else(|| InterpError::MissingInput { name: port.name.clone() })?;
        if v.ty() != port.ty {
            return Err(InterpError::InputType { name: port.name.clone(), expected: port.ty, found: v.ty() });
        }
        input_elems.push(v.elems());
    }
    let state_elems: Vec<Vec<u64>> = state.iter().map(Value::elems).collect();

    let tys: Vec<ScalarTy> = ir.insts.iter().map(|i| i.ty).collect();
    let mut regs = vec![0u64; ir.insts.len()];
    for (i, inst) in ir.insts.iter().enumerate() {
        let v = match inst.op {
            Op::Input { port, elem } => input_elems[port][elem],
            Op::State { slot, elem } => state_elems[slot][elem],
            Op::Word(w) => w,
            Op::Flag(b) => b as u64,
            Op::Unary(op, a) => match op {
                UnOp::BitNot => !word(&regs, &tys, a)?,
                UnOp::Neg => word(&regs, &tys, a)?.wrapping_neg(),
                UnOp::Not => !flag(&regs, &tys, a)? as u64,
            },
            Op::Binary(op, a, b) => {
                if op.is_logical() {
                    let (x, y) = (flag(&regs, &tys, a)?, flag(&regs, &tys, b)?);
                    (match op {
                        BinOp::LogicAnd => x && y,
                        _ => x || y,
                    }) as u64
                } else if matches!(op, BinOp::Eq | BinOp::Ne) && tys[a.index()] == ScalarTy::Flag {
                    let (x, y) = (flag(&regs, &tys, a)?, flag(&regs, &tys, b)?);
                    ((x == y) == (op == BinOp::Eq)) as u64
                } else {
                    let (x, y) = (word(&regs, &tys, a)?, word(&regs, &tys, b)?);
                    match op {
                        BinOp::And => x & y,
                        BinOp::Or => x | y,
                        BinOp::Xor => x ^ y,
                        BinOp::Add => x.wrapping_add(y),
                        BinOp::Sub => x.wrapping_sub(y),
                        BinOp::Mul => x.wrapping_mul(y),
                        BinOp::Shl => shift_left(x, y),
                        BinOp::Shr => shift_right(x, y),
                        BinOp::Eq => (x == y) as u64,
                        BinOp::Ne => (x != y) as u64,
                        BinOp::Lt => (x < y) as u64,
                        BinOp::Le => (x <= y) as u64,
                        BinOp::Gt => (x > y) as u64,
                        BinOp::Ge => (x >= y) as u64,
                        BinOp::LogicAnd | BinOp::LogicOr => unreachable!(),
                    }
                }
            }
            Op::Select(c, a, b) => {
                if tys[a.index()] != tys[b.index()] {
                    return Err(InterpError::TypeErrorAtRuntime { reg: b });
                }
                if flag(&regs, &tys, c)? {
                    regs[a.index()]
                } else {
                    regs[b.index()]
                }
            }
            Op::CheckIndex { index, len } => {
                let idx = word(&regs, &tys, index)?;
                if idx >= len as u64 {
                    return Err(InterpError::IndexOutOfRange { index: idx, len });
                }
                1
            }
        };
        regs[i] = v;
    }

    let gather = |elems: &[VReg]| -> Vec<u64> { elems.iter().map(|r| regs[r.index()]).collect() };
    let next_state = ir.state.iter().map(|s| Value::from_elems(s.ty, &gather(&s.next))).collect();
    let outputs = ir.outputs.iter().map(|o| (o.name.clone(), Value::from_elems(o.ty, &gather(&o.elems)))).collect();
    Ok(StepResult { next_state, outputs, valid: flag(&regs, &tys, ir.valid)?, ready: flag(&regs, &tys, ir.ready)? })
}

/// Steps from reset with `inputs` held constant until valid asserts.
pub fn run_until_valid(ir: &CycleIr, inputs: &Values, max_cycles: u64) -> Result<RunOutcome, InterpError> {
    let mut state = initial_state(ir);
    for cycle in 1..=max_cycles {
        let r = step(ir, &state, inputs)?;
        if r.valid {
            return Ok(RunOutcome { outputs: r.outputs, cycles: cycle, ready: r.ready });
        }
        state = r.next_state;
    }
    Err(InterpError::NeverValid { max_cycles })
}
