// SPDX-License-Identifier: Apache-2.0

//! Test oracles that share no code with the compiler pipeline.

#![allow(dead_code)]

pub mod cc;

use std::collections::HashMap;

use oobleck_core::ir::{Value, Values};
use oobleck_core::lang::{BinOp, Expr, ExprKind, Init, ModuleAst, StmtKind, UnOp, VType};
use rand::{Rng, RngCore};

/// Population count by repeatedly clearing the lowest set bit.
pub fn popcount(mut w: u64) -> u64 {
    let mut n = 0;
    while w != 0 {
        w &= w - 1;
        n += 1;
    }
    n
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum V {
    W(u64),
    B(bool),
    A(Vec<u64>),
}

impl V {
    fn w(&self) -> u64 {
        match self {
            V::W(x) => *x,
            other => panic!("expected word, got {other:?}"),
        }
    }

    fn b(&self) -> bool {
        match self {
            V::B(x) => *x,
            other => panic!("expected flag, got {other:?}"),
        }
    }

    fn to_value(&self) -> Value {
        match self {
            V::W(x) => Value::Word(*x),
            V::B(x) => Value::Flag(*x),
            V::A(x) => Value::WordArray(x.clone()),
        }
    }

    fn from_value(v: &Value) -> V {
        match v {
            Value::Word(x) => V::W(*x),
            Value::Flag(x) => V::B(*x),
            Value::WordArray(x) => V::A(x.clone()),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum RefError {
    IndexOutOfRange,
    NeverValid,
}

/// Direct tree-walking evaluator over the syntax tree.
pub struct RefMachine<'a> {
    ast: &'a ModuleAst,
    state: HashMap<String, V>,
}

pub struct RefStep {
    pub outputs: Values,
    pub valid: bool,
    pub ready: bool,
}

fn eval(e: &Expr, env: &HashMap<String, V>) -> Result<V, RefError> {
    Ok(match &e.kind {
        ExprKind::Int(l) => V::W(l.value),
        ExprKind::Bool(b) => V::B(*b),
        ExprKind::Var(n) => env[n].clone(),
        ExprKind::Array(items) => V::A(items.iter().map(|i| eval(i, env).map(|v| v.w())).collect::<Result<_, _>>()?),
        ExprKind::Index(base, idx) => {
            let V::A(items) = eval(base, env)? else { panic!("index on non-array") };
            let i = eval(idx, env)?.w();
            V::W(*items.get(i as usize).ok_or(RefError::IndexOutOfRange)?)
        }
        ExprKind::Unary(op, a) => {
            let a = eval(a, env)?;
            match op {
                UnOp::BitNot => V::W(!a.w()),
                UnOp::Neg => V::W(0u64.wrapping_sub(a.w())),
                UnOp::Not => V::B(!a.b()),
            }
        }
        ExprKind::Binary(op, l, r) => {
            let l = eval(l, env)?;
            // short-circuiting is unobservable: expressions have no effects
            let r = eval(r, env)?;
            match op {
                BinOp::LogicAnd => V::B(l.b() && r.b()),
                BinOp::LogicOr => V::B(l.b() || r.b()),
                BinOp::Eq => V::B(l == r),
                BinOp::Ne => V::B(l != r),
                _ => {
                    let (x, y) = (l.w(), r.w());
                    match op {
                        BinOp::And => V::W(x & y),
                        BinOp::Or => V::W(x | y),
                        BinOp::Xor => V::W(x ^ y),
                        BinOp::Add => V::W(x.wrapping_add(y)),
                        BinOp::Sub => V::W(x.wrapping_sub(y)),
                        BinOp::Mul => V::W(x.wrapping_mul(y)),
                        BinOp::Shl => V::W(x.checked_shl(y.min(64) as u32).unwrap_or(0)),
                        BinOp::Shr => V::W(x.checked_shr(y.min(64) as u32).unwrap_or(0)),
                        BinOp::Lt => V::B(x < y),
                        BinOp::Le => V::B(x <= y),
                        BinOp::Gt => V::B(x > y),
                        BinOp::Ge => V::B(x >= y),
                        _ => unreachable!(),
                    }
                }
            }
        }
        ExprKind::Cond(c, t, f) => {
            if eval(c, env)?.b() {
                eval(t, env)?
            } else {
                eval(f, env)?
            }
        }
    })
}

impl<'a> RefMachine<'a> {
    pub fn new(ast: &'a ModuleAst) -> Self {
        let state = ast
            .state
            .iter()
            .map(|s| {
                let v = match &s.init {
                    Init::Int(l) => V::W(l.value),
                    Init::Bool(b) => V::B(*b),
                    Init::Array(items) => V::A(items.iter().map(|l| l.value).collect()),
                };
                (s.name.name.clone(), v)
            })
            .collect();
        RefMachine { ast, state }
    }

    pub fn step(&mut self, inputs: &Values) -> Result<RefStep, RefError> {
        let mut env = self.state.clone();
        for p in &self.ast.inputs {
            env.insert(p.name.name.clone(), V::from_value(&inputs[&p.name.name]));
        }
        let mut next = self.state.clone();
        for stmt in &self.ast.body {
            match &stmt.kind {
                StmtKind::Let { name, value, .. } => {
                    let v = eval(value, &env)?;
                    env.insert(name.name.clone(), v);
                }
                StmtKind::Assign { target, value } => {
                    let v = eval(value, &env)?;
                    env.insert(target.name.clone(), v);
                }
                StmtKind::AssignIndex { target, index, value } => {
                    let i = eval(index, &env)?.w() as usize;
                    let v = eval(value, &env)?.w();
                    let Some(V::A(items)) = env.get_mut(&target.name) else { panic!("element write to non-array") };
                    *items.get_mut(i).ok_or(RefError::IndexOutOfRange)? = v;
                }
                StmtKind::NextState { target, value } => {
                    let v = eval(value, &env)?;
                    next.insert(target.name.clone(), v);
                }
            }
        }
        let outputs = self.ast.outputs.iter().map(|p| (p.name.name.clone(), env[&p.name.name].to_value())).collect();
        let valid = eval(&self.ast.valid, &env)?.b();
        let ready = eval(&self.ast.ready, &env)?.b();
        self.state = next;
        Ok(RefStep { outputs, valid, ready })
    }

    pub fn run_until_valid(ast: &ModuleAst, inputs: &Values, max_cycles: u64) -> Result<(Values, u64), RefError> {
        let mut m = RefMachine::new(ast);
        for cycle in 1..=max_cycles {
            let r = m.step(inputs)?;
            if r.valid {
                return Ok((r.outputs, cycle));
            }
        }
        Err(RefError::NeverValid)
    }
}

/// A word biased toward edge cases a quarter of the time.
pub fn word(rng: &mut impl RngCore) -> u64 {
    match rng.random_range(0..16u32) {
        0 => 0,
        1 => u64::MAX,
        2 => rng.random_range(0..130),
        3 => 1u64 << rng.random_range(0..64),
        _ => rng.random(),
    }
}

pub fn random_value(ty: VType, rng: &mut impl RngCore) -> Value {
    match ty {
        VType::Int => Value::Word(word(rng)),
        VType::Bool => Value::Flag(rng.random()),
        VType::IntArray(n) => Value::WordArray((0..n).map(|_| word(rng)).collect()),
    }
}

pub fn random_inputs(ast: &ModuleAst, rng: &mut impl RngCore) -> Values {
    ast.inputs.iter().map(|p| (p.name.name.clone(), random_value(p.ty, rng))).collect()
}

/// Random, well-typed, fully parenthesized module text. Every module
/// asserts valid within `settle + 1` cycles and never indexes out of range.
pub struct ProgramGen<'r, R: RngCore> {
    rng: &'r mut R,
    ints: Vec<String>,
    bools: Vec<String>,
    dynamic_index: bool,
}

impl<'r, R: RngCore> ProgramGen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        ProgramGen { rng, ints: Vec::new(), bools: Vec::new(), dynamic_index: true }
    }

    /// Only literal indices, so the output is accepted by the HDL emitter.
    pub fn static_indices(mut self) -> Self {
        self.dynamic_index = false;
        self
    }

    fn lit(&mut self) -> String {
        let v = word(self.rng);
        if self.rng.random() {
            format!("{v:#x}")
        } else {
            v.to_string()
        }
    }

    fn pick(&mut self, xs: &[String]) -> String {
        xs[self.rng.random_range(0..xs.len())].clone()
    }

    fn int(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.random_range(0..4) == 0 {
            return match self.rng.random_range(0..5) {
                0 => self.lit(),
                1 => self.rng.random_range(0..70u32).to_string(),
                2 => format!("v[{}]", self.rng.random_range(0..3)),
                3 => format!("w[{}]", self.rng.random_range(0..3)),
                _ => {
                    let ints = self.ints.clone();
                    self.pick(&ints)
                }
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..13) {
            0 => format!("(~{})", self.int(d)),
            1 => format!("(-{})", self.int(d)),
            2 => format!("({} ? {} : {})", self.boolean(d), self.int(d), self.int(d)),
            3 if self.dynamic_index => format!("v[(({}) & 1)]", self.int(d)),
            3 => format!("w[{}]", self.rng.random_range(0..3)),
            i => {
                let op = ["+", "-", "*", "&", "|", "^", "<<", ">>", "+"][i as usize - 4];
                format!("({} {op} {})", self.int(d), self.int(d))
            }
        }
    }

    fn boolean(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.random_range(0..4) == 0 {
            return match self.rng.random_range(0..3) {
                0 => ["true", "false"][self.rng.random_range(0..2)].to_string(),
                _ => {
                    let bools = self.bools.clone();
                    self.pick(&bools)
                }
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..6) {
            0 => format!("(!{})", self.boolean(d)),
            1 => {
                let op = ["&&", "||", "==", "!="][self.rng.random_range(0..4)];
                format!("({} {op} {})", self.boolean(d), self.boolean(d))
            }
            _ => {
                let op = ["==", "!=", "<", "<=", ">", ">="][self.rng.random_range(0..6)];
                format!("({} {op} {})", self.int(d), self.int(d))
            }
        }
    }

    /// Module `name`; `sequential` adds state and a settling counter.
    pub fn module(&mut self, name: &str, sequential: bool, settle: u64) -> String {
        self.ints = vec!["a".into(), "b".into()];
        self.bools = vec!["p".into()];
        let mut body = Vec::new();
        let state = if sequential {
            self.ints.extend(["s0".into(), "c".into()]);
            self.bools.push("f0".into());
            format!("s0 : int = {}, f0 : bool = true, c : int = 0, w : [3] = [1, {}, 0x10]", self.lit(), self.lit())
        } else {
            body.push("let w : [3] = [a, b, 7];".to_string());
            String::new()
        };
        for i in 0..self.rng.random_range(1..6) {
            match self.rng.random_range(0..4) {
                0 => {
                    let e = self.boolean(3);
                    body.push(format!("let q{i} = {e};"));
                    self.bools.push(format!("q{i}"));
                }
                1 if self.ints.iter().any(|n| n.starts_with('x')) => {
                    let locals: Vec<String> = self.ints.iter().filter(|n| n.starts_with('x')).cloned().collect();
                    let target = self.pick(&locals);
                    let e = self.int(3);
                    body.push(format!("{target} = {e};"));
                }
                _ => {
                    let e = self.int(3);
                    body.push(format!("let x{i} : int = {e};"));
                    self.ints.push(format!("x{i}"));
                }
            }
        }
        let arr = [self.int(2), self.int(2), self.int(2)];
        body.push(format!("let arr : [3] = [{}, {}, {}];", arr[0], arr[1], arr[2]));
        let (i, e) = (self.rng.random_range(0..3), self.int(2));
        body.push(format!("arr[{i}] = {e};"));
        if sequential {
            if self.rng.random() {
                let e = self.int(3);
                body.push(format!("@s0 = {e};"));
            }
            if self.rng.random() {
                let e = self.boolean(3);
                body.push(format!("@f0 = {e};"));
            }
            if self.rng.random() {
                body.push("@w = arr;".into());
            }
            body.push("@c = c + 1;".into());
        }
        let (o1, o2) = (self.int(3), self.boolean(3));
        body.push(format!("o1 = {o1};"));
        body.push(format!("o2 = {o2};"));
        body.push("o3 = arr;".into());
        let valid = if sequential { format!("c >= {settle} || {}", self.boolean(2)) } else { "true".into() };
        let ready = self.boolean(2);
        format!(
            "module [{state}] {name} (a : int, b : int, p : bool, v : [3]) -> (o1 : int, o2 : bool, o3 : [3]) {{\n    {}\n}} <{valid}; {ready}>\n",
            body.join("\n    ")
        )
    }
}
