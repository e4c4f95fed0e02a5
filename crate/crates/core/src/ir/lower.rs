// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::{CycleIr, Inst, Op, OutPort, Port, ScalarTy, StateSlot, VReg};
use crate::lang::{BinOp, Init, UnOp, VType};
use crate::sema::{SymbolKind, TExpr, TExprKind, TStmt, TypedModule};

fn scalar_ty(ty: VType) -> ScalarTy {
    match ty {
        VType::Bool => ScalarTy::Flag,
        VType::Int | VType::IntArray(_) => ScalarTy::Word,
    }
}

fn elems(ty: VType) -> usize {
    ty.array_len().unwrap_or(1)
}

struct Builder {
    insts: Vec<Inst>,
    memo: HashMap<Op, VReg>,
}

impl Builder {
    /// Emits `op`, reusing an existing register when the same operation on
    /// the same operands was already emitted.
    fn emit(&mut self, op: Op, ty: ScalarTy) -> VReg {
        if let Some(r) = self.simplify(&op) {
            return r;
        }
        if let Some(&r) = self.memo.get(&op) {
            return r;
        }
        let r = VReg(self.insts.len() as u32);
        self.insts.push(Inst { op: op.clone(), ty, name: None });
        self.memo.insert(op, r);
        r
    }

    /// Identities whose result does not depend on the operand values, such
    /// as `x == x` or `x >= 0`.
    fn simplify(&mut self, op: &Op) -> Option<VReg> {
        let is_zero = |b: &Builder, r: VReg| b.insts[r.index()].op == Op::Word(0);
        match *op {
            Op::Select(_, a, b) if a == b => Some(a),
            Op::Binary(op, a, b) if a == b => match op {
                BinOp::Eq | BinOp::Le | BinOp::Ge => Some(self.flag(true)),
                BinOp::Ne | BinOp::Lt | BinOp::Gt => Some(self.flag(false)),
                BinOp::Xor | BinOp::Sub => Some(self.word(0)),
                BinOp::And | BinOp::Or | BinOp::LogicAnd | BinOp::LogicOr => Some(a),
                _ => None,
            },
            Op::Binary(BinOp::Ge, _, z) | Op::Binary(BinOp::Le, z, _) if is_zero(self, z) => Some(self.flag(true)),
            Op::Binary(BinOp::Lt, _, z) | Op::Binary(BinOp::Gt, z, _) if is_zero(self, z) => Some(self.flag(false)),
            _ => None,
        }
    }

    fn flag(&mut self, v: bool) -> VReg {
        self.emit(Op::Flag(v), ScalarTy::Flag)
    }

    fn word(&mut self, v: u64) -> VReg {
        self.emit(Op::Word(v), ScalarTy::Word)
    }

    fn name_hint(&mut self, r: VReg, name: &str) {
        let inst = &mut self.insts[r.index()];
        let nameable = !matches!(inst.op, Op::Input { .. } | Op::State { .. } | Op::Word(_) | Op::Flag(_));
        if nameable && inst.name.is_none() {
            inst.name = Some(name.to_string());
        }
    }

    /// `regs[index]` for a run-time index, as a select chain.
    fn dynamic_read(&mut self, regs: &[VReg], index: VReg) -> VReg {
        self.emit(Op::CheckIndex { index, len: regs.len() }, ScalarTy::Flag);
        let mut acc = *regs.last().expect("arrays are non-empty");
        for k in (0..regs.len() - 1).rev() {
            let kc = self.word(k as u64);
            let hit = self.emit(Op::Binary(BinOp::Eq, index, kc), ScalarTy::Flag);
            acc = self.emit(Op::Select(hit, regs[k], acc), ScalarTy::Word);
        }
        acc
    }

    fn dynamic_write(&mut self, regs: &mut [VReg], index: VReg, value: VReg) {
        self.emit(Op::CheckIndex { index, len: regs.len() }, ScalarTy::Flag);
        for (k, slot) in regs.iter_mut().enumerate() {
            let kc = self.word(k as u64);
            let hit = self.emit(Op::Binary(BinOp::Eq, index, kc), ScalarTy::Flag);
            *slot = self.emit(Op::Select(hit, value, *slot), ScalarTy::Word);
        }
    }
}

struct Lowering<'a> {
    tm: &'a TypedModule,
    b: Builder,
    /// Current value of every symbol that has one.
    env: HashMap<usize, Vec<VReg>>,
}

impl Lowering<'_> {
    fn expr(&mut self, e: &TExpr) -> Vec<VReg> {
        match &e.kind {
            TExprKind::Int(v) => vec![self.b.word(*v)],
            TExprKind::Bool(v) => vec![self.b.flag(*v)],
            TExprKind::Sym(id) => self.env[id].clone(),
            TExprKind::Array(items) => items.iter().map(|i| self.expr(i)[0]).collect(),
            TExprKind::Index(base, index) => {
                let regs = self.expr(base);
                let r = match index.kind {
                    TExprKind::Int(k) => regs[k as usize],
                    _ => {
                        let i = self.expr(index)[0];
                        self.b.dynamic_read(&regs, i)
                    }
                };
                vec![r]
            }
            TExprKind::Unary(op, a) => {
                let a = self.expr(a)[0];
                let ty = match op {
                    UnOp::Not => ScalarTy::Flag,
                    _ => ScalarTy::Word,
                };
                vec![self.b.emit(Op::Unary(*op, a), ty)]
            }
            TExprKind::Binary(op, l, r) => {
                let l = self.expr(l)[0];
                let r = self.expr(r)[0];
                vec![self.b.emit(Op::Binary(*op, l, r), scalar_ty(e.ty))]
            }
            TExprKind::Cond(c, t, f) => {
                let c = self.expr(c)[0];
                let t = self.expr(t);
                let f = self.expr(f);
                let ty = scalar_ty(e.ty);
                t.iter().zip(&f).map(|(&a, &b)| if a == b { a } else { self.b.emit(Op::Select(c, a, b), ty) }).collect()
            }
        }
    }
}

/// Lowers a checked module to its cycle IR.
pub fn lower_to_ir(tm: &TypedModule) -> CycleIr {
    let mut lw = Lowering { tm, b: Builder { insts: Vec::new(), memo: HashMap::new() }, env: HashMap::new() };

    let mut state_reads: Vec<Vec<VReg>> = Vec::new();
    let mut inputs = Vec::new();
    for (id, sym) in tm.symbols.iter().enumerate() {
        match sym.kind {
            SymbolKind::State(slot) => {
                let regs: Vec<VReg> =
                    (0..elems(sym.ty)).map(|elem| lw.b.emit(Op::State { slot, elem }, scalar_ty(sym.ty))).collect();
                lw.env.insert(id, regs.clone());
                state_reads.push(regs);
            }
            SymbolKind::Input(port) => {
                let regs: Vec<VReg> =
                    (0..elems(sym.ty)).map(|elem| lw.b.emit(Op::Input { port, elem }, scalar_ty(sym.ty))).collect();
                lw.env.insert(id, regs);
                inputs.push(Port { name: sym.name.clone(), ty: sym.ty });
            }
            SymbolKind::Output(_) | SymbolKind::Local => {}
        }
    }

    let mut next: Vec<Vec<VReg>> = state_reads.clone();
    for &i in &tm.schedule {
        match &tm.body[i] {
            TStmt::Bind { sym, value, .. } => {
                let regs = lw.expr(value);
                if let [r] = regs.as_slice() {
                    lw.b.name_hint(*r, &tm.symbols[*sym].name);
                }
                lw.env.insert(*sym, regs);
            }
            TStmt::Store { sym, index, value, .. } => {
                let v = lw.expr(value)[0];
                let mut regs = lw.env[sym].clone();
                match index.kind {
                    TExprKind::Int(k) => regs[k as usize] = v,
                    _ => {
                        let i = lw.expr(index)[0];
                        lw.b.dynamic_write(&mut regs, i, v);
                    }
                }
                lw.env.insert(*sym, regs);
            }
            TStmt::Next { sym, value, .. } => {
                let regs = lw.expr(value);
                let SymbolKind::State(slot) = tm.symbols[*sym].kind else {
                    unreachable!("typecheck guarantees @ targets are registers")
                };
                next[slot] = regs;
            }
        }
    }

    let outputs = tm
        .symbols
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.kind, SymbolKind::Output(_)))
        .map(|(id, s)| OutPort { name: s.name.clone(), ty: s.ty, elems: lw.env[&id].clone() })
        .collect();
    let valid = lw.expr(&tm.valid)[0];
    let ready = lw.expr(&tm.ready)[0];

    let state = tm
        .ast
        .state
        .iter()
        .zip(next)
        .map(|(decl, next)| StateSlot {
            name: decl.name.name.clone(),
            ty: decl.ty,
            init: match &decl.init {
                Init::Int(l) => vec![l.value],
                Init::Bool(b) => vec![*b as u64],
                Init::Array(items) => items.iter().map(|l| l.value).collect(),
            },
            next,
        })
        .collect();

    CycleIr { name: lw.tm.name().to_string(), insts: lw.b.insts, inputs, outputs, state, valid, ready }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::parse_module;
    use crate::sema::typecheck;

    fn lower(src: &str) -> CycleIr {
        lower_to_ir(&typecheck(&parse_module(src).unwrap()).unwrap())
    }

    #[test]
    fn identity_is_a_single_copy() {
        let ir = lower(corpus::ID);
        let computed =
            ir.insts.iter().filter(|i| !matches!(i.op, Op::Input { .. } | Op::Flag(_) | Op::Word(_))).count();
        assert_eq!(computed, 0);
        assert_eq!(ir.outputs[0].elems, vec![VReg(0)]);
        assert_eq!(ir.inst(ir.outputs[0].elems[0]).op, Op::Input { port: 0, elem: 0 });
    }

    #[test]
    fn checksum_has_one_zeroed_slot() {
        let ir = lower(corpus::PIPELINED_CHECKSUM);
        assert_eq!(ir.state.len(), 1);
        assert_eq!(ir.state[0].name, "checksum_reg");
        assert_eq!(ir.state[0].init, vec![0]);
        assert_ne!(ir.inst(ir.state[0].next[0]).op, Op::State { slot: 0, elem: 0 });
    }

    #[test]
    fn shared_subexpression_is_computed_once() {
        let ir = lower("module [] m (x : int, y : int) -> (out : int) { let a = x + y; out = a + a; } <true; true>");
        let adds: Vec<_> = ir.insts.iter().filter(|i| matches!(i.op, Op::Binary(BinOp::Add, ..))).collect();
        assert_eq!(adds.len(), 2);
        let Op::Binary(_, l, r) = ir.inst(ir.outputs[0].elems[0]).op else { panic!() };
        assert_eq!(l, r);
    }

    #[test]
    fn unwritten_state_maps_to_its_read() {
        let ir = lower("module [r : int = 5, s : int = 1] m (a : int) -> (o : int) { @s = a; o = r; } <true; true>");
        assert_eq!(ir.inst(ir.state[0].next[0]).op, Op::State { slot: 0, elem: 0 });
        assert_eq!(ir.inst(ir.state[1].next[0]).op, Op::Input { port: 0, elem: 0 });
    }

    #[test]
    fn registers_are_ssa_and_topological() {
        for (_, src) in corpus::ALL {
            let ir = lower(src);
            for (i, inst) in ir.insts.iter().enumerate() {
                for r in inst.op.operands() {
                    assert!(r.index() < i, "{}: v{i} reads later {r}", ir.name);
                }
            }
        }
    }

    #[test]
    fn operand_independent_identities_fold() {
        let ir = lower(
            "module [] m (a : int) -> (e : bool, l : bool, z : int, s : int) {
                e = a == a;
                l = a < 0;
                z = a ^ a;
                s = (a > 1) ? a : a;
            } <a >= 0; true>",
        );
        let op = |r: VReg| ir.inst(r).op.clone();
        assert_eq!(op(ir.outputs[0].elems[0]), Op::Flag(true));
        assert_eq!(op(ir.outputs[1].elems[0]), Op::Flag(false));
        assert_eq!(op(ir.outputs[2].elems[0]), Op::Word(0));
        assert_eq!(op(ir.outputs[3].elems[0]), Op::Input { port: 0, elem: 0 });
        assert_eq!(op(ir.valid), Op::Flag(true));
    }

    #[test]
    fn dump_is_stable() {
        let ir = lower(corpus::ID);
        assert_eq!(
            ir.to_string(),
            "module id\ninput a : int\noutput out : int\nv0:w = input a\nv1:f = const true\nout out = v0\nvalid = v1\nready = v1\n"
        );
    }
}
