// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::fmt::Write;

use super::{escaper, is_leaf, register_names};
use crate::ir::{lower_to_ir, CycleIr, Op, ScalarTy, VReg};
use crate::lang::{BinOp, UnOp, VType};
use crate::sema::TypedModule;

const C_KEYWORDS: &[&str] = &[
    "auto",
    "break",
    "case",
    "char",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extern",
    "float",
    "for",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "register",
    "restrict",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "typedef",
    "union",
    "unsigned",
    "void",
    "volatile",
    "while",
    "_Alignas",
    "_Alignof",
    "_Atomic",
    "_Bool",
    "_Complex",
    "_Generic",
    "_Imaginary",
    "_Noreturn",
    "_Static_assert",
    "_Thread_local",
    // names the emitted unit or its headers define
    "bool",
    "true",
    "false",
    "uint64_t",
    "UINT64_C",
    "memset",
    "memcpy",
    "visc_shl",
    "visc_shr",
    "main",
];

struct Ctx<'a> {
    ir: &'a CycleIr,
    name: String,
    regs: Vec<String>,
    esc: Box<dyn Fn(&str) -> String>,
}

fn c_ty(ty: ScalarTy) -> &'static str {
    match ty {
        ScalarTy::Word => "uint64_t",
        ScalarTy::Flag => "bool",
    }
}

fn field(name: &str, ty: VType) -> String {
    match ty {
        VType::Int => format!("uint64_t {name};"),
        VType::Bool => format!("bool {name};"),
        VType::IntArray(n) => format!("uint64_t {name}[{n}];"),
    }
}

fn word_lit(v: u64) -> String {
    if v < 256 {
        v.to_string()
    } else {
        format!("UINT64_C({v:#x})")
    }
}

impl Ctx<'_> {
    fn operand(&self, r: VReg) -> String {
        let inst = self.ir.inst(r);
        match inst.op {
            Op::Input { port, elem } => {
                let p = &self.ir.inputs[port];
                match p.ty {
                    VType::IntArray(_) => format!("{}[{elem}]", (self.esc)(&p.name)),
                    _ => (self.esc)(&p.name),
                }
            }
            Op::State { slot, elem } => {
                let s = &self.ir.state[slot];
                match s.ty {
                    VType::IntArray(_) => format!("s__->{}[{elem}]", (self.esc)(&s.name)),
                    _ => format!("s__->{}", (self.esc)(&s.name)),
                }
            }
            Op::Word(v) => word_lit(v),
            Op::Flag(b) => b.to_string(),
            _ => self.regs[r.index()].clone(),
        }
    }

    fn rhs(&self, op: &Op) -> String {
        match *op {
            Op::Unary(op, a) => {
                let a = self.operand(a);
                match op {
                    UnOp::BitNot => format!("~{a}"),
                    UnOp::Neg => format!("-{a}"),
                    UnOp::Not => format!("!{a}"),
                }
            }
            Op::Binary(BinOp::Shl, a, b) => {
                format!("visc_shl({}, {})", self.operand(a), self.operand(b))
            }
            Op::Binary(BinOp::Shr, a, b) => {
                format!("visc_shr({}, {})", self.operand(a), self.operand(b))
            }
            Op::Binary(op, a, b) => {
                format!("{} {} {}", self.operand(a), op.symbol(), self.operand(b))
            }
            Op::Select(c, a, b) => format!("{} ? {} : {}", self.operand(c), self.operand(a), self.operand(b)),
            _ => unreachable!("leaves and checks are not bound"),
        }
    }

    fn params(&self) -> String {
        self.ir
            .inputs
            .iter()
            .map(|p| {
                let n = (self.esc)(&p.name);
                match p.ty {
                    VType::Int => format!("uint64_t {n}"),
                    VType::Bool => format!("bool {n}"),
                    VType::IntArray(k) => format!("const uint64_t {n}[{k}]"),
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn args(&self) -> String {
        self.ir.inputs.iter().map(|p| (self.esc)(&p.name)).collect::<Vec<_>>().join(", ")
    }
}

/// Emits a self-contained C11 translation unit for `tm`.
///
/// The unit defines the output record `<name>_output`, a step function that
/// evaluates one cycle, `<name>_run` (bounded loop reporting the cycle count)
/// and `<name>(...)`, which holds its inputs and steps until valid.
pub fn emit_software(tm: &TypedModule) -> String {
    let ir = lower_to_ir(tm);
    emit_from_ir(&ir)
}

/// Registers that reach an output, valid/ready, a state update or an index
/// check. Everything else would be an unused C variable.
fn live_regs(ir: &CycleIr) -> Vec<bool> {
    let mut live = vec![false; ir.insts.len()];
    let mut work: Vec<VReg> = ir
        .outputs
        .iter()
        .flat_map(|o| o.elems.iter().copied())
        .chain(ir.state.iter().flat_map(|s| s.next.iter().copied()))
        .chain([ir.valid, ir.ready])
        .collect();
    work.extend(
        ir.insts.iter().enumerate().filter(|(_, i)| matches!(i.op, Op::CheckIndex { .. })).map(|(k, _)| VReg(k as u32)),
    );
    while let Some(r) = work.pop() {
        if !std::mem::replace(&mut live[r.index()], true) {
            work.extend(ir.inst(r).op.operands());
        }
    }
    live
}

fn emit_from_ir(ir: &CycleIr) -> String {
    let seq = ir.is_sequential();
    let mut reserved: HashSet<String> = C_KEYWORDS.iter().map(|s| s.to_string()).collect();
    let base = if reserved.contains(&ir.name) { format!("v_{}", ir.name) } else { ir.name.clone() };
    for suffix in ["", "_output", "_state", "_step", "_init", "_run"] {
        reserved.insert(format!("{base}{suffix}"));
    }
    let esc = escaper(reserved);
    let regs = register_names(ir, &esc);
    let cx = Ctx { ir, name: base, regs, esc: Box::new(esc) };
    let n = &cx.name;
    let mut out = String::new();

    let live = live_regs(ir);
    let uses_op =
        |want: BinOp| ir.insts.iter().zip(&live).any(|(i, &l)| l && matches!(i.op, Op::Binary(op, ..) if op == want));

    let _ = writeln!(out, "/* Generated from Viscosity module `{}`. */", ir.name);
    out.push_str("#include <stdbool.h>\n#include <stdint.h>\n#include <string.h>\n\n");

    let fields: Vec<String> = ir.outputs.iter().map(|o| field(&(cx.esc)(&o.name), o.ty)).collect();
    let _ = writeln!(out, "struct _{n}_output {{ {} }};", fields.join(" "));
    let _ = writeln!(out, "typedef struct _{n}_output {n}_output;\n");

    if seq {
        let fields: Vec<String> = ir.state.iter().map(|s| field(&(cx.esc)(&s.name), s.ty)).collect();
        let _ = writeln!(out, "struct _{n}_state {{ {} }};", fields.join(" "));
        let _ = writeln!(out, "typedef struct _{n}_state {n}_state;\n");
    }

    // shifts by 64 or more yield 0 rather than C's undefined behaviour
    if uses_op(BinOp::Shl) {
        out.push_str("static inline uint64_t visc_shl(uint64_t a, uint64_t b) { return b >= 64 ? 0 : a << b; }\n");
    }
    if uses_op(BinOp::Shr) {
        out.push_str("static inline uint64_t visc_shr(uint64_t a, uint64_t b) { return b >= 64 ? 0 : a >> b; }\n");
    }
    if uses_op(BinOp::Shl) || uses_op(BinOp::Shr) {
        out.push('\n');
    }

    if seq {
        let _ = writeln!(out, "void {n}_init({n}_state *s__) {{");
        for s in &ir.state {
            let f = (cx.esc)(&s.name);
            match s.ty {
                VType::IntArray(_) => {
                    for (k, v) in s.init.iter().enumerate() {
                        let _ = writeln!(out, "    s__->{f}[{k}] = {};", word_lit(*v));
                    }
                }
                VType::Bool => {
                    let _ = writeln!(out, "    s__->{f} = {};", s.init[0] != 0);
                }
                VType::Int => {
                    let _ = writeln!(out, "    s__->{f} = {};", word_lit(s.init[0]));
                }
            }
        }
        out.push_str("}\n\n");
    }

    let params = cx.params();
    let sep = if params.is_empty() { "" } else { ", " };
    let state_param = if seq { format!("{n}_state *s__, ") } else { String::new() };
    let _ = writeln!(out, "/* Evaluates one cycle; false if a run-time index is out of range. */");
    let _ = writeln!(out, "bool {n}_step({state_param}{params}{sep}{n}_output *o__, bool *valid__, bool *ready__) {{");
    for (port, p) in ir.inputs.iter().enumerate() {
        let read =
            ir.insts.iter().zip(&live).any(|(i, &l)| l && matches!(i.op, Op::Input { port: q, .. } if q == port));
        if !read {
            let _ = writeln!(out, "    (void){};", (cx.esc)(&p.name));
        }
    }
    for (i, inst) in ir.insts.iter().enumerate() {
        if !live[i] || is_leaf(&inst.op) {
            continue;
        }
        if let Op::CheckIndex { index, len } = inst.op {
            let _ = writeln!(out, "    if ({} >= {len}) return false;", cx.operand(index));
            continue;
        }
        let _ = writeln!(out, "    const {} {} = {};", c_ty(inst.ty), cx.regs[i], cx.rhs(&inst.op));
    }
    for o in &ir.outputs {
        let f = (cx.esc)(&o.name);
        match o.ty {
            VType::IntArray(_) => {
                for (k, r) in o.elems.iter().enumerate() {
                    let _ = writeln!(out, "    o__->{f}[{k}] = {};", cx.operand(*r));
                }
            }
            _ => {
                let _ = writeln!(out, "    o__->{f} = {};", cx.operand(o.elems[0]));
            }
        }
    }
    let _ = writeln!(out, "    *valid__ = {};", cx.operand(ir.valid));
    let _ = writeln!(out, "    *ready__ = {};", cx.operand(ir.ready));

    // Next-state values that are themselves raw state reads must be captured
    // before any register is overwritten.
    let mut commits = Vec::new();
    for (slot, s) in ir.state.iter().enumerate() {
        let f = (cx.esc)(&s.name);
        for (elem, &r) in s.next.iter().enumerate() {
            let target = match s.ty {
                VType::IntArray(_) => format!("s__->{f}[{elem}]"),
                _ => format!("s__->{f}"),
            };
            let value = match ir.inst(r).op {
                Op::State { slot: sl, elem: el } if (sl, el) == (slot, elem) => continue,
                Op::State { .. } => {
                    let tmp = format!("{}__held", cx.regs[r.index()]);
                    if !commits.iter().any(|(_, v): &(String, String)| *v == tmp) {
                        let _ = writeln!(out, "    const {} {tmp} = {};", c_ty(ir.inst(r).ty), cx.operand(r));
                    }
                    tmp
                }
                _ => cx.operand(r),
            };
            commits.push((target, value));
        }
    }
    for (target, value) in &commits {
        let _ = writeln!(out, "    {target} = {value};");
    }
    out.push_str("    return true;\n}\n\n");

    let args = cx.args();
    let state_arg = if seq { "&s__, " } else { "" };
    let _ = writeln!(
        out,
        "/* Steps from reset with the inputs held until valid, an index fault or\n   max_cycles; true only when valid asserted. */"
    );
    let _ = writeln!(out, "bool {n}_run({params}{sep}uint64_t max_cycles, {n}_output *o__, uint64_t *cycles__) {{");
    if seq {
        let _ = writeln!(out, "    {n}_state s__;\n    {n}_init(&s__);");
    }
    out.push_str("    bool valid__ = false, ready__ = false;\n");
    out.push_str("    for (uint64_t k = 1; k <= max_cycles; ++k) {\n");
    let _ = writeln!(
        out,
        "        if (!{n}_step({state_arg}{args}{sep}o__, &valid__, &ready__)) {{\n            *cycles__ = k;\n            return false;\n        }}"
    );
    out.push_str("        if (valid__) {\n            *cycles__ = k;\n            return true;\n        }\n    }\n");
    out.push_str("    *cycles__ = max_cycles;\n    return false;\n}\n\n");

    if seq {
        let _ = writeln!(
            out,
            "/* Constant-hold wrapper: inputs are held while the module steps; no\n   streaming interface is generated. Loops until valid or an index fault. */"
        );
    }
    let _ = writeln!(out, "{n}_output {n}({params}) {{");
    let _ = writeln!(out, "    {n}_output o__;\n    memset(&o__, 0, sizeof o__);");
    out.push_str("    bool valid__ = false, ready__ = false;\n");
    if seq {
        let _ = writeln!(out, "    {n}_state s__;\n    {n}_init(&s__);");
        out.push_str("    while (!valid__) {\n");
        let _ = writeln!(out, "        if (!{n}_step({state_arg}{args}{sep}&o__, &valid__, &ready__)) break;");
        out.push_str("    }\n");
    } else {
        let _ = writeln!(out, "    (void){n}_step({args}{sep}&o__, &valid__, &ready__);");
    }
    out.push_str("    (void)ready__;\n    return o__;\n}\n");
    out
}
