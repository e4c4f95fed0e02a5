// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::fmt::Write;

use super::{is_leaf, register_names, EmitError};
use crate::ir::{lower_to_ir, CycleIr, Op, ScalarTy, VReg};
use crate::lang::{BinOp, UnOp, VType};
use crate::sema::TypedModule;

const VERILOG_KEYWORDS: &[&str] = &[
    "always",
    "and",
    "assign",
    "automatic",
    "begin",
    "buf",
    "case",
    "casex",
    "casez",
    "cell",
    "cmos",
    "config",
    "deassign",
    "default",
    "defparam",
    "design",
    "disable",
    "edge",
    "else",
    "end",
    "endcase",
    "endconfig",
    "endfunction",
    "endgenerate",
    "endmodule",
    "endprimitive",
    "endspecify",
    "endtable",
    "endtask",
    "event",
    "for",
    "force",
    "forever",
    "fork",
    "function",
    "generate",
    "genvar",
    "highz0",
    "highz1",
    "if",
    "ifnone",
    "incdir",
    "include",
    "initial",
    "inout",
    "input",
    "instance",
    "integer",
    "join",
    "large",
    "liblist",
    "library",
    "localparam",
    "logic",
    "macromodule",
    "medium",
    "module",
    "nand",
    "negedge",
    "nmos",
    "nor",
    "not",
    "noshowcancelled",
    "notif0",
    "notif1",
    "or",
    "output",
    "parameter",
    "pmos",
    "posedge",
    "primitive",
    "pull0",
    "pull1",
    "pulldown",
    "pullup",
    "rcmos",
    "real",
    "realtime",
    "reg",
    "release",
    "repeat",
    "rnmos",
    "rpmos",
    "rtran",
    "rtranif0",
    "rtranif1",
    "scalared",
    "showcancelled",
    "signed",
    "small",
    "specify",
    "specparam",
    "strong0",
    "strong1",
    "supply0",
    "supply1",
    "table",
    "task",
    "time",
    "tran",
    "tranif0",
    "tranif1",
    "tri",
    "tri0",
    "tri1",
    "triand",
    "trior",
    "trireg",
    "unsigned",
    "use",
    "uwire",
    "vectored",
    "wait",
    "wand",
    "weak0",
    "weak1",
    "while",
    "wire",
    "wor",
    "xnor",
    "xor",
    // port names of the handshake interface
    "clk",
    "rst_n",
];

fn escape_name(reserved: &HashSet<String>, name: &str) -> String {
    if reserved.contains(name) || name.starts_with("in_") || name.starts_with("out_") {
        format!("v_{name}")
    } else {
        name.to_string()
    }
}

fn word_lit(v: u64) -> String {
    if v < 256 {
        format!("64'd{v}")
    } else {
        format!("64'h{v:016x}")
    }
}

fn width(ty: VType) -> usize {
    ty.bit_width()
}

fn range(bits: usize) -> String {
    if bits == 1 {
        String::new()
    } else {
        format!("[{}:0] ", bits - 1)
    }
}

fn slice(base: &str, ty: VType, elem: usize) -> String {
    match ty {
        VType::IntArray(_) => format!("{base}[{}:{}]", 64 * elem + 63, 64 * elem),
        _ => base.to_string(),
    }
}

struct Ctx<'a> {
    ir: &'a CycleIr,
    regs: Vec<String>,
    /// Registers bound to a wire; all others are expanded at their use.
    wired: Vec<bool>,
    reserved: HashSet<String>,
}

impl Ctx<'_> {
    fn esc(&self, name: &str) -> String {
        escape_name(&self.reserved, name)
    }

    fn operand(&self, r: VReg) -> String {
        let inst = self.ir.inst(r);
        match inst.op {
            Op::Input { port, elem } => {
                let p = &self.ir.inputs[port];
                slice(&format!("in_{}", p.name), p.ty, elem)
            }
            Op::State { slot, elem } => {
                let s = &self.ir.state[slot];
                slice(&self.esc(&s.name), s.ty, elem)
            }
            Op::Word(v) => word_lit(v),
            Op::Flag(b) => if b { "1'b1" } else { "1'b0" }.to_string(),
            _ if self.wired[r.index()] => self.regs[r.index()].clone(),
            ref op => self.expr(op),
        }
    }

    fn expr(&self, op: &Op) -> String {
        match *op {
            Op::Unary(op, a) => {
                let sym = match op {
                    UnOp::BitNot => "~",
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                };
                format!("({sym}{})", self.operand(a))
            }
            Op::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::LogicAnd => "&&",
                    BinOp::LogicOr => "||",
                    other => other.symbol(),
                };
                format!("({} {sym} {})", self.operand(a), self.operand(b))
            }
            Op::Select(c, a, b) => format!("({} ? {} : {})", self.operand(c), self.operand(a), self.operand(b)),
            _ => unreachable!("leaves are rendered by operand()"),
        }
    }

    /// `{eN-1, ..., e0}` for arrays, the single element otherwise.
    fn concat(&self, elems: &[VReg]) -> String {
        if elems.len() == 1 {
            self.operand(elems[0])
        } else {
            let parts: Vec<String> = elems.iter().rev().map(|r| self.operand(*r)).collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

/// Emits a Verilog module with a valid/ready handshake.
///
/// Ports are `clk`, `rst_n`, `in_<x>` per input, `in_valid`, `in_ready`
/// (driven by the ready expression), `out_<y>` per output, `out_valid`
/// (driven by the valid expression) and `out_ready`. Arrays are flattened
/// with element 0 in the least significant 64 bits. Registers reset
/// synchronously while `rst_n` is low and advance on `in_valid && in_ready`.
pub fn emit_hdl(tm: &TypedModule) -> Result<String, EmitError> {
    if let Some(span) = tm.dynamic_index {
        return Err(EmitError::DynamicArrayIndexUnsupported { span });
    }
    Ok(emit_from_ir(&lower_to_ir(tm)))
}

fn emit_from_ir(ir: &CycleIr) -> String {
    let reserved: HashSet<String> = VERILOG_KEYWORDS.iter().map(|s| s.to_string()).collect();
    let regs = {
        let r = reserved.clone();
        register_names(ir, move |n| escape_name(&r, n))
    };
    let uses = ir.use_counts();
    let wired = ir
        .insts
        .iter()
        .enumerate()
        .map(|(i, inst)| !is_leaf(&inst.op) && (inst.name.is_some() || uses[i] > 1))
        .collect();
    let cx = Ctx { ir, regs, wired, reserved: reserved.clone() };

    let mut out = String::new();
    let _ = writeln!(out, "// Generated from Viscosity module `{}`.", ir.name);
    let _ = writeln!(out, "module {} (", escape_name(&cx.reserved, &ir.name));
    let mut ports = vec![("input ", 1, "clk".to_string()), ("input ", 1, "rst_n".to_string())];
    for p in &ir.inputs {
        ports.push(("input ", width(p.ty), format!("in_{}", p.name)));
    }
    ports.push(("input ", 1, "in_valid".to_string()));
    ports.push(("output", 1, "in_ready".to_string()));
    for o in &ir.outputs {
        ports.push(("output", width(o.ty), format!("out_{}", o.name)));
    }
    ports.push(("output", 1, "out_valid".to_string()));
    ports.push(("input ", 1, "out_ready".to_string()));
    let last = ports.len() - 1;
    for (i, (dir, w, name)) in ports.iter().enumerate() {
        let comma = if i == last { "" } else { "," };
        let _ = writeln!(out, "    {dir} wire {:<8}{name}{comma}", range(*w));
    }
    out.push_str(");\n");

    if !ir.state.is_empty() {
        out.push('\n');
        for s in &ir.state {
            let _ = writeln!(out, "    reg {}{};", range(width(s.ty)), cx.esc(&s.name));
        }
    }

    let wires: Vec<usize> = (0..ir.insts.len()).filter(|&i| cx.wired[i]).collect();
    if !wires.is_empty() {
        out.push('\n');
    }
    for i in wires {
        let inst = &ir.insts[i];
        let w = match inst.ty {
            ScalarTy::Word => 64,
            ScalarTy::Flag => 1,
        };
        let _ = writeln!(out, "    wire {}{} = {};", range(w), cx.regs[i], cx.expr(&inst.op));
    }

    out.push('\n');
    for o in &ir.outputs {
        let _ = writeln!(out, "    assign out_{} = {};", o.name, cx.concat(&o.elems));
    }
    let _ = writeln!(out, "    assign out_valid = {};", cx.operand(ir.valid));
    let _ = writeln!(out, "    assign in_ready = {};", cx.operand(ir.ready));

    if !ir.state.is_empty() {
        out.push_str("\n    always @(posedge clk) begin\n        if (!rst_n) begin\n");
        for s in &ir.state {
            let init = match s.ty {
                VType::Bool => if s.init[0] != 0 { "1'b1" } else { "1'b0" }.to_string(),
                VType::Int => word_lit(s.init[0]),
                VType::IntArray(_) => {
                    let parts: Vec<String> = s.init.iter().rev().map(|v| word_lit(*v)).collect();
                    format!("{{{}}}", parts.join(", "))
                }
            };
            let _ = writeln!(out, "            {} <= {init};", cx.esc(&s.name));
        }
        out.push_str("        end else if (in_valid && in_ready) begin\n");
        for (slot, s) in ir.state.iter().enumerate() {
            let held = s.next.iter().enumerate().all(|(elem, r)| ir.inst(*r).op == Op::State { slot, elem });
            if !held {
                let _ = writeln!(out, "            {} <= {};", cx.esc(&s.name), cx.concat(&s.next));
            }
        }
        out.push_str("        end\n    end\n");
    }
    out.push_str("endmodule\n");
    out
}
