// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::ast::*;

/// Renders a module in canonical form. Parsing the result yields the same
/// tree up to spans.
pub fn pretty_print(ast: &ModuleAst) -> String {
    let mut out = String::new();
    out.push_str("module [");
    for (i, s) in ast.state.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} : {} = {}", s.name.name, s.ty, print_init(&s.init));
    }
    let _ = writeln!(out, "] {} ({}) -> ({}) {{", ast.name.name, print_params(&ast.inputs), print_params(&ast.outputs));
    for stmt in &ast.body {
        out.push_str("    ");
        out.push_str(&print_stmt(stmt));
        out.push('\n');
    }
    let _ = writeln!(out, "}} <{}; {}>", print_trailer_expr(&ast.valid), print_trailer_expr(&ast.ready));
    out
}

fn print_init(init: &Init) -> String {
    match init {
        Init::Int(lit) => lit.to_string(),
        Init::Bool(b) => b.to_string(),
        Init::Array(items) => {
            let items: Vec<String> = items.iter().map(|l| l.to_string()).collect();
            format!("[{}]", items.join(", "))
        }
    }
}

fn print_params(params: &[Param]) -> String {
    params.iter().map(|p| format!("{} : {}", p.name.name, p.ty)).collect::<Vec<_>>().join(", ")
}

fn print_stmt(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Let { name, ty, value } => match ty {
            Some(ty) => format!("let {} : {} = {};", name.name, ty, print_expr(value)),
            None => format!("let {} = {};", name.name, print_expr(value)),
        },
        StmtKind::Assign { target, value } => {
            format!("{} = {};", target.name, print_expr(value))
        }
        StmtKind::AssignIndex { target, index, value } => {
            format!("{}[{}] = {};", target.name, print_expr(index), print_expr(value))
        }
        StmtKind::NextState { target, value } => {
            format!("@{} = {};", target.name, print_expr(value))
        }
    }
}

/// Valid/ready expressions are parenthesized unless atomic, which also keeps a
/// `>` comparison from closing the trailer early.
pub fn print_trailer_expr(e: &Expr) -> String {
    match e.kind {
        ExprKind::Binary(..) | ExprKind::Cond(..) => format!("({})", print_expr(e)),
        _ => print_expr(e),
    }
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Cond(..) => 0,
        ExprKind::Binary(op, ..) => op.precedence(),
        _ => u8::MAX,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(lit) => lit.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(name) => name.clone(),
        ExprKind::Array(items) => {
            let items: Vec<String> = items.iter().map(print_expr).collect();
            format!("[{}]", items.join(", "))
        }
        ExprKind::Index(base, index) => {
            let base_s = match base.kind {
                ExprKind::Unary(..) | ExprKind::Binary(..) | ExprKind::Cond(..) => {
                    format!("({})", print_expr(base))
                }
                _ => print_expr(base),
            };
            format!("{}[{}]", base_s, print_expr(index))
        }
        ExprKind::Unary(op, operand) => {
            let inner = match operand.kind {
                ExprKind::Binary(..) | ExprKind::Cond(..) => format!("({})", print_expr(operand)),
                _ => print_expr(operand),
            };
            format!("{}{}", op.symbol(), inner)
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            let l = if prec(lhs) < p { format!("({})", print_expr(lhs)) } else { print_expr(lhs) };
            let r = if prec(rhs) <= p { format!("({})", print_expr(rhs)) } else { print_expr(rhs) };
            format!("{} {} {}", l, op.symbol(), r)
        }
        ExprKind::Cond(c, t, f) => {
            let c_s = if prec(c) == 0 { format!("({})", print_expr(c)) } else { print_expr(c) };
            format!("{} ? {} : {}", c_s, print_expr(t), print_expr(f))
        }
    }
}
