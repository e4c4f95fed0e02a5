// SPDX-License-Identifier: Apache-2.0

//! Syntax tree for a single Viscosity module.
//!
//! Every node keeps the [`Span`] it was parsed from. Parentheses are not
//! represented; the printer reintroduces them from operator precedence.

use std::fmt;

pub use super::token::{Radix, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Self { name: name.into(), span }
    }
}

/// Value types. `Int` is a 64-bit unsigned word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VType {
    Int,
    Bool,
    IntArray(usize),
}

impl VType {
    /// Width in bits once flattened onto a hardware port.
    pub fn bit_width(self) -> usize {
        match self {
            VType::Int => 64,
            VType::Bool => 1,
            VType::IntArray(n) => 64 * n,
        }
    }

    pub fn array_len(self) -> Option<usize> {
        match self {
            VType::IntArray(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for VType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VType::Int => f.write_str("int"),
            VType::Bool => f.write_str("bool"),
            VType::IntArray(n) => write!(f, "[{n}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntLit {
    pub value: u64,
    pub radix: Radix,
}

impl IntLit {
    pub fn dec(value: u64) -> Self {
        Self { value, radix: Radix::Dec }
    }

    pub fn hex(value: u64) -> Self {
        Self { value, radix: Radix::Hex }
    }
}

impl fmt::Display for IntLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.radix {
            Radix::Dec => write!(f, "{}", self.value),
            Radix::Hex => write!(f, "{:#x}", self.value),
        }
    }
}

/// Initial value of a state register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Init {
    Int(IntLit),
    Bool(bool),
    Array(Vec<IntLit>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: VType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateDecl {
    pub name: Ident,
    pub ty: VType,
    pub init: Init,
    pub init_span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// `~` bitwise complement
    BitNot,
    /// `!` boolean negation
    Not,
    /// `-` wrapping negation
    Neg,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::BitNot => "~",
            UnOp::Not => "!",
            UnOp::Neg => "-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Mul,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogicAnd,
    LogicOr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Xor => "^",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::LogicAnd => "&&",
            BinOp::LogicOr => "||",
        }
    }

    /// Binding strength; larger binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::LogicOr => 1,
            BinOp::LogicAnd => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Or => 4,
            BinOp::Xor => 5,
            BinOp::And => 6,
            BinOp::Shl | BinOp::Shr => 7,
            BinOp::Add | BinOp::Sub => 8,
            BinOp::Mul => 9,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::LogicAnd | BinOp::LogicOr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(IntLit),
    Bool(bool),
    Var(String),
    /// `[e0, e1, ...]`
    Array(Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `cond ? then : else`
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    /// True for a bare integer literal, the only form accepted as a constant index.
    pub fn as_const_index(&self) -> Option<u64> {
        match self.kind {
            ExprKind::Int(lit) => Some(lit.value),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    /// `let name [: type] = value;`
    Let { name: Ident, ty: Option<VType>, value: Expr },
    /// `name = value;`
    Assign { target: Ident, value: Expr },
    /// `name[index] = value;`
    AssignIndex { target: Ident, index: Expr, value: Expr },
    /// `@name = value;`
    NextState { target: Ident, value: Expr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleAst {
    pub name: Ident,
    pub state: Vec<StateDecl>,
    pub inputs: Vec<Param>,
    pub outputs: Vec<Param>,
    pub body: Vec<Stmt>,
    pub valid: Expr,
    pub ready: Expr,
    pub span: Span,
}

impl ModuleAst {
    /// Returns a copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> ModuleAst {
        let mut m = self.clone();
        m.erase_spans();
        m
    }

    fn erase_spans(&mut self) {
        let z = Span::default();
        self.span = z;
        self.name.span = z;
        for s in &mut self.state {
            s.name.span = z;
            s.init_span = z;
        }
        for p in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            p.name.span = z;
        }
        for stmt in &mut self.body {
            stmt.span = z;
            match &mut stmt.kind {
                StmtKind::Let { name, value, .. } => {
                    name.span = z;
                    erase_expr(value);
                }
                StmtKind::Assign { target, value } | StmtKind::NextState { target, value } => {
                    target.span = z;
                    erase_expr(value);
                }
                StmtKind::AssignIndex { target, index, value } => {
                    target.span = z;
                    erase_expr(index);
                    erase_expr(value);
                }
            }
        }
        erase_expr(&mut self.valid);
        erase_expr(&mut self.ready);
    }
}

fn erase_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
        ExprKind::Array(items) => items.iter_mut().for_each(erase_expr),
        ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
            erase_expr(a);
            erase_expr(b);
        }
        ExprKind::Unary(_, a) => erase_expr(a),
        ExprKind::Cond(a, b, c) => {
            erase_expr(a);
            erase_expr(b);
            erase_expr(c);
        }
    }
}
