// SPDX-License-Identifier: Apache-2.0

//! Name resolution and type checking.
//!
//! The result, [`TypedModule`], carries a resolved symbol for every name use
//! and a type for every expression. Lowering to [`crate::ir::CycleIr`] works
//! from this tree only.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::lang::{BinOp, ExprKind, Init, ModuleAst, Span, StmtKind, UnOp, VType};

pub type SymbolId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Input(usize),
    Output(usize),
    State(usize),
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    pub ty: VType,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: VType,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TExprKind {
    Int(u64),
    Bool(bool),
    Sym(SymbolId),
    Array(Vec<TExpr>),
    Index(Box<TExpr>, Box<TExpr>),
    Unary(UnOp, Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    Cond(Box<TExpr>, Box<TExpr>, Box<TExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TStmt {
    /// Whole-value binding of a local or output (`let`, reassignment, output definition).
    Bind { sym: SymbolId, value: TExpr, span: Span },
    /// Element write `sym[index] = value`.
    Store { sym: SymbolId, index: TExpr, value: TExpr, span: Span },
    /// Next-state write `@sym = value`.
    Next { sym: SymbolId, value: TExpr, span: Span },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypedModule {
    pub ast: ModuleAst,
    /// True iff the module declares state registers.
    pub is_sequential: bool,
    pub symbols: Vec<Symbol>,
    pub body: Vec<TStmt>,
    pub valid: TExpr,
    pub ready: TExpr,
    /// Statement execution order. The language is straight-line, so this is
    /// source order.
    pub schedule: Vec<usize>,
    /// Location of the first index that is not an integer literal.
    pub dynamic_index: Option<Span>,
}

impl TypedModule {
    pub fn name(&self) -> &str {
        &self.ast.name.name
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id]
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.symbols.iter().find(|s| s.name == name)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("{span}: undefined variable `{name}`")]
    UndefinedVariable { name: String, span: Span },
    #[error("{span}: type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String, span: Span },
    #[error("{span}: cannot assign to input `{name}`")]
    AssignToInput { name: String, span: Span },
    #[error("{span}: state register `{name}` is written with `@{name} = ...`")]
    AssignToRegister { name: String, span: Span },
    #[error("{span}: `@{name}` does not name a state register")]
    NextStateOnNonRegister { name: String, span: Span },
    #[error("{span}: output `{name}` is never assigned")]
    UnassignedOutput { name: String, span: Span },
    #[error("{span}: output `{name}` is assigned more than once")]
    OutputAssignedTwice { name: String, span: Span },
    #[error("{span}: `{name}` is read before it is assigned")]
    UseBeforeAssignment { name: String, span: Span },
    #[error("{span}: `{name}` is already declared")]
    DuplicateName { name: String, span: Span },
    #[error("{span}: index {index} is out of range for an array of length {len}")]
    IndexOutOfRange { index: u64, len: usize, span: Span },
    #[error("{span}: `{name}` is not an array")]
    NotAnArray { name: String, span: Span },
}

impl TypeError {
    pub fn span(&self) -> Span {
        match self {
            TypeError::UndefinedVariable { span, .. }
            | TypeError::TypeMismatch { span, .. }
            | TypeError::AssignToInput { span, .. }
            | TypeError::AssignToRegister { span, .. }
            | TypeError::NextStateOnNonRegister { span, .. }
            | TypeError::UnassignedOutput { span, .. }
            | TypeError::OutputAssignedTwice { span, .. }
            | TypeError::UseBeforeAssignment { span, .. }
            | TypeError::DuplicateName { span, .. }
            | TypeError::IndexOutOfRange { span, .. }
            | TypeError::NotAnArray { span, .. } => *span,
        }
    }
}

/// All diagnostics found in one module, in source order.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct Diagnostics(pub Vec<TypeError>);

impl Diagnostics {
    pub fn first(&self) -> &TypeError {
        &self.0[0]
    }
}

/// Internal failure marker: either a reportable error or a reference to a
/// symbol whose definition already failed.
enum Fail {
    Report(TypeError),
    Poisoned,
}

impl From<TypeError> for Fail {
    fn from(e: TypeError) -> Self {
        Fail::Report(e)
    }
}

struct Checker {
    symbols: Vec<Symbol>,
    scope: HashMap<String, SymbolId>,
    output_assigned: Vec<bool>,
    poisoned: HashSet<SymbolId>,
    dynamic_index: Option<Span>,
    errors: Vec<TypeError>,
}

fn mismatch(expected: impl Into<String>, found: VType, span: Span) -> TypeError {
    TypeError::TypeMismatch { expected: expected.into(), found: found.to_string(), span }
}

impl Checker {
    fn declare(&mut self, name: &str, kind: SymbolKind, ty: VType, span: Span) -> Option<SymbolId> {
        if self.scope.contains_key(name) {
            self.errors.push(TypeError::DuplicateName { name: name.to_string(), span });
            return None;
        }
        let id = self.symbols.len();
        self.symbols.push(Symbol { name: name.to_string(), kind, ty, span });
        self.scope.insert(name.to_string(), id);
        Some(id)
    }

    fn resolve(&self, name: &str, span: Span) -> Result<SymbolId, Fail> {
        let id = *self.scope.get(name).ok_or_else(|| TypeError::UndefinedVariable { name: name.to_string(), span })?;
        if self.poisoned.contains(&id) {
            return Err(Fail::Poisoned);
        }
        Ok(id)
    }

    fn expr(&mut self, e: &crate::lang::Expr) -> Result<TExpr, Fail> {
        let span = e.span;
        let (kind, ty) = match &e.kind {
            ExprKind::Int(lit) => (TExprKind::Int(lit.value), VType::Int),
            ExprKind::Bool(b) => (TExprKind::Bool(*b), VType::Bool),
            ExprKind::Var(name) => {
                let id = self.resolve(name, span)?;
                if let SymbolKind::Output(i) = self.symbols[id].kind {
                    if !self.output_assigned[i] {
                        return Err(TypeError::UseBeforeAssignment { name: name.clone(), span }.into());
                    }
                }
                (TExprKind::Sym(id), self.symbols[id].ty)
            }
            ExprKind::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    let t = self.expr(item)?;
                    if t.ty != VType::Int {
                        return Err(mismatch("int", t.ty, t.span).into());
                    }
                    out.push(t);
                }
                let n = out.len();
                (TExprKind::Array(out), VType::IntArray(n))
            }
            ExprKind::Index(base, index) => {
                let b = self.expr(base)?;
                let Some(len) = b.ty.array_len() else {
                    return Err(mismatch("array", b.ty, b.span).into());
                };
                let i = self.index(index, len)?;
                (TExprKind::Index(Box::new(b), Box::new(i)), VType::Int)
            }
            ExprKind::Unary(op, operand) => {
                let a = self.expr(operand)?;
                let want = match op {
                    UnOp::Not => VType::Bool,
                    UnOp::BitNot | UnOp::Neg => VType::Int,
                };
                if a.ty != want {
                    return Err(mismatch(want.to_string(), a.ty, a.span).into());
                }
                (TExprKind::Unary(*op, Box::new(a)), want)
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                let ty = match op {
                    BinOp::Eq | BinOp::Ne => {
                        if l.ty.array_len().is_some() {
                            return Err(mismatch("int or bool", l.ty, l.span).into());
                        }
                        if r.ty != l.ty {
                            return Err(mismatch(l.ty.to_string(), r.ty, r.span).into());
                        }
                        VType::Bool
                    }
                    BinOp::LogicAnd | BinOp::LogicOr => {
                        for side in [&l, &r] {
                            if side.ty != VType::Bool {
                                return Err(mismatch("bool", side.ty, side.span).into());
                            }
                        }
                        VType::Bool
                    }
                    _ => {
                        for side in [&l, &r] {
                            if side.ty != VType::Int {
                                return Err(mismatch("int", side.ty, side.span).into());
                            }
                        }
                        if op.is_comparison() {
                            VType::Bool
                        } else {
                            VType::Int
                        }
                    }
                };
                (TExprKind::Binary(*op, Box::new(l), Box::new(r)), ty)
            }
            ExprKind::Cond(c, t, f) => {
                let c = self.expr(c)?;
                if c.ty != VType::Bool {
                    return Err(mismatch("bool", c.ty, c.span).into());
                }
                let t = self.expr(t)?;
                let f = self.expr(f)?;
                if t.ty != f.ty {
                    return Err(mismatch(t.ty.to_string(), f.ty, f.span).into());
                }
                let ty = t.ty;
                (TExprKind::Cond(Box::new(c), Box::new(t), Box::new(f)), ty)
            }
        };
        Ok(TExpr { kind, ty, span })
    }

    fn index(&mut self, index: &crate::lang::Expr, len: usize) -> Result<TExpr, Fail> {
        let i = self.expr(index)?;
        if i.ty != VType::Int {
            return Err(mismatch("int", i.ty, i.span).into());
        }
        match index.as_const_index() {
            Some(k) if k >= len as u64 => Err(TypeError::IndexOutOfRange { index: k, len, span: index.span }.into()),
            Some(_) => Ok(i),
            None => {
                self.dynamic_index.get_or_insert(index.span);
                Ok(i)
            }
        }
    }

    fn report(&mut self, f: Fail) {
        if let Fail::Report(e) = f {
            self.errors.push(e);
        }
    }

    fn stmt(&mut self, kind: &StmtKind, span: Span) -> Option<TStmt> {
        match kind {
            StmtKind::Let { name, ty, value } => {
                let checked = self.expr(value).and_then(|v| match ty {
                    Some(want) if *want != v.ty => Err(mismatch(want.to_string(), v.ty, v.span).into()),
                    _ => Ok(v),
                });
                match checked {
                    Ok(v) => {
                        let id = self.declare(&name.name, SymbolKind::Local, v.ty, name.span)?;
                        Some(TStmt::Bind { sym: id, value: v, span })
                    }
                    Err(f) => {
                        self.report(f);
                        let ty = ty.unwrap_or(VType::Int);
                        if let Some(id) = self.declare(&name.name, SymbolKind::Local, ty, name.span) {
                            self.poisoned.insert(id);
                        }
                        None
                    }
                }
            }
            StmtKind::Assign { target, value } => {
                let r = (|| {
                    let id = self.resolve(&target.name, target.span)?;
                    let sym = self.symbols[id].clone();
                    match sym.kind {
                        SymbolKind::Input(_) => {
                            return Err(TypeError::AssignToInput { name: sym.name, span: target.span }.into())
                        }
                        SymbolKind::State(_) => {
                            return Err(TypeError::AssignToRegister { name: sym.name, span: target.span }.into())
                        }
                        SymbolKind::Output(i) if self.output_assigned[i] => {
                            return Err(TypeError::OutputAssignedTwice { name: sym.name, span: target.span }.into())
                        }
                        _ => {}
                    }
                    let v = self.expr(value)?;
                    if v.ty != sym.ty {
                        return Err(mismatch(sym.ty.to_string(), v.ty, v.span).into());
                    }
                    if let SymbolKind::Output(i) = sym.kind {
                        self.output_assigned[i] = true;
                    }
                    Ok(TStmt::Bind { sym: id, value: v, span })
                })();
                if r.is_err() {
                    // a failed definition still counts; don't also report it missing
                    if let Some(&id) = self.scope.get(&target.name) {
                        if let SymbolKind::Output(i) = self.symbols[id].kind {
                            self.output_assigned[i] = true;
                        }
                    }
                }
                r.map_err(|f| self.report(f)).ok()
            }
            StmtKind::AssignIndex { target, index, value } => {
                let r = (|| {
                    let id = self.resolve(&target.name, target.span)?;
                    let sym = self.symbols[id].clone();
                    match sym.kind {
                        SymbolKind::Input(_) => {
                            return Err(TypeError::AssignToInput { name: sym.name, span: target.span }.into())
                        }
                        SymbolKind::State(_) => {
                            return Err(TypeError::AssignToRegister { name: sym.name, span: target.span }.into())
                        }
                        SymbolKind::Output(i) if !self.output_assigned[i] => {
                            return Err(TypeError::UseBeforeAssignment { name: sym.name, span: target.span }.into())
                        }
                        _ => {}
                    }
                    let Some(len) = sym.ty.array_len() else {
                        return Err(TypeError::NotAnArray { name: sym.name, span: target.span }.into());
                    };
                    let i = self.index(index, len)?;
                    let v = self.expr(value)?;
                    if v.ty != VType::Int {
                        return Err(mismatch("int", v.ty, v.span).into());
                    }
                    Ok(TStmt::Store { sym: id, index: i, value: v, span })
                })();
                r.map_err(|f| self.report(f)).ok()
            }
            StmtKind::NextState { target, value } => {
                let r = (|| {
                    let id = match self.scope.get(&target.name) {
                        Some(&id) if matches!(self.symbols[id].kind, SymbolKind::State(_)) => id,
                        _ => {
                            return Err(TypeError::NextStateOnNonRegister {
                                name: target.name.clone(),
                                span: target.span,
                            }
                            .into())
                        }
                    };
                    let v = self.expr(value)?;
                    let ty = self.symbols[id].ty;
                    if v.ty != ty {
                        return Err(mismatch(ty.to_string(), v.ty, v.span).into());
                    }
                    Ok(TStmt::Next { sym: id, value: v, span })
                })();
                r.map_err(|f| self.report(f)).ok()
            }
        }
    }
}

fn check_init(init: &Init, ty: VType, span: Span) -> Result<(), TypeError> {
    match (init, ty) {
        (Init::Int(_), VType::Int) | (Init::Bool(_), VType::Bool) => Ok(()),
        (Init::Array(items), VType::IntArray(n)) if items.len() == n => Ok(()),
        (Init::Array(items), VType::IntArray(_)) => {
            Err(TypeError::TypeMismatch { expected: ty.to_string(), found: format!("[{}]", items.len()), span })
        }
        (other, _) => Err(TypeError::TypeMismatch {
            expected: ty.to_string(),
            found: match other {
                Init::Int(_) => "int".to_string(),
                Init::Bool(_) => "bool".to_string(),
                Init::Array(items) => format!("[{}]", items.len()),
            },
            span,
        }),
    }
}

/// Checks a parsed module and annotates it with symbols and types.
pub fn typecheck(ast: &ModuleAst) -> Result<TypedModule, Diagnostics> {
    let mut ck = Checker {
        symbols: Vec::new(),
        scope: HashMap::new(),
        output_assigned: vec![false; ast.outputs.len()],
        poisoned: HashSet::new(),
        dynamic_index: None,
        errors: Vec::new(),
    };
    for (i, s) in ast.state.iter().enumerate() {
        if let Err(e) = check_init(&s.init, s.ty, s.init_span) {
            ck.errors.push(e);
        }
        ck.declare(&s.name.name, SymbolKind::State(i), s.ty, s.name.span);
    }
    for (i, p) in ast.inputs.iter().enumerate() {
        ck.declare(&p.name.name, SymbolKind::Input(i), p.ty, p.name.span);
    }
    for (i, p) in ast.outputs.iter().enumerate() {
        ck.declare(&p.name.name, SymbolKind::Output(i), p.ty, p.name.span);
    }

    let mut body = Vec::with_capacity(ast.body.len());
    for stmt in &ast.body {
        if let Some(t) = ck.stmt(&stmt.kind, stmt.span) {
            body.push(t);
        }
    }
    for (i, p) in ast.outputs.iter().enumerate() {
        if !ck.output_assigned[i] {
            ck.errors.push(TypeError::UnassignedOutput { name: p.name.name.clone(), span: p.name.span });
        }
    }

    let trailer = |e: &crate::lang::Expr, ck: &mut Checker| -> Option<TExpr> {
        match ck.expr(e) {
            Ok(t) if t.ty == VType::Bool => Some(t),
            Ok(t) => {
                ck.errors.push(mismatch("bool", t.ty, t.span));
                None
            }
            Err(f) => {
                ck.report(f);
                None
            }
        }
    };
    let valid = trailer(&ast.valid, &mut ck);
    let ready = trailer(&ast.ready, &mut ck);

    if !ck.errors.is_empty() {
        ck.errors.sort_by_key(|e| e.span());
        return Err(Diagnostics(ck.errors));
    }
    let schedule = (0..body.len()).collect();
    Ok(TypedModule {
        ast: ast.clone(),
        is_sequential: !ast.state.is_empty(),
        symbols: ck.symbols,
        body,
        valid: valid.expect("checked"),
        ready: ready.expect("checked"),
        schedule,
        dynamic_index: ck.dynamic_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::parse_module;

    fn check(src: &str) -> Result<TypedModule, Diagnostics> {
        typecheck(&parse_module(src).unwrap())
    }

    fn first_err(src: &str) -> TypeError {
        check(src).unwrap_err().first().clone()
    }

    #[test]
    fn checksum_types() {
        let tm = check(corpus::PIPELINED_CHECKSUM).unwrap();
        assert!(tm.is_sequential);
        assert_eq!(tm.lookup("y").unwrap().ty, VType::Int);
        assert_eq!(tm.lookup("checksum_reg").unwrap().kind, SymbolKind::State(0));
        assert_eq!(tm.valid.ty, VType::Bool);
        assert_eq!(tm.schedule, (0..7).collect::<Vec<_>>());
        assert!(tm.dynamic_index.is_none());
    }

    #[test]
    fn identity_is_combinational() {
        let tm = check(corpus::ID).unwrap();
        assert!(!tm.is_sequential);
    }

    #[test]
    fn whole_corpus_checks() {
        for (name, src) in corpus::ALL {
            let tm = check(src).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(tm.name(), *name);
        }
        assert!(check(corpus::LOOKUP).unwrap().dynamic_index.is_some());
    }

    #[test]
    fn next_state_on_non_register() {
        let e = first_err("module [] m (a : int) -> (o : int) { @x = 1; o = a; } <true; true>");
        assert!(matches!(e, TypeError::NextStateOnNonRegister { ref name, .. } if name == "x"));
        let e = first_err("module [] m (a : int) -> (o : int) { @a = 1; o = a; } <true; true>");
        assert!(matches!(e, TypeError::NextStateOnNonRegister { .. }));
    }

    #[test]
    fn undefined_and_mismatch() {
        let e = first_err("module [] m (a : int) -> (o : int) { o = b; } <true; true>");
        assert!(matches!(e, TypeError::UndefinedVariable { ref name, span } if name == "b" && span.col == 42));
        let e = first_err("module [] m (a : int) -> (o : int) { o = a && true; } <true; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
        let e = first_err("module [] m (a : int) -> (o : int) { o = a; } <a; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
        let e = first_err("module [] m (a : bool) -> (o : int) { o = a ? 1 : true; } <true; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
        let e = first_err("module [] m (a : [2]) -> (o : bool) { o = a == a; } <true; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn assignment_rules() {
        let e = first_err("module [] m (a : int) -> (o : int) { a = 1; o = a; } <true; true>");
        assert!(matches!(e, TypeError::AssignToInput { .. }));
        let e = first_err("module [r : int = 0] m (a : int) -> (o : int) { r = 1; o = a; } <true; true>");
        assert!(matches!(e, TypeError::AssignToRegister { .. }));
        let e = first_err("module [] m (a : int) -> (o : int) { } <true; true>");
        assert!(matches!(e, TypeError::UnassignedOutput { ref name, .. } if name == "o"));
        let e = first_err("module [] m (a : int) -> (o : int) { o = a; o = 1; } <true; true>");
        assert!(matches!(e, TypeError::OutputAssignedTwice { .. }));
        let e = first_err("module [] m (a : int) -> (o : int, p : int) { p = o; o = a; } <true; true>");
        assert!(matches!(e, TypeError::UseBeforeAssignment { .. }));
    }

    #[test]
    fn shadowing_is_rejected() {
        let e = first_err("module [] m (a : int) -> (o : int) { let a = 1; o = a; } <true; true>");
        assert!(matches!(e, TypeError::DuplicateName { ref name, .. } if name == "a"));
        let e = first_err("module [] m (a : int) -> (o : int) { let x = 1; let x = 2; o = x; } <true; true>");
        assert!(matches!(e, TypeError::DuplicateName { .. }));
    }

    #[test]
    fn constant_index_bounds() {
        let e = first_err("module [] m (a : [2]) -> (o : int) { o = a[2]; } <true; true>");
        assert!(matches!(e, TypeError::IndexOutOfRange { index: 2, len: 2, .. }));
        let e = first_err("module [] m (a : int) -> (o : int) { o = a[0]; } <true; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn state_init_must_match_type() {
        let e = first_err("module [r : bool = 3] m (a : int) -> (o : int) { o = a; } <true; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
        let e = first_err("module [r : [3] = [1, 2]] m (a : int) -> (o : int) { o = a; } <true; true>");
        assert!(matches!(e, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn poisoned_let_does_not_cascade() {
        let errs =
            check("module [] m (a : int) -> (o : int) { let x = a && true; o = x + 1; } <x == 1; true>").unwrap_err();
        assert_eq!(errs.0.len(), 1, "{errs}");
    }
}
