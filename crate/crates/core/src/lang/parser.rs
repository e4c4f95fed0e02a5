// SPDX-License-Identifier: Apache-2.0

//! Recursive descent parser for Viscosity modules.
//!
//! ```text
//! module  := "module" "[" state,* "]" NAME "(" param,* ")" "->" "(" param,* ")"
//!            "{" stmt* "}" "<" expr ";" expr ">"
//! state   := NAME ":" type "=" init
//! param   := NAME ":" type
//! type    := "int" | "bool" | "[" INT "]"
//! stmt    := "let" NAME (":" type)? "=" expr ";"
//!          | NAME ("[" expr "]")? "=" expr ";"
//!          | "@" NAME "=" expr ";"
//! ```
//!
//! The ready expression is closed by `>`, so inside it a top-level `>` or `>=`
//! comparison has to be parenthesized.

use super::ast::*;
use super::token::{tokenize, Token, TokenKind};
use super::ParseError;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Self { tokens: tokenize(source)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        if tok.kind == TokenKind::Eof {
            ParseError::UnexpectedEof { expected: expected.to_string(), span: tok.span }
        } else {
            ParseError::Unexpected { expected: expected.to_string(), found: tok.kind.describe(), span: tok.span }
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, ParseError> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Ident, ParseError> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident::new(name, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn parse_module(&mut self) -> Result<ModuleAst, ParseError> {
        let span = self.expect(TokenKind::Module, "`module`")?.span;
        self.expect(TokenKind::LBracket, "`[` opening the state declarations")?;
        let mut state = Vec::new();
        if !self.at(&TokenKind::RBracket) {
            loop {
                state.push(self.state_decl()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBracket, "`,` or `]` after a state declaration")?;
        let name = self.ident("module name")?;
        let inputs = self.param_list("input")?;
        self.expect(TokenKind::Arrow, "`->`")?;
        let outputs = self.param_list("output")?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut body = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            if self.at(&TokenKind::Eof) {
                return Err(self.unexpected("statement or `}`"));
            }
            body.push(self.stmt()?);
        }
        self.bump();
        if !self.at(&TokenKind::Lt) {
            return Err(ParseError::MissingTrailer { span: self.peek().span });
        }
        self.bump();
        let valid = self.expr(true)?;
        self.expect(TokenKind::Semi, "`;` between valid and ready expressions")?;
        let ready = self.expr(false)?;
        self.expect(TokenKind::Gt, "`>` closing the valid/ready trailer")?;
        if !self.at(&TokenKind::Eof) {
            return Err(self.unexpected("end of input (one module per source)"));
        }
        Ok(ModuleAst { name, state, inputs, outputs, body, valid, ready, span })
    }

    fn state_decl(&mut self) -> Result<StateDecl, ParseError> {
        let name = self.ident("state register name")?;
        self.expect(TokenKind::Colon, "`:` after state register name")?;
        let ty = self.ty()?;
        if !self.eat(&TokenKind::Assign) {
            return Err(ParseError::MalformedState {
                name: name.name.clone(),
                detail: "missing `= <initial value>`".to_string(),
                span: self.peek().span,
            });
        }
        let init_span = self.peek().span;
        let init = match self.peek_kind().clone() {
            TokenKind::Int(v, radix) => {
                self.bump();
                Init::Int(IntLit { value: v, radix })
            }
            TokenKind::True => {
                self.bump();
                Init::Bool(true)
            }
            TokenKind::False => {
                self.bump();
                Init::Bool(false)
            }
            TokenKind::LBracket => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    match self.peek_kind().clone() {
                        TokenKind::Int(v, radix) => {
                            self.bump();
                            items.push(IntLit { value: v, radix });
                        }
                        _ => {
                            return Err(ParseError::MalformedState {
                                name: name.name.clone(),
                                detail: "array initializers hold integer literals".to_string(),
                                span: self.peek().span,
                            })
                        }
                    }
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                self.expect(TokenKind::RBracket, "`]` closing the initializer")?;
                Init::Array(items)
            }
            _ => {
                return Err(ParseError::MalformedState {
                    name: name.name.clone(),
                    detail: "initial value must be a literal".to_string(),
                    span: init_span,
                })
            }
        };
        Ok(StateDecl { name, ty, init, init_span })
    }

    fn param_list(&mut self, what: &str) -> Result<Vec<Param>, ParseError> {
        self.expect(TokenKind::LParen, &format!("`(` opening the {what} list"))?;
        let mut params = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                let name = self.ident(&format!("{what} name"))?;
                self.expect(TokenKind::Colon, "`:` after parameter name")?;
                let ty = self.ty()?;
                params.push(Param { name, ty });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, &format!("`,` or `)` in the {what} list"))?;
        Ok(params)
    }

    fn ty(&mut self) -> Result<VType, ParseError> {
        match self.peek_kind() {
            TokenKind::IntType => {
                self.bump();
                Ok(VType::Int)
            }
            TokenKind::BoolType => {
                self.bump();
                Ok(VType::Bool)
            }
            TokenKind::LBracket => {
                self.bump();
                let tok = self.bump();
                let len = match tok.kind {
                    TokenKind::Int(n, _) if n >= 1 && n <= u32::MAX as u64 => n as usize,
                    _ => return Err(ParseError::BadArrayLength { span: tok.span }),
                };
                self.expect(TokenKind::RBracket, "`]` closing the array type")?;
                Ok(VType::IntArray(len))
            }
            _ => Err(self.unexpected("a type (`int`, `bool`, or `[N]`)")),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.peek().span;
        let kind = match self.peek_kind().clone() {
            TokenKind::Let => {
                self.bump();
                let name = self.ident("variable name")?;
                let ty = if self.eat(&TokenKind::Colon) { Some(self.ty()?) } else { None };
                self.expect(TokenKind::Assign, "`=`")?;
                let value = self.expr(true)?;
                StmtKind::Let { name, ty, value }
            }
            TokenKind::At => {
                self.bump();
                let target = self.ident("state register name after `@`")?;
                self.expect(TokenKind::Assign, "`=`")?;
                let value = self.expr(true)?;
                StmtKind::NextState { target, value }
            }
            TokenKind::Ident(_) => {
                let target = self.ident("assignment target")?;
                if self.eat(&TokenKind::LBracket) {
                    let index = self.expr(true)?;
                    self.expect(TokenKind::RBracket, "`]`")?;
                    self.expect(TokenKind::Assign, "`=`")?;
                    let value = self.expr(true)?;
                    StmtKind::AssignIndex { target, index, value }
                } else {
                    self.expect(TokenKind::Assign, "`=`")?;
                    let value = self.expr(true)?;
                    StmtKind::Assign { target, value }
                }
            }
            _ => return Err(self.unexpected("statement")),
        };
        self.expect(TokenKind::Semi, "`;` after statement")?;
        Ok(Stmt { kind, span })
    }

    /// `allow_gt` is false while parsing the ready expression at top level.
    fn expr(&mut self, allow_gt: bool) -> Result<Expr, ParseError> {
        let cond = self.binary(1, allow_gt)?;
        if self.at(&TokenKind::Question) {
            self.bump();
            let then = self.expr(true)?;
            self.expect(TokenKind::Colon, "`:` in conditional expression")?;
            let otherwise = self.expr(allow_gt)?;
            let span = cond.span;
            return Ok(Expr::new(ExprKind::Cond(Box::new(cond), Box::new(then), Box::new(otherwise)), span));
        }
        Ok(cond)
    }

    fn binop(&self, allow_gt: bool) -> Option<BinOp> {
        Some(match self.peek_kind() {
            TokenKind::OrOr => BinOp::LogicOr,
            TokenKind::AndAnd => BinOp::LogicAnd,
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::NotEq => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt if allow_gt => BinOp::Gt,
            TokenKind::Ge if allow_gt => BinOp::Ge,
            TokenKind::Pipe => BinOp::Or,
            TokenKind::Caret => BinOp::Xor,
            TokenKind::Amp => BinOp::And,
            TokenKind::Shl => BinOp::Shl,
            TokenKind::Shr => BinOp::Shr,
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8, allow_gt: bool) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop(allow_gt) {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1, allow_gt)?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.peek().span;
        let op = match self.peek_kind() {
            TokenKind::Tilde => UnOp::BitNot,
            TokenKind::Bang => UnOp::Not,
            TokenKind::Minus => UnOp::Neg,
            _ => return self.postfix(),
        };
        self.bump();
        let operand = self.unary()?;
        Ok(Expr::new(ExprKind::Unary(op, Box::new(operand)), span))
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.at(&TokenKind::LBracket) {
            self.bump();
            let index = self.expr(true)?;
            self.expect(TokenKind::RBracket, "`]` closing the index")?;
            let span = e.span;
            e = Expr::new(ExprKind::Index(Box::new(e), Box::new(index)), span);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        let kind = match tok.kind {
            TokenKind::Int(value, radix) => {
                self.bump();
                ExprKind::Int(IntLit { value, radix })
            }
            TokenKind::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            TokenKind::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            TokenKind::Ident(name) => {
                self.bump();
                ExprKind::Var(name)
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr(true)?;
                self.expect(TokenKind::RParen, "`)`")?;
                return Ok(inner);
            }
            TokenKind::LBracket => {
                self.bump();
                let mut items = vec![self.expr(true)?];
                while self.eat(&TokenKind::Comma) {
                    items.push(self.expr(true)?);
                }
                self.expect(TokenKind::RBracket, "`,` or `]` in array literal")?;
                ExprKind::Array(items)
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr::new(kind, tok.span))
    }
}
