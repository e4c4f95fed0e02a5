// SPDX-License-Identifier: Apache-2.0

//! Lexing, parsing and pretty-printing of Viscosity source.

pub mod ast;
mod parser;
mod printer;
mod token;

use thiserror::Error;

pub use ast::*;
pub use parser::Parser;
pub use printer::{pretty_print, print_expr, print_trailer_expr};
pub use token::{tokenize, Token, TokenKind};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{span}: expected {expected}, found {found}")]
    Unexpected { expected: String, found: String, span: Span },
    #[error("{span}: unexpected end of input, expected {expected}")]
    UnexpectedEof { expected: String, span: Span },
    #[error("{span}: missing `<valid; ready>` trailer after module body")]
    MissingTrailer { span: Span },
    #[error("{span}: malformed state declaration `{name}`: {detail}")]
    MalformedState { name: String, detail: String, span: Span },
    #[error("{span}: operator `{op}` is not supported")]
    UnsupportedOperator { op: String, span: Span },
    #[error("{span}: unexpected character `{ch}`")]
    UnexpectedChar { ch: char, span: Span },
    #[error("{span}: malformed integer literal")]
    MalformedLiteral { span: Span },
    #[error("{span}: integer literal does not fit in 64 bits")]
    LiteralOutOfRange { span: Span },
    #[error("{span}: array length must be a positive integer literal")]
    BadArrayLength { span: Span },
    #[error("{span}: identifier `{name}` is reserved (contains `__`)")]
    ReservedIdentifier { name: String, span: Span },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Unexpected { span, .. }
            | ParseError::UnexpectedEof { span, .. }
            | ParseError::MissingTrailer { span }
            | ParseError::MalformedState { span, .. }
            | ParseError::UnsupportedOperator { span, .. }
            | ParseError::UnexpectedChar { span, .. }
            | ParseError::MalformedLiteral { span }
            | ParseError::LiteralOutOfRange { span }
            | ParseError::BadArrayLength { span }
            | ParseError::ReservedIdentifier { span, .. } => *span,
        }
    }
}

/// Parses a source file holding exactly one module.
pub fn parse_module(source: &str) -> Result<ModuleAst, ParseError> {
    Parser::new(source)?.parse_module()
}
