// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for Viscosity source text.

use std::fmt;

use super::ParseError;

/// A 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Radix {
    Dec,
    Hex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(u64, Radix),
    // keywords
    Module,
    Let,
    IntType,
    BoolType,
    True,
    False,
    // punctuation
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Arrow,
    At,
    Question,
    Assign,
    // operators
    Amp,
    Pipe,
    Caret,
    Plus,
    Minus,
    Star,
    Shl,
    Shr,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Tilde,
    Bang,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Int(v, Radix::Hex) => format!("literal `{v:#x}`"),
            TokenKind::Int(v, Radix::Dec) => format!("literal `{v}`"),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Module => "module",
            TokenKind::Let => "let",
            TokenKind::IntType => "int",
            TokenKind::BoolType => "bool",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Semi => ";",
            TokenKind::Arrow => "->",
            TokenKind::At => "@",
            TokenKind::Question => "?",
            TokenKind::Assign => "=",
            TokenKind::Amp => "&",
            TokenKind::Pipe => "|",
            TokenKind::Caret => "^",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Shl => "<<",
            TokenKind::Shr => ">>",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Tilde => "~",
            TokenKind::Bang => "!",
            TokenKind::Ident(_) | TokenKind::Int(..) | TokenKind::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

/// Splits source text into tokens. The final token is always `Eof`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, col: 1 };
    let mut tokens = Vec::new();
    loop {
        // whitespace and comments; CR is treated as whitespace so CRLF input lexes like LF
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' {
                let span = cur.span();
                cur.bump();
                if cur.eat('/') {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                } else {
                    return Err(ParseError::UnsupportedOperator { op: "/".to_string(), span });
                }
            } else {
                break;
            }
        }
        let span = cur.span();
        let Some(c) = cur.bump() else {
            tokens.push(Token { kind: TokenKind::Eof, span });
            return Ok(tokens);
        };
        let kind = match c {
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            ':' => TokenKind::Colon,
            ';' => TokenKind::Semi,
            '@' => TokenKind::At,
            '?' => TokenKind::Question,
            '^' => TokenKind::Caret,
            '+' => TokenKind::Plus,
            '*' => TokenKind::Star,
            '~' => TokenKind::Tilde,
            '-' if cur.eat('>') => TokenKind::Arrow,
            '-' => TokenKind::Minus,
            '=' if cur.eat('=') => TokenKind::EqEq,
            '=' => TokenKind::Assign,
            '!' if cur.eat('=') => TokenKind::NotEq,
            '!' => TokenKind::Bang,
            '&' if cur.eat('&') => TokenKind::AndAnd,
            '&' => TokenKind::Amp,
            '|' if cur.eat('|') => TokenKind::OrOr,
            '|' => TokenKind::Pipe,
            '<' if cur.eat('<') => TokenKind::Shl,
            '<' if cur.eat('=') => TokenKind::Le,
            '<' => TokenKind::Lt,
            '>' if cur.eat('>') => TokenKind::Shr,
            '>' if cur.eat('=') => TokenKind::Ge,
            '>' => TokenKind::Gt,
            '%' => return Err(ParseError::UnsupportedOperator { op: "%".to_string(), span }),
            c if c.is_ascii_digit() => lex_number(&mut cur, c, span)?,
            c if c.is_ascii_alphabetic() => {
                let mut text = String::from(c);
                while let Some(n) = cur.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        text.push(n);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                keyword_or_ident(text, span)?
            }
            other => {
                return Err(ParseError::UnexpectedChar { ch: other, span });
            }
        };
        tokens.push(Token { kind, span });
    }
}

fn keyword_or_ident(text: String, span: Span) -> Result<TokenKind, ParseError> {
    Ok(match text.as_str() {
        "module" => TokenKind::Module,
        "let" => TokenKind::Let,
        "int" => TokenKind::IntType,
        "bool" => TokenKind::BoolType,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        // `__` is reserved for names the emitters generate
        _ if text.contains("__") => {
            return Err(ParseError::ReservedIdentifier { name: text, span });
        }
        _ => TokenKind::Ident(text),
    })
}

fn lex_number(cur: &mut Cursor<'_>, first: char, span: Span) -> Result<TokenKind, ParseError> {
    let hex = first == '0' && matches!(cur.peek(), Some('x') | Some('X'));
    let mut digits = String::new();
    if hex {
        cur.bump();
    } else {
        digits.push(first);
    }
    while let Some(c) = cur.peek() {
        if c == '_' {
            cur.bump();
        } else if (hex && c.is_ascii_hexdigit()) || (!hex && c.is_ascii_digit()) {
            digits.push(c);
            cur.bump();
        } else if c.is_ascii_alphanumeric() {
            return Err(ParseError::MalformedLiteral { span });
        } else {
            break;
        }
    }
    if digits.is_empty() {
        return Err(ParseError::MalformedLiteral { span });
    }
    let (radix, base) = if hex { (Radix::Hex, 16) } else { (Radix::Dec, 10) };
    u64::from_str_radix(&digits, base)
        .map(|v| TokenKind::Int(v, radix))
        .map_err(|_| ParseError::LiteralOutOfRange { span })
}
