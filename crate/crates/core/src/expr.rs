//! Scalar expressions over the variables `t`, `u` and `v`.
//!
//! The right-hand side `f(t, u, v)`, the delay map `phi(t)` and optional exact
//! solutions are all written as small formulas. This module parses them into an
//! immutable tree and evaluates that tree with domain checking.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?          right associative
//! atom    := number | constant | variable | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-t^2` is `-(t^2)` and `2^3^2` is
//! `2^(3^2)`. There is no implicit multiplication: `2t` is rejected.
//!
//! ```
//! use greenfde::expr::{parse, Var};
//!
//! let f = parse("e^t - 1/4*u + 1/4*v^2", &[Var::T, Var::U, Var::V]).unwrap();
//! assert_eq!(f.eval(0.0, 1.0, 1.0).unwrap(), 1.0);
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A free variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    T,
    U,
    V,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
            Var::V => "v",
        }
    }

    fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "u" => Some(Var::U),
            "v" => Some(Var::V),
            _ => None,
        }
    }
}

/// Variables admitted by `f(t, u, v)`.
pub const NONLINEARITY_VARS: &[Var] = &[Var::T, Var::U, Var::V];
/// Variables admitted by the delay map and exact solutions.
pub const TIME_VARS: &[Var] = &[Var::T];
/// No variables at all (boundary data, interval length).
pub const NO_VARS: &[Var] = &[];

/// Built-in functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

/// Registry of callable function names.
const FUNCTIONS: &[(&str, Func)] = &[
    ("sin", Func::Sin),
    ("cos", Func::Cos),
    ("exp", Func::Exp),
    ("log", Func::Log),
    ("sqrt", Func::Sqrt),
    ("abs", Func::Abs),
];

/// Named constants, substituted by value at parse time.
const CONSTANTS: &[(&str, f64)] = &[("pi", std::f64::consts::PI), ("e", std::f64::consts::E)];

impl Func {
    pub fn name(self) -> &'static str {
        FUNCTIONS
            .iter()
            .find(|(_, f)| *f == self)
            .map(|(n, _)| *n)
            .expect("every Func is registered")
    }

    fn lookup(name: &str) -> Option<Func> {
        FUNCTIONS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Abs => Ok(x.abs()),
            Func::Log if x <= 0.0 => Err(EvalError::Domain {
                op: "log",
                arg: x,
            }),
            Func::Log => Ok(x.ln()),
            Func::Sqrt if x < 0.0 => Err(EvalError::Domain {
                op: "sqrt",
                arg: x,
            }),
            Func::Sqrt => Ok(x.sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (byte {0})")]
    InvalidUtf8(usize),
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {ch:?} at position {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected {found} at position {pos}, expected {expected}")]
    Unexpected {
        pos: usize,
        found: String,
        expected: &'static str,
    },
    #[error("malformed number {text:?} at position {pos}")]
    BadNumber { pos: usize, text: String },
    #[error("unknown identifier {name:?} at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable {name:?} at position {pos} is not allowed here (allowed: {allowed})")]
    VariableNotAllowed {
        pos: usize,
        name: String,
        allowed: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{op} is undefined at {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("{base}^{exponent} is not a real number")]
    Power { base: f64, exponent: f64 },
    #[error("result is not finite")]
    NonFinite,
}

impl Expr {
    /// Evaluate at `(t, u, v)`. Variables the expression does not use are ignored.
    pub fn eval(&self, t: f64, u: f64, v: f64) -> Result<f64, EvalError> {
        let x = match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::U) => u,
            Expr::Var(Var::V) => v,
            Expr::Neg(e) => -e.eval(t, u, v)?,
            Expr::Call(f, e) => f.apply(e.eval(t, u, v)?)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval(t, u, v)?;
                let b = r.eval(t, u, v)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(EvalError::DivisionByZero),
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b)?,
                }
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluate an expression of `t` alone.
    pub fn eval_t(&self, t: f64) -> Result<f64, EvalError> {
        self.eval(t, 0.0, 0.0)
    }

    /// Whether `var` occurs anywhere in the tree.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(x) => *x == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Binary(_, l, r) => l.uses(var) || r.uses(var),
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    // Small integer exponents go through powi so that u^2 is exactly u*u.
    let x = if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    };
    if x.is_nan() {
        Err(EvalError::Power { base, exponent })
    } else {
        Ok(x)
    }
}

/// Canonical serializer: every compound subterm is parenthesized, so the output
/// reparses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// Serialized as its canonical text form.
impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parse `source`, admitting only the variables in `allowed`.
pub fn parse(source: &str, allowed: &[Var]) -> Result<Expr, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        allowed,
        end: source.len(),
    };
    if parser.peek().is_none() {
        return Err(ParseError::Empty);
    }
    let expr = parser.expr()?;
    match parser.next() {
        None => Ok(expr),
        Some(tok) => Err(ParseError::Unexpected {
            pos: tok.pos,
            found: tok.kind.describe(),
            expected: "an operator or end of input",
        }),
    }
}

/// Parse raw bytes; invalid UTF-8 is reported as an error rather than a panic.
pub fn parse_bytes(source: &[u8], allowed: &[Var]) -> Result<Expr, ParseError> {
    let text = std::str::from_utf8(source).map_err(|e| ParseError::InvalidUtf8(e.valid_up_to()))?;
    parse(text, allowed)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(x) => format!("number {x}"),
            TokenKind::Ident(s) => format!("identifier {s:?}"),
            TokenKind::Op(c) => format!("operator {c:?}"),
            TokenKind::LParen => "'('".to_string(),
            TokenKind::RParen => "')'".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token {
                    kind: TokenKind::Op(c as char),
                    pos: start,
                });
                i += 1;
            }
            b'(' | b')' => {
                let kind = if c == b'(' {
                    TokenKind::LParen
                } else {
                    TokenKind::RParen
                };
                tokens.push(Token { kind, pos: start });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Exponent only when followed by a digit, so "2e" stays a syntax error
                // rather than silently swallowing the constant e.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::BadNumber {
                    pos: start,
                    text: text.to_string(),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    pos: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[start..i].to_string()),
                    pos: start,
                });
            }
            _ => {
                let ch = source[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::UnexpectedChar { pos: start, ch });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    allowed: &'a [Var],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.tokens.get(self.pos) {
            Some(tok) => ParseError::Unexpected {
                pos: tok.pos,
                found: tok.kind.describe(),
                expected,
            },
            None => ParseError::Unexpected {
                pos: self.end,
                found: "end of input".to_string(),
                expected,
            },
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(TokenKind::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Expr::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.tokens.get(self.pos).cloned() else {
            return Err(self.unexpected("a number, variable, function or '('"));
        };
        match tok.kind {
            TokenKind::Number(x) => {
                self.pos += 1;
                Ok(Expr::Const(x))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::lookup(&name) {
                    if self.peek() != Some(&TokenKind::LParen) {
                        return Err(self.unexpected("'(' after function name"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some((_, value)) = CONSTANTS.iter().find(|(n, _)| *n == name) {
                    return Ok(Expr::Const(*value));
                }
                match Var::from_name(&name) {
                    Some(var) if self.allowed.contains(&var) => Ok(Expr::Var(var)),
                    Some(_) => Err(ParseError::VariableNotAllowed {
                        pos: tok.pos,
                        name,
                        allowed: self
                            .allowed
                            .iter()
                            .map(|v| v.name())
                            .collect::<Vec<_>>()
                            .join(", "),
                    }),
                    None => Err(ParseError::UnknownIdentifier { pos: tok.pos, name }),
                }
            }
            _ => Err(self.unexpected("a number, variable, function or '('")),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        if self.peek() == Some(&TokenKind::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected("')'"))
        }
    }
}
