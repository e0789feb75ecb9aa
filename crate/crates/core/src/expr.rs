//! Closed-form scalar expressions in chart coordinates.
//!
//! Metric components and fields in spec files are written as ordinary infix
//! expressions (`(R + r*cos(u2))^2`). Coordinates are named `u1..un`; every
//! other identifier is a user parameter bound at evaluation time. `pi` and `e`
//! are reserved constants.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary minus, `^` (right
//! associative). `pow(x, y)` is accepted as a synonym for `x^y`. Implicit
//! multiplication is rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Symbol name to value map used by [`eval`].
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryOp {
    fn function(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 4,
        }
    }
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Symbol(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error in `{subexpr}`: {message}")]
    Domain { subexpr: String, message: String },
}

impl Expr {
    /// Every symbol occurring in the tree.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Symbol(s) => {
                out.insert(s.clone());
            }
            Expr::Unary(_, a) => a.collect_symbols(out),
            Expr::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => NEG_PRECEDENCE,
            Expr::Const(_) | Expr::Symbol(_) => ATOM_PRECEDENCE,
            Expr::Unary(UnaryOp::Neg, _) => NEG_PRECEDENCE,
            Expr::Unary(_, _) => ATOM_PRECEDENCE,
            Expr::Binary(op, _, _) => op.precedence(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Symbol(s) => f.write_str(s),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                wrapped(f, a, a.precedence() < NEG_PRECEDENCE)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let (left_parens, right_parens) = if *op == BinaryOp::Pow {
                    (a.precedence() <= p, b.precedence() < p)
                } else {
                    (a.precedence() < p, b.precedence() <= p)
                };
                wrapped(f, a, left_parens)?;
                f.write_str(op.symbol())?;
                wrapped(f, b, right_parens)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Punct(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Exponent only if well formed; otherwise `e` is left for the next token.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let value: f64 = text[start..i].parse().map_err(|_| ExprError::Syntax {
                offset: start,
                message: "malformed number".into(),
            })?;
            if !value.is_finite() {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: "numeric literal out of range".into(),
                });
            }
            out.push((Token::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Token::Ident(text[start..i].to_string()), start));
        } else if b"+-*/^(),".contains(&c) {
            out.push((Token::Punct(c as char), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ExprError::Syntax {
                offset: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ExprError {
        let message = match self.peek() {
            Token::End => "unexpected end of input".to_string(),
            Token::Num(v) => format!("unexpected number `{v}`"),
            Token::Ident(s) => format!("unexpected identifier `{s}`"),
            Token::Punct(c) => format!("unexpected `{c}`"),
        };
        ExprError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Token::Punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Punct('+') => BinaryOp::Add,
                Token::Punct('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Punct('*') => BinaryOp::Mul,
                Token::Punct('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Token::Punct('-') => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Token::Punct('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Token::Punct('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.peek().clone() {
            Token::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Token::Punct('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                if *self.peek() == Token::Punct('(') {
                    self.bump();
                    let first = self.expr()?;
                    if name == "pow" {
                        self.expect(',')?;
                        let second = self.expr()?;
                        self.expect(')')?;
                        return Ok(Expr::Binary(BinaryOp::Pow, Box::new(first), Box::new(second)));
                    }
                    let op = UnaryOp::function(&name)
                        .ok_or(ExprError::UnknownFunction { name, offset })?;
                    self.expect(')')?;
                    return Ok(Expr::Unary(op, Box::new(first)));
                }
                Ok(match name.as_str() {
                    "pi" => Expr::Const(std::f64::consts::PI),
                    "e" => Expr::Const(std::f64::consts::E),
                    _ => Expr::Symbol(name),
                })
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses a single infix expression.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let e = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected());
    }
    Ok(e)
}

/// Value domain an expression can be evaluated over.
///
/// Implemented for plain `f64` (through [`eval`]) and for whole sampled fields,
/// so that a metric component expression evaluates over every node of a chart
/// in one pass.
pub trait ExprAlgebra {
    type Value;

    fn constant(&self, c: f64) -> Self::Value;
    fn symbol(&self, name: &str) -> Option<Self::Value>;
    fn unary(&self, op: UnaryOp, a: &Self::Value) -> Self::Value;
    fn binary(&self, op: BinaryOp, a: &Self::Value, b: &Self::Value) -> Self::Value;
    /// True when `pred` holds for the point value at every sample.
    fn all(&self, v: &Self::Value, pred: &dyn Fn(f64) -> bool) -> bool;
    /// True when the value (and all its derivative data) is finite everywhere.
    fn finite(&self, v: &Self::Value) -> bool;
}

fn domain(e: &Expr, message: &str) -> ExprError {
    ExprError::Domain {
        subexpr: e.to_string(),
        message: message.to_string(),
    }
}

/// Evaluates `e` over an arbitrary [`ExprAlgebra`].
pub fn eval_in<A: ExprAlgebra>(e: &Expr, alg: &A) -> Result<A::Value, ExprError> {
    let value = match e {
        Expr::Const(c) => alg.constant(*c),
        Expr::Symbol(s) => alg.symbol(s).ok_or_else(|| ExprError::Unbound(s.clone()))?,
        Expr::Unary(op, a) => {
            let a = eval_in(a, alg)?;
            match op {
                UnaryOp::Log if !alg.all(&a, &|x| x > 0.0) => {
                    return Err(domain(e, "log of nonpositive value"))
                }
                UnaryOp::Sqrt if !alg.all(&a, &|x| x >= 0.0) => {
                    return Err(domain(e, "square root of negative value"))
                }
                _ => {}
            }
            alg.unary(*op, &a)
        }
        Expr::Binary(op, a, b) => {
            let a = eval_in(a, alg)?;
            let b = eval_in(b, alg)?;
            if *op == BinaryOp::Div && !alg.all(&b, &|x| x != 0.0) {
                return Err(domain(e, "division by zero"));
            }
            alg.binary(*op, &a, &b)
        }
    };
    if !alg.finite(&value) {
        return Err(domain(e, "non-finite result"));
    }
    Ok(value)
}

struct PointAlgebra<'a> {
    bindings: &'a Bindings,
}

pub(crate) fn apply_unary(op: UnaryOp, a: f64) -> f64 {
    match op {
        UnaryOp::Neg => -a,
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Tan => a.tan(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Log => a.ln(),
        UnaryOp::Sqrt => a.sqrt(),
        UnaryOp::Abs => a.abs(),
    }
}

pub(crate) fn apply_binary(op: BinaryOp, a: f64, b: f64) -> f64 {
    match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a / b,
        BinaryOp::Pow => a.powf(b),
    }
}

impl ExprAlgebra for PointAlgebra<'_> {
    type Value = f64;

    fn constant(&self, c: f64) -> f64 {
        c
    }

    fn symbol(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }

    fn unary(&self, op: UnaryOp, a: &f64) -> f64 {
        apply_unary(op, *a)
    }

    fn binary(&self, op: BinaryOp, a: &f64, b: &f64) -> f64 {
        apply_binary(op, *a, *b)
    }

    fn all(&self, v: &f64, pred: &dyn Fn(f64) -> bool) -> bool {
        pred(*v)
    }

    fn finite(&self, v: &f64) -> bool {
        v.is_finite()
    }
}

/// Evaluates `e` with every free symbol taken from `b`.
pub fn eval(e: &Expr, b: &Bindings) -> Result<f64, ExprError> {
    eval_in(e, &PointAlgebra { bindings: b })
}
