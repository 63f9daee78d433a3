//! A small expression language in `t` (or `x`, `y`) evaluated over jets.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)* ;
//! term   := factor (("*" | "/") factor)* ;
//! factor := "-" factor | base ("^" int)? ;
//! base   := number | "t" | "x" | "y" | "pi" | fn "(" expr ")" | "(" expr ")" ;
//! fn     := "sin" | "cos" | "exp" | "sqrt" | "atan" ;
//! ```
//!
//! Unary minus binds looser than `^`, so `-t^2` reads as `-(t^2)`. There is
//! no implicit multiplication and exponents are non-negative integer literals.

use std::fmt;
use std::ops;

use thiserror::Error;

use crate::taylor::{BiJet2, JetError, TaylorJet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
    Y,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::T => "t",
            Var::X => "x",
            Var::Y => "y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Atan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Pi,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, u32),
}

/// Declared variable set of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// Only `t` may appear.
    OneVar,
    /// Only `x` and `y` may appear.
    TwoVar,
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arity::OneVar => "one-variable",
            Arity::TwoVar => "two-variable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable '{name}' at byte {offset} is not allowed in a {arity} expression")]
    WrongArity {
        offset: usize,
        name: String,
        arity: Arity,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::WrongArity { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("variable '{0}' is not bound in this context")]
    Unbound(Var),
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Num { value: f64, text: &'a str },
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    tok: Tok<'a>,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            tokens.push(Token { tok, offset: start });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
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
            let slice = &text[start..i];
            let value: f64 = slice
                .parse()
                .map_err(|_| syntax(start, format!("malformed number '{slice}'")))?;
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(syntax(
                    i,
                    "implicit multiplication is not supported; insert '*'",
                ));
            }
            tokens.push(Token {
                tok: Tok::Num { value, text: slice },
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(&text[start..i]),
                offset: start,
            });
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(syntax(start, format!("unexpected character '{ch}'")));
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        offset: text.len(),
    });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    arity: Arity,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Token<'a> {
        self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token<'a> {
        let tok = self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        let base = self.base()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let tok = self.bump();
        match tok.tok {
            Tok::Num { text, .. } if text.bytes().all(|b| b.is_ascii_digit()) => {
                let exponent: u32 = text
                    .parse()
                    .map_err(|_| syntax(tok.offset, format!("exponent '{text}' is too large")))?;
                Ok(Expr::PowInt(Box::new(base), exponent))
            }
            _ => Err(syntax(
                tok.offset,
                "exponent must be a non-negative integer literal",
            )),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let tok = self.bump();
        match tok.tok {
            Tok::Num { value, .. } => Ok(Expr::Number(value)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(tok.offset)?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, tok.offset),
            Tok::Eof => Err(syntax(tok.offset, "unexpected end of input")),
            other => Err(syntax(tok.offset, format!("unexpected {}", describe(other)))),
        }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<(), ParseError> {
        let tok = self.bump();
        if tok.tok == Tok::RParen {
            Ok(())
        } else {
            Err(syntax(
                tok.offset,
                format!("expected ')' to close '(' at byte {open}"),
            ))
        }
    }

    fn identifier(&mut self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        let var = match name {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            _ => None,
        };
        if let Some(var) = var {
            let allowed = match self.arity {
                Arity::OneVar => var == Var::T,
                Arity::TwoVar => var != Var::T,
            };
            if !allowed {
                return Err(ParseError::WrongArity {
                    offset,
                    name: name.to_string(),
                    arity: self.arity,
                });
            }
            return Ok(Expr::Var(var));
        }
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        let op = match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "sqrt" => UnaryOp::Sqrt,
            "atan" => UnaryOp::Atan,
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    offset,
                    name: name.to_string(),
                })
            }
        };
        let open = self.bump();
        if open.tok != Tok::LParen {
            return Err(syntax(open.offset, format!("expected '(' after '{name}'")));
        }
        let arg = self.expr()?;
        self.expect_rparen(open.offset)?;
        Ok(Expr::Unary(op, Box::new(arg)))
    }
}

fn describe(tok: Tok<'_>) -> String {
    match tok {
        Tok::Num { text, .. } => format!("number '{text}'"),
        Tok::Ident(name) => format!("identifier '{name}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses `text` under the declared variable set.
pub fn parse_expr(text: &str, arity: Arity) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        arity,
    };
    let expr = parser.expr()?;
    let next = parser.peek();
    if next.tok != Tok::Eof {
        return Err(syntax(
            next.offset,
            format!("unexpected {} after expression", describe(next.tok)),
        ));
    }
    Ok(expr)
}

/// Canonical fully-parenthesized text; parses back to the same tree.
pub fn pretty_print(expr: &Expr) -> String {
    expr.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Unary(UnaryOp::Neg, c) => write!(f, "(-{c})"),
            Expr::Unary(op, c) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Atan => "atan",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({c})")
            }
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::PowInt(c, n) => write!(f, "({c}^{n})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Number systems an expression can be evaluated in.
pub trait Algebra: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, JetError>;
    fn neg(&self) -> Self;
    fn powi(&self, n: u32) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Result<Self, JetError>;
    fn atan(&self) -> Self;
}

/// Variable bindings and constant construction for one evaluation.
pub trait Env<A> {
    fn var(&self, v: Var) -> Result<A, EvalError>;
    fn constant(&self, c: f64) -> A;
}

impl Algebra for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        if *o == 0.0 {
            Err(JetError::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        if *self < 0.0 {
            Err(JetError::SqrtDomain(*self))
        } else {
            Ok(f64::sqrt(*self))
        }
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
}

impl Algebra for TaylorJet {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_jet(o)
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        self.div_jet(o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn powi(&self, n: u32) -> Self {
        TaylorJet::powi(self, n)
    }
    fn sin(&self) -> Self {
        TaylorJet::sin(self)
    }
    fn cos(&self) -> Self {
        TaylorJet::cos(self)
    }
    fn exp(&self) -> Self {
        TaylorJet::exp(self)
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        TaylorJet::sqrt(self)
    }
    fn atan(&self) -> Self {
        TaylorJet::atan(self)
    }
}

impl Algebra for BiJet2 {
    fn add(&self, o: &Self) -> Self {
        BiJet2::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        BiJet2::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        BiJet2::mul(self, o)
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        BiJet2::div(self, o)
    }
    fn neg(&self) -> Self {
        BiJet2::neg(self)
    }
    fn powi(&self, n: u32) -> Self {
        BiJet2::powi(self, n)
    }
    fn sin(&self) -> Self {
        BiJet2::sin(self)
    }
    fn cos(&self) -> Self {
        BiJet2::cos(self)
    }
    fn exp(&self) -> Self {
        BiJet2::exp(self)
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        BiJet2::sqrt(self)
    }
    fn atan(&self) -> Self {
        BiJet2::atan(self)
    }
}

struct PointEnv {
    t: Option<f64>,
    xy: Option<(f64, f64)>,
}

impl Env<f64> for PointEnv {
    fn var(&self, v: Var) -> Result<f64, EvalError> {
        match (v, self.t, self.xy) {
            (Var::T, Some(t), _) => Ok(t),
            (Var::X, _, Some((x, _))) => Ok(x),
            (Var::Y, _, Some((_, y))) => Ok(y),
            _ => Err(EvalError::Unbound(v)),
        }
    }
    fn constant(&self, c: f64) -> f64 {
        c
    }
}

struct JetEnv {
    t0: f64,
    order: usize,
}

impl Env<TaylorJet> for JetEnv {
    fn var(&self, v: Var) -> Result<TaylorJet, EvalError> {
        match v {
            Var::T => Ok(TaylorJet::variable(self.t0, self.order)),
            other => Err(EvalError::Unbound(other)),
        }
    }
    fn constant(&self, c: f64) -> TaylorJet {
        TaylorJet::constant(c, self.order)
    }
}

struct BiJetEnv {
    x0: f64,
    y0: f64,
}

impl Env<BiJet2> for BiJetEnv {
    fn var(&self, v: Var) -> Result<BiJet2, EvalError> {
        match v {
            Var::X => Ok(BiJet2::var_x(self.x0)),
            Var::Y => Ok(BiJet2::var_y(self.y0)),
            Var::T => Err(EvalError::Unbound(v)),
        }
    }
    fn constant(&self, c: f64) -> BiJet2 {
        BiJet2::constant(c)
    }
}

impl Expr {
    /// Evaluates the tree in an arbitrary algebra.
    pub fn evaluate<A: Algebra, E: Env<A>>(&self, env: &E) -> Result<A, EvalError> {
        Ok(match self {
            Expr::Number(v) => env.constant(*v),
            Expr::Pi => env.constant(std::f64::consts::PI),
            Expr::Var(v) => env.var(*v)?,
            Expr::Unary(op, c) => {
                let c = c.evaluate(env)?;
                match op {
                    UnaryOp::Neg => c.neg(),
                    UnaryOp::Sin => c.sin(),
                    UnaryOp::Cos => c.cos(),
                    UnaryOp::Exp => c.exp(),
                    UnaryOp::Sqrt => c.sqrt()?,
                    UnaryOp::Atan => c.atan(),
                }
            }
            Expr::Binary(op, l, r) => {
                let l = l.evaluate(env)?;
                let r = r.evaluate(env)?;
                match op {
                    BinaryOp::Add => l.add(&r),
                    BinaryOp::Sub => l.sub(&r),
                    BinaryOp::Mul => l.mul(&r),
                    BinaryOp::Div => l.div(&r)?,
                }
            }
            Expr::PowInt(c, n) => c.evaluate(env)?.powi(*n),
        })
    }

    /// Plain evaluation of a univariate expression.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        self.evaluate(&PointEnv {
            t: Some(t),
            xy: None,
        })
    }

    /// Plain evaluation of a bivariate expression.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self.evaluate(&PointEnv {
            t: None,
            xy: Some((x, y)),
        })
    }

    pub fn eval_jet(&self, t0: f64, order: usize) -> Result<TaylorJet, EvalError> {
        self.evaluate(&JetEnv { t0, order })
    }

    /// Value, gradient and Hessian of a bivariate expression at `(x0, y0)`.
    pub fn eval_bijet(&self, x0: f64, y0: f64) -> Result<BiJet2, EvalError> {
        self.evaluate(&BiJetEnv { x0, y0 })
    }

    /// Replaces variables by the supplied trees; `None` leaves a variable alone.
    pub fn substitute(&self, t: Option<&Expr>, x: Option<&Expr>, y: Option<&Expr>) -> Expr {
        match self {
            Expr::Var(v) => {
                let replacement = match v {
                    Var::T => t,
                    Var::X => x,
                    Var::Y => y,
                };
                replacement.cloned().unwrap_or_else(|| self.clone())
            }
            Expr::Number(_) | Expr::Pi => self.clone(),
            Expr::Unary(op, c) => Expr::Unary(*op, Box::new(c.substitute(t, x, y))),
            Expr::Binary(op, l, r) => Expr::Binary(
                *op,
                Box::new(l.substitute(t, x, y)),
                Box::new(r.substitute(t, x, y)),
            ),
            Expr::PowInt(c, n) => Expr::PowInt(Box::new(c.substitute(t, x, y)), *n),
        }
    }

    pub fn contains(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Number(_) | Expr::Pi => false,
            Expr::Unary(_, c) | Expr::PowInt(c, _) => c.contains(var),
            Expr::Binary(_, l, r) => l.contains(var) || r.contains(var),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Number(_) | Expr::Pi => 1,
            Expr::Unary(_, c) | Expr::PowInt(c, _) => 1 + c.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Symbolic derivative with respect to `t`; `x` and `y` count as constants.
    /// No simplification is attempted.
    pub fn derivative(&self) -> Expr {
        let zero = || Expr::Number(0.0);
        match self {
            Expr::Number(_) | Expr::Pi => zero(),
            Expr::Var(Var::T) => Expr::Number(1.0),
            Expr::Var(_) => zero(),
            Expr::Unary(op, c) => {
                let u = (**c).clone();
                let du = c.derivative();
                match op {
                    UnaryOp::Neg => -du,
                    UnaryOp::Sin => u.cos() * du,
                    UnaryOp::Cos => -(u.sin() * du),
                    UnaryOp::Exp => u.exp() * du,
                    UnaryOp::Sqrt => du / (Expr::Number(2.0) * u.sqrt()),
                    UnaryOp::Atan => du / (Expr::Number(1.0) + u.powi(2)),
                }
            }
            Expr::Binary(op, l, r) => {
                let (u, v) = ((**l).clone(), (**r).clone());
                let (du, dv) = (l.derivative(), r.derivative());
                match op {
                    BinaryOp::Add => du + dv,
                    BinaryOp::Sub => du - dv,
                    BinaryOp::Mul => du * v + u * dv,
                    BinaryOp::Div => (du * v.clone() - u * dv) / v.powi(2),
                }
            }
            Expr::PowInt(c, n) => match n {
                0 => zero(),
                1 => c.derivative(),
                _ => Expr::Number(*n as f64) * (**c).clone().powi(n - 1) * c.derivative(),
            },
        }
    }

    // Builders. Negative literals become `Neg(Number)` so printed trees
    // parse back to themselves.

    pub fn num(v: f64) -> Expr {
        if v < 0.0 {
            Expr::Unary(UnaryOp::Neg, Box::new(Expr::Number(-v)))
        } else {
            Expr::Number(v.abs())
        }
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    pub fn powi(self, n: u32) -> Expr {
        Expr::PowInt(Box::new(self), n)
    }

    fn unary(op: UnaryOp, c: Expr) -> Expr {
        Expr::Unary(op, Box::new(c))
    }

    pub fn sin(self) -> Expr {
        Self::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Self::unary(UnaryOp::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Self::unary(UnaryOp::Exp, self)
    }

    pub fn sqrt(self) -> Expr {
        Self::unary(UnaryOp::Sqrt, self)
    }

    pub fn atan(self) -> Expr {
        Self::unary(UnaryOp::Atan, self)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::Binary($op, Box::new(self), Box::new(rhs))
            }
        }
    };
}

expr_binop!(Add, add, BinaryOp::Add);
expr_binop!(Sub, sub, BinaryOp::Sub);
expr_binop!(Mul, mul, BinaryOp::Mul);
expr_binop!(Div, div, BinaryOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Unary(UnaryOp::Neg, Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn one(text: &str) -> Expr {
        parse_expr(text, Arity::OneVar).unwrap()
    }

    #[test]
    fn parses_function_application() {
        assert_eq!(one("sin(2*t)"), (Expr::Number(2.0) * Expr::t()).sin());
    }

    #[test]
    fn precedence_of_power_product_and_sum() {
        let expected = Expr::t().powi(3) - Expr::Number(3.0) * Expr::t();
        assert_eq!(one("t^3 - 3*t"), expected);
        assert_eq!(one("  t ^ 3-3 *t "), expected);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(one("-t^2"), -(Expr::t().powi(2)));
        assert_eq!(one("(-t)^2"), (-Expr::t()).powi(2));
        assert_eq!(one("2*-t"), Expr::Number(2.0) * -Expr::t());
    }

    #[test]
    fn substituted_epicycloid_component() {
        let e = one("3*cos(t)-cos(3*t)");
        let t = 0.7_f64;
        assert_abs_diff_eq!(
            e.eval(t).unwrap(),
            3.0 * t.cos() - (3.0 * t).cos(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expr("2t", Arity::OneVar).unwrap_err();
        assert_eq!(err.offset(), 1);
        let err = parse_expr("sin(t", Arity::OneVar).unwrap_err();
        assert_eq!(err.offset(), 5);
        let err = parse_expr("t^1.5", Arity::OneVar).unwrap_err();
        assert_eq!(err.offset(), 2);
        let err = parse_expr("t + * 2", Arity::OneVar).unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(matches!(
            parse_expr("", Arity::OneVar),
            Err(ParseError::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expr("t $ 1", Arity::OneVar),
            Err(ParseError::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn unknown_identifiers_and_arity() {
        assert_eq!(
            parse_expr("tan(t)", Arity::OneVar).unwrap_err(),
            ParseError::UnknownIdentifier {
                offset: 0,
                name: "tan".into()
            }
        );
        assert!(matches!(
            parse_expr("x + t", Arity::OneVar),
            Err(ParseError::WrongArity { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expr("x + t", Arity::TwoVar),
            Err(ParseError::WrongArity { offset: 4, .. })
        ));
        assert!(parse_expr("sin", Arity::OneVar).is_err());
    }

    #[test]
    fn printing_is_fully_parenthesized() {
        assert_eq!(pretty_print(&Expr::t().powi(2)), "(t^2)");
        assert_eq!(pretty_print(&(Expr::Number(1.0) + Expr::t())), "(1 + t)");
        assert_eq!(pretty_print(&one("-sin(pi*t)/0.5")), "((-sin((pi * t))) / 0.5)");
    }

    #[test]
    fn print_then_parse_is_identity() {
        for text in ["sqrt(9*t^2+4)", "-(t-1)^3/exp(atan(t))", "0.1*t - 1e-3", "((t))"] {
            let e = one(text);
            assert_eq!(one(&pretty_print(&e)), e, "{text}");
        }
    }

    #[test]
    fn jet_evaluation() {
        assert_eq!(one("sin(t)").eval_jet(0.0, 1).unwrap().coeffs(), &[0.0, 1.0]);
        assert_eq!(one("sqrt(9*t^2+4)").eval_jet(0.0, 0).unwrap().coeffs(), &[2.0]);
        let numerator = one("2*cos(t)*sin(2*t)-sin(t)*cos(2*t)");
        assert_abs_diff_eq!(
            numerator.eval_jet(PI / 2.0, 0).unwrap().value(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn jet_domain_errors_propagate() {
        assert!(matches!(
            one("1/t").eval_jet(0.0, 2),
            Err(EvalError::Jet(JetError::DivisionByZero))
        ));
        assert!(matches!(
            one("sqrt(t^2)").eval_jet(0.0, 2),
            Err(EvalError::Jet(JetError::SqrtDomain(_)))
        ));
    }

    #[test]
    fn bijet_evaluation() {
        let two = |s: &str| parse_expr(s, Arity::TwoVar).unwrap();
        let j = two("x*y").eval_bijet(2.0, 3.0).unwrap();
        assert_eq!((j.value, j.grad, j.hess), (6.0, [3.0, 2.0], [0.0, 1.0, 0.0]));
        let j = two("2*x").eval_bijet(1.0, 5.0).unwrap();
        assert_eq!((j.value, j.grad, j.hess), (2.0, [2.0, 0.0], [0.0, 0.0, 0.0]));
        let j = two("x^2 - y^2").eval_bijet(1.0, 1.0).unwrap();
        assert_eq!((j.value, j.grad, j.hess), (0.0, [2.0, -2.0], [2.0, 0.0, -2.0]));
    }

    #[test]
    fn substitution_replaces_only_requested_variables() {
        let template = parse_expr("x*y + x", Arity::TwoVar).unwrap();
        let s = template.substitute(None, Some(&Expr::t()), None);
        assert!(s.contains(Var::T) && s.contains(Var::Y) && !s.contains(Var::X));
    }

    #[test]
    fn negative_literals_print_and_reparse() {
        let e = Expr::num(-2.5) * Expr::t();
        assert_eq!(one(&pretty_print(&e)), e);
        assert_eq!(Expr::num(-0.0), Expr::Number(0.0));
    }

    #[test]
    fn symbolic_derivative_matches_jets() {
        for text in ["sin(t)^3/(1+t^2)", "sqrt(2+cos(t))*exp(-t)", "atan(t^2)-t"] {
            let e = one(text);
            let d = e.derivative();
            for t in [-0.7, 0.0, 0.9] {
                let jet = e.eval_jet(t, 1).unwrap();
                assert_abs_diff_eq!(d.eval(t).unwrap(), jet.coeffs()[1], epsilon = 1e-13);
            }
        }
        assert_eq!(one("pi").derivative(), Expr::Number(0.0));
    }
}
