//! Scalar expression language for map components, metric entries, and
//! almost-complex-structure entries.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = factor , { ("*" | "/") , factor } ;
//! factor  = "-" , factor | power ;
//! power   = atom , [ "^" , [ "-" ] , digits ] ;
//! atom    = number | variable | parameter
//!         | function , "(" , expr , ")"
//!         | "(" , expr , ")" ;
//! function = "sin" | "cos" | "exp" | "sqrt" ;
//! variable = "x" , digits ;                 (* 1-based coordinate index *)
//! number   = digits , [ "." , digits ] , [ ("e"|"E") , [sign] , digits ] ;
//! parameter = letter , { letter | digit | "_" } ;
//! ```
//!
//! Exponents are integer literals only and `abs` is deliberately absent, so
//! differentiation is closed over the grammar: the derivative of any
//! expression is again an expression. Angles are radians throughout.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::num;

/// Binding of parameter names to real values (radians for angles).
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParamSet(pub BTreeMap<String, f64>);

impl ParamSet {
    pub fn new() -> Self {
        ParamSet(BTreeMap::new())
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{index} exceeds the declared dimension {dim}")]
    VarOutOfRange { index: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("point has dimension {have} but the expression uses x{need}")]
    PointTooShort { have: usize, need: usize },
}

/// Expression tree over real constants, coordinates `x1..xn`, named
/// parameters, the unary operations `neg, sin, cos, exp, sqrt`, the four
/// arithmetic operations, and integer powers.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 0-based coordinate index (the surface syntax `x3` stores index 2).
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowI(Box<Expr>, i32),
}

impl Expr {
    pub fn parse(source: &str, dim: usize) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            dim,
        };
        p.skip_ws();
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    /// Evaluates the expression at a coordinate point.
    pub fn eval(&self, point: &[f64], params: &ParamSet) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(v) => *v,
            Expr::Var(i) => {
                if *i >= point.len() {
                    return Err(EvalError::PointTooShort {
                        have: point.len(),
                        need: *i + 1,
                    });
                }
                point[*i]
            }
            Expr::Param(name) => params
                .get(name)
                .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
            Expr::Neg(a) => -a.eval(point, params)?,
            Expr::Sin(a) => num::sin(a.eval(point, params)?),
            Expr::Cos(a) => num::cos(a.eval(point, params)?),
            Expr::Exp(a) => num::exp(a.eval(point, params)?),
            Expr::Sqrt(a) => {
                let v = a.eval(point, params)?;
                if v < 0.0 {
                    return Err(EvalError::SqrtNegative(v));
                }
                num::sqrt(v)
            }
            Expr::Add(a, b) => a.eval(point, params)? + b.eval(point, params)?,
            Expr::Sub(a, b) => a.eval(point, params)? - b.eval(point, params)?,
            Expr::Mul(a, b) => a.eval(point, params)? * b.eval(point, params)?,
            Expr::Div(a, b) => {
                let den = b.eval(point, params)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(point, params)? / den
            }
            Expr::PowI(a, n) => num::powi(a.eval(point, params)?, *n),
        })
    }

    /// Symbolic partial derivative with respect to the 0-based variable
    /// index. Total on every grammar-valid input.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.diff(var)),
            Expr::Cos(a) => neg(mul(Expr::Sin(a.clone()), a.diff(var))),
            Expr::Exp(a) => mul(Expr::Exp(a.clone()), a.diff(var)),
            Expr::Sqrt(a) => div(
                a.diff(var),
                mul(Expr::Const(2.0), Expr::Sqrt(a.clone())),
            ),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.diff(var), (**b).clone()),
                    mul((**a).clone(), b.diff(var)),
                ),
                powi((**b).clone(), 2),
            ),
            Expr::PowI(a, n) => {
                if *n == 0 {
                    Expr::Const(0.0)
                } else {
                    mul(
                        mul(Expr::Const(*n as f64), powi((**a).clone(), n - 1)),
                        a.diff(var),
                    )
                }
            }
        }
    }

    /// Set of 0-based variable indices appearing in the expression.
    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    /// Set of parameter names appearing in the expression.
    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Sqrt(a) => {
                a.walk(f)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::PowI(a, _) => a.walk(f),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::PowI(..) => 4,
            _ => 5,
        }
    }
}

// Smart constructors with light constant folding; they keep derivative trees
// readable and never change evaluation semantics on in-domain points.

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(z), _) if *z == 0.0 => b,
        (_, Expr::Const(z)) if *z == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (_, Expr::Const(z)) if *z == 0.0 => a,
        (Expr::Const(z), _) if *z == 0.0 => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(z), _) | (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), _) if *o == 1.0 => b,
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(z), _) if *z == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(o)) if *o == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(v) => Expr::Const(-v),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

fn powi(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Const(1.0),
        1 => a,
        _ => Expr::PowI(Box::new(a), n),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parent_prec: u8) -> fmt::Result {
            if e.precedence() < parent_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(v) => {
                if *v < 0.0 {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 4)
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Add(a, b) => {
                child(f, a, 1)?;
                write!(f, " + ")?;
                child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1)?;
                write!(f, " - ")?;
                child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2)?;
                write!(f, "*")?;
                child(f, b, 3)
            }
            Expr::Div(a, b) => {
                child(f, a, 2)?;
                write!(f, "/")?;
                child(f, b, 5)
            }
            Expr::PowI(a, n) => {
                child(f, a, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let parenthesized = self.eat(b'(');
            let negative = self.eat(b'-');
            let digits = self.digits("integer exponent")?;
            let mut n: i32 = digits
                .parse()
                .map_err(|_| self.err("integer exponent out of range"))?;
            if negative {
                n = -n;
            }
            if parenthesized && !self.eat(b')') {
                return Err(self.err("expected `)` after exponent"));
            }
            self.skip_ws();
            return Ok(Expr::PowI(Box::new(base), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(self.err("expected a number, variable, parameter, or `(`")),
        }
    }

    fn digits(&mut self, what: &str) -> Result<String, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_digit())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(&format!("expected {what}")));
        }
        Ok(core::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_digit() || c == b'.')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
            } else {
                // `e` starts an identifier, not an exponent
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("invalid number `{text}`"),
        })?;
        self.skip_ws();
        Ok(Expr::Const(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        self.skip_ws();
        match name {
            "sin" | "cos" | "exp" | "sqrt" => {
                if !self.eat(b'(') {
                    return Err(self.err(&format!("expected `(` after `{name}`")));
                }
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err(&format!("expected `)` closing `{name}(...)`")));
                }
                let arg = Box::new(inner);
                Ok(match name {
                    "sin" => Expr::Sin(arg),
                    "cos" => Expr::Cos(arg),
                    "exp" => Expr::Exp(arg),
                    _ => Expr::Sqrt(arg),
                })
            }
            _ => {
                if let Some(rest) = name.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|c| c.is_ascii_digit()) {
                        let index: usize = rest.parse().map_err(|_| ParseError::Syntax {
                            offset: start,
                            message: format!("variable index `{rest}` out of range"),
                        })?;
                        if index == 0 {
                            return Err(ParseError::Syntax {
                                offset: start,
                                message: "variable indices are 1-based".to_string(),
                            });
                        }
                        if index > self.dim {
                            return Err(ParseError::VarOutOfRange {
                                index,
                                dim: self.dim,
                            });
                        }
                        return Ok(Expr::Var(index - 1));
                    }
                }
                Ok(Expr::Param(name.to_string()))
            }
        }
    }
}

/// Convenience for building a square matrix of parsed expressions.
pub fn parse_matrix(entries: &[Vec<String>], dim_vars: usize) -> Result<Vec<Expr>, ParseError> {
    let mut out = Vec::new();
    for row in entries {
        for cell in row {
            out.push(Expr::parse(cell, dim_vars)?);
        }
    }
    Ok(out)
}
