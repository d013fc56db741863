//! Observable expressions.
//!
//! Grammar (precedence from tight to loose, binary operators left
//! associative):
//!
//! ```text
//! sum    := prod (('+' | '-') prod)*
//! prod   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' expo)*
//! expo   := '-' expo | atom
//! atom   := number | name | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Names: `x1..xb` base coordinates, `e1..eb` base momenta, `l1..lm`
//! momentum coefficients, `lam2` the invariant square norm of `lambda`,
//! `gbase` the determinant of the base metric and `kin` the kinetic energy
//! `eta^T g^{-1} eta / 2`. Functions: `sin cos exp sqrt`. Numbers accept
//! an optional exponent, so `2e1` is twenty rather than `2*e1`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::EquivariantManifold;
use crate::linalg;
use crate::weinstein::{Observable, PointGradient, WeinsteinPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    E(usize),
    L(usize),
    Lam2,
    Gbase,
    Kin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
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
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                position: start,
                message: format!("malformed number `{s}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Name(text[start..i].to_string())));
        } else if "+-*/^".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::RParen));
            i += 1;
        } else {
            return Err(Error::Parse {
                position: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// Base and algebra dimensions used to range-check indexed names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub base: usize,
    pub algebra: usize,
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    dims: Option<Dims>,
    _text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.here(),
            message: message.into(),
        })
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.prod()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.prod()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prod(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut lhs = self.atom()?;
        while let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let rhs = self.expo()?;
            lhs = Expr::Bin(BinOp::Pow, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expo(&mut self) -> Result<Expr> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.expo()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "sqrt" => Some(Func::Sqrt),
                    _ => None,
                };
                if let Some(f) = func {
                    if self.peek() != Some(&Tok::LParen) {
                        return self.err(format!("expected `(` after `{name}`"));
                    }
                    self.pos += 1;
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                self.variable(&name, start).map(Expr::Var)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.err("expected `)`")
        }
    }

    fn variable(&self, name: &str, position: usize) -> Result<Var> {
        let unknown = || Error::Parse {
            position,
            message: format!("unknown identifier `{name}`"),
        };
        match name {
            "lam2" => return Ok(Var::Lam2),
            "gbase" => return Ok(Var::Gbase),
            "kin" => return Ok(Var::Kin),
            _ => {}
        }
        let (head, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return Err(unknown());
        }
        let idx: usize = digits.parse().map_err(|_| unknown())?;
        let (var, limit) = match head {
            "x" => (Var::X(idx - 1), self.dims.map(|d| d.base)),
            "e" => (Var::E(idx - 1), self.dims.map(|d| d.base)),
            "l" => (Var::L(idx - 1), self.dims.map(|d| d.algebra)),
            _ => return Err(unknown()),
        };
        if let Some(limit) = limit {
            if idx > limit {
                return Err(Error::Parse {
                    position,
                    message: format!("`{name}` is out of range (dimension {limit})"),
                });
            }
        }
        Ok(var)
    }
}

/// Parse without range checks on indexed names.
pub fn parse(text: &str) -> Result<Expr> {
    parse_with(text, None)
}

pub fn parse_with(text: &str, dims: Option<Dims>) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        dims,
        _text: text,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
        _ => 5,
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::E(i) => write!(f, "e{}", i + 1),
            Var::L(i) => write!(f, "l{}", i + 1),
            Var::Lam2 => write!(f, "lam2"),
            Var::Gbase => write!(f, "gbase"),
            Var::Kin => write!(f, "kin"),
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "-{}", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, prec(a) < 3)
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({a})")
            }
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                let sep = if p == 1 { " " } else { "" };
                if *op == BinOp::Pow {
                    wrap(f, a, prec(a) < 4)?;
                    write!(f, "^")?;
                    wrap(f, b, prec(b) < 5)
                } else {
                    wrap(f, a, prec(a) < p)?;
                    write!(f, "{sep}{sym}{sep}")?;
                    wrap(f, b, prec(b) <= p)
                }
            }
        }
    }
}

/// Value with gradient in the stacked variables `(x, eta, lambda)`.
#[derive(Debug, Clone)]
struct Jet {
    v: f64,
    g: DVector<f64>,
}

/// Values of the context-dependent names at one point.
struct Context<'a> {
    w: &'a WeinsteinPoint,
    space: &'a EquivariantManifold,
}

impl Context<'_> {
    fn lam2(&self) -> f64 {
        self.space.algebra().dual_inner(&self.w.lambda, &self.w.lambda)
    }

    fn gbase_at(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.space.base_metric(x)?.determinant())
    }

    fn kin_at(&self, x: &DVector<f64>) -> Result<f64> {
        let g = self.space.base_metric(x)?;
        let inv = spd_inverse(&g)?;
        Ok(0.5 * self.w.eta.dot(&(inv * &self.w.eta)))
    }
}

fn spd_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::Degenerate {
            min_eigenvalue: linalg::min_symmetric_eigenvalue(g),
        })
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Eval(format!("{what} produced a non-finite value")))
    }
}

impl Expr {
    fn value(&self, c: &Context<'_>) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(var) => match var {
                Var::X(i) => c.w.x[*i],
                Var::E(i) => c.w.eta[*i],
                Var::L(i) => c.w.lambda.coeffs[*i],
                Var::Lam2 => c.lam2(),
                Var::Gbase => c.gbase_at(&c.w.x)?,
                Var::Kin => c.kin_at(&c.w.x)?,
            },
            Expr::Neg(a) => -a.value(c)?,
            Expr::Call(func, a) => {
                let x = a.value(c)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::Eval(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                }
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.value(c)?, b.value(c)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Eval("division by zero".into()));
                        }
                        x / y
                    }
                    BinOp::Pow => pow_value(x, y)?,
                }
            }
        };
        finite(v, "expression")
    }

    fn jet(&self, c: &Context<'_>, n: usize) -> Result<Jet> {
        let b = c.w.x.len();
        let unit = |k: usize, v: f64| {
            let mut g = DVector::zeros(n);
            g[k] = 1.0;
            Jet { v, g }
        };
        let j = match self {
            Expr::Num(v) => Jet {
                v: *v,
                g: DVector::zeros(n),
            },
            Expr::Var(var) => match var {
                Var::X(i) => unit(*i, c.w.x[*i]),
                Var::E(i) => unit(b + i, c.w.eta[*i]),
                Var::L(i) => unit(2 * b + i, c.w.lambda.coeffs[*i]),
                Var::Lam2 => {
                    let mut g = DVector::zeros(n);
                    let grad = c.space.algebra().gram_inverse() * &c.w.lambda.coeffs * 2.0;
                    g.rows_mut(2 * b, grad.len()).copy_from(&grad);
                    Jet { v: c.lam2(), g }
                }
                Var::Gbase => {
                    let mut g = DVector::zeros(n);
                    let gx = linalg::fd_gradient(|x| c.gbase_at(x), &c.w.x)?;
                    g.rows_mut(0, b).copy_from(&gx);
                    Jet {
                        v: c.gbase_at(&c.w.x)?,
                        g,
                    }
                }
                Var::Kin => {
                    let mut g = DVector::zeros(n);
                    let gx = linalg::fd_gradient(|x| c.kin_at(x), &c.w.x)?;
                    let inv = spd_inverse(&c.space.base_metric(&c.w.x)?)?;
                    g.rows_mut(0, b).copy_from(&gx);
                    g.rows_mut(b, b).copy_from(&(inv * &c.w.eta));
                    Jet {
                        v: c.kin_at(&c.w.x)?,
                        g,
                    }
                }
            },
            Expr::Neg(a) => {
                let a = a.jet(c, n)?;
                Jet { v: -a.v, g: -a.g }
            }
            Expr::Call(func, a) => {
                let a = a.jet(c, n)?;
                let (v, d) = match func {
                    Func::Sin => (a.v.sin(), a.v.cos()),
                    Func::Cos => (a.v.cos(), -a.v.sin()),
                    Func::Exp => (a.v.exp(), a.v.exp()),
                    Func::Sqrt => {
                        if a.v < 0.0 {
                            return Err(Error::Eval(format!("sqrt of negative value {}", a.v)));
                        }
                        let s = a.v.sqrt();
                        (s, 0.5 / s)
                    }
                };
                Jet { v, g: a.g * d }
            }
            Expr::Bin(op, a, b2) => {
                let (x, y) = (a.jet(c, n)?, b2.jet(c, n)?);
                match op {
                    BinOp::Add => Jet {
                        v: x.v + y.v,
                        g: x.g + y.g,
                    },
                    BinOp::Sub => Jet {
                        v: x.v - y.v,
                        g: x.g - y.g,
                    },
                    BinOp::Mul => Jet {
                        v: x.v * y.v,
                        g: &x.g * y.v + &y.g * x.v,
                    },
                    BinOp::Div => {
                        if y.v == 0.0 {
                            return Err(Error::Eval("division by zero".into()));
                        }
                        Jet {
                            v: x.v / y.v,
                            g: (&x.g * y.v - &y.g * x.v) / (y.v * y.v),
                        }
                    }
                    BinOp::Pow => {
                        let v = pow_value(x.v, y.v)?;
                        let mut g = if x.v == 0.0 && y.v >= 1.0 {
                            // d(x^y)/dx = y x^(y-1), finite at x = 0 for y >= 1.
                            &x.g * (if y.v == 1.0 { 1.0 } else { 0.0 })
                        } else {
                            &x.g * (y.v * pow_value(x.v, y.v - 1.0)?)
                        };
                        if y.g.amax() != 0.0 {
                            if x.v <= 0.0 {
                                return Err(Error::Eval(format!(
                                    "variable exponent needs a positive base, got {}",
                                    x.v
                                )));
                            }
                            g += &y.g * (v * x.v.ln());
                        }
                        Jet { v, g }
                    }
                }
            }
        };
        finite(j.v, "expression")?;
        Ok(j)
    }

    /// Names referenced by the expression.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect(out),
            Expr::Bin(_, a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

fn pow_value(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 && y.fract() != 0.0 {
        return Err(Error::Eval(format!("non-integer power {y} of negative value {x}")));
    }
    if x == 0.0 && y < 0.0 {
        return Err(Error::Eval("negative power of zero".into()));
    }
    Ok(if y.fract() == 0.0 && y.abs() <= 64.0 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    })
}

/// A parsed observable bound to a scenario's dimensions.
#[derive(Debug, Clone)]
pub struct ExprObservable {
    source: String,
    expr: Expr,
    dims: Dims,
}

impl ExprObservable {
    pub fn parse(text: &str, dims: Dims) -> Result<Self> {
        Ok(Self {
            source: text.to_string(),
            expr: parse_with(text, Some(dims))?,
            dims,
        })
    }

    pub fn for_space(text: &str, space: &EquivariantManifold) -> Result<Self> {
        Self::parse(
            text,
            Dims {
                base: space.base_dim(),
                algebra: space.algebra().dim(),
            },
        )
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    fn check(&self, w: &WeinsteinPoint) -> Result<()> {
        if w.x.len() != self.dims.base || w.eta.len() != self.dims.base || w.lambda.dim() != self.dims.algebra {
            return Err(Error::InvalidPoint(format!(
                "observable `{}` expects base dimension {} and algebra dimension {}",
                self.source, self.dims.base, self.dims.algebra
            )));
        }
        Ok(())
    }
}

impl Observable for ExprObservable {
    fn value(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<f64> {
        self.check(w)?;
        self.expr.value(&Context { w, space })
    }

    fn gradient(&self, space: &EquivariantManifold, w: &WeinsteinPoint) -> Result<PointGradient> {
        self.check(w)?;
        let b = self.dims.base;
        let m = self.dims.algebra;
        let jet = self.expr.jet(&Context { w, space }, 2 * b + m)?;
        Ok(PointGradient {
            dx: jet.g.rows(0, b).into_owned(),
            deta: jet.g.rows(b, b).into_owned(),
            dlambda: jet.g.rows(2 * b, m).into_owned(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x1^2").unwrap().to_string(), "-x1^2");
        assert_eq!(
            parse("-x1^2").unwrap(),
            Expr::Neg(Box::new(Expr::Bin(
                BinOp::Pow,
                Box::new(Expr::Var(Var::X(0))),
                Box::new(Expr::Num(2.0))
            )))
        );
        assert_eq!(parse("2^3^2").unwrap().to_string(), "2^3^2");
        assert_eq!(parse("2^(3^2)").unwrap().to_string(), "2^(3^2)");
        assert_eq!(parse("x1-(e1-l1)").unwrap().to_string(), "x1 - (e1 - l1)");
        assert_eq!(parse("(x1-e1)-l1").unwrap().to_string(), "x1 - e1 - l1");
        assert_eq!(parse("2^-x1").unwrap().to_string(), "2^(-x1)");
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x1 + foo") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse("sin(x1") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("x0").is_err());
        assert!(parse("x1 $").is_err());
        assert!(parse_with("l4", Some(Dims { base: 1, algebra: 3 })).is_err());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1e-3").unwrap(), Expr::Num(1e-3));
        assert_eq!(parse("2*e1").unwrap().to_string(), "2*e1");
    }
}
