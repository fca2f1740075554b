//! Coefficient expressions: a small arithmetic language over the chart
//! coordinates `x0 … x{n-1}` with exact symbolic partial derivatives.
//!
//! Grammar (highest precedence first): function calls and parentheses,
//! `^` with a non-negative integer literal exponent, unary minus, `* /`,
//! `+ -`. Binary operators of equal precedence associate to the left.

mod parser;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parser::{parse, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result {value} from {op}")]
    NonFinite { op: &'static str, value: f64 },
    #[error("point has {got} coordinates, expression needs at least {needed}")]
    PointTooShort { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Pi,
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Call(Func, Expr),
}

/// An immutable, cheaply clonable expression tree.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn num(value: f64) -> Self {
        Expr::new(Node::Num(value))
    }

    fn folded(value: f64, otherwise: impl FnOnce() -> Node) -> Self {
        if value.is_finite() {
            Expr::num(value)
        } else {
            Expr::new(otherwise())
        }
    }

    pub fn zero() -> Self {
        Expr::num(0.0)
    }

    pub fn one() -> Self {
        Expr::num(1.0)
    }

    pub fn pi() -> Self {
        Expr::new(Node::Pi)
    }

    pub fn var(index: usize) -> Self {
        Expr::new(Node::Var(index))
    }

    pub fn call(func: Func, arg: Expr) -> Self {
        Expr::new(Node::Call(func, arg))
    }

    pub fn sin(arg: Expr) -> Self {
        Expr::call(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Self {
        Expr::call(Func::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Self {
        Expr::call(Func::Exp, arg)
    }

    /// Literal value if this node is a plain number.
    pub fn as_num(&self) -> Option<f64> {
        match *self.0 {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    // Smart constructors fold literal arithmetic and drop additive/multiplicative
    // identities. Division is never folded so that a literal zero divisor is
    // reported at evaluation time.

    pub fn neg(a: Expr) -> Self {
        match *a.0 {
            Node::Num(v) => Expr::num(-v),
            Node::Neg(ref inner) => inner.clone(),
            _ => Expr::new(Node::Neg(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::folded(x + y, || Node::Add(a.clone(), b.clone())),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::new(Node::Add(a, b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::folded(x - y, || Node::Sub(a.clone(), b.clone())),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::new(Node::Sub(a, b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::folded(x * y, || Node::Mul(a.clone(), b.clone())),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::new(Node::Mul(a, b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        if b.as_num() == Some(1.0) {
            return a;
        }
        Expr::new(Node::Div(a, b))
    }

    pub fn pow(a: Expr, exponent: u32) -> Self {
        match exponent {
            0 => Expr::one(),
            1 => a,
            _ => match a.as_num() {
                Some(v) => Expr::folded(v.powi(exponent as i32), || Node::Pow(a.clone(), exponent)),
                None => Expr::new(Node::Pow(a, exponent)),
            },
        }
    }

    /// `Σ terms`, folding zeros.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    /// Multiplies by a real constant.
    pub fn scale(self, s: f64) -> Self {
        Expr::mul(Expr::num(s), self)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Num(_) | Node::Pi => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    /// Whether variable `axis` occurs in the expression.
    pub fn depends_on(&self, axis: usize) -> bool {
        match &*self.0 {
            Node::Num(_) | Node::Pi => false,
            Node::Var(i) => *i == axis,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.depends_on(axis),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(axis) || b.depends_on(axis)
            }
        }
    }

    /// Renames every variable `x_i` to `x_{i + offset}`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        if offset == 0 {
            return self.clone();
        }
        self.map_vars(&|i| Expr::var(i + offset))
    }

    fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match &*self.0 {
            Node::Num(_) | Node::Pi => self.clone(),
            Node::Var(i) => f(*i),
            Node::Neg(a) => Expr::new(Node::Neg(a.map_vars(f))),
            Node::Add(a, b) => Expr::new(Node::Add(a.map_vars(f), b.map_vars(f))),
            Node::Sub(a, b) => Expr::new(Node::Sub(a.map_vars(f), b.map_vars(f))),
            Node::Mul(a, b) => Expr::new(Node::Mul(a.map_vars(f), b.map_vars(f))),
            Node::Div(a, b) => Expr::new(Node::Div(a.map_vars(f), b.map_vars(f))),
            Node::Pow(a, k) => Expr::new(Node::Pow(a.map_vars(f), *k)),
            Node::Call(g, a) => Expr::new(Node::Call(*g, a.map_vars(f))),
        }
    }

    /// Evaluates at a point; variables index into `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let v = match &*self.0 {
            Node::Num(v) => *v,
            Node::Pi => std::f64::consts::PI,
            Node::Var(i) => *point.get(*i).ok_or(EvalError::PointTooShort {
                needed: i + 1,
                got: point.len(),
            })?,
            Node::Neg(a) => -a.eval(point)?,
            Node::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Node::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Node::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Node::Div(a, b) => {
                let num = a.eval(point)?;
                let den = b.eval(point)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                finite("/", num / den)?
            }
            Node::Pow(a, k) => finite("^", a.eval(point)?.powi(*k as i32))?,
            Node::Call(g, a) => finite(g.name(), g.apply(a.eval(point)?))?,
        };
        Ok(v)
    }

    /// Symbolic `∂/∂x_axis`.
    pub fn partial(&self, axis: usize) -> Expr {
        if !self.depends_on(axis) {
            return Expr::zero();
        }
        match &*self.0 {
            Node::Num(_) | Node::Pi => Expr::zero(),
            Node::Var(i) => Expr::num(if *i == axis { 1.0 } else { 0.0 }),
            Node::Neg(a) => Expr::neg(a.partial(axis)),
            Node::Add(a, b) => Expr::add(a.partial(axis), b.partial(axis)),
            Node::Sub(a, b) => Expr::sub(a.partial(axis), b.partial(axis)),
            Node::Mul(a, b) => Expr::add(
                Expr::mul(a.partial(axis), b.clone()),
                Expr::mul(a.clone(), b.partial(axis)),
            ),
            Node::Div(a, b) => {
                // (a/b)' = a'/b - a b' / b^2
                let first = Expr::div(a.partial(axis), b.clone());
                let db = b.partial(axis);
                if db.is_zero() {
                    first
                } else {
                    Expr::sub(
                        first,
                        Expr::div(Expr::mul(a.clone(), db), Expr::pow(b.clone(), 2)),
                    )
                }
            }
            Node::Pow(a, k) => Expr::mul(
                Expr::mul(Expr::num(*k as f64), Expr::pow(a.clone(), k - 1)),
                a.partial(axis),
            ),
            Node::Call(g, a) => {
                let outer = match g {
                    Func::Sin => Expr::cos(a.clone()),
                    Func::Cos => Expr::neg(Expr::sin(a.clone())),
                    Func::Exp => self.clone(),
                };
                Expr::mul(outer, a.partial(axis))
            }
        }
    }

    /// Gradient over the given axes.
    pub fn gradient(&self, axes: &[usize]) -> Vec<Expr> {
        axes.iter().map(|&a| self.partial(a)).collect()
    }

    fn precedence(&self) -> u8 {
        match &*self.0 {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn finite(op: &'static str, value: f64) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite { op, value })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{:?}", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Node::Pi => write!(f, "pi"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_operand(f, 4)
            }
            Node::Add(a, b) => {
                a.fmt_operand(f, 1)?;
                write!(f, " + ")?;
                b.fmt_operand(f, 2)
            }
            Node::Sub(a, b) => {
                a.fmt_operand(f, 1)?;
                write!(f, " - ")?;
                b.fmt_operand(f, 2)
            }
            Node::Mul(a, b) => {
                a.fmt_operand(f, 2)?;
                write!(f, "*")?;
                b.fmt_operand(f, 3)
            }
            Node::Div(a, b) => {
                a.fmt_operand(f, 2)?;
                write!(f, "/")?;
                b.fmt_operand(f, 3)
            }
            Node::Pow(a, k) => {
                a.fmt_operand(f, 5)?;
                write!(f, "^{k}")
            }
            Node::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(text: &str, n: usize) -> Expr {
        parse(text, n).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(p("cos(x0)", 3).eval(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(p("x0*x1 + 2^3", 2).eval(&[1.0, 1.0]).unwrap(), 9.0);
        assert_eq!(p("pi", 1).eval(&[0.0]).unwrap(), std::f64::consts::PI);
        assert_eq!(
            p("1/x0", 1).eval(&[0.0]),
            Err(EvalError::DivisionByZero)
        );
        let e = p("sin(x0)^2 + cos(x0)^2", 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: f64 = rng.random_range(-10.0..10.0);
            assert!((e.eval(&[x]).unwrap() - 1.0).abs() <= 1e-15 * 2.0);
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            p("exp(x0)", 1).eval(&[1000.0]),
            Err(EvalError::NonFinite { .. })
        ));
    }

    #[test]
    fn partial_examples() {
        let d = p("x0*sin(x1)", 2).partial(1);
        let expected = p("x0*cos(x1)", 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let pt = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            assert!((d.eval(&pt).unwrap() - expected.eval(&pt).unwrap()).abs() < 1e-12);
        }
        assert!(p("3.5 + pi", 2).partial(0).is_zero());
        assert!(p("x1", 2).partial(0).is_zero());
    }

    #[test]
    fn quotient_rule() {
        let d = p("x0/(1 + x0^2)", 1).partial(0);
        for &x in &[-2.0, -0.3, 0.0, 0.5, 3.0] {
            let expected = (1.0 - x * x) / (1.0 + x * x) / (1.0 + x * x);
            assert!((d.eval(&[x]).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_vars_renames() {
        let e = p("x0 + 2*x1", 2).shift_vars(3);
        assert_eq!(e.max_var(), Some(4));
        assert_eq!(e.eval(&[0.0, 0.0, 0.0, 1.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn display_parenthesizes() {
        let e = Expr::mul(
            Expr::add(Expr::var(0), Expr::one()),
            Expr::neg(Expr::var(1)),
        );
        assert_eq!(e.to_string(), "(x0 + 1.0)*-x1");
        let again = parse(&e.to_string(), 2).unwrap();
        assert_eq!(again.eval(&[2.0, 3.0]).unwrap(), -9.0);
        assert_eq!(Expr::num(-2.5).to_string(), "-2.5");
        let pw = Expr::pow(Expr::num(-2.0).clone(), 1);
        assert_eq!(parse(&pw.to_string(), 0).unwrap().eval(&[]).unwrap(), -2.0);
    }
}
