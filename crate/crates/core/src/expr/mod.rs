//! A small closed-form expression language over the coordinates `x1`, `x2`.
//!
//! The grammar covers constants, the two coordinates, `+ - * / ^` with the
//! usual precedence (`^` right-associative, then unary minus, then `* /`,
//! then `+ -`), and the unary functions `sin cos exp log sqrt atan asinh
//! abs`. `log` is the natural logarithm. The named constants `pi` and `e`
//! fold to their numeric values at parse time.
//!
//! Evaluation is strict about domains: `log` and `sqrt` outside their
//! domain, division by zero, `0^negative`, a negative base raised to a
//! non-integer power, and any non-finite intermediate all produce
//! [`Error::Domain`] carrying the offending subexpression. Differentiation
//! is exact on the tree; `abs` differentiates to `f/abs(f) * f'`, which
//! correctly fails at the kink instead of inventing a value.

mod calculus;
mod field;
pub(crate) mod jet;
mod parse;

pub use calculus::{differentiate, simplify};
pub use field::{Provenance, ScalarField};
pub use parse::{parse, parse_in_var};

use crate::{Error, Point, Result};
use std::fmt;

/// One of the two base coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
}

impl Var {
    /// Coordinate index: 0 for `x1`, 1 for `x2`.
    pub fn index(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
        }
    }

    pub fn from_index(i: usize) -> Var {
        match i {
            0 => Var::X1,
            1 => Var::X2,
            _ => panic!("coordinate index out of range: {i}"),
        }
    }
}

/// Binary arithmetic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Built-in unary function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
    Asinh,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
            Func::Asinh => "asinh",
            Func::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            "asinh" => Func::Asinh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Expression tree. `Display` prints a string that parses back to an
/// evaluation-equivalent tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Var(Var),
    Neg(Box<ScalarExpr>),
    Bin(BinOp, Box<ScalarExpr>, Box<ScalarExpr>),
    Call(Func, Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn constant(c: f64) -> Self {
        ScalarExpr::Const(c)
    }

    pub fn var(v: Var) -> Self {
        ScalarExpr::Var(v)
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            ScalarExpr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ScalarExpr::Neg(_) => 3,
            // Negative literals print with a leading minus, so give them the
            // same precedence as unary minus to get parentheses where needed.
            ScalarExpr::Const(c) if *c < 0.0 => 3,
            ScalarExpr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min_prec {
            write!(f, "(")?;
        }
        match self {
            ScalarExpr::Const(c) => write!(f, "{c}")?,
            ScalarExpr::Var(Var::X1) => write!(f, "x1")?,
            ScalarExpr::Var(Var::X2) => write!(f, "x2")?,
            ScalarExpr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            ScalarExpr::Bin(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 4),
                };
                a.fmt_prec(f, lp)?;
                write!(f, "{sym}")?;
                b.fmt_prec(f, rp)?;
            }
            ScalarExpr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if prec < min_prec {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn domain_error(reason: &str, at: &ScalarExpr) -> Error {
    Error::Domain {
        reason: reason.to_string(),
        expr: at.to_string(),
    }
}

/// Evaluate `e` at the point `p`.
pub fn eval(e: &ScalarExpr, p: Point) -> Result<f64> {
    let v = match e {
        ScalarExpr::Const(c) => *c,
        ScalarExpr::Var(v) => p[v.index()],
        ScalarExpr::Neg(a) => -eval(a, p)?,
        ScalarExpr::Bin(op, a, b) => {
            let x = eval(a, p)?;
            let y = eval(b, p)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(domain_error("division by zero", e));
                    }
                    x / y
                }
                BinOp::Pow => eval_pow(x, y, e)?,
            }
        }
        ScalarExpr::Call(func, a) => {
            let x = eval(a, p)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain_error("log of a non-positive number", e));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain_error("sqrt of a negative number", e));
                    }
                    x.sqrt()
                }
                Func::Atan => x.atan(),
                Func::Asinh => x.asinh(),
                Func::Abs => x.abs(),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain_error("non-finite result", e))
    }
}

fn eval_pow(base: f64, exp: f64, at: &ScalarExpr) -> Result<f64> {
    if base > 0.0 {
        return Ok(base.powf(exp));
    }
    if base == 0.0 {
        if exp > 0.0 {
            return Ok(0.0);
        }
        if exp == 0.0 {
            return Ok(1.0);
        }
        return Err(domain_error("zero base with a negative exponent", at));
    }
    // Negative base: only integer exponents are defined here.
    if exp.fract() == 0.0 && exp.abs() < 9.0e15 {
        Ok(base.powf(exp))
    } else {
        Err(domain_error(
            "negative base with a non-integer exponent",
            at,
        ))
    }
}
