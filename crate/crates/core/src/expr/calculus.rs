//! Exact differentiation and a conservative folding simplifier.

use super::{eval, BinOp, Func, ScalarExpr, Var};

fn c(v: f64) -> ScalarExpr {
    ScalarExpr::Const(v)
}

fn bin(op: BinOp, a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    ScalarExpr::Bin(op, Box::new(a), Box::new(b))
}

fn add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    bin(BinOp::Add, a, b)
}

fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    bin(BinOp::Sub, a, b)
}

fn mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    bin(BinOp::Mul, a, b)
}

fn div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    bin(BinOp::Div, a, b)
}

fn pow(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    bin(BinOp::Pow, a, b)
}

fn call(f: Func, a: ScalarExpr) -> ScalarExpr {
    ScalarExpr::Call(f, Box::new(a))
}

/// Exact partial derivative of `e` with respect to `var`. The result is
/// passed through [`simplify`] to keep repeated differentiation from
/// ballooning.
pub fn differentiate(e: &ScalarExpr, var: Var) -> ScalarExpr {
    simplify(&diff(e, var))
}

fn diff(e: &ScalarExpr, var: Var) -> ScalarExpr {
    match e {
        ScalarExpr::Const(_) => c(0.0),
        ScalarExpr::Var(v) => c(if *v == var { 1.0 } else { 0.0 }),
        ScalarExpr::Neg(a) => ScalarExpr::Neg(Box::new(diff(a, var))),
        ScalarExpr::Bin(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            let (da, db) = (diff(a, var), diff(b, var));
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a.clone(), db)),
                BinOp::Div => div(
                    sub(mul(da, b.clone()), mul(a.clone(), db)),
                    pow(b.clone(), c(2.0)),
                ),
                BinOp::Pow => {
                    if let ScalarExpr::Const(k) = b {
                        // d(f^k) = k f^(k-1) f'
                        mul(mul(c(*k), pow(a.clone(), c(k - 1.0))), da)
                    } else {
                        // d(f^g) = f^g (g' log f + g f' / f)
                        mul(
                            e.clone(),
                            add(
                                mul(db, call(Func::Log, a.clone())),
                                div(mul(b.clone(), da), a.clone()),
                            ),
                        )
                    }
                }
            }
        }
        ScalarExpr::Call(func, a) => {
            let a = a.as_ref();
            let da = diff(a, var);
            match func {
                Func::Sin => mul(call(Func::Cos, a.clone()), da),
                Func::Cos => ScalarExpr::Neg(Box::new(mul(call(Func::Sin, a.clone()), da))),
                Func::Exp => mul(e.clone(), da),
                Func::Log => div(da, a.clone()),
                Func::Sqrt => div(da, mul(c(2.0), e.clone())),
                Func::Atan => div(da, add(c(1.0), pow(a.clone(), c(2.0)))),
                Func::Asinh => div(da, call(Func::Sqrt, add(c(1.0), pow(a.clone(), c(2.0))))),
                // sign(f) f', written so the kink fails loudly at f = 0.
                Func::Abs => div(mul(a.clone(), da), e.clone()),
            }
        }
    }
}

fn as_const(e: &ScalarExpr) -> Option<f64> {
    match e {
        ScalarExpr::Const(v) => Some(*v),
        _ => None,
    }
}

/// Fold constants and strip `0`/`1` identities. No factoring, expansion or
/// reassociation: the tree shape is otherwise preserved, so a simplified
/// expression evaluates to the same values (a folded `0*f` no longer probes
/// the domain of `f`, which is the one deliberate exception).
pub fn simplify(e: &ScalarExpr) -> ScalarExpr {
    match e {
        ScalarExpr::Const(_) | ScalarExpr::Var(_) => e.clone(),
        ScalarExpr::Neg(a) => match simplify(a) {
            ScalarExpr::Const(v) => c(-v),
            ScalarExpr::Neg(inner) => *inner,
            a => ScalarExpr::Neg(Box::new(a)),
        },
        ScalarExpr::Bin(op, a, b) => {
            let a = simplify(a);
            let b = simplify(b);
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                if let Ok(v) = eval(&bin(*op, c(x), c(y)), [0.0, 0.0]) {
                    return c(v);
                }
            }
            let (ca, cb) = (as_const(&a), as_const(&b));
            match op {
                BinOp::Add => {
                    if ca == Some(0.0) {
                        b
                    } else if cb == Some(0.0) {
                        a
                    } else {
                        add(a, b)
                    }
                }
                BinOp::Sub => {
                    if cb == Some(0.0) {
                        a
                    } else if ca == Some(0.0) {
                        simplify(&ScalarExpr::Neg(Box::new(b)))
                    } else {
                        sub(a, b)
                    }
                }
                BinOp::Mul => {
                    if ca == Some(0.0) || cb == Some(0.0) {
                        c(0.0)
                    } else if ca == Some(1.0) {
                        b
                    } else if cb == Some(1.0) {
                        a
                    } else if ca == Some(-1.0) {
                        simplify(&ScalarExpr::Neg(Box::new(b)))
                    } else if cb == Some(-1.0) {
                        simplify(&ScalarExpr::Neg(Box::new(a)))
                    } else {
                        mul(a, b)
                    }
                }
                BinOp::Div => {
                    if ca == Some(0.0) {
                        c(0.0)
                    } else if cb == Some(1.0) {
                        a
                    } else {
                        div(a, b)
                    }
                }
                BinOp::Pow => {
                    if cb == Some(1.0) {
                        a
                    } else if cb == Some(0.0) {
                        c(1.0)
                    } else {
                        pow(a, b)
                    }
                }
            }
        }
        ScalarExpr::Call(func, a) => {
            let a = simplify(a);
            if as_const(&a).is_some() {
                if let Ok(v) = eval(&call(*func, a.clone()), [0.0, 0.0]) {
                    return c(v);
                }
            }
            call(*func, a)
        }
    }
}
