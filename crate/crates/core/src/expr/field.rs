//! Scalar fields: functions on the base coordinates with first and second
//! partial derivatives.
//!
//! A field's derivatives come from one of three places. Symbolic fields
//! differentiate their expression tree exactly. Finite-difference fields
//! wrap a black-box function and use centered stencils with the step
//! [`crate::H_FD`]. Derived fields (jet closures, grid-backed values with
//! known gradients) carry their own exact derivative data.

use super::jet::Jet2;
use super::{differentiate, eval, simplify, ScalarExpr, Var};
use crate::grid::GridData;
use crate::{Point, Result, H_FD};
use std::fmt;
use std::sync::Arc;

/// Where a field's derivative information comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    /// Exact symbolic differentiation of an expression tree.
    Symbolic,
    /// Centered finite differences of a black-box function.
    FiniteDifference { step: f64 },
    /// Assembled from other fields with exact propagation (jets, stored
    /// gradients, grid values).
    Derived,
}

trait FieldCore: Send + Sync {
    fn value(&self, p: Point) -> Result<f64>;
    fn partial(&self, i: usize, p: Point) -> Result<f64>;
    fn partial2(&self, i: usize, j: usize, p: Point) -> Result<f64>;
    fn provenance(&self) -> Provenance;
    /// The i-th partial derivative as a field of its own, when the core can
    /// do better than the generic finite-difference wrapper.
    fn gradient_field(&self, i: usize) -> Option<ScalarField> {
        let _ = i;
        None
    }
    fn describe(&self) -> String;
}

/// A scalar function of `(x1, x2)` with evaluable first and second
/// partials. Cheap to clone.
#[derive(Clone)]
pub struct ScalarField {
    core: Arc<dyn FieldCore>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.core.describe())
    }
}

impl ScalarField {
    /// Symbolic field: value and both derivative orders evaluate exact
    /// expression trees.
    pub fn from_expr(expr: ScalarExpr) -> ScalarField {
        let expr = simplify(&expr);
        let grad = [
            differentiate(&expr, Var::X1),
            differentiate(&expr, Var::X2),
        ];
        let hess = [
            [
                differentiate(&grad[0], Var::X1),
                differentiate(&grad[0], Var::X2),
            ],
            [
                differentiate(&grad[1], Var::X1),
                differentiate(&grad[1], Var::X2),
            ],
        ];
        ScalarField {
            core: Arc::new(SymbolicCore { expr, grad, hess }),
        }
    }

    /// Parse and wrap a source string.
    pub fn parse(src: &str) -> Result<ScalarField> {
        Ok(ScalarField::from_expr(super::parse(src)?))
    }

    pub fn constant(c: f64) -> ScalarField {
        ScalarField::from_expr(ScalarExpr::Const(c))
    }

    /// Wrap a black-box function; derivatives use centered differences with
    /// step [`H_FD`] (5-point stencils for repeated second derivatives).
    pub fn finite_difference<F>(f: F) -> ScalarField
    where
        F: Fn(Point) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField {
            core: Arc::new(FdCore {
                f: Arc::new(f),
                h: H_FD,
            }),
        }
    }

    /// Derived field defined by a jet closure: exact value, gradient and
    /// Hessian in one evaluation.
    pub(crate) fn from_jets<F>(f: F) -> ScalarField
    where
        F: Fn(Point) -> Result<Jet2> + Send + Sync + 'static,
    {
        ScalarField {
            core: Arc::new(JetCore { f: Arc::new(f) }),
        }
    }

    /// Grid-backed values with externally supplied gradient fields: the
    /// value interpolates bilinearly, derivatives delegate to `grad`.
    pub fn grid_backed(data: GridData, grad: [ScalarField; 2]) -> ScalarField {
        ScalarField {
            core: Arc::new(GridCore {
                data: Arc::new(data),
                grad,
            }),
        }
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        self.core.value(p)
    }

    /// First partial with respect to coordinate `i` (0 or 1).
    pub fn partial(&self, i: usize, p: Point) -> Result<f64> {
        self.core.partial(i, p)
    }

    /// Second partial `d^2 f / dx_i dx_j`.
    pub fn partial2(&self, i: usize, j: usize, p: Point) -> Result<f64> {
        self.core.partial2(i, j, p)
    }

    pub fn provenance(&self) -> Provenance {
        self.core.provenance()
    }

    /// The i-th partial derivative as a field. Symbolic and derived cores
    /// return exact fields; the fallback differentiates this field
    /// numerically one more time.
    pub fn gradient_field(&self, i: usize) -> ScalarField {
        if let Some(f) = self.core.gradient_field(i) {
            return f;
        }
        ScalarField {
            core: Arc::new(PartialCore {
                parent: self.clone(),
                i,
            }),
        }
    }

    /// Value, gradient and Hessian bundled for jet arithmetic. The Hessian
    /// is symmetrized from the `(0,1)` entry.
    pub(crate) fn jet(&self, p: Point) -> Result<Jet2> {
        let v = self.value(p)?;
        let g = [self.partial(0, p)?, self.partial(1, p)?];
        let h00 = self.partial2(0, 0, p)?;
        let h01 = self.partial2(0, 1, p)?;
        let h11 = self.partial2(1, 1, p)?;
        Ok(Jet2 {
            v,
            g,
            h: [[h00, h01], [h01, h11]],
        })
    }
}

struct SymbolicCore {
    expr: ScalarExpr,
    grad: [ScalarExpr; 2],
    hess: [[ScalarExpr; 2]; 2],
}

impl FieldCore for SymbolicCore {
    fn value(&self, p: Point) -> Result<f64> {
        eval(&self.expr, p)
    }

    fn partial(&self, i: usize, p: Point) -> Result<f64> {
        eval(&self.grad[i], p)
    }

    fn partial2(&self, i: usize, j: usize, p: Point) -> Result<f64> {
        eval(&self.hess[i][j], p)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Symbolic
    }

    fn gradient_field(&self, i: usize) -> Option<ScalarField> {
        Some(ScalarField::from_expr(self.grad[i].clone()))
    }

    fn describe(&self) -> String {
        self.expr.to_string()
    }
}

type BoxedFn = Arc<dyn Fn(Point) -> Result<f64> + Send + Sync>;

struct FdCore {
    f: BoxedFn,
    h: f64,
}

impl FdCore {
    fn shifted(&self, p: Point, i: usize, k: f64) -> Result<f64> {
        let mut q = p;
        q[i] += k * self.h;
        (self.f)(q)
    }
}

impl FieldCore for FdCore {
    fn value(&self, p: Point) -> Result<f64> {
        (self.f)(p)
    }

    fn partial(&self, i: usize, p: Point) -> Result<f64> {
        Ok((self.shifted(p, i, 1.0)? - self.shifted(p, i, -1.0)?) / (2.0 * self.h))
    }

    fn partial2(&self, i: usize, j: usize, p: Point) -> Result<f64> {
        if i == j {
            let m2 = self.shifted(p, i, -2.0)?;
            let m1 = self.shifted(p, i, -1.0)?;
            let z = (self.f)(p)?;
            let p1 = self.shifted(p, i, 1.0)?;
            let p2 = self.shifted(p, i, 2.0)?;
            Ok((-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * self.h * self.h))
        } else {
            let ev = |si: f64, sj: f64| -> Result<f64> {
                let mut q = p;
                q[i] += si * self.h;
                q[j] += sj * self.h;
                (self.f)(q)
            };
            Ok((ev(1.0, 1.0)? - ev(1.0, -1.0)? - ev(-1.0, 1.0)? + ev(-1.0, -1.0)?)
                / (4.0 * self.h * self.h))
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance::FiniteDifference { step: self.h }
    }

    fn describe(&self) -> String {
        format!("finite differences, step {}", self.h)
    }
}

type JetFn = Arc<dyn Fn(Point) -> Result<Jet2> + Send + Sync>;

struct JetCore {
    f: JetFn,
}

impl FieldCore for JetCore {
    fn value(&self, p: Point) -> Result<f64> {
        Ok((self.f)(p)?.v)
    }

    fn partial(&self, i: usize, p: Point) -> Result<f64> {
        Ok((self.f)(p)?.g[i])
    }

    fn partial2(&self, i: usize, j: usize, p: Point) -> Result<f64> {
        Ok((self.f)(p)?.h[i][j])
    }

    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }

    fn gradient_field(&self, i: usize) -> Option<ScalarField> {
        let f = self.f.clone();
        Some(ScalarField {
            core: Arc::new(JetGradCore { f, i }),
        })
    }

    fn describe(&self) -> String {
        "jet closure".into()
    }
}

/// Partial derivative of a jet field: value and gradient are exact (read
/// off the parent jet); its own second derivatives, i.e. third derivatives
/// of the parent, fall back to centered differences of exact data.
struct JetGradCore {
    f: JetFn,
    i: usize,
}

impl FieldCore for JetGradCore {
    fn value(&self, p: Point) -> Result<f64> {
        Ok((self.f)(p)?.g[self.i])
    }

    fn partial(&self, j: usize, p: Point) -> Result<f64> {
        Ok((self.f)(p)?.h[self.i][j])
    }

    fn partial2(&self, j: usize, k: usize, p: Point) -> Result<f64> {
        // Centered difference of the exact Hessian entry.
        let mut a = p;
        let mut b = p;
        a[k] += H_FD;
        b[k] -= H_FD;
        Ok(((self.f)(a)?.h[self.i][j] - (self.f)(b)?.h[self.i][j]) / (2.0 * H_FD))
    }

    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }

    fn describe(&self) -> String {
        format!("jet closure, partial {}", self.i)
    }
}

/// Generic "partial of a parent field" when nothing better is available.
struct PartialCore {
    parent: ScalarField,
    i: usize,
}

impl FieldCore for PartialCore {
    fn value(&self, p: Point) -> Result<f64> {
        self.parent.partial(self.i, p)
    }

    fn partial(&self, j: usize, p: Point) -> Result<f64> {
        self.parent.partial2(self.i, j, p)
    }

    fn partial2(&self, j: usize, k: usize, p: Point) -> Result<f64> {
        // Third derivative of the parent: centered difference of the
        // parent's second partial.
        let mut a = p;
        let mut b = p;
        a[k] += H_FD;
        b[k] -= H_FD;
        Ok((self.parent.partial2(self.i, j, a)? - self.parent.partial2(self.i, j, b)?)
            / (2.0 * H_FD))
    }

    fn provenance(&self) -> Provenance {
        self.parent.provenance()
    }

    fn describe(&self) -> String {
        format!("partial {} of {}", self.i, self.parent.core.describe())
    }
}

struct GridCore {
    data: Arc<GridData>,
    grad: [ScalarField; 2],
}

impl FieldCore for GridCore {
    fn value(&self, p: Point) -> Result<f64> {
        self.data.bilinear(p)
    }

    fn partial(&self, i: usize, p: Point) -> Result<f64> {
        self.grad[i].value(p)
    }

    fn partial2(&self, i: usize, j: usize, p: Point) -> Result<f64> {
        self.grad[i].partial(j, p)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }

    fn gradient_field(&self, i: usize) -> Option<ScalarField> {
        Some(self.grad[i].clone())
    }

    fn describe(&self) -> String {
        format!(
            "grid {}x{} with stored gradients",
            self.data.grid.nx, self.data.grid.ny
        )
    }
}
