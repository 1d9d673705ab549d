//! Graphs `t = u(x1, x2)` over a conformal surface, inside the Riemannian
//! or Lorentzian product of that surface with a line (`g_M + dt^2` or
//! `g_M - dt^2`).
//!
//! Everything extrinsic lives here: the induced metric, the unit normal
//! and its vertical component `theta`, the shape operator, mean curvature
//! through two independent routes (trace of the shape operator and the
//! divergence-form operator), and a per-point report of the identities the
//! geometry is supposed to satisfy.
//!
//! Derived quantities propagate derivatives with jets, so first and second
//! derivatives of `theta`, the induced metric entries and the flux fields
//! are exact whenever the graph function's own derivatives are.

use crate::expr::jet::Jet2;
use crate::expr::ScalarField;
use crate::metrics::{ConformalMetric, MetricField2x2};
use crate::{Error, Point, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Lorentzian graphs must keep `1 - |Du|^2` at least this large at every
/// evaluation point.
pub const SPACELIKE_MARGIN: f64 = 1e-10;

/// Sign of the vertical factor in the product metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// `g_M + dt^2`; graphs are critical points of area when minimal.
    Riemannian,
    /// `g_M - dt^2`; spacelike graphs are critical points when maximal.
    Lorentzian,
}

impl Signature {
    /// `<dt, dt>` in the product: `+1` Riemannian, `-1` Lorentzian.
    pub fn eps(self) -> f64 {
        match self {
            Signature::Riemannian => 1.0,
            Signature::Lorentzian => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
        }
    }
}

/// Causal character of the graph at a point.
#[derive(Debug, Clone, Serialize)]
pub struct CausalReport {
    pub point: [f64; 2],
    /// Squared metric norm of the gradient, `|Du|^2`.
    pub q: f64,
    /// Whether the tangent plane is spacelike (always true in the
    /// Riemannian product).
    pub spacelike: bool,
    /// Vertical component of the unit normal; `None` when the graph fails
    /// to be spacelike there.
    pub theta: Option<f64>,
}

/// Pointwise geometric invariants and identity residuals.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub point: [f64; 2],
    pub theta: f64,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    #[serde(rename = "K_gauss")]
    pub k_gauss: f64,
    #[serde(rename = "K_numeric")]
    pub k_numeric: f64,
    #[serde(rename = "normA2")]
    pub norm_a_sq: f64,
    #[serde(rename = "detA")]
    pub det_a: f64,
    #[serde(rename = "kappaM")]
    pub kappa_m: f64,
    pub grad_h_norm_sq: f64,
    pub shape_op: [[f64; 2]; 2],
    /// Intrinsic Laplacian of `1/theta` (Lorentzian graphs only).
    pub laplacian_inv_theta: Option<f64>,
    /// `K - lap log(1 - theta)`, the curvature of the conformally scaled
    /// metric `(1 - theta)^2 g` times that scale factor (Lorentzian only).
    pub khat_scaled: Option<f64>,
    /// Named identity residuals; all should vanish within tolerance when
    /// the identity applies to this graph.
    pub residuals: BTreeMap<String, f64>,
}

/// A graph surface: base metric, graph function, and product signature.
#[derive(Debug, Clone)]
pub struct GraphSurface {
    metric: ConformalMetric,
    u: ScalarField,
    du: [ScalarField; 2],
    signature: Signature,
}

struct JetState {
    lam: Jet2,
    /// Jets of the coordinate partials of `u`.
    u1: Jet2,
    u2: Jet2,
    /// Jets of the metric gradient components `Du^i = u_i / lambda`.
    p1: Jet2,
    p2: Jet2,
    nu: Jet2,
    theta: Jet2,
}

impl GraphSurface {
    pub fn new(metric: ConformalMetric, u: ScalarField, signature: Signature) -> GraphSurface {
        let du = [u.gradient_field(0), u.gradient_field(1)];
        GraphSurface {
            metric,
            u,
            du,
            signature,
        }
    }

    pub fn metric(&self) -> &ConformalMetric {
        &self.metric
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn gradient_fields(&self) -> &[ScalarField; 2] {
        &self.du
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    fn values(&self, x: Point) -> Result<(f64, [f64; 2], f64)> {
        let lam = self.metric.lambda(x)?;
        let d1 = self.du[0].value(x)?;
        let d2 = self.du[1].value(x)?;
        let q = (d1 * d1 + d2 * d2) / lam;
        Ok((lam, [d1, d2], q))
    }

    fn check_spacelike(&self, x: Point, q: f64) -> Result<f64> {
        let w = 1.0 + self.signature.eps() * q;
        if self.signature == Signature::Lorentzian && w < SPACELIKE_MARGIN {
            return Err(Error::NotSpacelike {
                x1: x[0],
                x2: x[1],
                margin: w,
            });
        }
        Ok(w)
    }

    /// Causal character at `x`. Never fails on a non-spacelike sample;
    /// that is what it is for.
    pub fn causal_report(&self, x: Point) -> Result<CausalReport> {
        let (_, _, q) = self.values(x)?;
        let w = 1.0 + self.signature.eps() * q;
        let spacelike = self.signature == Signature::Riemannian || w >= SPACELIKE_MARGIN;
        let theta = match (spacelike, self.signature) {
            (false, _) => None,
            (true, Signature::Riemannian) => Some(1.0 / w.sqrt()),
            (true, Signature::Lorentzian) => Some(-1.0 / w.sqrt()),
        };
        Ok(CausalReport {
            point: x,
            q,
            spacelike,
            theta,
        })
    }

    /// Vertical component of the unit normal, `<N, dt>` in the product.
    pub fn theta(&self, x: Point) -> Result<f64> {
        let (_, _, q) = self.values(x)?;
        let w = self.check_spacelike(x, q)?;
        Ok(match self.signature {
            Signature::Riemannian => 1.0 / w.sqrt(),
            Signature::Lorentzian => -1.0 / w.sqrt(),
        })
    }

    /// Unit normal as `(N^1, N^2, N^t)` in graph coordinates. Spacelike
    /// and upward in the Riemannian product, timelike and future-directed
    /// in the Lorentzian one.
    pub fn gauss_map(&self, x: Point) -> Result<[f64; 3]> {
        let (lam, d, q) = self.values(x)?;
        let w = self.check_spacelike(x, q)?;
        let nu = 1.0 / w.sqrt();
        let s = -self.signature.eps();
        Ok([s * nu * d[0] / lam, s * nu * d[1] / lam, nu])
    }

    fn jet_state(&self, x: Point) -> Result<JetState> {
        let lam = self.metric.lambda_jet(x)?;
        let u1 = self.du[0].jet(x)?;
        let u2 = self.du[1].jet(x)?;
        let li = lam.recip();
        let q = (u1 * u1 + u2 * u2) * li;
        let w = Jet2::constant(1.0) + q.scale(self.signature.eps());
        if self.signature == Signature::Lorentzian && w.v < SPACELIKE_MARGIN {
            return Err(Error::NotSpacelike {
                x1: x[0],
                x2: x[1],
                margin: w.v,
            });
        }
        let nu = w.sqrt().recip();
        let theta = match self.signature {
            Signature::Riemannian => nu,
            Signature::Lorentzian => -nu,
        };
        Ok(JetState {
            lam,
            u1,
            u2,
            p1: u1 * li,
            p2: u2 * li,
            nu,
            theta,
        })
    }

    /// `theta` as a derived field with exact first and second derivatives.
    pub fn theta_field(&self) -> ScalarField {
        let s = self.clone();
        ScalarField::from_jets(move |x| Ok(s.jet_state(x)?.theta))
    }

    /// First fundamental form at `x`:
    /// `g_ij = lambda delta_ij + eps u_i u_j`.
    pub fn induced_metric_at(&self, x: Point) -> Result<[[f64; 2]; 2]> {
        let (lam, d, _) = self.values(x)?;
        let e = self.signature.eps();
        Ok([
            [lam + e * d[0] * d[0], e * d[0] * d[1]],
            [e * d[0] * d[1], lam + e * d[1] * d[1]],
        ])
    }

    /// The induced metric as a field of exact-jet entries, suitable for
    /// the Laplace-Beltrami operator and the Brioschi curvature.
    pub fn induced_metric(&self) -> MetricField2x2 {
        let entry = |which: usize| {
            let s = self.clone();
            ScalarField::from_jets(move |x| {
                let lam = s.metric.lambda_jet(x)?;
                let u1 = s.du[0].jet(x)?;
                let u2 = s.du[1].jet(x)?;
                let e = s.signature.eps();
                Ok(match which {
                    0 => lam + (u1 * u1).scale(e),
                    1 => (u1 * u2).scale(e),
                    _ => lam + (u2 * u2).scale(e),
                })
            })
        };
        MetricField2x2 {
            g11: entry(0),
            g12: entry(1),
            g22: entry(2),
        }
    }

    /// Shape operator at `x` as a matrix acting on base coordinates. It is
    /// self-adjoint for the induced metric, not symmetric as a raw matrix.
    pub fn shape_operator(&self, x: Point) -> Result<[[f64; 2]; 2]> {
        let js = self.jet_state(x)?;
        Ok(shape_from_jets(&js, self.signature))
    }

    /// `H = -tr(A) / 2`.
    pub fn mean_curvature(&self, x: Point) -> Result<f64> {
        let a = self.shape_operator(x)?;
        Ok(-(a[0][0] + a[1][1]) / 2.0)
    }

    /// The divergence-form curvature operator matching this signature:
    /// `Div(Du / sqrt(1 + eps |Du|^2))`. Vanishes exactly on minimal
    /// (Riemannian) and maximal (Lorentzian) graphs.
    pub fn residual(&self, x: Point) -> Result<f64> {
        divergence_form(&self.metric, &self.du, self.signature.eps(), x)
    }

    /// Invariants and identity residuals at one point.
    ///
    /// Lorentzian graphs get the full residual set:
    /// `grad_h_identity`, `height_laplacian`, `grad_theta_weingarten`,
    /// `theta_gradient_maximal`, `laplacian_theta_identity`,
    /// `laplacian_inv_theta_identity` and `log_one_minus_theta`. The two
    /// `*_maximal`-flavored entries and the last two only vanish on
    /// maximal graphs; the others hold for every spacelike graph (the
    /// `laplacian_theta_identity` carries its mean-curvature term, so it
    /// is exact for non-maximal graphs too). Riemannian graphs report
    /// `grad_h_identity` and `height_laplacian` in their signs.
    pub fn invariant_report(&self, x: Point) -> Result<PointReport> {
        let js = self.jet_state(x)?;
        let a = shape_from_jets(&js, self.signature);
        let tr_a = a[0][0] + a[1][1];
        let det_a = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let norm_a_sq = a[0][0] * a[0][0] + a[1][1] * a[1][1] + 2.0 * a[0][1] * a[1][0];
        let mean_curvature = -tr_a / 2.0;
        let theta = js.theta.v;
        let kappa_m = self.metric.gauss_curvature(x)?;
        let k_gauss = kappa_m * theta * theta + self.signature.eps() * det_a;

        let gind = self.induced_metric();
        let k_numeric = gind.brioschi_curvature(x, 1e-4)?;

        let g = self.induced_metric_at(x)?;
        let det_g = g[0][0] * g[1][1] - g[0][1] * g[0][1];
        let ginv = [
            [g[1][1] / det_g, -g[0][1] / det_g],
            [-g[0][1] / det_g, g[0][0] / det_g],
        ];
        let raise = |w: [f64; 2]| {
            [
                ginv[0][0] * w[0] + ginv[0][1] * w[1],
                ginv[1][0] * w[0] + ginv[1][1] * w[1],
            ]
        };
        let inner = |v: [f64; 2], w: [f64; 2]| {
            g[0][0] * v[0] * w[0] + g[0][1] * (v[0] * w[1] + v[1] * w[0]) + g[1][1] * v[1] * w[1]
        };

        // Intrinsic gradients of the height and of theta, as coordinate
        // vectors.
        let dh = [js.u1.v, js.u2.v];
        let grad_h = raise(dh);
        let grad_h_norm_sq = dh[0] * grad_h[0] + dh[1] * grad_h[1];
        let dtheta = js.theta.g;
        let grad_theta = raise(dtheta);
        let grad_theta_norm_sq = dtheta[0] * grad_theta[0] + dtheta[1] * grad_theta[1];

        let lap_h = gind.laplace_beltrami(&self.u, x)?;

        let mut residuals = BTreeMap::new();
        let theta_sq = theta * theta;
        residuals.insert(
            "height_laplacian".to_string(),
            lap_h + 2.0 * mean_curvature * theta,
        );

        let mut laplacian_inv_theta = None;
        let mut khat_scaled = None;
        match self.signature {
            Signature::Lorentzian => {
                residuals.insert(
                    "grad_h_identity".to_string(),
                    grad_h_norm_sq - (theta_sq - 1.0),
                );

                let a_grad_h = [
                    a[0][0] * grad_h[0] + a[0][1] * grad_h[1],
                    a[1][0] * grad_h[0] + a[1][1] * grad_h[1],
                ];
                let diff = [grad_theta[0] - a_grad_h[0], grad_theta[1] - a_grad_h[1]];
                residuals.insert(
                    "grad_theta_weingarten".to_string(),
                    inner(diff, diff).max(0.0).sqrt(),
                );
                residuals.insert(
                    "theta_gradient_maximal".to_string(),
                    grad_theta_norm_sq - 0.5 * norm_a_sq * (theta_sq - 1.0),
                );

                let theta_field = self.theta_field();
                let lap_theta = gind.laplace_beltrami(&theta_field, x)?;
                let mc = {
                    let s = self.clone();
                    ScalarField::finite_difference(move |y| s.mean_curvature(y))
                };
                let dmc = [mc.partial(0, x)?, mc.partial(1, x)?];
                let grad_h_dot_grad_mc =
                    grad_h[0] * dmc[0] + grad_h[1] * dmc[1];
                residuals.insert(
                    "laplacian_theta_identity".to_string(),
                    lap_theta + 2.0 * grad_h_dot_grad_mc
                        - theta * (kappa_m * (theta_sq - 1.0) + norm_a_sq),
                );

                let inv_theta_field = {
                    let s = self.clone();
                    ScalarField::from_jets(move |y| Ok(s.jet_state(y)?.theta.recip()))
                };
                let lap_inv_theta = gind.laplace_beltrami(&inv_theta_field, x)?;
                laplacian_inv_theta = Some(lap_inv_theta);
                residuals.insert(
                    "laplacian_inv_theta_identity".to_string(),
                    lap_inv_theta
                        + (1.0 / theta)
                            * (kappa_m * (theta_sq - 1.0) + norm_a_sq / theta_sq),
                );

                // theta <= -1, so 1 - theta >= 2 and the logarithm is safe.
                let log_field = {
                    let s = self.clone();
                    ScalarField::from_jets(move |y| {
                        Ok((Jet2::constant(1.0) - s.jet_state(y)?.theta).ln())
                    })
                };
                let lap_log = gind.laplace_beltrami(&log_field, x)?;
                residuals.insert(
                    "log_one_minus_theta".to_string(),
                    lap_log - (k_gauss + theta * kappa_m),
                );
                khat_scaled = Some(k_gauss - lap_log);
            }
            Signature::Riemannian => {
                residuals.insert(
                    "grad_h_identity".to_string(),
                    grad_h_norm_sq - (1.0 - theta_sq),
                );
            }
        }

        Ok(PointReport {
            point: x,
            theta,
            mean_curvature,
            k_gauss,
            k_numeric,
            norm_a_sq,
            det_a,
            kappa_m,
            grad_h_norm_sq,
            shape_op: a,
            laplacian_inv_theta,
            khat_scaled,
            residuals,
        })
    }
}

/// Shape operator from jets of the gradient and the conformal factor.
///
/// With `P = Du` (metric gradient components), conformal Christoffel
/// symbols built from `phi_i = lambda_i / (2 lambda)`, and
/// `M^i_j = d_j P^i + Gamma^i_{jk} P^k` the covariant derivative of the
/// gradient, the operator is
/// `A^i_j = eps nu M^i_j - nu^3 lambda (M^1_j P^1 + M^2_j P^2) P^i`.
fn shape_from_jets(js: &JetState, signature: Signature) -> [[f64; 2]; 2] {
    let e = signature.eps();
    let lam = js.lam.v;
    let phi = [js.lam.g[0] / (2.0 * lam), js.lam.g[1] / (2.0 * lam)];
    let p = [js.p1.v, js.p2.v];
    let dp = [[js.p1.g[0], js.p1.g[1]], [js.p2.g[0], js.p2.g[1]]];
    let m = [
        [
            dp[0][0] + phi[0] * p[0] + phi[1] * p[1],
            dp[0][1] + phi[1] * p[0] - phi[0] * p[1],
        ],
        [
            dp[1][0] - phi[1] * p[0] + phi[0] * p[1],
            dp[1][1] + phi[0] * p[0] + phi[1] * p[1],
        ],
    ];
    let nu = js.nu.v;
    let nu3 = nu * nu * nu;
    let mut a = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let m_dot_p = m[0][j] * p[0] + m[1][j] * p[1];
            a[i][j] = e * nu * m[i][j] - nu3 * lam * m_dot_p * p[i];
        }
    }
    a
}

fn divergence_form(
    metric: &ConformalMetric,
    du: &[ScalarField; 2],
    eps: f64,
    x: Point,
) -> Result<f64> {
    let component = |i: usize| {
        let metric = metric.clone();
        let du = du.clone();
        ScalarField::from_jets(move |y| {
            let lam = metric.lambda_jet(y)?;
            let u1 = du[0].jet(y)?;
            let u2 = du[1].jet(y)?;
            let li = lam.recip();
            let q = (u1 * u1 + u2 * u2) * li;
            let w = Jet2::constant(1.0) + q.scale(eps);
            if w.v < SPACELIKE_MARGIN {
                return Err(Error::NotSpacelike {
                    x1: y[0],
                    x2: y[1],
                    margin: w.v,
                });
            }
            let nu = w.sqrt().recip();
            let ui = if i == 0 { u1 } else { u2 };
            Ok(ui * li * nu)
        })
    };
    metric.divergence(&[component(0), component(1)], x)
}

/// Minimal-graph operator `Div(Du / sqrt(1 + |Du|^2))`.
pub fn residual_minimal(metric: &ConformalMetric, u: &ScalarField, x: Point) -> Result<f64> {
    let du = [u.gradient_field(0), u.gradient_field(1)];
    divergence_form(metric, &du, 1.0, x)
}

/// Maximal-graph operator `Div(Du / sqrt(1 - |Du|^2))`.
pub fn residual_maximal(metric: &ConformalMetric, u: &ScalarField, x: Point) -> Result<f64> {
    let du = [u.gradient_field(0), u.gradient_field(1)];
    divergence_form(metric, &du, -1.0, x)
}

/// `Q(u) = u_1^2 u_11 + 2 u_1 u_2 u_12 + u_2^2 u_22`, the gradient-Hessian
/// contraction that appears in expanded graph operators.
pub fn grad_hessian_form(u: &ScalarField, x: Point) -> Result<f64> {
    let u1 = u.partial(0, x)?;
    let u2 = u.partial(1, x)?;
    let u11 = u.partial2(0, 0, x)?;
    let u12 = u.partial2(0, 1, x)?;
    let u22 = u.partial2(1, 1, x)?;
    Ok(u1 * u1 * u11 + 2.0 * u1 * u2 * u12 + u2 * u2 * u22)
}

/// Minimal-graph operator over the half-plane model, written out in flat
/// derivatives:
/// `x2^2 [ (1 + x2^2 |D_o u|^2) lap_o u - x2^2 Q(u) - x2 |D_o u|^2 u_2 ]
///  / (1 + x2^2 |D_o u|^2)^{3/2}`.
///
/// An independent route to [`residual_minimal`] for the hyperbolic base.
pub fn residual_minimal_halfplane(u: &ScalarField, x: Point) -> Result<f64> {
    if x[1] <= 0.0 {
        return Err(Error::OutsideDomain { x1: x[0], x2: x[1] });
    }
    let x2 = x[1];
    let u1 = u.partial(0, x)?;
    let u2 = u.partial(1, x)?;
    let lap = u.partial2(0, 0, x)? + u.partial2(1, 1, x)?;
    let w = u1 * u1 + u2 * u2;
    let q = grad_hessian_form(u, x)?;
    let s = 1.0 + x2 * x2 * w;
    Ok(x2 * x2 * (s * lap - x2 * x2 * q - x2 * w * u2) / s.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ConformalMetric;

    fn product_inner(
        lam: f64,
        eps: f64,
        a: [f64; 3],
        b: [f64; 3],
    ) -> f64 {
        lam * (a[0] * b[0] + a[1] * b[1]) + eps * a[2] * b[2]
    }

    #[test]
    fn tilted_plane_induced_metric() {
        let s = GraphSurface::new(
            ConformalMetric::euclidean(),
            ScalarField::parse("x1/2").unwrap(),
            Signature::Lorentzian,
        );
        let g = s.induced_metric_at([0.7, -0.3]).unwrap();
        assert_eq!(g, [[0.75, 0.0], [0.0, 1.0]]);
        let r = s.causal_report([0.7, -0.3]).unwrap();
        assert!(r.spacelike);
        assert!((r.q - 0.25).abs() < 1e-15);
    }

    #[test]
    fn theta_at_three_quarters_slope() {
        let s = GraphSurface::new(
            ConformalMetric::euclidean(),
            ScalarField::parse("sqrt(3)/2*x1").unwrap(),
            Signature::Lorentzian,
        );
        let th = s.theta([0.0, 0.0]).unwrap();
        assert!((th + 2.0).abs() < 1e-14, "got {th}");
    }

    #[test]
    fn normal_is_unit_orthogonal_and_theta_is_its_vertical_part() {
        let cases = [
            (Signature::Lorentzian, "0.1*x1*x2"),
            (Signature::Riemannian, "0.1*x1*x2"),
            (Signature::Lorentzian, "log(x1^2+x2^2)/3"),
        ];
        for (sig, src) in cases {
            let s = GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                ScalarField::parse(src).unwrap(),
                sig,
            );
            for &x in &[[0.5, 1.5], [-1.0, 2.2], [2.0, 0.9]] {
                let lam = s.metric().lambda(x).unwrap();
                let eps = sig.eps();
                let n = s.gauss_map(x).unwrap();
                let u1 = s.gradient_fields()[0].value(x).unwrap();
                let u2 = s.gradient_fields()[1].value(x).unwrap();
                // Tangent frame of the graph map.
                let e1 = [1.0, 0.0, u1];
                let e2 = [0.0, 1.0, u2];
                assert!(product_inner(lam, eps, n, e1).abs() < 1e-13);
                assert!(product_inner(lam, eps, n, e2).abs() < 1e-13);
                assert!((product_inner(lam, eps, n, n) - eps).abs() < 1e-13);
                // <N, dt> = eps * vertical component.
                let theta = s.theta(x).unwrap();
                assert!((theta - eps * n[2]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn slices_and_tilted_planes_are_totally_geodesic() {
        let slice = |sig| {
            GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                ScalarField::constant(0.0),
                sig,
            )
        };
        let plane = |sig| {
            GraphSurface::new(
                ConformalMetric::euclidean(),
                ScalarField::parse("0.3*x1 + 0.4*x2").unwrap(),
                sig,
            )
        };
        for sig in [Signature::Riemannian, Signature::Lorentzian] {
            for (surf, x) in [(slice(sig), [0.4, 1.7]), (plane(sig), [-2.0, 5.0])] {
                let a = surf.shape_operator(x).unwrap();
                for row in a {
                    for entry in row {
                        assert!(entry.abs() < 1e-14, "A entry {entry}");
                    }
                }
                assert!(surf.mean_curvature(x).unwrap().abs() < 1e-14);
                assert!(surf.residual(x).unwrap().abs() < 1e-12);
            }
            // Constant theta along each surface.
            let th_a = slice(sig).theta([0.4, 1.7]).unwrap();
            let th_b = slice(sig).theta([-1.0, 0.3]).unwrap();
            assert!((th_a - th_b).abs() < 1e-15);
        }
        let th = plane(Signature::Lorentzian).theta([0.0, 0.0]).unwrap();
        assert!((th + 1.0 / (1.0f64 - 0.25).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn trace_of_shape_operator_matches_divergence_route() {
        let metric = ConformalMetric::hyperbolic_half_plane();
        let u = ScalarField::parse("0.1*x1^2 + 0.2*x2").unwrap();
        for &x in &[[1.0, 1.5], [-0.5, 2.0], [0.3, 0.8]] {
            for sig in [Signature::Lorentzian, Signature::Riemannian] {
                let s = GraphSurface::new(metric.clone(), u.clone(), sig);
                let h = s.mean_curvature(x).unwrap();
                let div = s.residual(x).unwrap();
                // Lorentzian: Div(nu Du) = 2H. Riemannian: Div(nu Du) = -2H.
                let expected = match sig {
                    Signature::Lorentzian => 2.0 * h,
                    Signature::Riemannian => -2.0 * h,
                };
                assert!(
                    (div - expected).abs() < 1e-10,
                    "{sig:?} at {x:?}: div {div} vs trace route {expected}"
                );
            }
        }
    }

    #[test]
    fn flat_paraboloid_minimal_residual_closed_form() {
        let metric = ConformalMetric::euclidean();
        let u = ScalarField::parse("x1^2").unwrap();
        for &x in &[[0.0, 0.0], [0.5, 1.0], [-1.2, 0.3]] {
            let r = residual_minimal(&metric, &u, x).unwrap();
            let expected = 2.0 / (1.0 + 4.0 * x[0] * x[0]).powf(1.5);
            assert!((r - expected).abs() < 1e-12, "at {x:?}: {r} vs {expected}");
        }
    }

    #[test]
    fn halfplane_expansion_matches_divergence_route() {
        let metric = ConformalMetric::hyperbolic_half_plane();
        // A graph with no special properties keeps both routes honest.
        let u = ScalarField::parse("0.3*x1^2 - 0.1*x2^3 + x1").unwrap();
        for &x in &[[0.4, 0.9], [-1.1, 1.7], [2.0, 2.5]] {
            let a = residual_minimal(&metric, &u, x).unwrap();
            let b = residual_minimal_halfplane(&u, x).unwrap();
            assert!(a.abs() > 1e-3, "example should not be minimal at {x:?}");
            assert!((a - b).abs() < 1e-9, "at {x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn log_graph_is_minimal_in_the_half_plane() {
        let metric = ConformalMetric::hyperbolic_half_plane();
        let u = ScalarField::parse("log(x1^2+x2^2)").unwrap();
        for &x in &[[0.5, 0.5], [-2.0, 1.0], [1.5, 2.8]] {
            assert!(residual_minimal(&metric, &u, x).unwrap().abs() < 1e-11);
            assert!(residual_minimal_halfplane(&u, x).unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn entire_maximal_example_has_zero_trace_and_residual() {
        let metric = ConformalMetric::hyperbolic_half_plane();
        let w = ScalarField::parse(
            "log((x1^2+x2^2)/(2*(x2+sqrt(x2^2+(x1^2+x2^2)^2))))",
        )
        .unwrap();
        let s = GraphSurface::new(metric, w, Signature::Lorentzian);
        let r = s.causal_report([0.0, 1.0]).unwrap();
        assert!(r.spacelike);
        assert!((r.q - 0.5).abs() < 1e-12, "q {}", r.q);
        assert!((r.theta.unwrap() + 2.0f64.sqrt()).abs() < 1e-12);
        for &x in &[[0.0, 1.0], [0.7, 0.4], [-1.3, 2.0]] {
            let a = s.shape_operator(x).unwrap();
            assert!((a[0][0] + a[1][1]).abs() < 1e-12, "trace at {x:?}");
            assert!(s.residual(x).unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn maximal_identity_residuals_vanish() {
        let metric = ConformalMetric::hyperbolic_half_plane();
        let w = ScalarField::parse(
            "log((x1^2+x2^2)/(2*(x2+sqrt(x2^2+(x1^2+x2^2)^2))))",
        )
        .unwrap();
        let s = GraphSurface::new(metric, w, Signature::Lorentzian);
        for &x in &[[0.0, 1.0], [0.8, 0.6], [-1.0, 1.4]] {
            let rep = s.invariant_report(x).unwrap();
            let r = &rep.residuals;
            assert!(r["grad_h_identity"].abs() < 1e-12);
            assert!(r["height_laplacian"].abs() < 1e-9);
            assert!(r["grad_theta_weingarten"].abs() < 1e-9);
            assert!(r["theta_gradient_maximal"].abs() < 1e-9);
            assert!(r["laplacian_theta_identity"].abs() < 1e-7);
            assert!(r["laplacian_inv_theta_identity"].abs() < 1e-7);
            assert!(r["log_one_minus_theta"].abs() < 1e-7);
            assert!(rep.mean_curvature.abs() < 1e-12);
            assert!(
                (rep.norm_a_sq + 2.0 * rep.det_a).abs() < 1e-12,
                "norm^2 = -2 det A on maximal graphs"
            );
            assert!(
                (rep.k_gauss - rep.k_numeric).abs() < 1e-5,
                "K {} vs Brioschi {}",
                rep.k_gauss,
                rep.k_numeric
            );
            // On a maximal graph over the curvature -1 base the scaled
            // curvature collapses to theta itself, which pins it below -1.
            let khat = rep.khat_scaled.unwrap();
            assert!((khat - rep.theta).abs() < 1e-7, "khat {khat} vs theta {}", rep.theta);
            assert!(khat < -0.99);
        }
    }

    #[test]
    fn general_identities_hold_off_the_maximal_locus() {
        // A graph with H != 0 checks the mean-curvature terms.
        let s = GraphSurface::new(
            ConformalMetric::euclidean(),
            ScalarField::parse("0.1*(x1^2+x2^2)").unwrap(),
            Signature::Lorentzian,
        );
        for &x in &[[0.5, 0.2], [1.0, -1.0], [-0.4, 0.9]] {
            let rep = s.invariant_report(x).unwrap();
            assert!(rep.mean_curvature.abs() > 1e-3, "want H != 0 here");
            assert!(rep.residuals["grad_h_identity"].abs() < 1e-12);
            assert!(rep.residuals["height_laplacian"].abs() < 1e-10);
            assert!(rep.residuals["grad_theta_weingarten"].abs() < 1e-10);
            assert!(
                rep.residuals["laplacian_theta_identity"].abs() < 1e-6,
                "general theta laplacian at {x:?}: {}",
                rep.residuals["laplacian_theta_identity"]
            );
        }
    }

    #[test]
    fn riemannian_report_uses_its_own_signs() {
        let s = GraphSurface::new(
            ConformalMetric::hyperbolic_half_plane(),
            ScalarField::parse("0.2*x1*x2").unwrap(),
            Signature::Riemannian,
        );
        for &x in &[[0.5, 1.5], [-1.0, 0.8]] {
            let rep = s.invariant_report(x).unwrap();
            assert!(rep.residuals["grad_h_identity"].abs() < 1e-12);
            assert!(rep.residuals["height_laplacian"].abs() < 1e-9);
            assert!(rep.laplacian_inv_theta.is_none());
            assert!(rep.khat_scaled.is_none());
            assert!((rep.k_gauss - rep.k_numeric).abs() < 1e-5);
        }
    }

    #[test]
    fn non_spacelike_samples_are_flagged_not_hidden() {
        let s = GraphSurface::new(
            ConformalMetric::euclidean(),
            ScalarField::parse("2*x1").unwrap(),
            Signature::Lorentzian,
        );
        let rep = s.causal_report([0.0, 0.0]).unwrap();
        assert!(!rep.spacelike);
        assert!(rep.theta.is_none());
        assert!((rep.q - 4.0).abs() < 1e-15);
        assert!(matches!(
            s.theta([0.0, 0.0]),
            Err(Error::NotSpacelike { .. })
        ));
        assert!(matches!(
            s.invariant_report([0.0, 0.0]),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn laplace_beltrami_agrees_with_a_finite_difference_flux_oracle() {
        let metric = ConformalMetric::hyperbolic_half_plane();
        let u = ScalarField::parse("0.3*x1^2 - 0.1*x2^3 + x1").unwrap();
        let s = GraphSurface::new(metric, u.clone(), Signature::Riemannian);
        let gind = s.induced_metric();
        let f = ScalarField::parse("sin(x1) * x2").unwrap();

        // Flux-form oracle: all derivatives (inner gradient of f, outer
        // divergence) by centered differences of plain values.
        let h = 1e-4;
        let entries = |p: [f64; 2]| -> (f64, f64, f64) {
            (
                gind.g11.value(p).unwrap(),
                gind.g12.value(p).unwrap(),
                gind.g22.value(p).unwrap(),
            )
        };
        let fval = |p: [f64; 2]| f.value(p).unwrap();
        let flux = |p: [f64; 2], i: usize| -> f64 {
            let (g11, g12, g22) = entries(p);
            let det = g11 * g22 - g12 * g12;
            let sq = det.sqrt();
            let f1 = (fval([p[0] + h, p[1]]) - fval([p[0] - h, p[1]])) / (2.0 * h);
            let f2 = (fval([p[0], p[1] + h]) - fval([p[0], p[1] - h])) / (2.0 * h);
            if i == 0 {
                sq * (g22 * f1 - g12 * f2) / det
            } else {
                sq * (g11 * f2 - g12 * f1) / det
            }
        };
        for &x in &[[0.5, 1.2], [-0.8, 2.0]] {
            let (g11, g12, g22) = entries(x);
            let sq = (g11 * g22 - g12 * g12).sqrt();
            let d1 = (flux([x[0] + h, x[1]], 0) - flux([x[0] - h, x[1]], 0)) / (2.0 * h);
            let d2 = (flux([x[0], x[1] + h], 1) - flux([x[0], x[1] - h], 1)) / (2.0 * h);
            let oracle = (d1 + d2) / sq;
            let exact = gind.laplace_beltrami(&f, x).unwrap();
            assert!(
                (oracle - exact).abs() < 1e-4,
                "at {x:?}: oracle {oracle} vs exact {exact}"
            );
        }
    }

    #[test]
    fn report_serializes_with_stable_keys() {
        let s = GraphSurface::new(
            ConformalMetric::hyperbolic_half_plane(),
            ScalarField::parse("log(x1^2+x2^2)").unwrap(),
            Signature::Riemannian,
        );
        let rep = s.invariant_report([0.5, 1.0]).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        for key in ["theta", "\"H\"", "K_gauss", "K_numeric", "normA2", "detA", "kappaM"] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }
}
