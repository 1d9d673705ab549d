//! Conformally flat base metrics `g = lambda(x) (dx1^2 + dx2^2)` and the
//! bits of calculus the rest of the crate needs from them: metric
//! gradients, divergence, Laplace–Beltrami on arbitrary 2x2 metric fields,
//! and Gaussian curvature (closed form for conformal metrics, Brioschi for
//! general ones).

use crate::expr::{jet::Jet2, ScalarField};
use crate::{Error, Point, Result};

/// Where a metric lives. Plain membership is strict (open region), so
/// values can be taken arbitrarily close to the boundary, as improper
/// length and reconstruction integrals require. Callers about to run a
/// finite-difference stencil should ask for membership with their stencil
/// radius as the margin instead; nothing stops an expression like a
/// conformal factor from silently evaluating outside its region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// The whole plane.
    All,
    /// The open upper half-plane `x2 > 0`.
    UpperHalfPlane,
    /// An open axis-aligned rectangle.
    Rect { x1: [f64; 2], x2: [f64; 2] },
}

impl Region {
    pub fn contains_with_margin(&self, p: Point, margin: f64) -> bool {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return false;
        }
        match self {
            Region::All => true,
            Region::UpperHalfPlane => p[1] > margin,
            Region::Rect { x1, x2 } => {
                p[0] > x1[0] + margin
                    && p[0] < x1[1] - margin
                    && p[1] > x2[0] + margin
                    && p[1] < x2[1] - margin
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.contains_with_margin(p, 0.0)
    }
}

/// A conformal metric on a region of the plane.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    name: String,
    region: Region,
    lambda: ScalarField,
}

/// Rotation by a quarter turn, `(a, b) -> (-b, a)`. For a conformal metric
/// this is simultaneously the Euclidean and the metric rotation, so it is
/// a pointwise isometry of tangent planes.
pub fn rotate_j(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

impl ConformalMetric {
    /// Flat metric, `lambda = 1`, on the whole plane.
    pub fn euclidean() -> ConformalMetric {
        ConformalMetric {
            name: "euclidean".into(),
            region: Region::All,
            lambda: ScalarField::constant(1.0),
        }
    }

    /// Curvature −1 metric `lambda = 1 / x2^2` on the upper half-plane.
    pub fn hyperbolic_half_plane() -> ConformalMetric {
        ConformalMetric {
            name: "hyperbolic-half-plane".into(),
            region: Region::UpperHalfPlane,
            lambda: ScalarField::parse("1/x2^2").expect("preset factor parses"),
        }
    }

    /// Custom conformal factor on a region. The factor must be strictly
    /// positive on the region; evaluation fails pointwise where it is not.
    pub fn conformal(name: impl Into<String>, lambda: ScalarField, region: Region) -> ConformalMetric {
        ConformalMetric {
            name: name.into(),
            region,
            lambda,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn is_hyperbolic_half_plane(&self) -> bool {
        self.name == "hyperbolic-half-plane"
    }

    pub fn lambda_field(&self) -> &ScalarField {
        &self.lambda
    }

    pub fn contains(&self, p: Point) -> bool {
        self.region.contains(p)
    }

    /// Conformal factor at `p`, after checking the region and positivity.
    pub fn lambda(&self, p: Point) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain { x1: p[0], x2: p[1] });
        }
        let l = self.lambda.value(p)?;
        if l <= 0.0 {
            return Err(Error::NonPositiveFactor {
                x1: p[0],
                x2: p[1],
                lambda: l,
            });
        }
        Ok(l)
    }

    pub(crate) fn lambda_jet(&self, p: Point) -> Result<Jet2> {
        self.lambda(p)?;
        self.lambda.jet(p)
    }

    /// Metric inner product of two coordinate vectors at `p`.
    pub fn inner(&self, p: Point, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
        Ok(self.lambda(p)? * (x[0] * y[0] + x[1] * y[1]))
    }

    pub fn norm_sq(&self, p: Point, x: [f64; 2]) -> Result<f64> {
        self.inner(p, x, x)
    }

    /// Metric gradient of `f` at `p`, as a coordinate vector: `(1/lambda)`
    /// times the Euclidean gradient. Pairs with any vector field `X` so
    /// that `<grad f, X> = X(f)`.
    pub fn gradient(&self, f: &ScalarField, p: Point) -> Result<[f64; 2]> {
        let l = self.lambda(p)?;
        Ok([f.partial(0, p)? / l, f.partial(1, p)? / l])
    }

    /// Metric divergence of a coordinate vector field:
    /// `Div X = Div_o X + <grad_o log lambda, X>_o`.
    pub fn divergence(&self, x: &[ScalarField; 2], p: Point) -> Result<f64> {
        let l = self.lambda(p)?;
        let l1 = self.lambda.partial(0, p)?;
        let l2 = self.lambda.partial(1, p)?;
        let flat = x[0].partial(0, p)? + x[1].partial(1, p)?;
        Ok(flat + (l1 * x[0].value(p)? + l2 * x[1].value(p)?) / l)
    }

    /// Gaussian curvature of the conformal metric,
    /// `K = -(lap_o log lambda) / (2 lambda)`, evaluated through the
    /// factor's own derivatives.
    pub fn gauss_curvature(&self, p: Point) -> Result<f64> {
        let l = self.lambda(p)?;
        let j = self.lambda.jet(p)?;
        let lap_log = ((j.h[0][0] + j.h[1][1]) * l - (j.g[0] * j.g[0] + j.g[1] * j.g[1])) / (l * l);
        Ok(-lap_log / (2.0 * l))
    }

    /// The conformal metric as a general 2x2 metric field.
    pub fn as_metric_field(&self) -> MetricField2x2 {
        let zero = ScalarField::constant(0.0);
        MetricField2x2 {
            g11: self.lambda.clone(),
            g12: zero,
            g22: self.lambda.clone(),
        }
    }
}

/// A general symmetric 2x2 metric field with evaluable entries.
#[derive(Debug, Clone)]
pub struct MetricField2x2 {
    pub g11: ScalarField,
    pub g12: ScalarField,
    pub g22: ScalarField,
}

impl MetricField2x2 {
    /// Entry matrix at `p`, rejecting samples that are not positive
    /// definite.
    pub fn at(&self, p: Point) -> Result<[[f64; 2]; 2]> {
        let a = self.g11.value(p)?;
        let b = self.g12.value(p)?;
        let c = self.g22.value(p)?;
        if a <= 0.0 || a * c - b * b <= 0.0 {
            return Err(Error::NotPositiveDefinite { x1: p[0], x2: p[1] });
        }
        Ok([[a, b], [b, c]])
    }

    /// Norm of a coordinate vector in this metric.
    pub fn norm_sq(&self, p: Point, v: [f64; 2]) -> Result<f64> {
        let g = self.at(p)?;
        Ok(g[0][0] * v[0] * v[0] + 2.0 * g[0][1] * v[0] * v[1] + g[1][1] * v[1] * v[1])
    }

    /// Laplace–Beltrami operator applied to `f` at `p`:
    /// `(1/sqrt(det g)) d_i (sqrt(det g) g^{ij} d_j f)`, expanded through
    /// the product rule so it only needs first derivatives of the entries
    /// and first and second derivatives of `f`.
    pub fn laplace_beltrami(&self, f: &ScalarField, p: Point) -> Result<f64> {
        let g11 = self.g11.value(p)?;
        let g12 = self.g12.value(p)?;
        let g22 = self.g22.value(p)?;
        let det = g11 * g22 - g12 * g12;
        if g11 <= 0.0 || det <= 0.0 {
            return Err(Error::NotPositiveDefinite { x1: p[0], x2: p[1] });
        }
        let s = det.sqrt();

        let d = |field: &ScalarField, i: usize| field.partial(i, p);
        let (g11_1, g11_2) = (d(&self.g11, 0)?, d(&self.g11, 1)?);
        let (g12_1, g12_2) = (d(&self.g12, 0)?, d(&self.g12, 1)?);
        let (g22_1, g22_2) = (d(&self.g22, 0)?, d(&self.g22, 1)?);

        let f1 = f.partial(0, p)?;
        let f2 = f.partial(1, p)?;
        let f11 = f.partial2(0, 0, p)?;
        let f12 = f.partial2(0, 1, p)?;
        let f22 = f.partial2(1, 1, p)?;

        // Fluxes F^1 = A/s, F^2 = B/s with A = g22 f1 - g12 f2,
        // B = g11 f2 - g12 f1.
        let a = g22 * f1 - g12 * f2;
        let b = g11 * f2 - g12 * f1;
        let det_1 = g11_1 * g22 + g11 * g22_1 - 2.0 * g12 * g12_1;
        let det_2 = g11_2 * g22 + g11 * g22_2 - 2.0 * g12 * g12_2;
        let s_1 = det_1 / (2.0 * s);
        let s_2 = det_2 / (2.0 * s);
        let a_1 = g22_1 * f1 + g22 * f11 - g12_1 * f2 - g12 * f12;
        let b_2 = g11_2 * f2 + g11 * f22 - g12_2 * f1 - g12 * f12;

        Ok((a_1 + b_2 - (a * s_1 + b * s_2) / s) / (s * s))
    }

    /// Gaussian curvature by the Brioschi formula, with entry derivatives
    /// taken by centered differences of entry *values* (step `step`). This
    /// route deliberately ignores any exact derivative data the entries
    /// carry, so it can serve as an independent cross-check.
    pub fn brioschi_curvature(&self, p: Point, step: f64) -> Result<f64> {
        let e = |q: Point| self.g11.value(q);
        let f = |q: Point| self.g12.value(q);
        let g = |q: Point| self.g22.value(q);

        let at = |h: &dyn Fn(Point) -> Result<f64>, di: f64, dj: f64| -> Result<f64> {
            h([p[0] + di * step, p[1] + dj * step])
        };
        let d1 = |h: &dyn Fn(Point) -> Result<f64>| -> Result<f64> {
            Ok((at(h, 1.0, 0.0)? - at(h, -1.0, 0.0)?) / (2.0 * step))
        };
        let d2 = |h: &dyn Fn(Point) -> Result<f64>| -> Result<f64> {
            Ok((at(h, 0.0, 1.0)? - at(h, 0.0, -1.0)?) / (2.0 * step))
        };
        let d11 = |h: &dyn Fn(Point) -> Result<f64>| -> Result<f64> {
            Ok((at(h, 1.0, 0.0)? - 2.0 * h(p)? + at(h, -1.0, 0.0)?) / (step * step))
        };
        let d22 = |h: &dyn Fn(Point) -> Result<f64>| -> Result<f64> {
            Ok((at(h, 0.0, 1.0)? - 2.0 * h(p)? + at(h, 0.0, -1.0)?) / (step * step))
        };
        let d12 = |h: &dyn Fn(Point) -> Result<f64>| -> Result<f64> {
            Ok(
                (at(h, 1.0, 1.0)? - at(h, 1.0, -1.0)? - at(h, -1.0, 1.0)? + at(h, -1.0, -1.0)?)
                    / (4.0 * step * step),
            )
        };

        let (ev, fv, gv) = (e(p)?, f(p)?, g(p)?);
        let (e_u, e_v) = (d1(&e)?, d2(&e)?);
        let (f_u, f_v) = (d1(&f)?, d2(&f)?);
        let (g_u, g_v) = (d1(&g)?, d2(&g)?);
        let e_vv = d22(&e)?;
        let g_uu = d11(&g)?;
        let f_uv = d12(&f)?;

        let m1 = [
            [
                -0.5 * e_vv + f_uv - 0.5 * g_uu,
                0.5 * e_u,
                f_u - 0.5 * e_v,
            ],
            [f_v - 0.5 * g_u, ev, fv],
            [0.5 * g_v, fv, gv],
        ];
        let m2 = [
            [0.0, 0.5 * e_v, 0.5 * g_u],
            [0.5 * e_v, ev, fv],
            [0.5 * g_u, fv, gv],
        ];
        let den = ev * gv - fv * fv;
        if den <= 0.0 {
            return Err(Error::NotPositiveDefinite { x1: p[0], x2: p[1] });
        }
        Ok((det3(m1) - det3(m2)) / (den * den))
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_gl;

    #[test]
    fn preset_factors() {
        let e = ConformalMetric::euclidean();
        assert_eq!(e.lambda([3.0, -7.0]).unwrap(), 1.0);
        let h = ConformalMetric::hyperbolic_half_plane();
        assert_eq!(h.lambda([0.0, 2.0]).unwrap(), 0.25);
        assert!(h.lambda([0.0, -1.0]).is_err());
        assert!(h.lambda([0.0, 0.0]).is_err());
    }

    #[test]
    fn hyperbolic_gradient_scales_by_x2_squared() {
        let h = ConformalMetric::hyperbolic_half_plane();
        let f = ScalarField::parse("x2").unwrap();
        let grad = h.gradient(&f, [0.0, 2.0]).unwrap();
        assert!((grad[0]).abs() < 1e-15);
        assert!((grad[1] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_pairs_as_a_differential() {
        let h = ConformalMetric::hyperbolic_half_plane();
        let f = ScalarField::parse("sin(x1)*x2 + x1^2").unwrap();
        let x = [
            ScalarField::parse("x1*x2").unwrap(),
            ScalarField::parse("cos(x2)").unwrap(),
        ];
        for &p in &[[0.3, 0.8], [-1.2, 2.5], [2.0, 0.4]] {
            let grad = h.gradient(&f, p).unwrap();
            let xv = [x[0].value(p).unwrap(), x[1].value(p).unwrap()];
            let pairing = h.inner(p, grad, xv).unwrap();
            let directional =
                xv[0] * f.partial(0, p).unwrap() + xv[1] * f.partial(1, p).unwrap();
            assert!((pairing - directional).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_example_on_the_half_plane() {
        // X = (0, x2) has flat divergence 1 and correction -2/x2 * x2 = -2.
        let h = ConformalMetric::hyperbolic_half_plane();
        let x = [
            ScalarField::constant(0.0),
            ScalarField::parse("x2").unwrap(),
        ];
        let div = h.divergence(&x, [0.0, 1.0]).unwrap();
        assert!((div - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn divergence_theorem_on_a_small_rectangle() {
        // Area integral of Div X against the metric area form equals the
        // outward metric flux through the boundary.
        let h = ConformalMetric::hyperbolic_half_plane();
        let x = [
            ScalarField::parse("sin(x1*x2)").unwrap(),
            ScalarField::parse("x1^2 - x2").unwrap(),
        ];
        let (a, b, c, d) = (0.2, 0.9, 1.3, 2.1);
        let area = integrate_gl(
            |t| {
                integrate_gl(
                    |s| {
                        let p = [s, t];
                        Ok(h.divergence(&x, p)? * h.lambda(p)?)
                    },
                    a,
                    b,
                    24,
                )
            },
            c,
            d,
            24,
        )
        .unwrap();
        // Metric flux through an edge with Euclidean outward normal n:
        // lambda * <X, n>_o per unit Euclidean length.
        let flux_edge = |f: &dyn Fn(f64) -> Result<(Point, [f64; 2])>, lo: f64, hi: f64| {
            integrate_gl(
                |t| {
                    let (p, n) = f(t)?;
                    let xv = [x[0].value(p)?, x[1].value(p)?];
                    Ok(h.lambda(p)? * (xv[0] * n[0] + xv[1] * n[1]))
                },
                lo,
                hi,
                24,
            )
            .unwrap()
        };
        let flux = flux_edge(&|s| Ok(([s, c], [0.0, -1.0])), a, b)
            + flux_edge(&|s| Ok(([s, d], [0.0, 1.0])), a, b)
            + flux_edge(&|t| Ok(([a, t], [-1.0, 0.0])), c, d)
            + flux_edge(&|t| Ok(([b, t], [1.0, 0.0])), c, d);
        assert!(
            (area - flux).abs() < 1e-6,
            "area {area} vs boundary {flux}"
        );
    }

    #[test]
    fn curvature_of_presets() {
        let h = ConformalMetric::hyperbolic_half_plane();
        for &p in &[[0.0, 1.0], [2.0, 0.3], [-1.5, 4.0]] {
            assert!((h.gauss_curvature(p).unwrap() + 1.0).abs() < 1e-12);
        }
        let e = ConformalMetric::euclidean();
        assert!((e.gauss_curvature([0.4, -2.0]).unwrap()).abs() < 1e-15);
        // Stereographic sphere factor: curvature +1.
        let sphere = ConformalMetric::conformal(
            "sphere",
            ScalarField::parse("4/(1+x1^2+x2^2)^2").unwrap(),
            Region::All,
        );
        for &p in &[[0.0, 0.0], [1.0, -0.5], [2.0, 2.0]] {
            assert!((sphere.gauss_curvature(p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_beltrami_reduces_to_scaled_flat_laplacian_on_conformal_metrics() {
        let h = ConformalMetric::hyperbolic_half_plane();
        let gfield = h.as_metric_field();
        let f = ScalarField::parse("exp(x1)*sin(x2) + x1*x2^3").unwrap();
        for &p in &[[0.5, 0.7], [-1.0, 2.0], [2.0, 1.2]] {
            let lb = gfield.laplace_beltrami(&f, p).unwrap();
            let flat = f.partial2(0, 0, p).unwrap() + f.partial2(1, 1, p).unwrap();
            let expected = p[1] * p[1] * flat;
            assert!((lb - expected).abs() < 1e-9, "at {p:?}: {lb} vs {expected}");
        }
    }

    #[test]
    fn brioschi_reproduces_preset_curvatures() {
        let h = ConformalMetric::hyperbolic_half_plane().as_metric_field();
        let k = h.brioschi_curvature([0.7, 1.4], 1e-4).unwrap();
        assert!((k + 1.0).abs() < 1e-6, "got {k}");
        let sphere = ConformalMetric::conformal(
            "sphere",
            ScalarField::parse("4/(1+x1^2+x2^2)^2").unwrap(),
            Region::All,
        )
        .as_metric_field();
        let k = sphere.brioschi_curvature([0.3, -0.6], 1e-4).unwrap();
        assert!((k - 1.0).abs() < 1e-6, "got {k}");
    }

    #[test]
    fn rotation_is_a_pointwise_isometry() {
        let h = ConformalMetric::hyperbolic_half_plane();
        let p = [0.4, 1.7];
        let v = [0.83, -1.21];
        let jv = rotate_j(v);
        assert_eq!(rotate_j(rotate_j(v)), [-v[0], -v[1]]);
        let n1 = h.norm_sq(p, v).unwrap();
        let n2 = h.norm_sq(p, jv).unwrap();
        assert!((n1 - n2).abs() < 1e-14);
        assert!(h.inner(p, v, jv).unwrap().abs() < 1e-14);
    }

    #[test]
    fn positive_definiteness_is_enforced() {
        let bad = MetricField2x2 {
            g11: ScalarField::constant(1.0),
            g12: ScalarField::constant(2.0),
            g22: ScalarField::constant(1.0),
        };
        assert!(matches!(
            bad.at([0.0, 0.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
