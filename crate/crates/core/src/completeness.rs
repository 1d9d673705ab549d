//! Lengths of curves in the induced geometry of a graph, and the two
//! probes built on them: a divergent curve of finite induced length
//! certifies incompleteness, and a uniform positive lower bound on the
//! induced metric against a complete reference certifies completeness.
//! Only the incompleteness direction can be decided by computation; the
//! length probe therefore reports "finite" or "inconclusive", never
//! "complete".

use crate::expr::{parse_in_var, ScalarField};
use crate::graph::GraphSurface;
use crate::metrics::ConformalMetric;
use crate::quad::integrate_improper;
use crate::{Error, Point, Result};

/// Induced length at which a ray probe gives up and declares the curve
/// inconclusive (likely infinite), in base-metric units.
pub const L_MAX: f64 = 1e3;

/// A parametrized plane curve `s -> (x1(s), x2(s))` on an interval whose
/// endpoints may be infinite or otherwise improper. Components carry their
/// derivative fields, so velocities are exact for symbolic components. The
/// parametrization is expected to be regular; a vanishing velocity is
/// reported as an error when evaluation meets it.
#[derive(Debug, Clone)]
pub struct Curve {
    components: [ScalarField; 2],
    derivatives: [ScalarField; 2],
    interval: (f64, f64),
}

impl Curve {
    pub fn new(x1: ScalarField, x2: ScalarField, interval: (f64, f64)) -> Result<Curve> {
        if !(interval.0 < interval.1) {
            return Err(Error::InvalidArgument(format!(
                "curve interval must satisfy a < b, got ({}, {})",
                interval.0, interval.1
            )));
        }
        let derivatives = [x1.gradient_field(0), x2.gradient_field(0)];
        Ok(Curve {
            components: [x1, x2],
            derivatives,
            interval,
        })
    }

    /// Components given as expressions in the parameter `s`.
    pub fn parse(x1: &str, x2: &str, interval: (f64, f64)) -> Result<Curve> {
        Curve::new(
            ScalarField::from_expr(parse_in_var(x1, "s")?),
            ScalarField::from_expr(parse_in_var(x2, "s")?),
            interval,
        )
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn point(&self, s: f64) -> Result<Point> {
        Ok([
            self.components[0].value([s, 0.0])?,
            self.components[1].value([s, 0.0])?,
        ])
    }

    pub fn velocity(&self, s: f64) -> Result<[f64; 2]> {
        Ok([
            self.derivatives[0].value([s, 0.0])?,
            self.derivatives[1].value([s, 0.0])?,
        ])
    }
}

/// Outcome of a length integral whose endpoints may be improper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveLength {
    pub length: f64,
    /// The improper tails settled; `length` is the integral to the
    /// requested tolerance. When false, `length` is only a lower bound.
    pub converged: bool,
    /// Integration stopped early because the running length crossed a cap.
    pub capped: bool,
}

/// Length of `curve` in the induced metric of `surface`.
///
/// The speed is `sqrt(g(c', c'))` with `g` the first fundamental form;
/// improper endpoints are handled by dyadic subdivision with geometric
/// tail extrapolation. A point where the integrand meets a non-spacelike
/// tangent (Lorentzian) or a vanishing velocity is an error.
pub fn curve_length(surface: &GraphSurface, curve: &Curve, tol: f64) -> Result<CurveLength> {
    length_probe(surface, curve, tol, None)
}

fn length_probe(
    surface: &GraphSurface,
    curve: &Curve,
    tol: f64,
    cap: Option<f64>,
) -> Result<CurveLength> {
    let speed = |s: f64| -> Result<f64> {
        let p = curve.point(s)?;
        let v = curve.velocity(s)?;
        if v[0] == 0.0 && v[1] == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "curve is singular (zero velocity) at s = {s}"
            )));
        }
        let g = surface.induced_metric_at(p)?;
        let sq = g[0][0] * v[0] * v[0] + 2.0 * g[0][1] * v[0] * v[1] + g[1][1] * v[1] * v[1];
        if sq <= 0.0 {
            return Err(Error::NotSpacelike {
                x1: p[0],
                x2: p[1],
                margin: sq,
            });
        }
        Ok(sq.sqrt())
    };
    let (a, b) = curve.interval;
    let t = integrate_improper(&speed, a, b, tol, cap)?;
    Ok(CurveLength {
        length: t.value,
        converged: t.converged,
        capped: t.capped,
    })
}

/// Verdict of [`ray_probe`] for one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayClass {
    /// The length integral settled below [`L_MAX`]. For a divergent curve
    /// this is an incompleteness certificate.
    Finite { length: f64 },
    /// The running length crossed [`L_MAX`], or the tail never settled.
    /// Completeness cannot be decided by sampling, so this only says the
    /// probe found no finite-length witness along this curve.
    Inconclusive { lower_bound: f64 },
}

/// Classify a family of divergent curves by induced length. Divergence
/// (leaving every compact set) is the caller's responsibility; the probe
/// only measures length.
pub fn ray_probe(surface: &GraphSurface, rays: &[Curve], tol: f64) -> Result<Vec<RayClass>> {
    rays.iter()
        .map(|c| {
            let r = length_probe(surface, c, tol, Some(L_MAX))?;
            Ok(if r.converged && !r.capped && r.length < L_MAX {
                RayClass::Finite { length: r.length }
            } else {
                RayClass::Inconclusive {
                    lower_bound: r.length,
                }
            })
        })
        .collect()
}

/// Result of [`metric_ratio_scan`]: the smallest generalized eigenvalue of
/// the induced metric against the reference over the sample set, and where
/// it was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanReport {
    pub infimum: f64,
    pub argmin: Point,
}

/// Infimum over samples and tangent directions of
/// `g(X, X) / g_ref(X, X)`, where `g` is the induced metric of `surface`
/// and `g_ref` the reference conformal metric.
///
/// Per point this is the smaller eigenvalue of the induced metric relative
/// to the reference; for a graph over its own base metric it equals
/// `1 - |Du|^2` in the Lorentzian product (the minimizing direction is
/// `Du`) and `1` in the Riemannian one. A positive infimum against a
/// complete reference certifies completeness of the induced metric.
pub fn metric_ratio_scan(
    surface: &GraphSurface,
    reference: &ConformalMetric,
    samples: impl IntoIterator<Item = Point>,
) -> Result<ScanReport> {
    let mut infimum = f64::INFINITY;
    let mut argmin = [f64::NAN, f64::NAN];
    let mut seen = false;
    for p in samples {
        seen = true;
        let g = surface.induced_metric_at(p)?;
        let r = reference.lambda(p)?;
        let (b11, b12, b22) = (g[0][0] / r, g[0][1] / r, g[1][1] / r);
        let half_tr = 0.5 * (b11 + b22);
        let det = b11 * b22 - b12 * b12;
        let mu = half_tr - (half_tr * half_tr - det).max(0.0).sqrt();
        if mu <= 0.0 {
            return Err(Error::NotSpacelike {
                x1: p[0],
                x2: p[1],
                margin: mu,
            });
        }
        if mu < infimum {
            infimum = mu;
            argmin = p;
        }
    }
    if !seen {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    Ok(ScanReport { infimum, argmin })
}
