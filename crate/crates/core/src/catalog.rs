//! Built-in library of graph surfaces: the two explicit minimal graphs
//! over the hyperbolic half-plane, their maximal duals (one reconstructed
//! by path integration, one in closed form), an entire spacelike graph
//! over the flat plane whose induced metric is incomplete, and the totally
//! geodesic cases. Also the incomplete elliptic integral of the first
//! kind, which shows up when the reconstructed dual is pushed to a closed
//! form.

use crate::duality::{reconstruct_dual, DualDirection};
use crate::expr::jet::Jet2;
use crate::expr::ScalarField;
use crate::graph::{GraphSurface, Signature};
use crate::grid::Grid;
use crate::metrics::ConformalMetric;
use crate::{Error, Point, Result};
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::OnceLock;

const MINIMAL_LOG: &str = "log(x1^2+x2^2)";
const MINIMAL_INV: &str = "x1/(x1^2+x2^2)";
const MAXIMAL_W2: &str = "log((x1^2+x2^2)/(2*(x2+sqrt(x2^2+(x1^2+x2^2)^2))))";
const AFFINE: &str = "0.3*x1 + 0.4*x2";

/// Partials of the dual of the log graph.
const W1_X1: &str = "-2*x2/sqrt((x1^2+x2^2)*(x1^2+5*x2^2))";
const W1_X2: &str = "2*x1/sqrt((x1^2+x2^2)*(x1^2+5*x2^2))";
/// Partials of the dual of the inverse graph, i.e. of the closed form
/// above.
const W2_X1: &str = "2*x1*x2/((x1^2+x2^2)*sqrt((x1^2+x2^2)^2+x2^2))";
const W2_X2: &str = "(x2^2-x1^2)/((x1^2+x2^2)*sqrt((x1^2+x2^2)^2+x2^2))";

/// Qualitative facts known about a catalog surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Minimal,
    Maximal,
    Entire,
    Complete,
    Incomplete,
    TotallyGeodesic,
}

/// A named example surface with everything needed to run the rest of the
/// toolkit on it.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    name: &'static str,
    surface: GraphSurface,
    expression: Option<&'static str>,
    closed_form_partials: Option<[ScalarField; 2]>,
    properties: BTreeSet<Property>,
}

impl CatalogEntry {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn surface(&self) -> &GraphSurface {
        &self.surface
    }

    pub fn u(&self) -> &ScalarField {
        self.surface.u()
    }

    pub fn metric(&self) -> &ConformalMetric {
        self.surface.metric()
    }

    pub fn signature(&self) -> Signature {
        self.surface.signature()
    }

    /// Source text of the graph function, when it has one.
    pub fn expression(&self) -> Option<&'static str> {
        self.expression
    }

    /// Independently known partial derivatives, used to validate the graph
    /// function rather than define it.
    pub fn closed_form_partials(&self) -> Option<&[ScalarField; 2]> {
        self.closed_form_partials.as_ref()
    }

    pub fn properties(&self) -> &BTreeSet<Property> {
        &self.properties
    }

    pub fn has(&self, p: Property) -> bool {
        self.properties.contains(&p)
    }
}

/// Names accepted by [`get_example`].
pub fn names() -> [&'static str; 7] {
    [
        "minimal-log",
        "minimal-inv",
        "maximal-w1",
        "maximal-w2",
        "flat-incomplete",
        "slice",
        "affine",
    ]
}

/// Look up a built-in surface by name.
pub fn get_example(name: &str) -> Result<CatalogEntry> {
    use Property::*;
    let entry = match name {
        "minimal-log" => CatalogEntry {
            name: "minimal-log",
            surface: GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                ScalarField::parse(MINIMAL_LOG)?,
                Signature::Riemannian,
            ),
            expression: Some(MINIMAL_LOG),
            closed_form_partials: None,
            properties: BTreeSet::from([Minimal, Entire]),
        },
        "minimal-inv" => CatalogEntry {
            name: "minimal-inv",
            surface: GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                ScalarField::parse(MINIMAL_INV)?,
                Signature::Riemannian,
            ),
            expression: Some(MINIMAL_INV),
            closed_form_partials: None,
            properties: BTreeSet::from([Minimal, Entire]),
        },
        "maximal-w1" => CatalogEntry {
            name: "maximal-w1",
            surface: GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                w1_field()?,
                Signature::Lorentzian,
            ),
            expression: None,
            closed_form_partials: Some([ScalarField::parse(W1_X1)?, ScalarField::parse(W1_X2)?]),
            properties: BTreeSet::from([Maximal, Entire, Complete]),
        },
        "maximal-w2" => CatalogEntry {
            name: "maximal-w2",
            surface: GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                ScalarField::parse(MAXIMAL_W2)?,
                Signature::Lorentzian,
            ),
            expression: Some(MAXIMAL_W2),
            closed_form_partials: Some([ScalarField::parse(W2_X1)?, ScalarField::parse(W2_X2)?]),
            properties: BTreeSet::from([Maximal, Entire, Incomplete]),
        },
        "flat-incomplete" => CatalogEntry {
            name: "flat-incomplete",
            surface: GraphSurface::new(
                ConformalMetric::euclidean(),
                flat_incomplete_field(),
                Signature::Lorentzian,
            ),
            expression: None,
            closed_form_partials: None,
            properties: BTreeSet::from([Entire, Incomplete]),
        },
        "slice" => CatalogEntry {
            name: "slice",
            surface: GraphSurface::new(
                ConformalMetric::hyperbolic_half_plane(),
                ScalarField::constant(0.0),
                Signature::Lorentzian,
            ),
            expression: Some("0"),
            closed_form_partials: None,
            properties: BTreeSet::from([Maximal, Entire, Complete, TotallyGeodesic]),
        },
        "affine" => CatalogEntry {
            name: "affine",
            surface: GraphSurface::new(
                ConformalMetric::euclidean(),
                ScalarField::parse(AFFINE)?,
                Signature::Lorentzian,
            ),
            expression: Some(AFFINE),
            closed_form_partials: None,
            properties: BTreeSet::from([Maximal, Entire, Complete, TotallyGeodesic]),
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown catalog entry `{other}`; available: {}",
                names().join(", ")
            )))
        }
    };
    Ok(entry)
}

/// The reconstructed dual of the log graph, cached per process. Values
/// come from path integration on `[-3,3] x [0.2,3]` with the basepoint
/// `(0,1)` on the grid; derivatives re-evaluate the rotated form exactly.
/// The graph vanishes on the whole axis `x1 = 0`, since its `x2` partial
/// is zero there.
fn w1_field() -> Result<ScalarField> {
    static W1: OnceLock<std::result::Result<ScalarField, String>> = OnceLock::new();
    W1.get_or_init(|| {
        let build = || -> Result<ScalarField> {
            let u = ScalarField::parse(MINIMAL_LOG)?;
            let metric = ConformalMetric::hyperbolic_half_plane();
            let grid = Grid::new([-3.0, 3.0], [0.2, 3.0], 61, 57)?;
            let rec = reconstruct_dual(
                &u,
                &metric,
                grid,
                [0.0, 1.0],
                DualDirection::MinimalToMaximal,
                1e-8,
            )?;
            if !rec.certified {
                return Err(Error::InvalidArgument(format!(
                    "dual reconstruction of the log graph failed closedness: {}",
                    rec.closedness_sup
                )));
            }
            Ok(rec.w)
        };
        build().map_err(|e| e.to_string())
    })
    .clone()
    .map_err(Error::InvalidArgument)
}

/// The entire spacelike graph over the flat plane with incomplete induced
/// metric: `u(x1, x2) = F(|x1|)` outside the strip `|x1| < 1` with
/// `F(t) = integral of sqrt(1 - exp(-r)) dr from 0 to t`, glued inside the
/// strip to the even quartic matching value, first and second derivative
/// at the seam. The quartic's slope stays below 1, so the graph is
/// strictly spacelike everywhere while its slope tends to 1 at infinity.
fn flat_incomplete_field() -> ScalarField {
    let (a, b, c) = flat_quartic_coefficients();
    ScalarField::from_jets(move |p: Point| {
        let s = p[0];
        Ok(if s.abs() < 1.0 {
            let s2 = s * s;
            Jet2 {
                v: a + b * s2 + c * s2 * s2,
                g: [2.0 * b * s + 4.0 * c * s * s2, 0.0],
                h: [[2.0 * b + 12.0 * c * s2, 0.0], [0.0, 0.0]],
            }
        } else {
            let t = s.abs();
            let sg = s.signum();
            let e = (-t).exp();
            let v = (1.0 - e).sqrt();
            // atanh(v) = ln(1+v) + t/2 because 1 - v^2 = exp(-t); this
            // form stays finite for all representable t.
            Jet2 {
                v: t + 2.0 * (1.0 + v).ln() - 2.0 * v,
                g: [sg * v, 0.0],
                h: [[e / (2.0 * v), 0.0], [0.0, 0.0]],
            }
        })
    })
}

/// Coefficients of the even quartic `a + b s^2 + c s^4` that continues
/// `F` through the strip with two derivatives matched at `s = 1`.
fn flat_quartic_coefficients() -> (f64, f64, f64) {
    let e1 = (-1.0f64).exp();
    let fp = (1.0 - e1).sqrt();
    let fpp = e1 / (2.0 * fp);
    let f1 = 1.0 + 2.0 * (1.0 + fp).ln() - 2.0 * fp;
    let c = (fpp - fp) / 8.0;
    let b = (fp - 4.0 * c) / 2.0;
    let a = f1 - b - c;
    (a, b, c)
}

/// Incomplete elliptic integral of the first kind,
/// `F(phi, k) = integral of 1 / sqrt(1 - k^2 sin^2 t) from 0 to phi`,
/// for `|phi| <= pi/2` and `0 <= k < 1`, via the Carlson symmetric form.
pub fn elliptic_f(phi: f64, k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "elliptic modulus must lie in [0, 1), got {k}"
        )));
    }
    if !phi.is_finite() || phi.abs() > std::f64::consts::FRAC_PI_2 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "amplitude must satisfy |phi| <= pi/2, got {phi}"
        )));
    }
    let s = phi.sin();
    let c = phi.cos();
    Ok(s * carlson_rf(c * c, 1.0 - k * k * s * s, 1.0))
}

/// Carlson's symmetric integral `R_F(x, y, z)` by the duplication
/// algorithm, for nonnegative arguments with at most one zero.
fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut mu;
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        mu = (x + y + z) / 3.0;
        let dev = (1.0 - x / mu)
            .abs()
            .max((1.0 - y / mu).abs())
            .max((1.0 - z / mu).abs());
        if dev < 2.5e-3 {
            break;
        }
    }
    let dx = 1.0 - x / mu;
    let dy = 1.0 - y / mu;
    let dz = 1.0 - z / mu;
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt()
}
