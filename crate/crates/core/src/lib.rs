//! Geometry of graphs `t = u(x1, x2)` over a conformally flat surface,
//! inside the product of that surface with the real line.
//!
//! The product carries either the Riemannian metric `g_M + dt²` or the
//! Lorentzian metric `g_M − dt²`. In the Riemannian case the graphs of
//! interest are minimal; in the Lorentzian case they are spacelike, and the
//! distinguished ones are maximal. The crate provides:
//!
//! * a small expression language with exact differentiation ([`expr`]),
//! * conformal base metrics and their calculus ([`metrics`]),
//! * pointwise surface geometry of a graph: induced metric, Gauss map,
//!   shape operator, curvature identities ([`graph`]),
//! * the conjugation that pairs minimal graphs with maximal ones by
//!   rotating the normalized gradient and integrating ([`duality`]),
//! * length and completeness probes along curves ([`completeness`]),
//! * a catalog of worked graphs with known closed forms ([`catalog`]),
//! * a damped Newton solver for the Dirichlet problem ([`solver`]),
//! * a scene-driven command line interface ([`cli`]).

pub mod catalog;
pub mod cli;
pub mod completeness;
pub mod duality;
mod error;
pub mod expr;
pub mod graph;
pub mod grid;
pub mod metrics;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};

/// A point of the base surface, in conformal coordinates `(x1, x2)`.
pub type Point = [f64; 2];

/// Step used by finite-difference fallbacks throughout the crate.
pub const H_FD: f64 = 1e-5;
