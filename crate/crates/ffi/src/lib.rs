//! C interface to the surface toolkit. Handles are opaque pointers owned
//! by the caller and released with `mg_surface_free`. Every function
//! returns an [`MgStatus`]; on failure a human-readable message is stored
//! per thread and can be read with [`mg_last_error_message`]. Out
//! parameters are written only when the call returns [`MgStatus::Ok`].
//!
//! The generated header lives in `include/maxgraph.h`.

use maxgraph_core::catalog;
use maxgraph_core::completeness::{curve_length, Curve};
use maxgraph_core::duality::{reconstruct_dual, DualDirection};
use maxgraph_core::expr::ScalarField;
use maxgraph_core::graph::{GraphSurface, Signature};
use maxgraph_core::grid::Grid;
use maxgraph_core::metrics::ConformalMetric;
use maxgraph_core::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every call. Zero is success; anything else is a failure and
/// leaves a message for `mg_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MgStatus {
    Ok = 0,
    /// An expression failed to parse.
    Parse = 1,
    /// The point or field left the domain of definition.
    Domain = 2,
    /// The graph is not spacelike where it needs to be.
    NotSpacelike = 3,
    /// An iteration or a linear solve failed to converge.
    Diverged = 4,
    /// A name, size or option was rejected.
    InvalidArgument = 5,
    /// A required pointer was null.
    NullPointer = 6,
    /// A string argument was not valid UTF-8.
    Utf8 = 7,
    /// An internal invariant was violated; the library state is still
    /// usable but the call did nothing.
    Panic = 8,
}

/// A spacelike or minimal graph over a conformal base metric.
pub struct MgSurface {
    inner: GraphSurface,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes were removed");
    });
}

fn status_of(e: &Error) -> MgStatus {
    match e {
        Error::Parse { .. } | Error::UnknownIdentifier { .. } => MgStatus::Parse,
        Error::Domain { .. }
        | Error::OutsideDomain { .. }
        | Error::NonPositiveFactor { .. }
        | Error::NotPositiveDefinite { .. } => MgStatus::Domain,
        Error::NotSpacelike { .. } => MgStatus::NotSpacelike,
        Error::SolverDiverged { .. } | Error::LinearSolve(_) => MgStatus::Diverged,
        Error::InvalidArgument(_) | Error::Scene(_) | Error::Io(_) => MgStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> MgStatus {
    set_last_error(&e.to_string());
    status_of(&e)
}

fn guard(f: impl FnOnce() -> MgStatus) -> MgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            MgStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string that stays
/// alive for the duration of the call.
unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, MgStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} is null"));
        return Err(MgStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error(&format!("{what} is not valid UTF-8"));
        MgStatus::Utf8
    })
}

fn require<T>(ptr: *mut T, what: &str) -> Result<(), MgStatus> {
    if ptr.is_null() {
        set_last_error(&format!("{what} is null"));
        Err(MgStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn surface_ref<'a>(handle: *const MgSurface) -> Result<&'a GraphSurface, MgStatus> {
    if handle.is_null() {
        set_last_error("surface handle is null");
        return Err(MgStatus::NullPointer);
    }
    Ok(&(*handle).inner)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on the calling thread.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build a surface from a base metric name (`"euclidean"` or
/// `"hyperbolic-half-plane"`), a signature (`"riemannian"` or
/// `"lorentzian"`) and a height expression in the variables `x1`, `x2`.
///
/// # Safety
/// The strings must be NUL-terminated; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_new(
    metric: *const c_char,
    signature: *const c_char,
    expression: *const c_char,
    out: *mut *mut MgSurface,
) -> MgStatus {
    guard(|| {
        let (metric, signature, expression) = match (
            text(metric, "metric"),
            text(signature, "signature"),
            text(expression, "expression"),
        ) {
            (Ok(m), Ok(s), Ok(e)) => (m, s, e),
            (Err(s), ..) | (_, Err(s), _) | (.., Err(s)) => return s,
        };
        if let Err(s) = require(out, "out") {
            return s;
        }
        let metric = match metric {
            "euclidean" => ConformalMetric::euclidean(),
            "hyperbolic-half-plane" => ConformalMetric::hyperbolic_half_plane(),
            other => {
                return fail(Error::InvalidArgument(format!(
                    "unknown metric `{other}`; use euclidean or hyperbolic-half-plane"
                )));
            }
        };
        let signature = match signature {
            "riemannian" => Signature::Riemannian,
            "lorentzian" => Signature::Lorentzian,
            other => {
                return fail(Error::InvalidArgument(format!(
                    "unknown signature `{other}`; use riemannian or lorentzian"
                )));
            }
        };
        let u = match ScalarField::parse(expression) {
            Ok(u) => u,
            Err(e) => return fail(e),
        };
        let surface = GraphSurface::new(metric, u, signature);
        out.write(Box::into_raw(Box::new(MgSurface { inner: surface })));
        MgStatus::Ok
    })
}

/// Build one of the built-in surfaces by name. `mg_last_error_message`
/// lists the valid names after a failed lookup.
///
/// # Safety
/// `name` must be NUL-terminated; `out` must point to writable storage
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_catalog(
    name: *const c_char,
    out: *mut *mut MgSurface,
) -> MgStatus {
    guard(|| {
        let name = match text(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        if let Err(s) = require(out, "out") {
            return s;
        }
        match catalog::get_example(name) {
            Ok(entry) => {
                let surface = entry.surface().clone();
                out.write(Box::into_raw(Box::new(MgSurface { inner: surface })));
                MgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a surface. Null is accepted and ignored.
///
/// # Safety
/// `handle` must be null or a pointer obtained from this library that has
/// not been freed before.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_free(handle: *mut MgSurface) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn eval(
    handle: *const MgSurface,
    out: *mut f64,
    f: impl FnOnce(&GraphSurface) -> maxgraph_core::Result<f64>,
) -> MgStatus {
    let surface = match surface_ref(handle) {
        Ok(s) => s,
        Err(s) => return s,
    };
    if let Err(s) = require(out, "out") {
        return s;
    }
    match f(surface) {
        Ok(v) => {
            out.write(v);
            MgStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Height of the graph at a point.
///
/// # Safety
/// `handle` must be a live surface; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_value(
    handle: *const MgSurface,
    x1: f64,
    x2: f64,
    out: *mut f64,
) -> MgStatus {
    guard(|| eval(handle, out, |s| s.u().value([x1, x2])))
}

/// Residual of the minimal or maximal graph equation at a point. Zero
/// means the surface satisfies its equation there.
///
/// # Safety
/// `handle` must be a live surface; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_residual(
    handle: *const MgSurface,
    x1: f64,
    x2: f64,
    out: *mut f64,
) -> MgStatus {
    guard(|| eval(handle, out, |s| s.residual([x1, x2])))
}

/// Mean curvature of the graph at a point.
///
/// # Safety
/// `handle` must be a live surface; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_mean_curvature(
    handle: *const MgSurface,
    x1: f64,
    x2: f64,
    out: *mut f64,
) -> MgStatus {
    guard(|| eval(handle, out, |s| s.mean_curvature([x1, x2])))
}

/// Vertical component of the unit normal at a point. In the Lorentzian
/// product it is at most -1, in the Riemannian one it lies in (0, 1].
///
/// # Safety
/// `handle` must be a live surface; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_theta(
    handle: *const MgSurface,
    x1: f64,
    x2: f64,
    out: *mut f64,
) -> MgStatus {
    guard(|| eval(handle, out, |s| s.theta([x1, x2])))
}

/// Causal character at a point: the squared gradient norm `q` and whether
/// the tangent plane is spacelike. Unlike the other evaluators this does
/// not fail on a timelike point; it reports it.
///
/// # Safety
/// `handle` must be a live surface; `q_out` and `spacelike_out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mg_surface_causal_character(
    handle: *const MgSurface,
    x1: f64,
    x2: f64,
    q_out: *mut f64,
    spacelike_out: *mut bool,
) -> MgStatus {
    guard(|| {
        let surface = match surface_ref(handle) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if let Err(s) = require(q_out, "q_out").and(require(spacelike_out, "spacelike_out")) {
            return s;
        }
        match surface.causal_report([x1, x2]) {
            Ok(report) => {
                q_out.write(report.q);
                spacelike_out.write(report.spacelike);
                MgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reconstruct the dual graph on a uniform grid by path integration.
/// `values_out` receives `nx * ny` heights in row-major order with `x1`
/// varying fastest, anchored to zero at the basepoint. `certified_out`
/// reports whether the defining one-form was closed to within `tol`.
/// Pass `min_to_max = true` to go from a minimal graph to its maximal
/// conjugate and `false` for the way back.
///
/// # Safety
/// `handle` must be a live surface; `values_out` must point to writable
/// storage for `nx * ny` doubles; the scalar out pointers must be
/// writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mg_surface_dualize(
    handle: *const MgSurface,
    x1_lo: f64,
    x1_hi: f64,
    x2_lo: f64,
    x2_hi: f64,
    nx: usize,
    ny: usize,
    basepoint_x1: f64,
    basepoint_x2: f64,
    min_to_max: bool,
    tol: f64,
    values_out: *mut f64,
    closedness_sup_out: *mut f64,
    certified_out: *mut bool,
) -> MgStatus {
    guard(|| {
        let surface = match surface_ref(handle) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if let Err(s) = require(values_out, "values_out")
            .and(require(closedness_sup_out, "closedness_sup_out"))
            .and(require(certified_out, "certified_out"))
        {
            return s;
        }
        let grid = match Grid::new([x1_lo, x1_hi], [x2_lo, x2_hi], nx, ny) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let direction = if min_to_max {
            DualDirection::MinimalToMaximal
        } else {
            DualDirection::MaximalToMinimal
        };
        match reconstruct_dual(
            surface.u(),
            surface.metric(),
            grid,
            [basepoint_x1, basepoint_x2],
            direction,
            tol,
        ) {
            Ok(rec) => {
                debug_assert_eq!(rec.values.values.len(), nx * ny);
                std::ptr::copy_nonoverlapping(rec.values.values.as_ptr(), values_out, nx * ny);
                closedness_sup_out.write(rec.closedness_sup);
                certified_out.write(rec.certified);
                MgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Length of a parametrized curve in the induced metric of the graph.
/// The curve components are expressions in the parameter `s` on the
/// interval `[s_lo, s_hi]`, which may be infinite. `converged_out` tells
/// whether the improper integral settled; when it is false the length is
/// a lower bound. `capped_out` reports that the running total crossed the
/// built-in cutoff and the curve was classified as having infinite
/// length.
///
/// # Safety
/// `handle` must be a live surface; the strings must be NUL-terminated;
/// the out pointers must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mg_surface_curve_length(
    handle: *const MgSurface,
    x1_expr: *const c_char,
    x2_expr: *const c_char,
    s_lo: f64,
    s_hi: f64,
    tol: f64,
    length_out: *mut f64,
    converged_out: *mut bool,
    capped_out: *mut bool,
) -> MgStatus {
    guard(|| {
        let surface = match surface_ref(handle) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let (x1_expr, x2_expr) = match (text(x1_expr, "x1_expr"), text(x2_expr, "x2_expr")) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if let Err(s) = require(length_out, "length_out")
            .and(require(converged_out, "converged_out"))
            .and(require(capped_out, "capped_out"))
        {
            return s;
        }
        let curve = match Curve::parse(x1_expr, x2_expr, (s_lo, s_hi)) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match curve_length(surface, &curve, tol) {
            Ok(len) => {
                length_out.write(len.length);
                converged_out.write(len.converged);
                capped_out.write(len.capped);
                MgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
