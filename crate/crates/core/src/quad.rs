//! Gauss–Legendre quadrature, adaptive refinement, and improper-endpoint
//! handling shared by the duality, completeness and metric checks.

use crate::{Error, Result};
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence. Accurate to a
/// few ulps for the sizes used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x via the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let dpn = if n == 1 {
                1.0
            } else {
                n as f64 * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // Recompute the derivative at the converged node for the weight.
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let dpn = if n == 1 {
            1.0
        } else {
            n as f64 * (x * p1 - p0) / (x * x - 1.0)
        };
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    (nodes, weights)
}

fn rule32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(32))
}

fn rule15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

/// Fixed `n`-point Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate_gl<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (nodes, weights) = gauss_legendre(n);
    gl_with(&nodes, &weights, &f, a, b)
}

fn gl_with<F>(nodes: &[f64], weights: &[f64], f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

/// 32-point Gauss–Legendre over `[a, b]`, the workhorse rule for line
/// integrals of smooth closed forms.
pub fn integrate_gl32<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let (nodes, weights) = rule32();
    gl_with(nodes, weights, f, a, b)
}

/// Adaptive bisection with a 15-point rule: a panel is accepted when the
/// whole-panel estimate agrees with the two half-panel estimates within the
/// local tolerance, which halves on recursion. All evaluation nodes are
/// interior, so integrable endpoint behaviour is tolerated.
pub fn integrate_adaptive<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let (nodes, weights) = rule15();
    fn recurse<F>(
        nodes: &[f64],
        weights: &[f64],
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64> + ?Sized,
    {
        let m = 0.5 * (a + b);
        let left = gl_with(nodes, weights, f, a, m)?;
        let right = gl_with(nodes, weights, f, m, b)?;
        if !(left.is_finite() && right.is_finite()) {
            // Overflow cannot be refined away; report it to the caller.
            return Ok(left + right);
        }
        let floor = 1e-14 * (left.abs() + right.abs() + whole.abs());
        if (left + right - whole).abs() <= tol.max(floor) || depth >= 48 {
            return Ok(left + right);
        }
        Ok(recurse(nodes, weights, f, a, m, left, 0.5 * tol, depth + 1)?
            + recurse(nodes, weights, f, m, b, right, 0.5 * tol, depth + 1)?)
    }
    let whole = gl_with(nodes, weights, f, a, b)?;
    recurse(nodes, weights, f, a, b, whole, tol, 0)
}

/// Result of an integral whose endpoints may be improper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral {
    pub value: f64,
    /// Every improper tail settled, either because three successive dyadic
    /// tail panels each contributed less than a tenth of the tolerance or
    /// because a stable geometric decay was extrapolated, and no panel had
    /// to be abandoned at an evaluation failure.
    pub converged: bool,
    /// The running value crossed the cap and integration stopped early; the
    /// value is then a lower bound.
    pub capped: bool,
}

/// Integrate `f` over the open interval `(a, b)`, where either endpoint may
/// be improper (integrand undefined or unbounded at the endpoint, or the
/// endpoint infinite). The interior is split at an anchor point where the
/// integrand evaluates (the midpoint when possible, otherwise the first
/// usable mark from a short scan) and each side is swept by geometrically
/// shrinking (or growing, toward an infinite endpoint) dyadic panels; a
/// sweep stops once three successive panels each contribute less than
/// `tol / 10`, or earlier if `cap` is crossed. A sweep blocked right at
/// the anchor is tolerated as long as the other side produced a value;
/// only an integrand that yields nothing anywhere propagates its error.
pub fn integrate_improper<F>(f: &F, a: f64, b: f64, tol: f64, cap: Option<f64>) -> Result<TailIntegral>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "integration interval must satisfy a < b, got ({a}, {b})"
        )));
    }
    let anchor = find_anchor(f, a, b)?;
    let mut total = 0.0;
    let mut converged = true;
    let mut capped = false;
    let mut any_side = false;
    let mut sweep_err = None;
    for (from, to) in [(anchor, b), (anchor, a)] {
        match sweep_tail(f, from, to, tol, cap.map(|c| c - total)) {
            Ok(t) => {
                any_side = true;
                total += t.value;
                converged &= t.converged;
                capped |= t.capped;
                if capped {
                    break;
                }
            }
            Err(e) => {
                converged = false;
                sweep_err.get_or_insert(e);
            }
        }
    }
    match (any_side, sweep_err) {
        (false, Some(e)) => Err(e),
        _ => Ok(TailIntegral {
            value: total,
            converged,
            capped,
        }),
    }
}

/// Pick the point the two sweeps start from: the first candidate where the
/// integrand has a finite value, preferring the natural midpoint. An
/// integrand that fails at every candidate returns the first error it
/// produced; one that merely overflows everywhere keeps the midpoint and
/// lets the sweeps report the blockage.
fn find_anchor<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let mut candidates = Vec::with_capacity(22);
    let mid = match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            let mid = 0.5 * (a + b);
            candidates.push(mid);
            for k in 1..8 {
                candidates.push(mid - (b - a) * f64::from(k) / 16.0);
                candidates.push(mid + (b - a) * f64::from(k) / 16.0);
            }
            mid
        }
        (true, false) => {
            for j in 0..=10 {
                candidates.push(a + 2f64.powi(j));
            }
            for j in 1..=10 {
                candidates.push(a + 2f64.powi(-j));
            }
            a + 1.0
        }
        (false, true) => {
            for j in 0..=10 {
                candidates.push(b - 2f64.powi(j));
            }
            for j in 1..=10 {
                candidates.push(b - 2f64.powi(-j));
            }
            b - 1.0
        }
        (false, false) => {
            candidates.push(0.0);
            for j in 0..=10 {
                candidates.push(-(2f64.powi(j)));
                candidates.push(2f64.powi(j));
            }
            0.0
        }
    };
    let mut first_err = None;
    for x in candidates {
        match f(x) {
            Ok(v) if v.is_finite() => return Ok(x),
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(mid),
    }
}

/// Sweep from `from` toward `to` (either side of `from`, possibly
/// infinite) with dyadic panels. Every panel is integrated with its
/// natural orientation `(lo, hi)`, so the two sweeps of
/// [`integrate_improper`] add up to the `(a, b)` integral directly.
///
/// Toward a finite endpoint the panel integrals of any integrand with a
/// power-law endpoint behavior decay geometrically. Once four successive
/// panels show a stable decay ratio, the remaining tail is summed as a
/// geometric series instead of being swept: this keeps the evaluation
/// points away from the endpoint, where integrands assembled from large
/// cancelling terms lose their accuracy long before the endpoint itself.
///
/// An integrand may also stop being evaluable partway through the sweep:
/// factors overflow, or a graph loses its certified spacelike margin. A
/// panel that fails to integrate is then shrunk toward its settled end
/// until it succeeds, so the sweep accumulates everything on the good
/// side of the obstruction and reports the result as not converged. Only
/// an integrand that yields nothing at all propagates its error.
fn sweep_tail<F>(f: &F, from: f64, to: f64, tol: f64, cap: Option<f64>) -> Result<TailIntegral>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let towards_upper = to > from;
    let mut total = 0.0;
    let mut small_streak = 0u32;
    let mut settled = false;
    let mut blocked = false;
    let mut any_piece = false;
    let mut recent: Vec<f64> = Vec::new();
    let mut prev = from;
    for k in 0..2048 {
        let next = if to.is_finite() {
            // Geometric approach: cover half of the remaining gap. When
            // the midpoint is no longer representable the mass left over
            // is below floating-point resolution anyway.
            let remaining = to - prev;
            if remaining == 0.0 {
                return Ok(TailIntegral {
                    value: total,
                    converged: true,
                    capped: false,
                });
            }
            let next = prev + 0.5 * remaining;
            if next == prev || next == to {
                // Exhausted the representable panels without settling.
                return Ok(TailIntegral {
                    value: total,
                    converged: false,
                    capped: false,
                });
            }
            next
        } else {
            // Geometric escape: panels double in length.
            if k >= 62 {
                return Ok(TailIntegral {
                    value: total,
                    converged: false,
                    capped: false,
                });
            }
            let step = 2f64.powi(k as i32);
            if towards_upper {
                from + step
            } else {
                from - step
            }
        };
        let mut attempt = next;
        let mut last_err = None;
        let piece = loop {
            let (lo, hi) = if towards_upper { (prev, attempt) } else { (attempt, prev) };
            match integrate_adaptive(f, lo, hi, tol / 64.0) {
                Ok(v) if v.is_finite() => break Some(v),
                Ok(_) => blocked = true,
                Err(e) => {
                    blocked = true;
                    last_err = Some(e);
                }
            }
            let half = prev + 0.5 * (attempt - prev);
            if half == prev || half == attempt {
                break None;
            }
            attempt = half;
        };
        let Some(piece) = piece else {
            // The wall sits right at the settled end: nothing more can be
            // integrated. With mass already in hand that is an honest
            // lower bound; failing on the whole first panel is the
            // caller's problem.
            return match last_err {
                Some(e) if !any_piece => Err(e),
                _ => Ok(TailIntegral {
                    value: total,
                    converged: false,
                    capped: false,
                }),
            };
        };
        any_piece = true;
        total += piece;
        prev = attempt;
        if let Some(c) = cap {
            if total.abs() >= c {
                return Ok(TailIntegral {
                    value: total,
                    converged: false,
                    capped: true,
                });
            }
        }
        if piece.abs() < tol / 10.0 {
            small_streak += 1;
            if small_streak >= 3 {
                settled = true;
                break;
            }
        } else {
            small_streak = 0;
        }
        if to.is_finite() {
            recent.push(piece);
            if recent.len() >= 4 {
                if let Some(tail) = geometric_tail(&recent[recent.len() - 4..], tol) {
                    total += tail;
                    let capped = cap.is_some_and(|c| total.abs() >= c);
                    return Ok(TailIntegral {
                        value: total,
                        converged: !capped && !blocked,
                        capped,
                    });
                }
            }
        }
    }
    Ok(TailIntegral {
        value: total,
        converged: settled && !blocked,
        capped: false,
    })
}

/// Extrapolated remainder of a geometrically decaying panel sequence, or
/// `None` when the last four panel integrals do not decay at a stable
/// ratio or the extrapolation's own uncertainty exceeds `tol / 10`. The
/// uncertainty is propagated from the ratio spread through the geometric
/// sum.
fn geometric_tail(last: &[f64], tol: f64) -> Option<f64> {
    let (a, b, c, d) = (last[0], last[1], last[2], last[3]);
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return None;
    }
    let ratios = [b / a, c / b, d / c];
    for r in ratios {
        if !(r > 0.02 && r < 0.95) {
            return None;
        }
    }
    let r = ratios[2];
    let spread = (ratios[0] - r).abs().max((ratios[1] - r).abs());
    if spread > 0.02 {
        return None;
    }
    let sensitivity = d.abs() * spread / ((1.0 - r) * (1.0 - r));
    if sensitivity <= tol / 10.0 {
        Some(d * r / (1.0 - r))
    } else {
        None
    }
}
