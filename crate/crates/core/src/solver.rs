//! Damped Newton solver for the Dirichlet problem of the minimal and
//! maximal graph equations on a rectangle. The equation is discretized in
//! flux form with a nine-point stencil, so the discrete operator is the
//! exact analogue of the continuum `(1/lambda) Div(nu D_o u)` and vanishes
//! on affine data over a flat base. Newton steps use the analytic
//! Jacobian of the fluxes and a banded LU factorization with partial
//! pivoting; a backtracking line search keeps every accepted iterate
//! strictly spacelike at the flux midpoints and strictly decreases the
//! residual.

use crate::expr::ScalarField;
use crate::graph::Signature;
use crate::grid::{Grid, GridData};
use crate::metrics::ConformalMetric;
use crate::{Error, Result};

/// Dirichlet data for the graph equation on a rectangle.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub metric: ConformalMetric,
    pub signature: Signature,
    pub grid: Grid,
    /// Sampled on the boundary nodes of the grid.
    pub boundary: ScalarField,
    /// Optional starting iterate on the full grid; its boundary nodes are
    /// overwritten by the boundary data. Defaults to the harmonic fill of
    /// the boundary values.
    pub initial: Option<GridData>,
    /// Stop once the sup norm of the discrete residual falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admissible value of `1 + eps q` at any flux midpoint.
    pub eps_space: f64,
}

impl DirichletProblem {
    pub fn new(
        metric: ConformalMetric,
        signature: Signature,
        grid: Grid,
        boundary: ScalarField,
    ) -> Self {
        DirichletProblem {
            metric,
            signature,
            grid,
            boundary,
            initial: None,
            tol: 1e-10,
            max_iter: 50,
            eps_space: 1e-6,
        }
    }
}

/// Outcome of a solve, with the diagnostics needed to judge it.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: GridData,
    /// Newton steps actually taken (not counting rejected trials).
    pub iterations: usize,
    /// Sup norm of the discrete residual at the final iterate.
    pub residual_sup: f64,
    /// Minimum of `1 + eps q` over flux midpoints at the final iterate.
    pub spacelike_margin: f64,
    /// The same minimum tracked across every accepted iterate.
    pub margin_min_over_iterates: f64,
    pub converged: bool,
}

/// Solve the Dirichlet problem by damped Newton iteration.
pub fn solve(prob: &DirichletProblem) -> Result<SolveReport> {
    let disc = Discretization::new(prob)?;
    let mut u = match &prob.initial {
        Some(data) => {
            if data.grid != prob.grid {
                return Err(Error::InvalidArgument(
                    "initial iterate lives on a different grid".into(),
                ));
            }
            let mut v = data.values.clone();
            disc.stamp_boundary(&mut v)?;
            v
        }
        None => disc.harmonic_fill()?,
    };

    let mut state = disc.residual_and_margin(&u);
    if state.margin < prob.eps_space {
        return Err(Error::NotSpacelike {
            x1: state.margin_at[0],
            x2: state.margin_at[1],
            margin: state.margin,
        });
    }
    if !state.finite {
        return Err(Error::SolverDiverged {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let mut margin_min = state.margin;
    let mut iterations = 0;

    while state.sup > prob.tol && iterations < prob.max_iter {
        let mut jac = disc.assemble_jacobian(&u);
        jac.factor()?;
        let mut delta: Vec<f64> = state.residual.iter().map(|r| -r).collect();
        jac.solve(&mut delta);
        if !delta.iter().all(|d| d.is_finite()) {
            return Err(Error::SolverDiverged {
                iterations,
                residual: state.sup,
            });
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = disc.step(&u, &delta, alpha);
            let cand_state = disc.residual_and_margin(&cand);
            if cand_state.finite
                && cand_state.margin >= prob.eps_space
                && cand_state.sup < state.sup
            {
                u = cand;
                state = cand_state;
                margin_min = margin_min.min(state.margin);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }

    Ok(SolveReport {
        converged: state.sup <= prob.tol,
        solution: GridData::new(prob.grid.clone(), u)?,
        iterations,
        residual_sup: state.sup,
        spacelike_margin: state.margin,
        margin_min_over_iterates: margin_min,
    })
}

/// Sup norm of the discrete flux-form residual of arbitrary grid values
/// under the problem's equation, for judging candidate solutions.
pub fn residual_sup(prob: &DirichletProblem, data: &GridData) -> Result<f64> {
    if data.grid != prob.grid {
        return Err(Error::InvalidArgument(
            "values live on a different grid".into(),
        ));
    }
    let disc = Discretization::new(prob)?;
    let state = disc.residual_and_margin(&data.values);
    if !state.finite {
        return Err(Error::SolverDiverged {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    Ok(state.sup)
}

/// One grid of a refinement study.
#[derive(Debug, Clone, Copy)]
pub struct RefinementSample {
    pub n: usize,
    pub h: f64,
    pub sup_error: f64,
}

/// Solve the Dirichlet problem posed by a known exact solution on a
/// sequence of `n x n` grids and record the sup node error of each solve.
pub fn refinement_study(
    metric: &ConformalMetric,
    signature: Signature,
    exact: &ScalarField,
    x1: [f64; 2],
    x2: [f64; 2],
    sizes: &[usize],
) -> Result<Vec<RefinementSample>> {
    sizes
        .iter()
        .map(|&n| {
            let grid = Grid::new(x1, x2, n, n)?;
            let prob = DirichletProblem::new(metric.clone(), signature, grid.clone(), exact.clone());
            let report = solve(&prob)?;
            if !report.converged {
                return Err(Error::SolverDiverged {
                    iterations: report.iterations,
                    residual: report.residual_sup,
                });
            }
            let mut sup_error = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let p = grid.node(i, j);
                    let err = (report.solution.at(i, j) - exact.value(p)?).abs();
                    sup_error = sup_error.max(err);
                }
            }
            Ok(RefinementSample {
                n,
                h: grid.hx().max(grid.hy()),
                sup_error,
            })
        })
        .collect()
}

/// Convergence orders observed between successive refinement samples.
pub fn observed_orders(samples: &[RefinementSample]) -> Vec<f64> {
    samples
        .windows(2)
        .map(|w| (w[0].sup_error / w[1].sup_error).ln() / (w[0].h / w[1].h).ln())
        .collect()
}

struct ResidualState {
    /// Residual at the interior nodes, row-major with `x1` fastest.
    residual: Vec<f64>,
    sup: f64,
    margin: f64,
    margin_at: [f64; 2],
    finite: bool,
}

/// Precomputed geometry of the stencil: conformal factors at the nodes
/// and at the flux midpoints on the grid edges.
struct Discretization {
    grid: Grid,
    boundary: ScalarField,
    eps: f64,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
    /// `lambda` at the nodes.
    lam_c: Vec<f64>,
    /// `lambda` at midpoints of x-edges; index `j * (nx-1) + i` for the
    /// edge between nodes `(i, j)` and `(i+1, j)`.
    lam_x: Vec<f64>,
    /// `lambda` at midpoints of y-edges; index `j * nx + i` for the edge
    /// between nodes `(i, j)` and `(i, j+1)`.
    lam_y: Vec<f64>,
}

/// Flux `nu * g_p` through an edge, with the derivatives of the flux with
/// respect to the primary and cross difference quotients and the
/// spacelike margin `1 + eps q` at the midpoint.
fn flux(gp: f64, gc: f64, lam: f64, eps: f64) -> (f64, f64, f64, f64) {
    let q = (gp * gp + gc * gc) / lam;
    let w = 1.0 + eps * q;
    if w <= 0.0 {
        return (f64::NAN, f64::NAN, f64::NAN, w);
    }
    let nu = 1.0 / w.sqrt();
    let nu3 = nu * nu * nu;
    (
        nu * gp,
        nu - eps * nu3 * gp * gp / lam,
        -eps * nu3 * gp * gc / lam,
        w,
    )
}

impl Discretization {
    fn new(prob: &DirichletProblem) -> Result<Discretization> {
        let grid = prob.grid.clone();
        let (nx, ny) = (grid.nx, grid.ny);
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidArgument(
                "the grid needs at least one interior node per direction".into(),
            ));
        }
        if !(prob.tol > 0.0) || prob.max_iter == 0 || !(prob.eps_space > 0.0) {
            return Err(Error::InvalidArgument(
                "tolerance, iteration budget and spacelike margin must be positive".into(),
            ));
        }
        let (hx, hy) = (grid.hx(), grid.hy());
        let mut lam_c = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                lam_c.push(prob.metric.lambda(grid.node(i, j))?);
            }
        }
        let mut lam_x = Vec::with_capacity((nx - 1) * ny);
        for j in 0..ny {
            for i in 0..nx - 1 {
                let p = grid.node(i, j);
                lam_x.push(prob.metric.lambda([p[0] + 0.5 * hx, p[1]])?);
            }
        }
        let mut lam_y = Vec::with_capacity(nx * (ny - 1));
        for j in 0..ny - 1 {
            for i in 0..nx {
                let p = grid.node(i, j);
                lam_y.push(prob.metric.lambda([p[0], p[1] + 0.5 * hy])?);
            }
        }
        Ok(Discretization {
            grid,
            boundary: prob.boundary.clone(),
            eps: prob.signature.eps(),
            hx,
            hy,
            nx,
            ny,
            lam_c,
            lam_x,
            lam_y,
        })
    }

    fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn interior_index(&self, i: usize, j: usize) -> usize {
        (j - 1) * (self.nx - 2) + (i - 1)
    }

    fn stamp_boundary(&self, values: &mut [f64]) -> Result<()> {
        for j in 0..self.ny {
            for i in 0..self.nx {
                if i == 0 || i == self.nx - 1 || j == 0 || j == self.ny - 1 {
                    values[self.node_index(i, j)] = self.boundary.value(self.grid.node(i, j))?;
                }
            }
        }
        Ok(())
    }

    /// Boundary values with the five-point harmonic interior fill. In two
    /// dimensions harmonic functions do not see the conformal factor, so
    /// the flat Laplacian is the right fill for every base metric.
    fn harmonic_fill(&self) -> Result<Vec<f64>> {
        let (nx, ny) = (self.nx, self.ny);
        let mut values = vec![0.0; nx * ny];
        self.stamp_boundary(&mut values)?;
        let w = nx - 2;
        let n = w * (ny - 2);
        let (cx, cy) = (1.0 / (self.hx * self.hx), 1.0 / (self.hy * self.hy));
        let mut band = Banded::new(n, w, w);
        let mut rhs = vec![0.0; n];
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let row = self.interior_index(i, j);
                band.add(row, row, -2.0 * (cx + cy));
                let mut neighbor = |ii: usize, jj: usize, c: f64| {
                    if ii == 0 || ii == nx - 1 || jj == 0 || jj == ny - 1 {
                        rhs[row] -= c * values[jj * nx + ii];
                    } else {
                        band.add(row, (jj - 1) * w + (ii - 1), c);
                    }
                };
                neighbor(i - 1, j, cx);
                neighbor(i + 1, j, cx);
                neighbor(i, j - 1, cy);
                neighbor(i, j + 1, cy);
            }
        }
        band.factor()?;
        band.solve(&mut rhs);
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                values[self.node_index(i, j)] = rhs[self.interior_index(i, j)];
            }
        }
        Ok(values)
    }

    /// Difference quotients feeding the flux through the x-edge east of
    /// node `(i, j)`: one-sided in x, averaged across the edge in y.
    fn x_edge(&self, u: &[f64], i: usize, j: usize) -> (f64, f64, f64) {
        let id = |i, j| j * self.nx + i;
        let gp = (u[id(i + 1, j)] - u[id(i, j)]) / self.hx;
        let gc = (u[id(i, j + 1)] - u[id(i, j - 1)] + u[id(i + 1, j + 1)] - u[id(i + 1, j - 1)])
            / (4.0 * self.hy);
        (gp, gc, self.lam_x[j * (self.nx - 1) + i])
    }

    /// The same for the y-edge north of node `(i, j)`.
    fn y_edge(&self, u: &[f64], i: usize, j: usize) -> (f64, f64, f64) {
        let id = |i, j| j * self.nx + i;
        let gp = (u[id(i, j + 1)] - u[id(i, j)]) / self.hy;
        let gc = (u[id(i + 1, j)] - u[id(i - 1, j)] + u[id(i + 1, j + 1)] - u[id(i - 1, j + 1)])
            / (4.0 * self.hx);
        (gp, gc, self.lam_y[j * self.nx + i])
    }

    fn residual_and_margin(&self, u: &[f64]) -> ResidualState {
        let (nx, ny) = (self.nx, self.ny);
        let mut residual = vec![0.0; (nx - 2) * (ny - 2)];
        let mut sup = 0.0f64;
        let mut margin = f64::INFINITY;
        let mut margin_at = [f64::NAN, f64::NAN];
        let mut finite = true;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let mut track = |w: f64, p: [f64; 2]| {
                    if w < margin {
                        margin = w;
                        margin_at = p;
                    }
                };
                let (gp, gc, lam) = self.x_edge(u, i, j);
                let (fe, _, _, we) = flux(gp, gc, lam, self.eps);
                let (gp, gc, lam) = self.x_edge(u, i - 1, j);
                let (fw, _, _, ww) = flux(gp, gc, lam, self.eps);
                let (gp, gc, lam) = self.y_edge(u, i, j);
                let (fn_, _, _, wn) = flux(gp, gc, lam, self.eps);
                let (gp, gc, lam) = self.y_edge(u, i, j - 1);
                let (fs, _, _, ws) = flux(gp, gc, lam, self.eps);
                let p = self.grid.node(i, j);
                track(we, [p[0] + 0.5 * self.hx, p[1]]);
                track(ww, [p[0] - 0.5 * self.hx, p[1]]);
                track(wn, [p[0], p[1] + 0.5 * self.hy]);
                track(ws, [p[0], p[1] - 0.5 * self.hy]);
                let r = ((fe - fw) / self.hx + (fn_ - fs) / self.hy)
                    / self.lam_c[self.node_index(i, j)];
                residual[self.interior_index(i, j)] = r;
                if r.is_finite() {
                    sup = sup.max(r.abs());
                } else {
                    finite = false;
                }
            }
        }
        ResidualState {
            residual,
            sup,
            margin,
            margin_at,
            finite,
        }
    }

    fn assemble_jacobian(&self, u: &[f64]) -> Banded {
        let (nx, ny) = (self.nx, self.ny);
        let w = nx - 2;
        let n = w * (ny - 2);
        let mut band = Banded::new(n, w + 1, w + 1);
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let row = self.interior_index(i, j);
                let lam_c = self.lam_c[self.node_index(i, j)];
                let add = |band: &mut Banded, ii: usize, jj: usize, v: f64| {
                    if ii >= 1 && ii <= nx - 2 && jj >= 1 && jj <= ny - 2 {
                        band.add(row, (jj - 1) * w + (ii - 1), v);
                    }
                };

                // East and west fluxes enter with opposite signs.
                for (ei, s) in [(i, 1.0), (i - 1, -1.0)] {
                    let (gp, gc, lam) = self.x_edge(u, ei, j);
                    let (_, dp, dc, _) = flux(gp, gc, lam, self.eps);
                    let s = s / (self.hx * lam_c);
                    add(&mut band, ei + 1, j, s * dp / self.hx);
                    add(&mut band, ei, j, -s * dp / self.hx);
                    let c = s * dc / (4.0 * self.hy);
                    add(&mut band, ei, j + 1, c);
                    add(&mut band, ei, j - 1, -c);
                    add(&mut band, ei + 1, j + 1, c);
                    add(&mut band, ei + 1, j - 1, -c);
                }
                // North and south fluxes.
                for (ej, s) in [(j, 1.0), (j - 1, -1.0)] {
                    let (gp, gc, lam) = self.y_edge(u, i, ej);
                    let (_, dp, dc, _) = flux(gp, gc, lam, self.eps);
                    let s = s / (self.hy * lam_c);
                    add(&mut band, i, ej + 1, s * dp / self.hy);
                    add(&mut band, i, ej, -s * dp / self.hy);
                    let c = s * dc / (4.0 * self.hx);
                    add(&mut band, i + 1, ej, c);
                    add(&mut band, i - 1, ej, -c);
                    add(&mut band, i + 1, ej + 1, c);
                    add(&mut band, i - 1, ej + 1, -c);
                }
            }
        }
        band
    }

    /// Add `alpha * delta` (an interior correction) to the iterate.
    fn step(&self, u: &[f64], delta: &[f64], alpha: f64) -> Vec<f64> {
        let mut next = u.to_vec();
        for j in 1..self.ny - 1 {
            for i in 1..self.nx - 1 {
                next[self.node_index(i, j)] += alpha * delta[self.interior_index(i, j)];
            }
        }
        next
    }
}

/// Band matrix in LAPACK-style storage with room for pivoting fill, and
/// an LU factorization with partial pivoting.
struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    /// Entry `(i, j)` lives at `data[(kl + ku + i - j) * n + j]`. The
    /// first `kl` diagonal rows hold fill produced by row swaps.
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl Banded {
    fn new(n: usize, kl: usize, ku: usize) -> Banded {
        Banded {
            n,
            kl,
            ku,
            data: vec![0.0; (2 * kl + ku + 1) * n],
            pivots: vec![0; n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j + self.kl >= i && i + self.ku + self.kl >= j);
        (self.kl + self.ku + i - j) * self.n + j
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i + self.ku >= j, "entry outside the assembled band");
        let at = self.idx(i, j);
        self.data[at] += v;
    }

    fn factor(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in j + 1..=imax {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::LinearSolve(format!(
                    "no usable pivot in column {j}"
                )));
            }
            self.pivots[j] = p;
            let jend = (j + kl + ku).min(n - 1);
            if p != j {
                for c in j..=jend {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(j, j)];
            for i in j + 1..=imax {
                let at = self.idx(i, j);
                let l = self.data[at] / piv;
                self.data[at] = l;
                if l != 0.0 {
                    for c in j + 1..=jend {
                        let ajc = self.data[self.idx(j, c)];
                        if ajc != 0.0 {
                            let t = self.idx(i, c);
                            self.data[t] -= l * ajc;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn solve(&self, rhs: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            rhs.swap(j, self.pivots[j]);
            let imax = (j + kl).min(n - 1);
            for i in j + 1..=imax {
                rhs[i] -= self.data[self.idx(i, j)] * rhs[j];
            }
        }
        for j in (0..n).rev() {
            let jend = (j + kl + ku).min(n - 1);
            let mut s = rhs[j];
            for c in j + 1..=jend {
                s -= self.data[self.idx(j, c)] * rhs[c];
            }
            rhs[j] = s / self.data[self.idx(j, j)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_example;

    fn problem(
        metric: ConformalMetric,
        signature: Signature,
        boundary: &str,
        x1: [f64; 2],
        x2: [f64; 2],
        n: usize,
    ) -> DirichletProblem {
        DirichletProblem::new(
            metric,
            signature,
            Grid::new(x1, x2, n, n).unwrap(),
            ScalarField::parse(boundary).unwrap(),
        )
    }

    #[test]
    fn banded_lu_matches_a_dense_reference() {
        // A fixed, well-conditioned nonsymmetric band system solved by
        // hand-rolled dense Gaussian elimination as the oracle.
        let n = 12;
        let (kl, ku) = (3, 2);
        let entry = |i: usize, j: usize| -> f64 {
            if j + kl < i || i + ku < j {
                0.0
            } else if i == j {
                4.0 + (i % 3) as f64
            } else {
                ((2 * i + 3 * j) % 7) as f64 - 2.5
            }
        };
        let mut band = Banded::new(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = entry(i, j);
                if v != 0.0 {
                    band.add(i, j, v);
                    dense[i][j] = v;
                }
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();

        let mut aug = dense.clone();
        let mut x = rhs.clone();
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| aug[a][c].abs().total_cmp(&aug[b][c].abs())).unwrap();
            aug.swap(c, p);
            x.swap(c, p);
            for r in c + 1..n {
                let m = aug[r][c] / aug[c][c];
                for k in c..n {
                    aug[r][k] -= m * aug[c][k];
                }
                x[r] -= m * x[c];
            }
        }
        for c in (0..n).rev() {
            for k in c + 1..n {
                x[c] -= aug[c][k] * x[k];
            }
            x[c] /= aug[c][c];
        }

        band.factor().unwrap();
        let mut got = rhs;
        band.solve(&mut got);
        for i in 0..n {
            assert!((got[i] - x[i]).abs() < 1e-12, "x[{i}]: {} vs {}", got[i], x[i]);
        }
    }

    #[test]
    fn affine_data_over_a_flat_base_is_reproduced_without_iterating() {
        let prob = problem(
            ConformalMetric::euclidean(),
            Signature::Lorentzian,
            "0.3*x1 + 0.4*x2",
            [-1.0, 1.0],
            [-1.0, 1.0],
            17,
        );
        let report = solve(&prob).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        let exact = ScalarField::parse("0.3*x1 + 0.4*x2").unwrap();
        for i in 0..17 {
            for j in 0..17 {
                let p = prob.grid.node(i, j);
                let err = (report.solution.at(i, j) - exact.value(p).unwrap()).abs();
                assert!(err < 1e-12, "at {p:?}: {err}");
            }
        }
    }

    #[test]
    fn maximal_dirichlet_data_from_the_closed_form_dual() {
        let e = get_example("maximal-w2").unwrap();
        let exact = e.u().clone();
        let grid = Grid::new([-1.0, 1.0], [1.0, 2.0], 65, 65).unwrap();
        let prob = DirichletProblem::new(
            ConformalMetric::hyperbolic_half_plane(),
            Signature::Lorentzian,
            grid.clone(),
            exact.clone(),
        );
        let report = solve(&prob).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 10, "{} iterations", report.iterations);
        assert!(report.margin_min_over_iterates >= prob.eps_space);
        let mut sup = 0.0f64;
        for i in 0..65 {
            for j in 0..65 {
                let p = grid.node(i, j);
                sup = sup.max((report.solution.at(i, j) - exact.value(p).unwrap()).abs());
            }
        }
        assert!(sup < 1e-3, "sup node error {sup}");

        // The discrete solution must beat the exact solution sampled on
        // the grid at its own equation.
        let sampled: Vec<f64> = grid
            .nodes()
            .map(|p| exact.value(p).unwrap())
            .collect();
        let sampled = GridData::new(grid, sampled).unwrap();
        let sampled_res = residual_sup(&prob, &sampled).unwrap();
        assert!(report.residual_sup <= sampled_res);
    }

    #[test]
    fn minimal_dirichlet_data_from_the_log_graph() {
        let exact = ScalarField::parse("log(x1^2+x2^2)").unwrap();
        let grid = Grid::new([-1.0, 1.0], [1.0, 2.0], 65, 65).unwrap();
        let prob = DirichletProblem::new(
            ConformalMetric::hyperbolic_half_plane(),
            Signature::Riemannian,
            grid.clone(),
            exact.clone(),
        );
        let report = solve(&prob).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 10, "{} iterations", report.iterations);
        let mut sup = 0.0f64;
        for i in 0..65 {
            for j in 0..65 {
                let p = grid.node(i, j);
                sup = sup.max((report.solution.at(i, j) - exact.value(p).unwrap()).abs());
            }
        }
        assert!(sup < 1e-3, "sup node error {sup}");
    }

    #[test]
    fn second_order_convergence_under_refinement() {
        let e = get_example("maximal-w2").unwrap();
        let samples = refinement_study(
            &ConformalMetric::hyperbolic_half_plane(),
            Signature::Lorentzian,
            e.u(),
            [-1.0, 1.0],
            [1.0, 2.0],
            &[17, 33, 65],
        )
        .unwrap();
        let orders = observed_orders(&samples);
        for (k, order) in orders.iter().enumerate() {
            assert!(*order >= 1.8, "order {order} between samples {k} and {}", k + 1);
        }
    }

    #[test]
    fn adding_a_constant_to_the_boundary_shifts_the_solution() {
        let base = problem(
            ConformalMetric::euclidean(),
            Signature::Lorentzian,
            "0.2*x1^2 - 0.1*x2 + 0.05*x1*x2",
            [-1.0, 1.0],
            [-1.0, 1.0],
            21,
        );
        let shifted = problem(
            ConformalMetric::euclidean(),
            Signature::Lorentzian,
            "0.2*x1^2 - 0.1*x2 + 0.05*x1*x2 + 5",
            [-1.0, 1.0],
            [-1.0, 1.0],
            21,
        );
        let a = solve(&base).unwrap();
        let b = solve(&shifted).unwrap();
        assert!(a.converged && b.converged);
        for i in 0..21 {
            for j in 0..21 {
                let d = b.solution.at(i, j) - a.solution.at(i, j) - 5.0;
                assert!(d.abs() < 1e-9, "at ({i}, {j}): {d}");
            }
        }
    }

    #[test]
    fn riemannian_and_lorentzian_solutions_differ() {
        // Same boundary data, opposite signatures: the equations disagree
        // away from totally geodesic data, so the solutions must too.
        let mk = |sig| {
            problem(
                ConformalMetric::euclidean(),
                sig,
                "0.3*x1^2",
                [-1.0, 1.0],
                [-1.0, 1.0],
                17,
            )
        };
        let r = solve(&mk(Signature::Riemannian)).unwrap();
        let l = solve(&mk(Signature::Lorentzian)).unwrap();
        let mut max_gap = 0.0f64;
        for i in 0..17 {
            for j in 0..17 {
                max_gap = max_gap.max((r.solution.at(i, j) - l.solution.at(i, j)).abs());
            }
        }
        assert!(max_gap > 1e-3, "solutions coincide: gap {max_gap}");
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let too_small = problem(
            ConformalMetric::euclidean(),
            Signature::Lorentzian,
            "0",
            [0.0, 1.0],
            [0.0, 1.0],
            2,
        );
        assert!(solve(&too_small).is_err());

        let mut mismatched = problem(
            ConformalMetric::euclidean(),
            Signature::Lorentzian,
            "0",
            [0.0, 1.0],
            [0.0, 1.0],
            9,
        );
        let other = Grid::new([0.0, 1.0], [0.0, 1.0], 5, 5).unwrap();
        mismatched.initial = Some(GridData::new(other, vec![0.0; 25]).unwrap());
        assert!(solve(&mismatched).is_err());

        // Boundary data with a timelike gradient cannot start.
        let timelike = problem(
            ConformalMetric::euclidean(),
            Signature::Lorentzian,
            "3*x1",
            [-1.0, 1.0],
            [-1.0, 1.0],
            9,
        );
        assert!(matches!(
            solve(&timelike),
            Err(Error::NotSpacelike { .. })
        ));
    }
}
