//! End-to-end acceptance gate. Each test covers one numbered criterion,
//! collects every sub-check, and prints a single PASS or FAIL line (run
//! with `--nocapture` to see the lines for passing tests too).

use maxgraph_core::catalog::get_example;
use maxgraph_core::completeness::{curve_length, metric_ratio_scan, Curve};
use maxgraph_core::duality::{
    norm_identity_check, reconstruct_dual, roundtrip_check, DualDirection,
};
use maxgraph_core::expr::ScalarField;
use maxgraph_core::graph::{residual_maximal, residual_minimal, residual_minimal_halfplane};
use maxgraph_core::grid::Grid;
use maxgraph_core::solver::{observed_orders, refinement_study, solve, DirichletProblem};
use maxgraph_core::{Point, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Collects named sub-checks for one criterion and renders the verdict.
struct Criterion {
    number: usize,
    label: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(number: usize, label: &'static str) -> Criterion {
        Criterion {
            number,
            label,
            failures: Vec::new(),
        }
    }

    fn le(&mut self, what: &str, value: f64, bound: f64) {
        if !(value <= bound) {
            self.failures.push(format!("{what}: {value:.3e} > {bound:.1e}"));
        }
    }

    fn holds(&mut self, what: &str, cond: bool) {
        if !cond {
            self.failures.push(what.to_string());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("criterion {}: PASS  ({})", self.number, self.label);
        } else {
            println!("criterion {}: FAIL  ({})", self.number, self.label);
            for f in &self.failures {
                println!("    {f}");
            }
            panic!("criterion {} failed {} check(s)", self.number, self.failures.len());
        }
    }
}

fn desk_grid() -> Grid {
    Grid::new([-3.0, 3.0], [0.2, 3.0], 50, 50).unwrap()
}

fn sup_over(grid: Grid, f: impl Fn(Point) -> Result<f64>) -> f64 {
    let mut sup = 0.0f64;
    for p in grid.nodes() {
        sup = sup.max(f(p).unwrap().abs());
    }
    sup
}

fn sample_points(rect: ([f64; 2], [f64; 2]), count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            [
                rng.gen_range(rect.0[0]..=rect.0[1]),
                rng.gen_range(rect.1[0]..=rect.1[1]),
            ]
        })
        .collect()
}

fn central_fd(f: &ScalarField, i: usize, p: Point, h: f64) -> f64 {
    let mut hi = p;
    let mut lo = p;
    hi[i] += h;
    lo[i] -= h;
    (f.value(hi).unwrap() - f.value(lo).unwrap()) / (2.0 * h)
}

#[test]
fn criterion_1_explicit_minimal_graphs() {
    let mut c = Criterion::new(1, "explicit minimal graphs");
    let grid = desk_grid();
    for name in ["minimal-log", "minimal-inv"] {
        let entry = get_example(name).unwrap();
        let (metric, u) = (entry.metric(), entry.u());
        let residual = sup_over(grid, |p| residual_minimal(metric, u, p));
        c.le(&format!("{name} residual sup"), residual, 1e-10);
        let route_gap = sup_over(grid, |p| {
            Ok(residual_minimal_halfplane(u, p)? - residual_minimal(metric, u, p)?)
        });
        c.le(&format!("{name} half-plane route gap"), route_gap, 1e-9);
    }
    c.finish();
}

#[test]
fn criterion_2_explicit_maximal_graph() {
    let mut c = Criterion::new(2, "explicit maximal graph");
    let grid = desk_grid();
    let entry = get_example("maximal-w2").unwrap();
    let (metric, u) = (entry.metric(), entry.u());
    let residual = sup_over(grid, |p| residual_maximal(metric, u, p));
    c.le("maximal-w2 residual sup", residual, 1e-8);
    let closed = entry.closed_form_partials().unwrap();
    for i in 0..2 {
        let gap = sup_over(grid, |p| Ok(u.partial(i, p)? - closed[i].value(p)?));
        c.le(&format!("partial x{} vs closed form", i + 1), gap, 1e-10);
    }
    c.finish();
}

#[test]
fn criterion_3_duality_reconstruction() {
    let mut c = Criterion::new(3, "duality reconstruction");
    let minimal = get_example("minimal-log").unwrap();
    let w1 = get_example("maximal-w1").unwrap();
    let grid = Grid::new([-3.0, 3.0], [0.2, 3.0], 61, 57).unwrap();

    let closed = w1.closed_form_partials().unwrap();
    for i in 0..2 {
        let gap = sup_over(grid, |p| Ok(w1.u().partial(i, p)? - closed[i].value(p)?));
        c.le(&format!("dual partial x{} vs closed form", i + 1), gap, 1e-6);
    }

    let rec = reconstruct_dual(
        minimal.u(),
        minimal.metric(),
        grid,
        [0.0, 1.0],
        DualDirection::MinimalToMaximal,
        1e-8,
    )
    .unwrap();
    c.holds("reconstruction certified", rec.certified);
    c.le("path independence", rec.path_independence_err, 1e-7);

    let roundtrip = roundtrip_check(minimal.u(), minimal.metric(), grid).unwrap();
    c.le("round-trip gradient error", roundtrip, 1e-5);

    let norm_gap = sup_over(desk_grid(), |p| {
        norm_identity_check(minimal.u(), minimal.metric(), p)
    });
    c.le("norm identity", norm_gap, 1e-12);
    c.finish();
}

#[test]
fn criterion_4_completeness_numbers() {
    let mut c = Criterion::new(4, "completeness numbers");

    let w2 = get_example("maximal-w2").unwrap();
    let vertical = Curve::parse("0", "s", (0.0, 1.0)).unwrap();
    let len = curve_length(w2.surface(), &vertical, 1e-9).unwrap();
    c.holds("vertical segment length converged", len.converged);
    c.le(
        "vertical segment length error",
        (len.length - (1.0 + 2.0f64.sqrt()).ln()).abs(),
        1e-8,
    );

    let flat = get_example("flat-incomplete").unwrap();
    let bound = (2.0 * (1.0 + 2.0 / 1.0f64.exp().sqrt())).min(4.42614);
    for r in [10.0, 50.0, 100.0] {
        let ray = Curve::parse("s", "0", (-r, r)).unwrap();
        let len = curve_length(flat.surface(), &ray, 1e-8).unwrap();
        c.le(&format!("flat ray length at R={r}"), len.length, bound);
        c.holds(&format!("flat ray at R={r} not capped"), !len.capped);
    }

    let w1 = get_example("maximal-w1").unwrap();
    let grid = Grid::new([-3.0, 3.0], [0.2, 3.0], 61, 57).unwrap();
    let scan = metric_ratio_scan(w1.surface(), w1.metric(), grid.nodes()).unwrap();
    c.le("ratio infimum error", (scan.infimum - 0.2).abs(), 1e-6);
    c.le("ratio argmin x1 offset", scan.argmin[0].abs(), 1e-9);
    c.finish();
}

#[test]
fn criterion_5_identity_suite() {
    let mut c = Criterion::new(5, "identity suite on the maximal examples");
    let points = sample_points(([-2.5, 2.5], [0.3, 2.8]), 100, 5);
    for name in ["maximal-w1", "maximal-w2"] {
        let surface = get_example(name).unwrap().surface().clone();
        let mut grad_h = 0.0f64;
        let mut trace_a = 0.0f64;
        let mut height = 0.0f64;
        let mut log_theta = 0.0f64;
        let mut inv_theta = 0.0f64;
        let mut gauss = 0.0f64;
        for &p in &points {
            let report = surface.invariant_report(p).unwrap();
            grad_h = grad_h.max(report.residuals["grad_h_identity"].abs());
            trace_a = trace_a.max((report.shape_op[0][0] + report.shape_op[1][1]).abs());
            height = height.max(report.residuals["height_laplacian"].abs());
            log_theta = log_theta.max(report.residuals["log_one_minus_theta"].abs());
            inv_theta = inv_theta.max(report.residuals["laplacian_inv_theta_identity"].abs());
            gauss = gauss.max((report.k_gauss - report.k_numeric).abs());
        }
        c.le(&format!("{name} grad(h) norm identity"), grad_h, 1e-9);
        c.le(&format!("{name} trace of shape operator"), trace_a, 1e-8);
        c.le(&format!("{name} height Laplacian identity"), height, 1e-4);
        c.le(&format!("{name} log(1 - theta) identity"), log_theta, 1e-4);
        c.le(&format!("{name} 1/theta Laplacian identity"), inv_theta, 1e-4);
        c.le(&format!("{name} Gauss equation vs numeric K"), gauss, 1e-3);
    }
    c.finish();
}

#[test]
fn criterion_6_totally_geodesic_cases() {
    let mut c = Criterion::new(6, "totally geodesic cases");
    let cases = [
        ("slice", ([-2.0, 2.0], [0.3, 3.0])),
        ("affine", ([-2.0, 2.0], [-2.0, 2.0])),
    ];
    for (name, rect) in cases {
        let surface = get_example(name).unwrap().surface().clone();
        let grid = Grid::new(rect.0, rect.1, 21, 21).unwrap();
        let mut shape = 0.0f64;
        let mut mean = 0.0f64;
        let mut theta_dev = 0.0f64;
        let theta0 = surface.theta([rect.0[0], rect.1[0]]).unwrap();
        for p in grid.nodes() {
            let a = surface.shape_operator(p).unwrap();
            for row in a {
                for entry in row {
                    shape = shape.max(entry.abs());
                }
            }
            mean = mean.max(surface.mean_curvature(p).unwrap().abs());
            theta_dev = theta_dev.max((surface.theta(p).unwrap() - theta0).abs());
        }
        c.le(&format!("{name} shape operator sup"), shape, 1e-12);
        c.le(&format!("{name} mean curvature sup"), mean, 1e-12);
        c.le(&format!("{name} theta deviation"), theta_dev, 1e-12);
    }
    c.finish();
}

#[test]
fn criterion_7_solver() {
    let mut c = Criterion::new(7, "Dirichlet solver");
    for name in ["maximal-w2", "minimal-log"] {
        let entry = get_example(name).unwrap();
        let grid = Grid::new([-1.0, 1.0], [1.0, 2.0], 65, 65).unwrap();
        let prob = DirichletProblem::new(
            entry.metric().clone(),
            entry.signature(),
            grid,
            entry.u().clone(),
        );
        let report = solve(&prob).unwrap();
        c.holds(&format!("{name} converged"), report.converged);
        c.holds(
            &format!("{name} iterations {} <= 10", report.iterations),
            report.iterations <= 10,
        );
        let mut sup_err = 0.0f64;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let exact = entry.u().value(grid.node(i, j)).unwrap();
                sup_err = sup_err.max((report.solution.at(i, j) - exact).abs());
            }
        }
        c.le(&format!("{name} sup error vs closed form"), sup_err, 1e-3);
        c.holds(
            &format!("{name} spacelike margin held every iterate"),
            report.margin_min_over_iterates >= prob.eps_space,
        );

        let samples = refinement_study(
            entry.metric(),
            entry.signature(),
            entry.u(),
            [-1.0, 1.0],
            [1.0, 2.0],
            &[17, 33, 65],
        )
        .unwrap();
        for (k, order) in observed_orders(&samples).iter().enumerate() {
            c.holds(
                &format!("{name} refinement order step {k}: {order:.3} >= 1.8"),
                *order >= 1.8,
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_8_parser_and_calculus() {
    let mut c = Criterion::new(8, "parser and calculus");

    let upper = ([-2.5, 2.5], [0.3, 2.8]);
    let plane = ([-3.0, 3.0], [-3.0, 3.0]);
    let mut corpus: Vec<(String, ScalarField, ([f64; 2], [f64; 2]))> = Vec::new();
    for name in maxgraph_core::catalog::names() {
        let entry = get_example(name).unwrap();
        let rect = match name {
            "flat-incomplete" | "affine" => plane,
            _ => upper,
        };
        if entry.expression().is_some() || name == "flat-incomplete" {
            corpus.push((format!("{name} height"), entry.u().clone(), rect));
        } else {
            corpus.push((
                format!("{name} gradient x1"),
                entry.u().gradient_field(0),
                rect,
            ));
            corpus.push((
                format!("{name} gradient x2"),
                entry.u().gradient_field(1),
                rect,
            ));
        }
        if let Some(closed) = entry.closed_form_partials() {
            corpus.push((format!("{name} closed partial x1"), closed[0].clone(), rect));
            corpus.push((format!("{name} closed partial x2"), closed[1].clone(), rect));
        }
    }
    let h = 1e-5;
    for (label, field, rect) in &corpus {
        let mut worst = 0.0f64;
        for p in sample_points(*rect, 100, 8) {
            for i in 0..2 {
                let symbolic = field.partial(i, p).unwrap();
                let fd = central_fd(field, i, p, h);
                worst = worst.max((symbolic - fd).abs() / symbolic.abs().max(1.0));
            }
        }
        c.le(&format!("{label} symbolic vs FD"), worst, 1e-6);
    }

    let log_u = get_example("minimal-log").unwrap().u().clone();
    let inv_u = get_example("minimal-inv").unwrap().u().clone();
    let dx2 = ScalarField::parse("2*x2/(x1^2+x2^2)").unwrap();
    let q_log = ScalarField::parse("-8/(x1^2+x2^2)^2").unwrap();
    let q_inv = ScalarField::parse("2*x1/(x1^2+x2^2)^4").unwrap();
    let quasilinear = |u: &ScalarField, p: Point| -> f64 {
        let u1 = u.partial(0, p).unwrap();
        let u2 = u.partial(1, p).unwrap();
        u1 * u1 * u.partial2(0, 0, p).unwrap()
            + 2.0 * u1 * u2 * u.partial2(0, 1, p).unwrap()
            + u2 * u2 * u.partial2(1, 1, p).unwrap()
    };
    let mut partial_gap = 0.0f64;
    let mut q_log_gap = 0.0f64;
    let mut q_inv_gap = 0.0f64;
    for p in sample_points(upper, 100, 13) {
        let scale = |v: f64| v.abs().max(1.0);
        let s = log_u.partial(1, p).unwrap();
        partial_gap = partial_gap.max((s - dx2.value(p).unwrap()).abs() / scale(s));
        let ql = quasilinear(&log_u, p);
        q_log_gap = q_log_gap.max((ql - q_log.value(p).unwrap()).abs() / scale(ql));
        let qi = quasilinear(&inv_u, p);
        q_inv_gap = q_inv_gap.max((qi - q_inv.value(p).unwrap()).abs() / scale(qi));
    }
    c.le("d/dx2 of the log graph vs closed form", partial_gap, 1e-12);
    c.le("quasilinear form of the log graph", q_log_gap, 1e-12);
    c.le("quasilinear form of the inverse graph", q_inv_gap, 1e-12);
    c.finish();
}
