//! Rectangular sample grids and their CSV / JSON serializations.

use crate::{Error, Point, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// A tensor grid on `[x1[0], x1[1]] x [x2[0], x2[1]]` with `nx * ny` nodes,
/// endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x1: [f64; 2], x2: [f64; 2], nx: usize, ny: usize) -> Result<Grid> {
        if !(x1[0].is_finite() && x1[1].is_finite() && x2[0].is_finite() && x2[1].is_finite()) {
            return Err(Error::InvalidArgument("grid bounds must be finite".into()));
        }
        if x1[1] <= x1[0] || x2[1] <= x2[0] {
            return Err(Error::InvalidArgument(
                "grid bounds must satisfy lo < hi on both axes".into(),
            ));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(
                "grids need at least 2 nodes per axis".into(),
            ));
        }
        Ok(Grid { x1, x2, nx, ny })
    }

    pub fn hx(&self) -> f64 {
        (self.x1[1] - self.x1[0]) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.x2[1] - self.x2[0]) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x1[0] + self.hx() * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.x2[0] + self.hy() * j as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        [self.x(i), self.y(j)]
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x1[0] && p[0] <= self.x1[1] && p[1] >= self.x2[0] && p[1] <= self.x2[1]
    }

    /// Nodes in row-major order (x2 rows, x1 fastest), matching the layout
    /// of [`GridData::values`].
    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        let (nx, ny) = (self.nx, self.ny);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| self.node(i, j)))
    }
}

/// Values sampled on a [`Grid`], row-major: `values[j * nx + i]` belongs to
/// the node `(x(i), y(j))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridData {
    #[serde(flatten)]
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// On-disk JSON form, tagged with a schema identifier.
#[derive(Serialize, Deserialize)]
struct GridJson {
    schema: String,
    x1: [f64; 2],
    x2: [f64; 2],
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

pub const GRID_SCHEMA: &str = "maxgraph-grid/1";

impl GridData {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridData> {
        if values.len() != grid.nx * grid.ny {
            return Err(Error::InvalidArgument(format!(
                "grid data length {} does not match {}x{} nodes",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(GridData { grid, values })
    }

    /// Sample a field over the grid, failing on the first bad node.
    pub fn sample(grid: Grid, f: impl Fn(Point) -> Result<f64>) -> Result<GridData> {
        let mut values = Vec::with_capacity(grid.nx * grid.ny);
        for p in grid.nodes() {
            values.push(f(p)?);
        }
        Ok(GridData { grid, values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Bilinear interpolation inside the grid rectangle.
    pub fn bilinear(&self, p: Point) -> Result<f64> {
        if !self.grid.contains(p) {
            return Err(Error::OutsideDomain { x1: p[0], x2: p[1] });
        }
        let g = &self.grid;
        let fx = ((p[0] - g.x1[0]) / g.hx()).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p[1] - g.x2[0]) / g.hy()).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        Ok(v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty)
    }

    /// CSV with the exact header `x1,x2,value`, one row per node in
    /// row-major order. Floats print in shortest round-trip form, so equal
    /// data produces byte-identical files.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "x1,x2,value")?;
        for (idx, p) in self.grid.nodes().enumerate() {
            writeln!(w, "{},{},{}", p[0], p[1], self.values[idx])?;
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let doc = GridJson {
            schema: GRID_SCHEMA.to_string(),
            x1: self.grid.x1,
            x2: self.grid.x2,
            nx: self.grid.nx,
            ny: self.grid.ny,
            values: self.values.clone(),
        };
        serde_json::to_string(&doc).expect("grid serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<GridData> {
        let doc: GridJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if doc.schema != GRID_SCHEMA {
            return Err(Error::InvalidArgument(format!(
                "unsupported grid schema `{}`",
                doc.schema
            )));
        }
        GridData::new(Grid::new(doc.x1, doc.x2, doc.nx, doc.ny)?, doc.values)
    }
}
