//! Boundary-fitted grid and nodal interface heights.
//!
//! The domain `phi(y) <= x <= 1`, `0 <= y < eps` is mapped to the unit
//! rectangle by `x = phi(y) + xh * (1 - phi(y))`. Nodes sit at
//! `(xh_i, y_j)` with `i = 0..=nx` and `j = 0..ny` (periodic in `j`); the
//! row `i = nx` is the pinned edge `x = 1`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Logical grid: graded `xh` nodes and the periodic `y` sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    eps: f64,
    xh: Vec<f64>,
}

/// First wall cell in units of `eps / ny`.
const WALL_CELL: f64 = 0.5;
/// Growth factor of the wall-layer cells.
const LAYER_RATIO: f64 = 1.05;
/// Depth of the wall layer in units of `eps`.
const LAYER_DEPTH: f64 = 2.0;

/// Wall-layer nodes that are the same in `x / eps` for every `eps`, then
/// uniform cells up to 1. Falls back to plain geometric grading when the
/// layer does not fit.
fn layer_nodes(n: usize, ny: usize, eps: f64) -> Vec<f64> {
    let h0 = WALL_CELL * eps / ny as f64;
    let mut x = vec![0.0];
    let (mut acc, mut h) = (0.0, h0);
    while acc < LAYER_DEPTH * eps && 4 * x.len() <= 3 * n {
        acc += h;
        h *= LAYER_RATIO;
        x.push(acc);
    }
    let rest = n + 1 - x.len();
    if acc >= LAYER_DEPTH * eps && acc < 1.0 && rest > 0 {
        let step = (1.0 - acc) / rest as f64;
        x.extend((1..=rest).map(|i| acc + i as f64 * step));
        x[n] = 1.0;
        return x;
    }
    graded_nodes(n, h0)
}

/// Geometric grading with first cell `h0` and `n` cells summing to 1.
fn graded_nodes(n: usize, h0: f64) -> Vec<f64> {
    if h0 * n as f64 >= 1.0 {
        return (0..=n).map(|i| i as f64 / n as f64).collect();
    }
    let total = |q: f64| h0 * (q.powi(n as i32) - 1.0) / (q - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while total(hi) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut x = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    let mut h = h0;
    x.push(0.0);
    for _ in 0..n {
        acc += h;
        h *= q;
        x.push(acc);
    }
    let scale = 1.0 / acc;
    for v in &mut x {
        *v *= scale;
    }
    x[n] = 1.0;
    x
}

impl Grid {
    /// `nx` cells across (so `nx + 1` node rows), `ny` nodes per period.
    /// The first cell next to the wall is `eps / (2 ny)` wide unless a uniform
    /// grid is already finer.
    pub fn new(nx: usize, ny: usize, eps: f64) -> Result<Self> {
        if nx < 2 || ny < 8 {
            return Err(Error::InvalidInput(format!(
                "grid needs nx >= 2 and ny >= 8, got {nx} x {ny}"
            )));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1]")));
        }
        let xh = layer_nodes(nx, ny, eps);
        Ok(Self { nx, ny, eps, xh })
    }

    /// Uniform `xh` nodes, mainly for tests.
    pub fn uniform(nx: usize, ny: usize, eps: f64) -> Result<Self> {
        let mut g = Self::new(nx, ny, eps)?;
        g.xh = (0..=nx).map(|i| i as f64 / nx as f64).collect();
        Ok(g)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn xh(&self) -> &[f64] {
        &self.xh
    }

    pub fn dy(&self) -> f64 {
        self.eps / self.ny as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    /// Total node count including the pinned row.
    pub fn len(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Number of free nodes (rows `0..nx`).
    pub fn n_free(&self) -> usize {
        self.nx * self.ny
    }
}

/// Nodal interface heights on a boundary-fitted grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInterface {
    grid: Grid,
    phi: Vec<f64>,
    u: Vec<f64>,
}

#[derive(Serialize)]
struct NodeRow {
    i: usize,
    j: usize,
    xh: f64,
    x: f64,
    y: f64,
    u: f64,
}

impl DiscreteInterface {
    /// Builds an interface; the pinned row is forced to zero.
    pub fn new(grid: Grid, phi: Vec<f64>, mut u: Vec<f64>) -> Result<Self> {
        if phi.len() != grid.ny() {
            return Err(Error::GridMismatch(format!(
                "{} boundary positions for {} columns",
                phi.len(),
                grid.ny()
            )));
        }
        if u.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} nodal values for a {}-node grid",
                u.len(),
                grid.len()
            )));
        }
        if let Some(p) = phi.iter().find(|p| !(p.is_finite() && **p < 1.0)) {
            return Err(Error::InvalidInput(format!("boundary position {p} not below 1")));
        }
        let start = grid.index(grid.nx(), 0);
        for v in &mut u[start..] {
            *v = 0.0;
        }
        Ok(Self { grid, phi, u })
    }

    /// `u = psi_j (1 - xh)`: a linear ramp from the line heights to the pinned edge.
    pub fn ramp(grid: Grid, phi: Vec<f64>, psi: &[f64]) -> Result<Self> {
        if psi.len() != grid.ny() {
            return Err(Error::GridMismatch(format!(
                "{} line heights for {} columns",
                psi.len(),
                grid.ny()
            )));
        }
        let mut u = vec![0.0; grid.len()];
        for i in 0..=grid.nx() {
            for j in 0..grid.ny() {
                u[grid.index(i, j)] = psi[j] * (1.0 - grid.xh()[i]);
            }
        }
        Self::new(grid, phi, u)
    }

    /// Samples `f(x, y)` at the physical node positions.
    pub fn from_fn(grid: Grid, phi: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut u = vec![0.0; grid.len()];
        for i in 0..=grid.nx() {
            for j in 0..grid.ny() {
                let x = phi[j] + grid.xh()[i] * (1.0 - phi[j]);
                u[grid.index(i, j)] = f(x, grid.y(j));
            }
        }
        Self::new(grid, phi, u)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    /// Free values; the pinned row stays zero.
    pub fn free_values(&self) -> &[f64] {
        &self.u[..self.grid.n_free()]
    }

    pub fn set_free_values(&mut self, free: &[f64]) {
        let n = self.grid.n_free();
        self.u[..n].copy_from_slice(free);
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.index(i, j)]
    }

    /// Physical x of node `(i, j)`.
    pub fn x(&self, i: usize, j: usize) -> f64 {
        let p = self.phi[j];
        p + self.grid.xh()[i] * (1.0 - p)
    }

    /// Heights on the contact boundary `i = 0`.
    pub fn boundary_values(&self) -> Vec<f64> {
        (0..self.grid.ny()).map(|j| self.at(0, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation of column `j` at physical `x`; `None` outside the column.
    pub fn column_value(&self, j: usize, x: f64) -> Option<f64> {
        let p = self.phi[j];
        let t = (x - p) / (1.0 - p);
        let xh = self.grid.xh();
        if !(-1e-14..=1.0 + 1e-14).contains(&t) {
            return None;
        }
        let t = t.clamp(0.0, 1.0);
        let i = match xh.partition_point(|v| *v <= t) {
            0 => 0,
            k => (k - 1).min(self.grid.nx() - 1),
        };
        let w = (t - xh[i]) / (xh[i + 1] - xh[i]);
        Some((1.0 - w) * self.at(i, j) + w * self.at(i + 1, j))
    }

    /// Gradient `(u_x, u_y)` at boundary node `j` from one-sided second-order
    /// differences across the wall and periodic differences along it.
    pub fn boundary_gradient(&self, j: usize, dphi: f64) -> [f64; 2] {
        let xh = self.grid.xh();
        let (h1, h2) = (xh[1], xh[2]);
        let (u0, u1, u2) = (self.at(0, j), self.at(1, j), self.at(2, j));
        // Three-point derivative at xh = 0 on nodes 0, h1, h2.
        let d_xh = u0 * (-(h1 + h2) / (h1 * h2)) + u1 * (h2 / (h1 * (h2 - h1)))
            - u2 * (h1 / (h2 * (h2 - h1)));
        let boundary = self.boundary_values();
        let d_along = crate::contactline::periodic_derivative(&boundary, self.grid.dy())[j];
        let ux = d_xh / (1.0 - self.phi[j]);
        [ux, d_along - ux * dphi]
    }

    /// Writes `# key=value` grid metadata lines followed by the node table
    /// `i,j,xh,x,y,u`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# nx={}", self.grid.nx())?;
        writeln!(out, "# ny={}", self.grid.ny())?;
        writeln!(out, "# eps={}", self.grid.eps())?;
        let mut w = csv::Writer::from_writer(out);
        for i in 0..=self.grid.nx() {
            for j in 0..self.grid.ny() {
                w.serialize(NodeRow {
                    i,
                    j,
                    xh: self.grid.xh()[i],
                    x: self.x(i, j),
                    y: self.grid.y(j),
                    u: self.at(i, j),
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_grid_is_monotone_and_fine_at_the_wall() {
        let g = Grid::new(128, 64, 1.0 / 32.0).unwrap();
        let xh = g.xh();
        assert_eq!(xh[0], 0.0);
        assert_eq!(xh[128], 1.0);
        assert!(xh.windows(2).all(|w| w[1] > w[0]));
        assert!((xh[1] - 0.5 / (32.0 * 64.0)).abs() < 1e-15);
        let other = Grid::new(128, 64, 1.0 / 8.0).unwrap();
        for i in 0..40 {
            assert!((xh[i] * 32.0 - other.xh()[i] * 8.0).abs() < 1e-12);
        }
        let coarse = Grid::new(16, 8, 1.0).unwrap();
        assert!((coarse.xh()[1] - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn pinned_row_is_zero() {
        let g = Grid::new(8, 8, 0.25).unwrap();
        let d = DiscreteInterface::from_fn(g, vec![0.0; 8], |_, _| 1.0).unwrap();
        assert!((0..8).all(|j| d.at(8, j) == 0.0));
        assert_eq!(d.at(3, 2), 1.0);
    }

    #[test]
    fn boundary_gradient_of_linear_profile() {
        use std::f64::consts::PI;
        let eps = 0.25;
        let g = Grid::new(32, 64, eps).unwrap();
        let wall = |y: f64| -0.01 * (1.0 + (2.0 * PI * y / eps).sin());
        let slope = |y: f64| -0.01 * 2.0 * PI / eps * (2.0 * PI * y / eps).cos();
        let phi: Vec<f64> = (0..64).map(|j| wall(g.y(j))).collect();
        let d = DiscreteInterface::from_fn(g.clone(), phi, |x, _| 0.7 * (1.0 - x)).unwrap();
        let [ux, uy] = d.boundary_gradient(3, slope(g.y(3)));
        assert!((ux + 0.7).abs() < 1e-12);
        assert!(uy.abs() < 1e-6, "{uy}");
    }

    #[test]
    fn column_interpolation() {
        let g = Grid::new(16, 8, 0.5).unwrap();
        let d = DiscreteInterface::from_fn(g, vec![-0.05; 8], |x, _| 2.0 * (1.0 - x)).unwrap();
        assert!((d.column_value(2, 0.3).unwrap() - 1.4).abs() < 1e-12);
        assert!(d.column_value(2, -0.1).is_none());
        assert!((d.column_value(2, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_sizes() {
        let g = Grid::new(4, 8, 0.5).unwrap();
        assert!(DiscreteInterface::new(g.clone(), vec![0.0; 7], vec![0.0; g.len()]).is_err());
        assert!(DiscreteInterface::new(g, vec![0.0; 8], vec![0.0; 3]).is_err());
    }
}
