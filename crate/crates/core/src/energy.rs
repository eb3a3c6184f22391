//! Discrete interface energy for a frozen contact line.
//!
//! Bulk term: `(1/eps) * area integral of sqrt(1 + |grad v|^2)` with
//! piecewise-linear `v` on the mapped grid. Every grid cell is split both
//! ways into triangles (each split weighted 1/2), so linear profiles are
//! represented exactly and the quadrature is exact for them.
//! Line term: `-(1/ny) * sum_j c_j v(phi_j, y_j)` with
//! `c_j = cos(theta_s - theta_g) * weight` from the contact line.

use crate::banded::SymBand;
use crate::contactline::ContactLine;
use crate::error::{Error, Result};
use crate::interface::{DiscreteInterface, Grid};

#[derive(Debug, Clone, Copy)]
struct Tri {
    nodes: [usize; 3],
    b: [[f64; 2]; 3],
    w: f64,
}

/// Bulk and line parts of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub bulk: f64,
    /// Carries its minus sign.
    pub line: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.bulk + self.line
    }
}

/// Precomputed triangles and boundary coefficients of one frozen domain.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    grid: Grid,
    tris: Vec<Tri>,
    line: Vec<f64>,
    nu: f64,
}

impl EnergyModel {
    /// `phi` are the wall positions per column, `coefficients` the line
    /// coefficients `c_j`.
    pub fn new(grid: Grid, phi: &[f64], coefficients: &[f64]) -> Result<Self> {
        let ny = grid.ny();
        if phi.len() != ny || coefficients.len() != ny {
            return Err(Error::GridMismatch(format!(
                "{} wall positions and {} line coefficients for {ny} columns",
                phi.len(),
                coefficients.len()
            )));
        }
        let nu = coefficients.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
        if !(nu < 1.0) {
            return Err(Error::OutsidePartialWetting { nu });
        }
        let xh = grid.xh();
        let dy = grid.dy();
        let eps = grid.eps();
        let pos = |i: usize, j: usize| {
            let p = phi[j % ny];
            [p + xh[i] * (1.0 - p), j as f64 * dy]
        };
        let mut tris = Vec::with_capacity(4 * grid.nx() * ny);
        for i in 0..grid.nx() {
            for j in 0..ny {
                let corner = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let id = |k: usize| grid.index(corner[k].0, corner[k].1 % ny);
                let at = |k: usize| pos(corner[k].0, corner[k].1);
                for tri in [[0, 1, 2], [0, 2, 3], [0, 1, 3], [1, 2, 3]] {
                    let [p0, p1, p2] = [at(tri[0]), at(tri[1]), at(tri[2])];
                    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                    let b = [
                        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
                        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
                        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
                    ];
                    tris.push(Tri {
                        nodes: [id(tri[0]), id(tri[1]), id(tri[2])],
                        b,
                        w: 0.25 * det.abs() / eps,
                    });
                }
            }
        }
        let line = coefficients.iter().map(|c| c / ny as f64).collect();
        Ok(Self { grid, tris, line, nu })
    }

    /// Domain and coefficients frozen from a contact line sampled on the grid columns.
    pub fn from_line(grid: Grid, line: &ContactLine) -> Result<Self> {
        if line.len() != grid.ny() {
            return Err(Error::GridMismatch(format!(
                "contact line has {} samples, grid has {} columns",
                line.len(),
                grid.ny()
            )));
        }
        if (line.surface().eps() - grid.eps()).abs() > 1e-15 {
            return Err(Error::GridMismatch("contact line and grid use different eps".into()));
        }
        Self::new(grid, line.phi(), &line.line_coefficients())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `max_j |c_j|`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    fn tri_gradient(t: &Tri, u: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..3 {
            let v = u[t.nodes[k]];
            g[0] += t.b[k][0] * v;
            g[1] += t.b[k][1] * v;
        }
        g
    }

    /// Energy of the full nodal vector (pinned row included).
    pub fn terms(&self, u: &[f64]) -> EnergyTerms {
        let bulk = self
            .tris
            .iter()
            .map(|t| {
                let g = Self::tri_gradient(t, u);
                t.w * (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt()
            })
            .sum();
        let line = -self.line.iter().enumerate().map(|(j, c)| c * u[j]).sum::<f64>();
        EnergyTerms { bulk, line }
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.terms(u).total()
    }

    /// Gradient with respect to the free nodes.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.n_free();
        let mut out = vec![0.0; n];
        for t in &self.tris {
            let g = Self::tri_gradient(t, u);
            let s = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
            let f = t.w / s;
            for k in 0..3 {
                let node = t.nodes[k];
                if node < n {
                    out[node] += f * (g[0] * t.b[k][0] + g[1] * t.b[k][1]);
                }
            }
        }
        for (j, c) in self.line.iter().enumerate() {
            out[j] -= c;
        }
        out
    }

    /// `E(u + t d) - E(u)` without cancellation; `d` covers the free nodes.
    pub fn change(&self, u: &[f64], d: &[f64], t: f64) -> f64 {
        let n = self.grid.n_free();
        let dir = |node: usize| if node < n { d[node] } else { 0.0 };
        let mut bulk = 0.0;
        for tri in &self.tris {
            let g = Self::tri_gradient(tri, u);
            let mut gd = [0.0; 2];
            for k in 0..3 {
                let v = dir(tri.nodes[k]);
                gd[0] += tri.b[k][0] * v;
                gd[1] += tri.b[k][1] * v;
            }
            let gn = [g[0] + t * gd[0], g[1] + t * gd[1]];
            let s_old = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
            let s_new = (1.0 + gn[0] * gn[0] + gn[1] * gn[1]).sqrt();
            let num = t * (gd[0] * (2.0 * g[0] + t * gd[0]) + gd[1] * (2.0 * g[1] + t * gd[1]));
            bulk += tri.w * num / (s_old + s_new);
        }
        let line: f64 = self.line.iter().enumerate().map(|(j, c)| c * d[j]).sum();
        bulk - t * line
    }

    /// Hessian on the free nodes in band storage (`bandwidth = 2 ny`).
    pub fn hessian(&self, u: &[f64]) -> SymBand {
        let n = self.grid.n_free();
        let bw = (2 * self.grid.ny()).min(n.saturating_sub(1));
        let mut h = SymBand::zeros(n, bw);
        for t in &self.tris {
            let g = Self::tri_gradient(t, u);
            let s2 = 1.0 + g[0] * g[0] + g[1] * g[1];
            let s = s2.sqrt();
            let a = t.w / s;
            let c = t.w / (s * s2);
            for k in 0..3 {
                let p = t.nodes[k];
                if p >= n {
                    continue;
                }
                let bk = t.b[k];
                let gk = g[0] * bk[0] + g[1] * bk[1];
                for l in 0..=k {
                    let q = t.nodes[l];
                    if q >= n {
                        continue;
                    }
                    let bl = t.b[l];
                    let gl = g[0] * bl[0] + g[1] * bl[1];
                    let v = a * (bk[0] * bl[0] + bk[1] * bl[1]) - c * gk * gl;
                    if p == q && k != l {
                        h.add(p, q, 2.0 * v);
                    } else {
                        h.add(p, q, v);
                    }
                }
            }
        }
        h
    }
}

fn model_for(v: &DiscreteInterface, cl: &ContactLine) -> Result<EnergyModel> {
    let mismatch = v
        .phi()
        .iter()
        .zip(cl.phi())
        .any(|(a, b)| (a - b).abs() > 1e-12);
    if cl.len() != v.grid().ny() || mismatch {
        return Err(Error::GridMismatch(
            "interface domain is not the one induced by the contact line".into(),
        ));
    }
    EnergyModel::from_line(v.grid().clone(), cl)
}

/// Bulk and line energy of `v` on the domain of `cl`.
pub fn discrete_energy(v: &DiscreteInterface, cl: &ContactLine) -> Result<EnergyTerms> {
    Ok(model_for(v, cl)?.terms(v.values()))
}

/// Nodal gradient of [`discrete_energy`]; pinned nodes get zero.
pub fn energy_gradient(v: &DiscreteInterface, cl: &ContactLine) -> Result<Vec<f64>> {
    let model = model_for(v, cl)?;
    let mut g = model.gradient(v.values());
    g.resize(v.grid().len(), 0.0);
    Ok(g)
}
