//! Composite Gauss-Legendre quadrature over the unit cell with dyadic
//! refinement.
//!
//! Panel edges are the dyadic grid merged with caller-supplied breakpoints,
//! so piecewise-smooth integrands (chemical stripes, pillars) are integrated
//! without resolving their jumps by refinement.

use crate::error::{Error, Result};

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

#[derive(Debug, Clone, Copy)]
pub struct CellQuadrature {
    pub tolerance: f64,
    pub max_level: usize,
}

impl Default for CellQuadrature {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_level: 9 }
    }
}

fn panel_edges(level: usize, breakpoints: &[f64]) -> Vec<f64> {
    let n = 1usize << level;
    let mut edges: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    edges.extend(breakpoints.iter().copied().filter(|b| *b > 0.0 && *b < 1.0));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    edges
}

fn tensor_rule(edges_y: &[f64], edges_z: &[f64], f: &dyn Fn(f64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for wy in edges_y.windows(2) {
        let (ya, yb) = (wy[0], wy[1]);
        let (cy, hy) = (0.5 * (ya + yb), 0.5 * (yb - ya));
        for wz in edges_z.windows(2) {
            let (za, zb) = (wz[0], wz[1]);
            let (cz, hz) = (0.5 * (za + zb), 0.5 * (zb - za));
            let mut panel = 0.0;
            for (ny, wy_) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                for (nz, wz_) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                    panel += wy_ * wz_ * f(cy + hy * ny, cz + hz * nz);
                }
            }
            total += panel * hy * hz;
        }
    }
    total
}

impl CellQuadrature {
    /// Integrates `f(Y, Z)` over `[0,1]^2`, refining dyadically until two
    /// successive levels agree to `tolerance * (1 + |value|)`.
    pub fn integrate(
        &self,
        f: &dyn Fn(f64, f64) -> f64,
        breaks_y: &[f64],
        breaks_z: &[f64],
    ) -> Result<f64> {
        let mut previous = tensor_rule(&panel_edges(0, breaks_y), &panel_edges(0, breaks_z), f);
        for level in 1..=self.max_level {
            let value = tensor_rule(
                &panel_edges(level, breaks_y),
                &panel_edges(level, breaks_z),
                f,
            );
            if (value - previous).abs() < self.tolerance * (1.0 + value.abs()) {
                return Ok(value);
            }
            previous = value;
            if level == self.max_level {
                return Err(Error::QuadratureNotConverged {
                    levels: level,
                    previous,
                    last: value,
                });
            }
        }
        Ok(previous)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let q = CellQuadrature::default();
        let v = q.integrate(&|y, z| y.powi(7) * z.powi(3), &[], &[]).unwrap();
        assert!((v - 1.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn breakpoints_capture_jumps() {
        let q = CellQuadrature::default();
        let step = |y: f64, _z: f64| if y < 0.3 { 1.0 } else { -1.0 };
        let v = q.integrate(&step, &[0.3], &[]).unwrap();
        assert!((v - (0.3 - 0.7)).abs() < 1e-14);
    }

    #[test]
    fn smooth_periodic_integrand() {
        let q = CellQuadrature::default();
        let v = q
            .integrate(&|y, z| (2.0 * PI * y).sin().powi(2) * (1.0 + z), &[], &[])
            .unwrap();
        assert!((v - 0.75).abs() < 1e-10);
    }

    #[test]
    fn unresolved_jump_reports_non_convergence() {
        let q = CellQuadrature { tolerance: 1e-12, max_level: 3 };
        let step = |y: f64, _z: f64| if y < 1.0 / 3.0 { 1.0 } else { 0.0 };
        assert!(matches!(
            q.integrate(&step, &[], &[]),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }
}
