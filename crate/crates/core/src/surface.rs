//! Periodic rough-surface geometry and chemistry.
//!
//! The solid wall is `x = eps * h(y/eps, z/eps)` with a 1-periodic cell
//! height `h(Y, Z) <= 0` and a 1-periodic Young's-angle field
//! `theta_s(Y, Z)`. Cell shapes and wettability patterns are analytic
//! evaluators; the [`Geometry`] and [`Chemistry`] catalogs hold the
//! closed-form cases used throughout the crate, and [`FnShape`] /
//! [`FnPattern`] wrap user closures.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::quadrature::CellQuadrature;

/// Reduces a cell coordinate to `[0, 1)`.
#[inline]
pub(crate) fn wrap_unit(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Height of one periodic cell. Arguments are already reduced to `[0, 1)`.
pub trait CellShape: Send + Sync + fmt::Debug {
    fn height(&self, y: f64, z: f64) -> f64;

    /// `(dh/dY, dh/dZ)`.
    fn gradient(&self, y: f64, z: f64) -> [f64; 2];

    /// Exact `(min, max)` of the height when known in closed form.
    fn range(&self) -> Option<(f64, f64)> {
        None
    }

    /// Locations in `[0,1)` where the height is not smooth, per axis.
    fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        (Vec::new(), Vec::new())
    }
}

/// Young's-angle pattern of one periodic cell, in radians.
pub trait WettabilityPattern: Send + Sync + fmt::Debug {
    fn angle(&self, y: f64, z: f64) -> f64;

    fn uniform_angle(&self) -> Option<f64> {
        None
    }

    /// Material label; two-material patterns return 0 or 1.
    fn material(&self, _y: f64, _z: f64) -> usize {
        0
    }

    fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        (Vec::new(), Vec::new())
    }
}

/// Built-in cell geometries. All satisfy `max h = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Flat,
    /// `h = -A (1 + sin 2πY)`
    WaveY { amplitude: f64 },
    /// `h = -A (1 + sin 2πZ)`
    WaveZ { amplitude: f64 },
    /// `h = -(A/2) (1 + sin 2πY)(1 + sin 2πZ)`
    WaveYZ { amplitude: f64 },
}

impl CellShape for Geometry {
    fn height(&self, y: f64, z: f64) -> f64 {
        let s = |t: f64| (2.0 * PI * t).sin();
        match *self {
            Geometry::Flat => 0.0,
            Geometry::WaveY { amplitude } => -amplitude * (1.0 + s(y)),
            Geometry::WaveZ { amplitude } => -amplitude * (1.0 + s(z)),
            Geometry::WaveYZ { amplitude } => -0.5 * amplitude * (1.0 + s(y)) * (1.0 + s(z)),
        }
    }

    fn gradient(&self, y: f64, z: f64) -> [f64; 2] {
        let s = |t: f64| (2.0 * PI * t).sin();
        let c = |t: f64| 2.0 * PI * (2.0 * PI * t).cos();
        match *self {
            Geometry::Flat => [0.0, 0.0],
            Geometry::WaveY { amplitude } => [-amplitude * c(y), 0.0],
            Geometry::WaveZ { amplitude } => [0.0, -amplitude * c(z)],
            Geometry::WaveYZ { amplitude } => [
                -0.5 * amplitude * c(y) * (1.0 + s(z)),
                -0.5 * amplitude * (1.0 + s(y)) * c(z),
            ],
        }
    }

    fn range(&self) -> Option<(f64, f64)> {
        Some(match *self {
            Geometry::Flat => (0.0, 0.0),
            Geometry::WaveY { amplitude } | Geometry::WaveZ { amplitude } => {
                (-2.0 * amplitude, 0.0)
            }
            Geometry::WaveYZ { amplitude } => (-2.0 * amplitude, 0.0),
        })
    }
}

/// Built-in wettability patterns; angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chemistry {
    Uniform { theta: f64 },
    /// `theta_a` where `frac(Y) < fraction`, else `theta_b`.
    StripesY { theta_a: f64, theta_b: f64, fraction: f64 },
    /// `theta_a` where `frac(Z) < fraction`, else `theta_b`.
    StripesZ { theta_a: f64, theta_b: f64, fraction: f64 },
    /// `theta_a` on the squares where `Y < 1/2` and `Z < 1/2` agree.
    Checkerboard { theta_a: f64, theta_b: f64 },
    /// Square pillar tops `[0, fraction)^2` with `theta_top`; `theta_gap`
    /// elsewhere (close to π to mimic trapped air).
    Pillars { theta_top: f64, theta_gap: f64, fraction: f64 },
}

impl Chemistry {
    fn angles(&self) -> Vec<f64> {
        match *self {
            Chemistry::Uniform { theta } => vec![theta],
            Chemistry::StripesY { theta_a, theta_b, .. }
            | Chemistry::StripesZ { theta_a, theta_b, .. }
            | Chemistry::Checkerboard { theta_a, theta_b } => vec![theta_a, theta_b],
            Chemistry::Pillars { theta_top, theta_gap, .. } => vec![theta_top, theta_gap],
        }
    }
}

impl WettabilityPattern for Chemistry {
    fn angle(&self, y: f64, z: f64) -> f64 {
        match *self {
            Chemistry::Uniform { theta } => theta,
            Chemistry::StripesY { theta_a, theta_b, .. }
            | Chemistry::StripesZ { theta_a, theta_b, .. }
            | Chemistry::Checkerboard { theta_a, theta_b } => {
                if self.material(y, z) == 0 {
                    theta_a
                } else {
                    theta_b
                }
            }
            Chemistry::Pillars { theta_top, theta_gap, .. } => {
                if self.material(y, z) == 0 {
                    theta_top
                } else {
                    theta_gap
                }
            }
        }
    }

    fn uniform_angle(&self) -> Option<f64> {
        match *self {
            Chemistry::Uniform { theta } => Some(theta),
            _ => None,
        }
    }

    fn material(&self, y: f64, z: f64) -> usize {
        let inside = match *self {
            Chemistry::Uniform { .. } => true,
            Chemistry::StripesY { fraction, .. } => y < fraction,
            Chemistry::StripesZ { fraction, .. } => z < fraction,
            Chemistry::Checkerboard { .. } => (y < 0.5) == (z < 0.5),
            Chemistry::Pillars { fraction, .. } => y < fraction && z < fraction,
        };
        usize::from(!inside)
    }

    fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        match *self {
            Chemistry::Uniform { .. } => (vec![], vec![]),
            Chemistry::StripesY { fraction, .. } => (vec![fraction], vec![]),
            Chemistry::StripesZ { fraction, .. } => (vec![], vec![fraction]),
            Chemistry::Checkerboard { .. } => (vec![0.5], vec![0.5]),
            Chemistry::Pillars { fraction, .. } => (vec![fraction], vec![fraction]),
        }
    }
}

type HeightFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type GradientFn = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;

/// A cell shape given by closures on the unit cell.
pub struct FnShape {
    height: Box<HeightFn>,
    gradient: Box<GradientFn>,
}

impl FnShape {
    pub fn new(
        height: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self { height: Box::new(height), gradient: Box::new(gradient) }
    }
}

impl fmt::Debug for FnShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnShape")
    }
}

impl CellShape for FnShape {
    fn height(&self, y: f64, z: f64) -> f64 {
        (self.height)(y, z)
    }

    fn gradient(&self, y: f64, z: f64) -> [f64; 2] {
        (self.gradient)(y, z)
    }
}

/// A wettability pattern given by a closure (radians).
pub struct FnPattern {
    angle: Box<HeightFn>,
}

impl FnPattern {
    pub fn new(angle: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { angle: Box::new(angle) }
    }
}

impl fmt::Debug for FnPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnPattern")
    }
}

impl WettabilityPattern for FnPattern {
    fn angle(&self, y: f64, z: f64) -> f64 {
        (self.angle)(y, z)
    }
}

const SAMPLE_GRID: usize = 256;

fn sampled_range(shape: &dyn CellShape) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in 0..SAMPLE_GRID {
        for b in 0..SAMPLE_GRID {
            let h = shape.height(a as f64 / SAMPLE_GRID as f64, b as f64 / SAMPLE_GRID as f64);
            lo = lo.min(h);
            hi = hi.max(h);
        }
    }
    (lo, hi)
}

/// Cell height `h(Y, Z)` normalized so that `max h = 0`.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    shape: Arc<dyn CellShape>,
    shift: f64,
    sup_norm: f64,
}

impl CellGeometry {
    /// Wraps a shape. A shape with positive heights is shifted down by its
    /// maximum (with a warning); a constant shift leaves every angle
    /// unchanged.
    pub fn new(shape: impl CellShape + 'static) -> Self {
        let (lo, hi) = shape.range().unwrap_or_else(|| sampled_range(&shape));
        let shift = if hi > 0.0 {
            log::warn!("cell height reaches {hi:e} > 0; shifting the cell down by its maximum");
            hi
        } else {
            0.0
        };
        let sup_norm = (lo - shift).abs();
        Self { shape: Arc::new(shape), shift, sup_norm }
    }

    pub fn flat() -> Self {
        Self::new(Geometry::Flat)
    }

    /// `h(Y, Z)` for any real `Y, Z` (periodic extension).
    pub fn height(&self, y: f64, z: f64) -> f64 {
        self.shape.height(wrap_unit(y), wrap_unit(z)) - self.shift
    }

    pub fn gradient(&self, y: f64, z: f64) -> [f64; 2] {
        self.shape.gradient(wrap_unit(y), wrap_unit(z))
    }

    /// `sup |h|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// The shift subtracted from the raw shape (0 unless the shape had positive values).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        self.shape.breakpoints()
    }
}

/// Young's angle field `theta_s(Y, Z)` with values in `(0, π)`.
#[derive(Clone, Debug)]
pub struct WettabilityField {
    pattern: Arc<dyn WettabilityPattern>,
}

impl WettabilityField {
    pub fn new(pattern: impl WettabilityPattern + 'static) -> Result<Self> {
        let bad = |t: f64| !(t > 0.0 && t < PI);
        for a in 0..64 {
            for b in 0..64 {
                let t = pattern.angle(a as f64 / 64.0, b as f64 / 64.0);
                if bad(t) {
                    return Err(Error::InvalidInput(format!(
                        "Young's angle {t} rad outside (0, π) at cell point ({}, {})",
                        a as f64 / 64.0,
                        b as f64 / 64.0
                    )));
                }
            }
        }
        Ok(Self { pattern: Arc::new(pattern) })
    }

    pub fn from_chemistry(chem: Chemistry) -> Result<Self> {
        if let Some(t) = chem.angles().into_iter().find(|t| !(*t > 0.0 && *t < PI)) {
            return Err(Error::InvalidInput(format!("Young's angle {t} rad outside (0, π)")));
        }
        match chem {
            Chemistry::StripesY { fraction, .. }
            | Chemistry::StripesZ { fraction, .. }
            | Chemistry::Pillars { fraction, .. }
                if !(0.0..=1.0).contains(&fraction) =>
            {
                return Err(Error::InvalidInput(format!(
                    "pattern fraction {fraction} outside [0, 1]"
                )))
            }
            _ => {}
        }
        Ok(Self { pattern: Arc::new(chem) })
    }

    pub fn uniform(theta: f64) -> Result<Self> {
        Self::from_chemistry(Chemistry::Uniform { theta })
    }

    pub fn angle(&self, y: f64, z: f64) -> f64 {
        self.pattern.angle(wrap_unit(y), wrap_unit(z))
    }

    pub fn material(&self, y: f64, z: f64) -> usize {
        self.pattern.material(wrap_unit(y), wrap_unit(z))
    }

    pub fn uniform_angle(&self) -> Option<f64> {
        self.pattern.uniform_angle()
    }

    pub fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        self.pattern.breakpoints()
    }
}

/// A rough, chemically patterned wall at roughness scale `eps`.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub geometry: CellGeometry,
    pub chemistry: WettabilityField,
    eps: f64,
    periods: usize,
}

fn merge(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.extend(b);
    a
}

impl SurfaceSpec {
    pub fn new(geometry: CellGeometry, chemistry: WettabilityField, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1]")));
        }
        Ok(Self { geometry, chemistry, eps, periods: 1 })
    }

    /// Catalog shortcut.
    pub fn catalog(geometry: Geometry, chemistry: Chemistry, eps: f64) -> Result<Self> {
        Self::new(CellGeometry::new(geometry), WettabilityField::from_chemistry(chemistry)?, eps)
    }

    /// Sets the strip width to `periods * eps`.
    pub fn with_periods(mut self, periods: usize) -> Result<Self> {
        if periods == 0 {
            return Err(Error::InvalidInput("strip must contain at least one period".into()));
        }
        self.periods = periods;
        Ok(self)
    }

    /// Same cells at a different roughness scale.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut s = Self::new(self.geometry.clone(), self.chemistry.clone(), eps)?;
        s.periods = self.periods;
        Ok(s)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn strip_width(&self) -> f64 {
        self.eps * self.periods as f64
    }

    /// `eps * h(y/eps, z/eps)`.
    pub fn physical_height(&self, y: f64, z: f64) -> f64 {
        self.eps * self.geometry.height(y / self.eps, z / self.eps)
    }

    /// `(dh_eps/dy, dh_eps/dz)`, equal to the cell gradient at `(y/eps, z/eps)`.
    pub fn physical_gradient(&self, y: f64, z: f64) -> [f64; 2] {
        self.geometry.gradient(y / self.eps, z / self.eps)
    }

    /// Unit normal `(1, -dh/dy, -dh/dz) / norm`, pointing into the liquid side `x > h`.
    pub fn solid_normal(&self, y: f64, z: f64) -> Vector3<f64> {
        let [hy, hz] = self.physical_gradient(y, z);
        Vector3::new(1.0, -hy, -hz).normalize()
    }

    pub fn young_angle(&self, y: f64, z: f64) -> f64 {
        self.chemistry.angle(y / self.eps, z / self.eps)
    }

    /// Wenzel roughness factor: true area over projected area of one cell.
    pub fn roughness_factor(&self) -> Result<f64> {
        let g = &self.geometry;
        let (by, bz) = g.breakpoints();
        // Integrating the excess area keeps r = 1 exact on flat cells.
        let excess = CellQuadrature::default().integrate(
            &|y, z| {
                let [hy, hz] = g.gradient(y, z);
                let q = hy * hy + hz * hz;
                q / (1.0 + (1.0 + q).sqrt())
            },
            &by,
            &bz,
        )?;
        Ok(1.0 + excess)
    }

    /// Area average of `cos theta_s` over one cell (classical Cassie).
    pub fn cassie_area_average(&self) -> Result<f64> {
        let c = &self.chemistry;
        let (by, bz) = c.breakpoints();
        let (gy, gz) = self.geometry.breakpoints();
        CellQuadrature::default().integrate(
            &|y, z| c.angle(y, z).cos(),
            &merge(by, gy),
            &merge(bz, gz),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    fn wave_minus_sin() -> CellGeometry {
        CellGeometry::new(FnShape::new(
            |y, _| -0.1 * (1.0 - (2.0 * PI * y).sin()),
            |y, _| [0.1 * 2.0 * PI * (2.0 * PI * y).cos(), 0.0],
        ))
    }

    #[test]
    fn flat_height_is_zero() {
        let s = SurfaceSpec::catalog(Geometry::Flat, Chemistry::Uniform { theta: 1.0 }, 0.3)
            .unwrap();
        assert_eq!(s.physical_height(0.17, -2.3), 0.0);
        assert_eq!(s.solid_normal(0.1, 0.2), Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn physical_height_of_custom_wave() {
        let s = SurfaceSpec::new(wave_minus_sin(), WettabilityField::uniform(1.0).unwrap(), 0.5)
            .unwrap();
        // y = 0.125 sits at Y = 0.25 where sin(2πY) = 1.
        assert!(s.physical_height(0.125, 0.7).abs() < 1e-15);
        // y = 0.0625 sits at Y = 0.125: 0.5 * (-0.1) * (1 - sin(π/4)).
        let expected = -0.014_644_660_940_672_625;
        assert!((s.physical_height(0.0625, 0.7) - expected).abs() < 1e-15);
        for y in [0.0, 0.013, 0.31, 0.77] {
            assert!((s.physical_height(y + 0.5, 0.2) - s.physical_height(y, 0.2)).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_for_unit_z_slope() {
        let g = CellGeometry::new(FnShape::new(|_, z| z - 1.0, |_, _| [0.0, 1.0]));
        let s = SurfaceSpec::new(g, WettabilityField::uniform(1.0).unwrap(), 0.25).unwrap();
        let n = s.solid_normal(0.1, 0.1);
        let e = Vector3::new(1.0, 0.0, -1.0) / 2f64.sqrt();
        assert!((n - e).norm() < 1e-15);
    }

    #[test]
    fn positive_shape_is_shifted_down() {
        let g = CellGeometry::new(FnShape::new(
            |y, _| 0.3 + 0.1 * (2.0 * PI * y).cos(),
            |y, _| [-0.2 * PI * (2.0 * PI * y).sin(), 0.0],
        ));
        assert!((g.shift() - 0.4).abs() < 1e-12);
        assert!(g.height(0.0, 0.0).abs() < 1e-12);
        assert!((g.sup_norm() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn stripes_and_young_angle() {
        let chem = Chemistry::StripesY { theta_a: deg(60.0), theta_b: deg(120.0), fraction: 0.5 };
        let s = SurfaceSpec::catalog(Geometry::Flat, chem, 0.2).unwrap();
        assert_eq!(s.young_angle(0.05, 0.0), deg(60.0));
        assert_eq!(s.young_angle(0.15, 0.0), deg(120.0));
        assert_eq!(s.young_angle(0.05 + 0.2, 3.0), s.young_angle(0.05, 3.0));
    }

    #[test]
    fn rejects_bad_angles_and_eps() {
        assert!(WettabilityField::uniform(0.0).is_err());
        assert!(WettabilityField::uniform(PI).is_err());
        assert!(WettabilityField::new(FnPattern::new(|y, _| 4.0 * y)).is_err());
        let chem = Chemistry::Uniform { theta: 1.0 };
        assert!(SurfaceSpec::catalog(Geometry::Flat, chem, 0.0).is_err());
        assert!(SurfaceSpec::catalog(Geometry::Flat, chem, 1.5).is_err());
    }

    #[test]
    fn cassie_averages() {
        let eps = 0.25;
        let cases = [
            (Chemistry::Uniform { theta: deg(60.0) }, 0.5),
            (Chemistry::StripesY { theta_a: deg(60.0), theta_b: deg(120.0), fraction: 0.5 }, 0.0),
            (Chemistry::Checkerboard { theta_a: deg(45.0), theta_b: deg(135.0) }, 0.0),
            (
                Chemistry::StripesZ { theta_a: deg(60.0), theta_b: deg(120.0), fraction: 0.25 },
                0.25 * 0.5 - 0.75 * 0.5,
            ),
        ];
        for (chem, expected) in cases {
            let s = SurfaceSpec::catalog(Geometry::Flat, chem, eps).unwrap();
            let v = s.cassie_area_average().unwrap();
            assert!((v - expected).abs() < 1e-12, "{chem:?}: {v}");
        }
    }

    #[test]
    fn roughness_of_flat_is_one_and_independent_of_eps() {
        let chem = Chemistry::Uniform { theta: 1.0 };
        let flat = SurfaceSpec::catalog(Geometry::Flat, chem, 0.5).unwrap();
        assert_eq!(flat.roughness_factor().unwrap(), 1.0);
        let w = SurfaceSpec::catalog(Geometry::WaveYZ { amplitude: 0.1 }, chem, 0.5).unwrap();
        let a = w.roughness_factor().unwrap();
        let b = w.with_eps(0.05).unwrap().roughness_factor().unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(a > 1.0);
    }
}
