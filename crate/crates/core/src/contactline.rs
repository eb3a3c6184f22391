//! Contact lines on the rough wall and the apparent-angle formula.
//!
//! A contact line is sampled on one period `y_j = j * eps / n`. Its height
//! `psi(y)` is given, its x-position follows from the wall,
//! `phi(y) = eps * h(y/eps, psi(y)/eps)`. Everything the apparent-angle
//! formula needs (frames, geometric angle, Young's angle, line weight) is
//! derived from those samples.

use std::io::Write;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::SurfaceSpec;

/// Weight of the line average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineElement {
    /// `sqrt(1 + phi'^2)`: length element of the line projected onto the (x, y) plane.
    #[default]
    Projected,
    /// `sqrt(1 + phi'^2 + psi'^2)`: full 3D arclength. Offered for comparison only.
    Arclength,
}

/// Local frame of the contact line at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFrame {
    /// Unit tangent `(phi', 1, psi') / norm`.
    pub tangent: Vector3<f64>,
    /// In-plane inner normal `(1, -phi', 0) / norm`.
    pub inner_normal: Vector3<f64>,
    pub solid_normal: Vector3<f64>,
    pub dphi: f64,
    pub dpsi: f64,
}

/// One row of the contact-line CSV dump.
#[derive(Debug, Serialize)]
struct LineRow {
    y: f64,
    phi: f64,
    psi: f64,
    theta_s_deg: f64,
    theta_g_deg: f64,
    weight: f64,
    cos_theta_s: f64,
    cos_theta_g: f64,
}

#[derive(Debug, Clone)]
pub struct ContactLine {
    surface: SurfaceSpec,
    element: LineElement,
    y: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    dphi: Vec<f64>,
    dpsi: Vec<f64>,
    theta_s: Vec<f64>,
    theta_g: Vec<f64>,
}

/// Fourth-order central difference on a periodic sample vector.
pub(crate) fn periodic_derivative(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|j| {
            let at = |k: isize| values[(j as isize + k).rem_euclid(n as isize) as usize];
            (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * step)
        })
        .collect()
}

/// Minimum sample count accepted by [`lift_contact_line`].
pub const MIN_LINE_SAMPLES: usize = 16;
/// Default sample count per period.
pub const DEFAULT_LINE_SAMPLES: usize = 256;

/// Samples `psi` on one period and lifts it onto the wall.
pub fn lift_contact_line(
    spec: &SurfaceSpec,
    psi: impl Fn(f64) -> f64,
    n_samples: usize,
) -> Result<ContactLine> {
    if n_samples < MIN_LINE_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "contact line needs at least {MIN_LINE_SAMPLES} samples, got {n_samples}"
        )));
    }
    let eps = spec.eps();
    let (start, end) = (psi(0.0), psi(eps));
    if !start.is_finite() || (start - end).abs() > 1e-12 * (1.0 + start.abs()) {
        return Err(Error::NonPeriodicProfile { start, end });
    }
    let samples = (0..n_samples).map(|j| psi(j as f64 * eps / n_samples as f64)).collect();
    ContactLine::from_samples(spec, samples)
}

impl ContactLine {
    /// Builds a line from heights `psi_j` at `y_j = j * eps / n` (periodic by construction).
    pub fn from_samples(spec: &SurfaceSpec, psi: Vec<f64>) -> Result<Self> {
        let n = psi.len();
        if n < 8 {
            return Err(Error::InvalidInput(format!("contact line needs at least 8 samples, got {n}")));
        }
        if let Some(bad) = psi.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite line height {bad}")));
        }
        let step = spec.eps() / n as f64;
        let y: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
        let dpsi = periodic_derivative(&psi, step);
        let mut phi = Vec::with_capacity(n);
        let mut dphi = Vec::with_capacity(n);
        let mut theta_s = Vec::with_capacity(n);
        for j in 0..n {
            phi.push(spec.physical_height(y[j], psi[j]));
            let [hy, hz] = spec.physical_gradient(y[j], psi[j]);
            dphi.push(hy + hz * dpsi[j]);
            theta_s.push(spec.young_angle(y[j], psi[j]));
        }
        let mut line = Self {
            surface: spec.clone(),
            element: LineElement::default(),
            y,
            phi,
            psi,
            dphi,
            dpsi,
            theta_s,
            theta_g: Vec::new(),
        };
        line.theta_g = (0..n).map(|j| line.compute_geometric_angle(j)).collect();
        Ok(line)
    }

    /// The same surface and element with new heights.
    pub fn relift(&self, psi: Vec<f64>) -> Result<Self> {
        Ok(Self::from_samples(&self.surface, psi)?.with_element(self.element))
    }

    pub fn with_element(mut self, element: LineElement) -> Self {
        self.element = element;
        self
    }

    pub fn element(&self) -> LineElement {
        self.element
    }

    pub fn surface(&self) -> &SurfaceSpec {
        &self.surface
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn dphi(&self) -> &[f64] {
        &self.dphi
    }

    pub fn dpsi(&self) -> &[f64] {
        &self.dpsi
    }

    pub fn young_angles(&self) -> &[f64] {
        &self.theta_s
    }

    pub fn geometric_angles(&self) -> &[f64] {
        &self.theta_g
    }

    pub fn line_frame(&self, j: usize) -> LineFrame {
        let (dphi, dpsi) = (self.dphi[j], self.dpsi[j]);
        LineFrame {
            tangent: Vector3::new(dphi, 1.0, dpsi).normalize(),
            inner_normal: Vector3::new(1.0, -dphi, 0.0).normalize(),
            solid_normal: self.surface.solid_normal(self.y[j], self.psi[j]),
            dphi,
            dpsi,
        }
    }

    fn compute_geometric_angle(&self, j: usize) -> f64 {
        let f = self.line_frame(j);
        let s = f.inner_normal.cross(&f.solid_normal).dot(&f.tangent);
        s.clamp(-1.0, 1.0).asin()
    }

    /// `theta_g = asin((m_L x n_S) . tau_L)` at sample `j`.
    pub fn geometric_angle(&self, j: usize) -> f64 {
        self.theta_g[j]
    }

    /// Line-average weight at sample `j`.
    pub fn weight(&self, j: usize) -> f64 {
        match self.element {
            LineElement::Projected => (1.0 + self.dphi[j] * self.dphi[j]).sqrt(),
            LineElement::Arclength => {
                (1.0 + self.dphi[j] * self.dphi[j] + self.dpsi[j] * self.dpsi[j]).sqrt()
            }
        }
    }

    /// `cos(theta_s - theta_g) * weight` per sample: the boundary coefficients
    /// of the interface energy.
    pub fn line_coefficients(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| (self.theta_s[j] - self.theta_g[j]).cos() * self.weight(j))
            .collect()
    }

    /// Periodic trapezoid average of `cos(theta_s - theta_g) * weight`.
    pub fn apparent_cosine(&self) -> f64 {
        self.line_coefficients().iter().sum::<f64>() / self.len() as f64
    }

    /// Apparent contact angle from the line average.
    pub fn apparent_angle(&self) -> Result<f64> {
        let average = self.apparent_cosine();
        if average.abs() >= 1.0 || !average.is_finite() {
            return Err(Error::NoApparentAngle { average });
        }
        Ok(average.acos())
    }

    /// Line average of Young's angle cosine; only for geometrically flat walls.
    pub fn modified_cassie(&self) -> Result<f64> {
        let flat = (0..self.len()).all(|j| {
            self.phi[j].abs() <= 1e-14 && self.dphi[j].abs() <= 1e-14 && self.theta_g[j].abs() <= 1e-14
        });
        if !flat {
            return Err(Error::NotFlat);
        }
        let average = self.theta_s.iter().map(|t| t.cos()).sum::<f64>() / self.len() as f64;
        if average.abs() >= 1.0 {
            return Err(Error::NoApparentAngle { average });
        }
        Ok(average.acos())
    }

    /// Line average of `cos(theta_Y - theta_g) * weight`; only for homogeneous chemistry.
    pub fn modified_wenzel(&self) -> Result<f64> {
        let theta_y = self.surface.chemistry.uniform_angle().ok_or(Error::NotHomogeneous)?;
        let average = (0..self.len())
            .map(|j| (theta_y - self.theta_g[j]).cos() * self.weight(j))
            .sum::<f64>()
            / self.len() as f64;
        if average.abs() >= 1.0 {
            return Err(Error::NoApparentAngle { average });
        }
        Ok(average.acos())
    }

    /// `nu = max_j |cos(theta_s - theta_g) * weight|`; partial wetting needs `nu < 1`.
    pub fn partial_wetting_margin(&self) -> f64 {
        self.line_coefficients().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Fraction of samples lying on material 0 of the chemistry.
    pub fn material_fraction(&self) -> f64 {
        let eps = self.surface.eps();
        let hits = (0..self.len())
            .filter(|&j| self.surface.chemistry.material(self.y[j] / eps, self.psi[j] / eps) == 0)
            .count();
        hits as f64 / self.len() as f64
    }

    /// Columns: y, phi, psi, theta_s_deg, theta_g_deg, weight, cos_theta_s, cos_theta_g.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for j in 0..self.len() {
            w.serialize(LineRow {
                y: self.y[j],
                phi: self.phi[j],
                psi: self.psi[j],
                theta_s_deg: self.theta_s[j].to_degrees(),
                theta_g_deg: self.theta_g[j].to_degrees(),
                weight: self.weight(j),
                cos_theta_s: self.theta_s[j].cos(),
                cos_theta_g: self.theta_g[j].cos(),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{Chemistry, Geometry};
    use std::f64::consts::PI;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    fn spec(g: Geometry, c: Chemistry, eps: f64) -> SurfaceSpec {
        SurfaceSpec::catalog(g, c, eps).unwrap()
    }

    #[test]
    fn flat_line_frames() {
        let s = spec(Geometry::Flat, Chemistry::Uniform { theta: deg(70.0) }, 0.25);
        let cl = lift_contact_line(&s, |_| 0.3, 64).unwrap();
        assert!(cl.phi().iter().all(|p| *p == 0.0));
        let f = cl.line_frame(5);
        assert_eq!(f.tangent, Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(f.inner_normal, Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(f.solid_normal, Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(cl.geometric_angle(5), 0.0);
        assert!((cl.apparent_angle().unwrap() - deg(70.0)).abs() < 1e-14);
    }

    #[test]
    fn wave_z_frames_and_geometric_angle() {
        let a = 0.1;
        let eps = 0.125;
        let s = spec(Geometry::WaveZ { amplitude: a }, Chemistry::Uniform { theta: deg(90.0) }, eps);
        let z0 = 0.5 * eps;
        let cl = lift_contact_line(&s, |_| z0, 32).unwrap();
        let hp = 2.0 * PI * a; // dh/dZ at Z = 1/2
        let f = cl.line_frame(3);
        let n = Vector3::new(1.0, 0.0, -hp) / (1.0 + hp * hp).sqrt();
        assert!((f.solid_normal - n).norm() < 1e-14);
        assert_eq!(f.tangent, Vector3::new(0.0, 1.0, 0.0));
        let expected = 0.560_982_116_108_623_8;
        assert!((cl.geometric_angle(3) - expected).abs() < 1e-14);
        let phi0 = eps * s.geometry.height(0.0, 0.5);
        assert!(cl.phi().iter().all(|p| (*p - phi0).abs() < 1e-15));
        let theta = cl.apparent_angle().unwrap().to_degrees();
        assert!((theta - 57.858_092_364_657_94).abs() < 1e-10);
    }

    #[test]
    fn wave_y_traces_wall_with_zero_geometric_angle() {
        let eps = 0.25;
        let s = spec(Geometry::WaveY { amplitude: 0.1 }, Chemistry::Uniform { theta: deg(60.0) }, eps);
        let cl = lift_contact_line(&s, |_| 0.4, 128).unwrap();
        for j in 0..cl.len() {
            assert!((cl.phi()[j] - s.physical_height(cl.y()[j], 0.0)).abs() < 1e-15);
            assert!(cl.geometric_angle(j).abs() < 1e-14);
        }
        let r: f64 = 1.092_383_547_331_177_4;
        let wenzel = (r * 0.5_f64).acos();
        assert!((cl.modified_wenzel().unwrap() - wenzel).abs() < 1e-12);
        assert!((cl.apparent_angle().unwrap() - wenzel).abs() < 1e-12);
        let nu = cl.partial_wetting_margin();
        assert!((nu - 0.590_504_906_000_698_4).abs() < 1e-12);
    }

    #[test]
    fn modified_cassie_cases() {
        let stripes = Chemistry::StripesZ { theta_a: deg(60.0), theta_b: deg(120.0), fraction: 0.5 };
        let s = spec(Geometry::Flat, stripes, 0.2);
        // A line with a quarter of its samples in the 60° band.
        let eps = s.eps();
        let psi = (0..64).map(|j| if j < 16 { 0.25 * eps } else { 0.75 * eps }).collect();
        let cl = ContactLine::from_samples(&s, psi).unwrap();
        assert!((cl.material_fraction() - 0.25).abs() < 1e-15);
        let got = cl.modified_cassie().unwrap().to_degrees();
        assert!((got - 104.477_512_185_929_92).abs() < 1e-10, "{got}");

        let pattern = Chemistry::Pillars { theta_top: deg(110.0), theta_gap: deg(60.0), fraction: 0.5 };
        let s = spec(Geometry::Flat, pattern, 0.2);
        let inside = lift_contact_line(&s, |_| 0.02, 64).unwrap();
        // Level line at Z = 0.1 crosses pillar tops on half its length.
        assert!((inside.material_fraction() - 0.5).abs() < 1e-15);

        let one = spec(Geometry::Flat, Chemistry::Uniform { theta: deg(110.0) }, 0.2);
        let l = lift_contact_line(&one, |_| 0.0, 32).unwrap();
        assert!((l.modified_cassie().unwrap() - deg(110.0)).abs() < 1e-14);
    }

    #[test]
    fn reductions_reject_wrong_surfaces() {
        let s = spec(Geometry::WaveZ { amplitude: 0.1 }, Chemistry::Uniform { theta: 1.0 }, 0.1);
        let cl = lift_contact_line(&s, |_| 0.01, 32).unwrap();
        assert!(matches!(cl.modified_cassie(), Err(Error::NotFlat)));
        let c = Chemistry::Checkerboard { theta_a: 1.0, theta_b: 2.0 };
        let s = spec(Geometry::Flat, c, 0.1);
        let cl = lift_contact_line(&s, |_| 0.01, 32).unwrap();
        assert!(matches!(cl.modified_wenzel(), Err(Error::NotHomogeneous)));
    }

    #[test]
    fn rejects_non_periodic_or_short_profiles() {
        let s = spec(Geometry::Flat, Chemistry::Uniform { theta: 1.0 }, 0.1);
        assert!(matches!(
            lift_contact_line(&s, |y| y, 32),
            Err(Error::NonPeriodicProfile { .. })
        ));
        assert!(lift_contact_line(&s, |_| 0.0, 8).is_err());
    }

    #[test]
    fn margin_for_flat_homogeneous() {
        for (t, nu) in [(60.0, 0.5), (90.0, 0.0)] {
            let s = spec(Geometry::Flat, Chemistry::Uniform { theta: deg(t) }, 0.1);
            let cl = lift_contact_line(&s, |_| 0.0, 16).unwrap();
            assert!((cl.partial_wetting_margin() - nu).abs() < 1e-15);
        }
    }

    #[test]
    fn no_apparent_angle_beyond_total_wetting() {
        // theta_Y = 20° on a steep Wenzel wave: r cos 20° > 1.
        let s = spec(Geometry::WaveY { amplitude: 0.2 }, Chemistry::Uniform { theta: deg(20.0) }, 0.1);
        let cl = lift_contact_line(&s, |_| 0.0, 64).unwrap();
        assert!(matches!(cl.apparent_angle(), Err(Error::NoApparentAngle { .. })));
    }

    #[test]
    fn csv_dump_has_expected_columns() {
        let s = spec(Geometry::Flat, Chemistry::Uniform { theta: 1.0 }, 0.1);
        let cl = lift_contact_line(&s, |_| 0.0, 16).unwrap();
        let mut buf = Vec::new();
        cl.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("y,phi,psi,theta_s_deg,theta_g_deg,weight,cos_theta_s,cos_theta_g\n"));
        assert_eq!(text.lines().count(), 17);
    }
}
