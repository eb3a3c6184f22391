//! Apparent angles of level contact lines, advancing/receding ranges and the
//! closed-form two-dimensional and pillar cases.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::contactline::{lift_contact_line, LineElement, DEFAULT_LINE_SAMPLES};
use crate::error::{Error, Result};
use crate::surface::SurfaceSpec;

/// Smallest accepted number of offsets per period.
pub const MIN_OFFSETS: usize = 8;

/// Apparent angle of the level line `psi = offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleRow {
    pub offset: f64,
    /// `NaN` when the line average has no angle.
    pub theta_a: f64,
    pub nu: f64,
    pub valid: bool,
    /// Fraction of the line on material 0.
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct AngleTable {
    pub rows: Vec<AngleRow>,
    pub eps: f64,
    pub element: LineElement,
}

#[derive(Serialize)]
struct TableRow {
    offset: f64,
    theta_a_deg: f64,
    cos_theta_a: f64,
    nu: f64,
    valid: bool,
    lambda: f64,
}

impl AngleTable {
    pub fn valid_rows(&self) -> impl Iterator<Item = &AngleRow> {
        self.rows.iter().filter(|r| r.valid)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(TableRow {
                offset: r.offset,
                theta_a_deg: r.theta_a.to_degrees(),
                cos_theta_a: r.theta_a.cos(),
                nu: r.nu,
                valid: r.valid,
                lambda: r.lambda,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Level lines at `offset = m eps / n`, `m = 0..n`, with the default line element.
pub fn angle_vs_offset(spec: &SurfaceSpec, n_offsets: usize) -> Result<AngleTable> {
    angle_vs_offset_with(spec, n_offsets, LineElement::default())
}

pub fn angle_vs_offset_with(
    spec: &SurfaceSpec,
    n_offsets: usize,
    element: LineElement,
) -> Result<AngleTable> {
    if n_offsets < MIN_OFFSETS {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_OFFSETS} offsets, got {n_offsets}"
        )));
    }
    let eps = spec.eps();
    let rows = (0..n_offsets)
        .into_par_iter()
        .map(|m| {
            let offset = m as f64 * eps / n_offsets as f64;
            let line = lift_contact_line(spec, |_| offset, DEFAULT_LINE_SAMPLES)?.with_element(element);
            let nu = line.partial_wetting_margin();
            let angle = line.apparent_angle().ok();
            Ok(AngleRow {
                offset,
                theta_a: angle.unwrap_or(f64::NAN),
                nu,
                valid: nu < 1.0 && angle.is_some(),
                lambda: line.material_fraction(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleTable { rows, eps, element })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HysteresisRange {
    pub advancing: f64,
    pub receding: f64,
    /// Offsets of the advancing and receding rows.
    pub offsets: (f64, f64),
}

impl HysteresisRange {
    pub fn width(&self) -> f64 {
        self.advancing - self.receding
    }
}

/// Largest and smallest valid angle of the table.
pub fn hysteresis_range(table: &AngleTable) -> Result<HysteresisRange> {
    let mut valid = table.valid_rows();
    let first = valid.next().ok_or(Error::NoValidLine)?;
    let (mut hi, mut lo) = (first, first);
    for r in valid {
        if r.theta_a > hi.theta_a {
            hi = r;
        }
        if r.theta_a < lo.theta_a {
            lo = r;
        }
    }
    Ok(HysteresisRange {
        advancing: hi.theta_a,
        receding: lo.theta_a,
        offsets: (hi.offset, lo.offset),
    })
}

/// Two-dimensional wall `x = shape(z)` with Young's angle `young(z)`.
pub struct Profile2d {
    shape: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    young: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Profile2d {
    pub fn new(
        shape: impl Fn(f64) -> f64 + Send + Sync + 'static,
        young: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { shape: Box::new(shape), young: Box::new(young) }
    }

    pub fn flat(theta: f64) -> Self {
        Self::new(|_| 0.0, move |_| theta)
    }

    pub fn young_angle(&self, z: f64) -> f64 {
        (self.young)(z)
    }

    /// Wall slope by a five-point central difference.
    pub fn slope(&self, z: f64) -> f64 {
        let h = 1e-3 * (1.0 + z.abs());
        let f = &self.shape;
        (8.0 * (f(z + h) - f(z - h)) - (f(z + 2.0 * h) - f(z - 2.0 * h))) / (12.0 * h)
    }
}

/// `theta_s - atan(slope)` at the contact point.
pub fn drop2d_angle(profile: &Profile2d, z_ct: f64) -> f64 {
    profile.young_angle(z_ct) - profile.slope(z_ct).atan()
}

/// Advancing and receding two-dimensional angles over candidate contact points.
pub fn drop2d_range(profile: &Profile2d, contact_points: &[f64]) -> Result<HysteresisRange> {
    let mut best: Option<HysteresisRange> = None;
    for &z in contact_points {
        let a = drop2d_angle(profile, z);
        if !(a > 0.0 && a < PI) {
            continue;
        }
        best = Some(match best {
            None => HysteresisRange { advancing: a, receding: a, offsets: (z, z) },
            Some(mut r) => {
                if a > r.advancing {
                    r.advancing = a;
                    r.offsets.0 = z;
                }
                if a < r.receding {
                    r.receding = a;
                    r.offsets.1 = z;
                }
                r
            }
        });
    }
    best.ok_or(Error::NoValidLine)
}

/// `cos theta_a = f cos theta_Y - (1 - f)` for pillars with trapped air.
/// Returns π when the right-hand side leaves `[-1, 1]`.
pub fn pillar_cassie_baxter(contact_fraction: f64, theta_y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&contact_fraction) {
        return Err(Error::InvalidInput(format!(
            "contact fraction {contact_fraction} outside [0, 1]"
        )));
    }
    let c = contact_fraction * theta_y.cos() - (1.0 - contact_fraction);
    if c.abs() > 1.0 {
        log::warn!("complete dewetting predicted (cos = {c})");
        return Ok(PI);
    }
    Ok(c.acos())
}
