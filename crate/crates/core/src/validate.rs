//! Seeded invariant suite shared by the command line `validate` scenario.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contactline::{lift_contact_line, ContactLine, DEFAULT_LINE_SAMPLES};
use crate::energy::EnergyModel;
use crate::error::Result;
use crate::homogenize::{assess, DEFAULT_WINDOW};
use crate::hysteresis::{angle_vs_offset, hysteresis_range, pillar_cassie_baxter};
use crate::interface::{DiscreteInterface, Grid};
use crate::solver::{solve_free, solve_pinned, SolverConfig};
use crate::surface::{Chemistry, Geometry, SurfaceSpec};

/// One invariant: `value` must not exceed `bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.to_string(), value, bound, pass: value <= bound }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.checks {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn deg(d: f64) -> f64 {
    d.to_radians()
}

/// Smooth periodic line `mean + sum a_k sin(2 pi k y / eps + p_k)`.
fn random_line(rng: &mut ChaCha8Rng, eps: f64, scale: f64) -> impl Fn(f64) -> f64 {
    let mean = rng.gen_range(-scale..scale);
    let modes: Vec<(f64, f64)> =
        (0..3).map(|_| (rng.gen_range(-0.3 * scale..0.3 * scale), rng.gen_range(0.0..2.0 * PI))).collect();
    move |y| {
        mean + modes
            .iter()
            .enumerate()
            .map(|(k, (a, p))| a * (2.0 * PI * (k + 1) as f64 * y / eps + p).sin())
            .sum::<f64>()
    }
}

fn catalog(rng: &mut ChaCha8Rng, eps: f64) -> Vec<SurfaceSpec> {
    let a = rng.gen_range(0.02..0.15);
    let t = rng.gen_range(deg(50.0)..deg(130.0));
    let stripes = Chemistry::StripesY { theta_a: deg(70.0), theta_b: deg(110.0), fraction: 0.4 };
    [
        (Geometry::Flat, Chemistry::Uniform { theta: t }),
        (Geometry::Flat, stripes),
        (Geometry::WaveY { amplitude: a }, Chemistry::Uniform { theta: t }),
        (Geometry::WaveZ { amplitude: a }, Chemistry::Uniform { theta: t }),
        (Geometry::WaveYZ { amplitude: a }, stripes),
        (Geometry::Flat, Chemistry::Checkerboard { theta_a: deg(75.0), theta_b: deg(105.0) }),
    ]
    .into_iter()
    .map(|(g, c)| SurfaceSpec::catalog(g, c, eps))
    .collect::<Result<Vec<_>>>()
    .expect("catalog parameters are valid")
}

fn frame_orthogonality(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for s in catalog(rng, 0.2) {
        let line = lift_contact_line(&s, random_line(rng, 0.2, 0.1), 64)?;
        for j in 0..line.len() {
            let f = line.line_frame(j);
            let (t, m, n) = (f.tangent, f.inner_normal, f.solid_normal);
            for v in [t.dot(&m), t.dot(&n), t.norm() - 1.0, m.norm() - 1.0, n.norm() - 1.0] {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(Check::new("frame_orthogonality", worst, 1e-8))
}

fn reductions(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut cassie: f64 = 0.0;
    let mut wenzel: f64 = 0.0;
    let mut classical: f64 = 0.0;
    let mut shift: f64 = 0.0;
    for _ in 0..5 {
        let eps = rng.gen_range(0.05..0.5);
        let (a, b) = (rng.gen_range(deg(40.0)..deg(140.0)), rng.gen_range(deg(40.0)..deg(140.0)));
        let s = SurfaceSpec::catalog(
            Geometry::Flat,
            Chemistry::StripesY { theta_a: a, theta_b: b, fraction: rng.gen_range(0.1..0.9) },
            eps,
        )?;
        let line = lift_contact_line(&s, |_| 0.0, DEFAULT_LINE_SAMPLES)?;
        cassie = cassie.max((line.apparent_angle()? - line.modified_cassie()?).abs());

        let amp = rng.gen_range(0.0..0.25);
        let theta = rng.gen_range(deg(55.0)..deg(125.0));
        let s = SurfaceSpec::catalog(Geometry::WaveYZ { amplitude: amp }, Chemistry::Uniform { theta }, eps)?;
        let line = lift_contact_line(&s, random_line(rng, eps, 0.2 * eps), DEFAULT_LINE_SAMPLES)?;
        wenzel = wenzel.max((line.apparent_angle()? - line.modified_wenzel()?).abs());

        let s = SurfaceSpec::catalog(Geometry::WaveY { amplitude: amp }, Chemistry::Uniform { theta }, eps)?;
        let line = lift_contact_line(&s, |_| 0.0, DEFAULT_LINE_SAMPLES)?;
        classical = classical.max((line.apparent_cosine() - s.roughness_factor()? * theta.cos()).abs());

        let s = SurfaceSpec::catalog(
            Geometry::WaveZ { amplitude: amp },
            Chemistry::StripesZ { theta_a: a, theta_b: b, fraction: 0.5 },
            eps,
        )?;
        let base = lift_contact_line(&s, random_line(rng, eps, 0.3 * eps), DEFAULT_LINE_SAMPLES)?;
        let k = rng.gen_range(1..DEFAULT_LINE_SAMPLES);
        let mut rotated = base.psi().to_vec();
        rotated.rotate_left(k);
        let moved = ContactLine::from_samples(&s, rotated)?;
        shift = shift.max((base.apparent_cosine() - moved.apparent_cosine()).abs());
    }
    Ok(vec![
        Check::new("cassie_reduction", cassie, 1e-12),
        Check::new("wenzel_reduction", wenzel, 1e-12),
        Check::new("classical_wenzel", classical, 1e-8),
        Check::new("rotation_invariance", shift, 1e-12),
    ])
}

fn energy_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let eps = 0.25;
    let grid = Grid::new(6, 16, eps)?;
    let mut grad_err: f64 = 0.0;
    let mut convexity: f64 = f64::NEG_INFINITY;
    let surfaces = catalog(rng, eps);
    for s in &surfaces {
        let line = lift_contact_line(s, random_line(rng, eps, 0.05), grid.ny())?;
        let model = EnergyModel::from_line(grid.clone(), &line)?;
        let random_u = |rng: &mut ChaCha8Rng| {
            let mut u: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            for v in &mut u[grid.n_free()..] {
                *v = 0.0;
            }
            u
        };
        let u = random_u(rng);
        let g = model.gradient(&u);
        let h = 1e-6;
        let mut diff: f64 = 0.0;
        for p in 0..grid.n_free() {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up[p] += h;
            dn[p] -= h;
            let fd = (model.energy(&up) - model.energy(&dn)) / (2.0 * h);
            diff = diff.max((fd - g[p]).abs());
        }
        let scale = g.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        grad_err = grad_err.max(diff / scale);
    }
    let s = &surfaces[4];
    let line = lift_contact_line(s, |_| 0.0, grid.ny())?;
    let model = EnergyModel::from_line(grid.clone(), &line)?;
    for _ in 0..200 {
        let mut draw = || -> Vec<f64> {
            (0..grid.len())
                .map(|i| if i < grid.n_free() { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect()
        };
        let (a, b) = (draw(), draw());
        let (ea, eb) = (model.energy(&a), model.energy(&b));
        for t in [0.25, 0.5, 0.75] {
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            convexity = convexity.max(model.energy(&mix) - (t * ea + (1.0 - t) * eb));
        }
    }
    Ok(vec![
        Check::new("gradient_finite_difference", grad_err, 1e-6),
        Check::new("convexity_200_pairs", convexity, 1e-12),
    ])
}

fn solver_checks(rng: &mut ChaCha8Rng, cfg: &SolverConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let theta = rng.gen_range(deg(45.0)..deg(135.0));
    let flat = SurfaceSpec::catalog(Geometry::Flat, Chemistry::Uniform { theta }, 1.0 / 16.0)?;
    let sol = solve_free(&flat, 0.0, cfg)?;
    let row = assess(&sol, DEFAULT_WINDOW)?;
    checks.push(Check::new("young_recovery_deg", (row.theta_meas - theta).abs().to_degrees(), 0.2));
    let climb = sol.energy_trace.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new("energy_monotone", climb.max(0.0), 0.0));

    let wave = SurfaceSpec::catalog(
        Geometry::WaveY { amplitude: 0.1 },
        Chemistry::Uniform { theta: deg(60.0) },
        1.0 / 16.0,
    )?;
    let sol = solve_free(&wave, 0.0, cfg)?;
    let row = assess(&sol, DEFAULT_WINDOW)?;
    checks.push(Check::new("wenzel_recovery_deg", (row.theta_meas - row.theta_formula).abs().to_degrees(), 0.5));
    let worst = row.lemmas.slacks().iter().fold(f64::INFINITY, |m, v| m.min(*v));
    checks.push(Check::new("lemma_slack_deficit", -worst, 1e-3));
    checks.push(Check::new("identity_residual", sol.identity_residual, 5e-3));
    checks.push(Check::new("young_residual", sol.young_residual, 5e-3));

    let rough = SurfaceSpec::catalog(
        Geometry::WaveYZ { amplitude: 0.1 },
        Chemistry::Uniform { theta: deg(70.0) },
        1.0 / 8.0,
    )?;
    let grid = cfg.grid(rough.eps())?;
    let line = ContactLine::from_samples(&rough, vec![0.02; grid.ny()])?;
    let seed = |rng: &mut ChaCha8Rng| {
        let u = (0..grid.len()).map(|_| rng.gen_range(-0.3..0.3)).collect();
        DiscreteInterface::new(grid.clone(), line.phi().to_vec(), u)
    };
    let (s1, s2) = (seed(rng)?, seed(rng)?);
    let (a, b) = (solve_pinned(&line, cfg, &s1)?, solve_pinned(&line, cfg, &s2)?);
    let gap = a
        .interface
        .values()
        .iter()
        .zip(b.interface.values())
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
    checks.push(Check::new("seed_independence", gap, 1e-6));
    Ok(checks)
}

fn hysteresis_checks() -> Result<Vec<Check>> {
    let s = SurfaceSpec::catalog(Geometry::WaveZ { amplitude: 0.1 }, Chemistry::Uniform { theta: deg(90.0) }, 0.125)?;
    let table = angle_vs_offset(&s, 64)?;
    let r = hysteresis_range(&table)?;
    let tg = (0.2 * PI).atan();
    let range_err = (r.advancing - (0.5 * PI + tg)).abs().max((r.receding - (0.5 * PI - tg)).abs());
    let outside = table
        .valid_rows()
        .map(|row| (row.theta_a - r.advancing).max(r.receding - row.theta_a))
        .fold(f64::NEG_INFINITY, f64::max);
    let s2 = SurfaceSpec::catalog(Geometry::WaveZ { amplitude: 0.1 }, Chemistry::Uniform { theta: deg(90.0) }, 0.125)?;
    let shifted = lift_contact_line(&s2, |_| 0.125 + 0.3 * 0.125, DEFAULT_LINE_SAMPLES)?.apparent_angle()?;
    let base = lift_contact_line(&s2, |_| 0.3 * 0.125, DEFAULT_LINE_SAMPLES)?.apparent_angle()?;
    let pillar = pillar_cassie_baxter(0.25, deg(100.0))?;
    Ok(vec![
        Check::new("wave_z_range_deg", range_err.to_degrees(), 0.2),
        Check::new("range_brackets_rows", outside.max(0.0), 0.0),
        Check::new("period_translation", (shifted - base).abs(), 1e-12),
        Check::new("pillar_formula_deg", (pillar.to_degrees() - 142.505_525_5).abs(), 0.1),
    ])
}

/// Runs every invariant with random draws from `seed`.
pub fn run_suite(seed: u64, cfg: &SolverConfig) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![frame_orthogonality(&mut rng)?];
    checks.extend(reductions(&mut rng)?);
    checks.extend(energy_checks(&mut rng)?);
    checks.extend(solver_checks(&mut rng, cfg)?);
    checks.extend(hysteresis_checks()?);
    Ok(ValidationReport { checks })
}
