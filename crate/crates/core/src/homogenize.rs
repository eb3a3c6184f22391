//! Homogenized interface: y-averages, planar fits, error norms and
//! ε-sweeps.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interface::DiscreteInterface;
use crate::solver::{solve_free, Solution, SolverConfig};
use crate::surface::SurfaceSpec;

/// Fit residual above which a profile is flagged as not planar on the window.
pub const PLANARITY_TOL: f64 = 1e-4;
/// Default fit window.
pub const DEFAULT_WINDOW: (f64, f64) = (0.3, 0.9);

/// `u_bar(x)` sampled on physical rows `0 <= x <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl Profile {
    /// Piecewise-linear value at `x`.
    pub fn value(&self, x: f64) -> f64 {
        let k = self.x.partition_point(|v| *v <= x).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let w = (x - x0) / (x1 - x0);
        (1.0 - w) * self.u[k - 1] + w * self.u[k]
    }
}

/// Periodic trapezoid average over `y` of an interface, on the rows `x = xh_i`.
pub fn average_interface(v: &DiscreteInterface) -> Profile {
    let ny = v.grid().ny();
    let mut x = Vec::new();
    let mut u = Vec::new();
    for &xi in v.grid().xh() {
        let vals: Option<Vec<f64>> = (0..ny).map(|j| v.column_value(j, xi)).collect();
        if let Some(vals) = vals {
            x.push(xi);
            u.push(vals.iter().sum::<f64>() / ny as f64);
        }
    }
    Profile { x, u }
}

/// `u_bar(x) = (1/eps) * integral of u(x, y) over one period`.
pub fn y_average(sol: &Solution) -> Profile {
    average_interface(&sol.interface)
}

/// `E(v) = integral sqrt(1 + v_x^2) dx - v(0) cos(theta_a)` for a
/// piecewise-linear profile starting at `x = 0`.
pub fn homogenized_energy(profile: &Profile, cos_theta_a: f64) -> f64 {
    let area: f64 = profile
        .x
        .windows(2)
        .zip(profile.u.windows(2))
        .map(|(x, u)| (x[1] - x[0]).hypot(u[1] - u[0]))
        .sum();
    area - profile.value(0.0) * cos_theta_a
}

/// Planar fit `u0 = k (1 - x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogenizedFit {
    pub k: f64,
    pub theta_a: f64,
    pub window: (f64, f64),
    /// Max deviation of the profile from the line on the window.
    pub residual: f64,
    pub planar: bool,
}

fn angle_of_slope(k: f64) -> f64 {
    (k / (1.0 + k * k).sqrt()).clamp(-1.0, 1.0).acos()
}

/// Least-squares line through `(1, 0)` on the window, trapezoid-weighted.
pub fn fit_linear(profile: &Profile, window: (f64, f64)) -> Result<HomogenizedFit> {
    let (lo, hi) = window;
    if !(lo >= 0.1 && lo < hi && hi < 1.0) {
        return Err(Error::InvalidInput(format!(
            "fit window [{lo}, {hi}] must satisfy 0.1 <= lo < hi < 1"
        )));
    }
    let idx: Vec<usize> = (0..profile.x.len())
        .filter(|&i| profile.x[i] >= lo && profile.x[i] <= hi)
        .collect();
    if idx.len() < 2 {
        return Err(Error::InvalidInput(format!("fewer than two profile rows in [{lo}, {hi}]")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (n, &i) in idx.iter().enumerate() {
        let left = if n > 0 { profile.x[i] - profile.x[idx[n - 1]] } else { 0.0 };
        let right = if n + 1 < idx.len() { profile.x[idx[n + 1]] - profile.x[i] } else { 0.0 };
        let w = 0.5 * (left + right);
        let r = 1.0 - profile.x[i];
        num += w * profile.u[i] * r;
        den += w * r * r;
    }
    let k = num / den;
    let residual = idx
        .iter()
        .map(|&i| (profile.u[i] - k * (1.0 - profile.x[i])).abs())
        .fold(0.0, f64::max);
    if residual > PLANARITY_TOL {
        log::warn!("profile not planar on [{lo}, {hi}]: residual {residual:e}");
    }
    Ok(HomogenizedFit {
        k,
        theta_a: angle_of_slope(k),
        window,
        residual,
        planar: residual <= PLANARITY_TOL,
    })
}

/// Minimizer `u0 = k (1 - x)` of the homogenized energy and its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogenizedMinimizer {
    pub k: f64,
    pub theta_a: f64,
    pub energy: f64,
}

impl HomogenizedMinimizer {
    pub fn value(&self, x: f64) -> f64 {
        self.k * (1.0 - x)
    }

    pub fn sample(&self, x: &[f64]) -> Profile {
        Profile { x: x.to_vec(), u: x.iter().map(|v| self.value(*v)).collect() }
    }
}

pub fn homogenized_minimizer(theta_a: f64) -> Result<HomogenizedMinimizer> {
    if !(theta_a > 0.0 && theta_a < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!("apparent angle {theta_a} rad outside (0, π)")));
    }
    let (s, c) = theta_a.sin_cos();
    Ok(HomogenizedMinimizer { k: c / s, theta_a, energy: s })
}

/// `est1 = max |u_bar - u0|` on rows `x >= eps ||h||`, `est2 = max_j ||u(., y_j) - u0||_L1(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub est1: f64,
    pub est2: f64,
}

fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum()
}

/// Error norms of an interface against `u0 = k (1 - x)`.
pub fn error_norms_for_slope(v: &DiscreteInterface, k: f64, sup_h: f64) -> ErrorNorms {
    let profile = average_interface(v);
    let cut = v.grid().eps() * sup_h;
    let ny = v.grid().ny();
    let at_cut: Option<f64> = (0..ny).map(|j| v.column_value(j, cut)).sum();
    let est1 = profile
        .x
        .iter()
        .zip(&profile.u)
        .filter(|(x, _)| **x >= cut)
        .map(|(x, u)| (*x, *u))
        .chain(at_cut.map(|s| (cut, s / ny as f64)))
        .map(|(x, u)| (u - k * (1.0 - x)).abs())
        .fold(0.0, f64::max);
    let est2 = (0..v.grid().ny())
        .map(|j| {
            let dev: Vec<f64> = profile
                .x
                .iter()
                .map(|&x| (v.column_value(j, x).unwrap_or(0.0) - k * (1.0 - x)).abs())
                .collect();
            trapezoid(&profile.x, &dev)
        })
        .fold(0.0, f64::max);
    ErrorNorms { est1, est2 }
}

/// Error norms of a solution against the line `u0 = fit.k (1 - x)`.
pub fn error_norms(sol: &Solution, fit: &HomogenizedFit) -> ErrorNorms {
    error_norms_for_slope(&sol.interface, fit.k, sol.contact_line.surface().geometry.sup_norm())
}

/// Both sides of the three lemma inequalities at a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaChecks {
    /// `max_j ||u(., y_j) - u_bar||_L1(0,1)`
    pub lemma2_lhs: f64,
    /// `eps E(u) / (1 - nu)`
    pub lemma2_rhs: f64,
    /// `E(u_bar)`
    pub lemma3_lhs: f64,
    /// `E(u) + 2 nu (1 + ||h||) eps / (1 - nu)`
    pub lemma3_rhs: f64,
    /// `E(u) - eps ||h||`
    pub lemma4_lower: f64,
    /// `E(u0)`
    pub lemma4_value: f64,
}

impl LemmaChecks {
    /// Slack of each inequality (non-negative when it holds).
    pub fn slacks(&self) -> [f64; 4] {
        [
            self.lemma2_rhs - self.lemma2_lhs,
            self.lemma3_rhs - self.lemma3_lhs,
            self.lemma4_value - self.lemma4_lower,
            1.0 - self.lemma4_value,
        ]
    }

    pub fn hold(&self, tol: f64) -> bool {
        self.slacks().iter().all(|s| *s >= -tol)
    }
}

pub fn lemma_checks(sol: &Solution) -> LemmaChecks {
    let v = &sol.interface;
    let eps = v.grid().eps();
    let sup_h = sol.contact_line.surface().geometry.sup_norm();
    let nu = sol.nu;
    let total = sol.energy.total;
    let profile = average_interface(v);
    let lemma2_lhs = (0..v.grid().ny())
        .map(|j| {
            let dev: Vec<f64> = profile
                .x
                .iter()
                .zip(&profile.u)
                .map(|(&x, ub)| (v.column_value(j, x).unwrap_or(*ub) - ub).abs())
                .collect();
            trapezoid(&profile.x, &dev)
        })
        .fold(0.0, f64::max);
    LemmaChecks {
        lemma2_lhs,
        lemma2_rhs: eps * total / (1.0 - nu),
        lemma3_lhs: sol.energy.homogenized,
        lemma3_rhs: total + 2.0 * nu * (1.0 + sup_h) * eps / (1.0 - nu),
        lemma4_lower: total - eps * sup_h,
        lemma4_value: sol.energy.homogenized_minimum,
    }
}

/// One ε of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub est1: f64,
    pub est2: f64,
    pub theta_meas: f64,
    pub theta_formula: f64,
    pub converged: bool,
    pub nu: f64,
    pub young_residual: f64,
    pub identity_residual: f64,
    pub lemmas: LemmaChecks,
}

impl ConvergenceRow {
    pub fn c1(&self) -> f64 {
        self.est1 / self.eps
    }

    pub fn c2(&self) -> f64 {
        self.est2 / self.eps
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Ordered by decreasing ε.
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log est1` against `log eps`; `None` when some est1 vanishes.
    pub slope_est1: Option<f64>,
    pub slope_est2: Option<f64>,
    /// Largest `(1 + nu)(1 + ||h||)/(1 - nu)` over the sweep.
    pub c2_proof_bound: f64,
    /// Some solve failed or did not converge.
    pub partial: bool,
}

#[derive(Serialize)]
struct ReportRow {
    eps: f64,
    est1: f64,
    est2: f64,
    c1: f64,
    c2: f64,
    theta_meas_deg: f64,
    cos_theta_meas: f64,
    theta_formula_deg: f64,
    cos_theta_formula: f64,
    nu: f64,
    young_residual: f64,
    identity_residual: f64,
    converged: bool,
}

#[derive(Serialize)]
struct PlotRow {
    log_eps: f64,
    log_est1: f64,
    log_est2: f64,
}

fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(_, e)| !(*e > 1e-12)) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

impl ConvergenceReport {
    /// `max c1 / min c1` over the rows.
    pub fn c1_spread(&self) -> f64 {
        let c: Vec<f64> = self.rows.iter().map(|r| r.c1()).collect();
        let hi = c.iter().cloned().fold(f64::MIN, f64::max);
        let lo = c.iter().cloned().fold(f64::MAX, f64::min);
        hi / lo
    }

    /// One row per ε; angles in degrees and as cosines.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(ReportRow {
                eps: r.eps,
                est1: r.est1,
                est2: r.est2,
                c1: r.c1(),
                c2: r.c2(),
                theta_meas_deg: r.theta_meas.to_degrees(),
                cos_theta_meas: r.theta_meas.cos(),
                theta_formula_deg: r.theta_formula.to_degrees(),
                cos_theta_formula: r.theta_formula.cos(),
                nu: r.nu,
                young_residual: r.young_residual,
                identity_residual: r.identity_residual,
                converged: r.converged,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Log-log pairs for plotting.
    pub fn write_plot_data<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(PlotRow { log_eps: r.eps.ln(), log_est1: r.est1.ln(), log_est2: r.est2.ln() })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Measured and formula angles plus error norms for one solution.
pub fn assess(sol: &Solution, window: (f64, f64)) -> Result<ConvergenceRow> {
    let fit = fit_linear(&y_average(sol), window)?;
    let theta_formula = sol.contact_line.apparent_angle()?;
    let u0 = homogenized_minimizer(theta_formula)?;
    let norms =
        error_norms_for_slope(&sol.interface, u0.k, sol.contact_line.surface().geometry.sup_norm());
    Ok(ConvergenceRow {
        eps: sol.interface.grid().eps(),
        est1: norms.est1,
        est2: norms.est2,
        theta_meas: fit.theta_a,
        theta_formula,
        converged: sol.converged(),
        nu: sol.nu,
        young_residual: sol.young_residual,
        identity_residual: sol.identity_residual,
        lemmas: lemma_checks(sol),
    })
}

/// Solves the free problem at every ε (in parallel) from the same seed height.
pub fn convergence_study(
    family: &(dyn Fn(f64) -> Result<SurfaceSpec> + Sync),
    eps_list: &[f64],
    cfg: &SolverConfig,
    seed_height: f64,
) -> Result<ConvergenceReport> {
    if eps_list.len() < 3 || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput(
            "eps list needs at least three strictly decreasing values".into(),
        ));
    }
    let results: Vec<Result<(ConvergenceRow, f64)>> = eps_list
        .par_iter()
        .map(|&eps| {
            let spec = family(eps)?;
            let sol = solve_free(&spec, seed_height, cfg)?;
            let row = assess(&sol, DEFAULT_WINDOW)?;
            let sup_h = spec.geometry.sup_norm();
            Ok((row, (1.0 + sol.nu) * (1.0 + sup_h) / (1.0 - sol.nu)))
        })
        .collect();
    let mut rows = Vec::new();
    let mut partial = false;
    let mut c2_proof_bound: f64 = 0.0;
    for (eps, r) in eps_list.iter().zip(results) {
        match r {
            Ok((row, bound)) => {
                partial |= !row.converged;
                c2_proof_bound = c2_proof_bound.max(bound);
                rows.push(row);
            }
            Err(e) => {
                log::warn!("eps = {eps}: {e}");
                partial = true;
            }
        }
    }
    let ok: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.converged).collect();
    let slope_est1 = log_slope(&ok.iter().map(|r| (r.eps, r.est1)).collect::<Vec<_>>());
    let slope_est2 = log_slope(&ok.iter().map(|r| (r.eps, r.est2)).collect::<Vec<_>>());
    Ok(ConvergenceReport { rows, slope_est1, slope_est2, c2_proof_bound, partial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::Grid;
    use std::f64::consts::PI;

    fn profile_of(f: impl Fn(f64) -> f64) -> Profile {
        let x: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        Profile { u: x.iter().map(|v| f(*v)).collect(), x }
    }

    #[test]
    fn fit_recovers_known_angles() {
        let f = fit_linear(&profile_of(|_| 0.0), DEFAULT_WINDOW).unwrap();
        assert_eq!(f.k, 0.0);
        assert!((f.theta_a - PI / 2.0).abs() < 1e-15);
        let f = fit_linear(&profile_of(|x| 0.5774 * (1.0 - x)), DEFAULT_WINDOW).unwrap();
        assert!((f.theta_a.to_degrees() - 60.0).abs() < 5e-3);
        let f = fit_linear(&profile_of(|x| -(1.0 - x)), DEFAULT_WINDOW).unwrap();
        assert!((f.theta_a.to_degrees() - 135.0).abs() < 1e-12);
        assert!(f.planar);
        assert!((f.theta_a.cos() - f.k / (1.0 + f.k * f.k).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn non_planar_profile_is_flagged() {
        let f = fit_linear(&profile_of(|x| (1.0 - x) * (1.0 - x)), DEFAULT_WINDOW).unwrap();
        assert!(!f.planar);
        assert!(fit_linear(&profile_of(|x| x), (0.05, 0.9)).is_err());
    }

    #[test]
    fn minimizer_values() {
        let m = homogenized_minimizer(PI / 2.0).unwrap();
        assert!(m.k.abs() < 1e-15 && (m.energy - 1.0).abs() < 1e-15);
        let m = homogenized_minimizer(60f64.to_radians()).unwrap();
        assert!((m.k - 0.577_350_269_2).abs() < 1e-10);
        assert!((m.energy - 0.866_025_403_8).abs() < 1e-10);
        let m = homogenized_minimizer(120f64.to_radians()).unwrap();
        assert!((m.k + 0.577_350_269_2).abs() < 1e-10);
        assert!((m.energy - 0.866_025_403_8).abs() < 1e-10);
        assert!(homogenized_minimizer(0.0).is_err());
    }

    #[test]
    fn minimizer_round_trip_and_energy() {
        for deg in [30.0, 75.0, 90.0, 133.0] {
            let m = homogenized_minimizer(f64::to_radians(deg)).unwrap();
            let p = m.sample(&(0..=64).map(|i| i as f64 / 64.0).collect::<Vec<_>>());
            let f = fit_linear(&p, DEFAULT_WINDOW).unwrap();
            assert!((f.theta_a - m.theta_a).abs() < 1e-10);
            let e = homogenized_energy(&p, m.theta_a.cos());
            assert!((e - m.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn y_average_cancels_zero_mean_perturbation() {
        let eps = 0.125;
        let k = 0.4;
        let g = Grid::new(32, 16, eps).unwrap();
        let v = DiscreteInterface::from_fn(g, vec![0.0; 16], |x, y| {
            k * (1.0 - x) + eps * (2.0 * PI * y / eps).sin() * x * (1.0 - x)
        })
        .unwrap();
        let p = average_interface(&v);
        for (x, u) in p.x.iter().zip(&p.u) {
            assert!((u - k * (1.0 - x)).abs() < 1e-15);
        }
        let n = error_norms_for_slope(&v, k, 0.0);
        assert!(n.est1 < 1e-15);
        assert!(n.est2 > 0.0);
    }

    #[test]
    fn log_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.25, 0.125, 0.0625].iter().map(|e| (*e, 3.0 * e * e)).collect();
        assert!((log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_slope(&[(0.5, 0.0), (0.25, 1.0)]).is_none());
    }
}
