//! Pinned energy minimization and the free-boundary iteration.
//!
//! `solve_pinned` freezes the contact line data (wall position, Young's and
//! geometric angle) and minimizes the convex discrete energy.
//! `solve_free` alternates between lifting the line heights onto the wall
//! and the pinned solve until the line heights reproduce themselves. The
//! mean line height is updated by a safeguarded secant search because
//! the plain fixed-point map is expanding in that direction on corrugated
//! walls; the shape of the line is updated with damping.

use std::io::Write;

use crate::banded::BandCholesky;
use crate::contactline::{ContactLine, LineElement};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::homogenize::{average_interface, homogenized_energy};
use crate::interface::{DiscreteInterface, Grid};
use crate::lbfgs::{minimize, LbfgsConfig, Objective, Preconditioner, Termination};
use crate::surface::SurfaceSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Node rows across the strip, including the pinned edge.
    pub nodes_x: usize,
    /// Nodes per period along the wall.
    pub nodes_y: usize,
    pub gradient_tol: f64,
    pub step_tol: f64,
    pub max_iterations: usize,
    pub memory: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub precondition_every: usize,
    /// Damping of the line-shape update, in `(0, 1]`.
    pub damping: f64,
    /// Stop when `max_j |u(phi_j, y_j) - psi_j| <` this.
    pub fixed_point_tol: f64,
    pub max_outer: usize,
    /// Half-height `M` of the strip `|z| < M`.
    pub strip_half_height: f64,
    pub line_element: LineElement,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nodes_x: 129,
            nodes_y: 64,
            gradient_tol: 1e-9,
            step_tol: 1e-10,
            max_iterations: 500,
            memory: 10,
            armijo: 1e-4,
            shrink: 0.5,
            precondition_every: 3,
            damping: 0.7,
            fixed_point_tol: 1e-8,
            max_outer: 200,
            strip_half_height: 4.0,
            line_element: LineElement::Projected,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("solver: {what}")));
        if self.nodes_x < 3 || self.nodes_y < 8 {
            return bad("grid needs nodes_x >= 3 and nodes_y >= 8");
        }
        for (name, v) in [
            ("gradient_tol", self.gradient_tol),
            ("step_tol", self.step_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("strip_half_height", self.strip_half_height),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0 && self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("line search constants must lie in (0, 1)");
        }
        if self.max_iterations == 0 || self.max_outer == 0 || self.memory == 0 {
            return bad("iteration limits and memory must be positive");
        }
        Ok(())
    }

    pub fn grid(&self, eps: f64) -> Result<Grid> {
        Grid::new(self.nodes_x - 1, self.nodes_y, eps)
    }

    fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig {
            memory: self.memory,
            armijo: self.armijo,
            shrink: self.shrink,
            max_iterations: self.max_iterations,
            gradient_tol: self.gradient_tol,
            step_tol: self.step_tol,
            precondition_every: self.precondition_every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    Converged,
    /// The pinned minimization hit its iteration limit.
    MaxIterations,
    LineSearchFailed,
    /// The free-boundary loop hit its outer limit.
    FixedPointNotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub bulk: f64,
    /// Carries its minus sign.
    pub line: f64,
    pub total: f64,
    /// `E(u_bar)` with the apparent angle of the frozen line.
    pub homogenized: f64,
    /// `E(u0) = 1 / sqrt(1 + k^2)`.
    pub homogenized_minimum: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub interface: DiscreteInterface,
    pub contact_line: ContactLine,
    pub energy: EnergyReport,
    /// `max_j |n_Gamma . n_S - cos theta_s|`.
    pub young_residual: f64,
    /// `max_j |n_Gamma . m_L - cos(theta_s - theta_g)|`.
    pub identity_residual: f64,
    pub status: SolveStatus,
    pub gradient_norm: f64,
    /// Minimizer steps summed over all pinned solves.
    pub iterations: usize,
    pub outer_iterations: usize,
    /// `max_j |u(phi_j, y_j) - psi_j|` per outer iteration.
    pub fixed_point_history: Vec<f64>,
    /// Energy after every accepted step of the last pinned solve.
    pub energy_trace: Vec<f64>,
    /// `max_j |c_j|` of the frozen line.
    pub nu: f64,
    pub seed_height: f64,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Writes the interface CSV and the contact-line CSV.
    pub fn write_csv<W1: Write, W2: Write>(&self, interface: W1, line: W2) -> Result<()> {
        self.interface.write_csv(interface)?;
        self.contact_line.write_csv(line)
    }
}

struct BandInverse(BandCholesky);

impl Preconditioner for BandInverse {
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        self.0.solve(g)
    }
}

struct PinnedObjective<'a> {
    model: &'a EnergyModel,
    pinned: usize,
}

impl PinnedObjective<'_> {
    fn full(&self, x: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(x.len() + self.pinned);
        u.extend_from_slice(x);
        u.resize(x.len() + self.pinned, 0.0);
        u
    }
}

impl Objective for PinnedObjective<'_> {
    fn dim(&self) -> usize {
        self.model.grid().n_free()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.model.energy(&self.full(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.model.gradient(&self.full(x))
    }

    fn change(&self, x: &[f64], d: &[f64], t: f64) -> f64 {
        self.model.change(&self.full(x), d, t)
    }

    fn preconditioner(&self, x: &[f64]) -> Option<Box<dyn Preconditioner>> {
        match self.model.hessian(&self.full(x)).cholesky() {
            Ok(f) => Some(Box::new(BandInverse(f))),
            Err(e) => {
                log::warn!("Hessian preconditioner unavailable: {e}");
                None
            }
        }
    }
}

/// Unit normal of the interface graph `z = u(x, y)` at boundary node `j`.
fn interface_normal(v: &DiscreteInterface, line: &ContactLine, j: usize) -> [f64; 3] {
    let [ux, uy] = v.boundary_gradient(j, line.dphi()[j]);
    let n = (1.0 + ux * ux + uy * uy).sqrt();
    [-ux / n, -uy / n, 1.0 / n]
}

fn residuals(v: &DiscreteInterface, line: &ContactLine) -> (f64, f64) {
    let mut young: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for j in 0..line.len() {
        let n = interface_normal(v, line, j);
        let f = line.line_frame(j);
        let ns = f.solid_normal;
        let m = f.inner_normal;
        let ts = line.young_angles()[j];
        let tg = line.geometric_angles()[j];
        young = young.max((n[0] * ns.x + n[1] * ns.y + n[2] * ns.z - ts.cos()).abs());
        identity = identity.max((n[0] * m.x + n[1] * m.y + n[2] * m.z - (ts - tg).cos()).abs());
    }
    (young, identity)
}

/// `max_j |n_Gamma . n_S - cos theta_s|` along the solution's contact line.
pub fn young_residual(sol: &Solution) -> f64 {
    residuals(&sol.interface, &sol.contact_line).0
}

/// `max_j |n_Gamma . m_L - cos(theta_s - theta_g)|` along the solution's contact line.
pub fn identity_residual(sol: &Solution) -> f64 {
    residuals(&sol.interface, &sol.contact_line).1
}

fn energy_report(model: &EnergyModel, v: &DiscreteInterface, frozen: &ContactLine) -> EnergyReport {
    let terms = model.terms(v.values());
    let cos_a = frozen.apparent_cosine().clamp(-1.0, 1.0);
    EnergyReport {
        bulk: terms.bulk,
        line: terms.line,
        total: terms.total(),
        homogenized: homogenized_energy(&average_interface(v), cos_a),
        homogenized_minimum: (1.0 - cos_a * cos_a).sqrt(),
    }
}

struct Pinned {
    model: EnergyModel,
    interface: DiscreteInterface,
    termination: Termination,
    gradient_norm: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn pinned(cl: &ContactLine, cfg: &SolverConfig, seed: &DiscreteInterface) -> Result<Pinned> {
    let grid = seed.grid().clone();
    let model = EnergyModel::from_line(grid.clone(), cl)?;
    let objective = PinnedObjective { model: &model, pinned: grid.ny() };
    let out = minimize(&objective, seed.free_values().to_vec(), &cfg.lbfgs());
    let mut interface = DiscreteInterface::new(grid, cl.phi().to_vec(), seed.values().to_vec())?;
    interface.set_free_values(&out.x);
    let height = interface.max_abs();
    if !(height < cfg.strip_half_height) {
        return Err(Error::StripExhausted { height, limit: cfg.strip_half_height });
    }
    Ok(Pinned {
        model,
        interface,
        termination: out.termination,
        gradient_norm: out.gradient_norm,
        iterations: out.iterations,
        trace: out.trace,
    })
}

fn status_of(t: Termination) -> SolveStatus {
    match t {
        Termination::Converged => SolveStatus::Converged,
        Termination::MaxIterations => SolveStatus::MaxIterations,
        Termination::LineSearchFailed => SolveStatus::LineSearchFailed,
    }
}

/// Minimizes the discrete energy with the line data of `cl` frozen.
pub fn solve_pinned(cl: &ContactLine, cfg: &SolverConfig, seed: &DiscreteInterface) -> Result<Solution> {
    cfg.validate()?;
    if seed.grid().ny() != cl.len() {
        return Err(Error::GridMismatch(format!(
            "seed has {} columns, contact line {} samples",
            seed.grid().ny(),
            cl.len()
        )));
    }
    let p = pinned(cl, cfg, seed)?;
    let (young, identity) = residuals(&p.interface, cl);
    Ok(Solution {
        energy: energy_report(&p.model, &p.interface, cl),
        young_residual: young,
        identity_residual: identity,
        status: status_of(p.termination),
        gradient_norm: p.gradient_norm,
        iterations: p.iterations,
        outer_iterations: 1,
        fixed_point_history: Vec::new(),
        energy_trace: p.trace,
        nu: p.model.nu(),
        seed_height: cl.psi().iter().sum::<f64>() / cl.len() as f64,
        interface: p.interface,
        contact_line: cl.clone(),
    })
}

/// Safeguarded scalar root search for the mean line height.
struct MeanSearch {
    last: Option<(f64, f64)>,
    prev: Option<(f64, f64)>,
    neg: Option<(f64, f64)>,
    pos: Option<(f64, f64)>,
    prev_step: f64,
    damping: f64,
    max_step: f64,
}

impl MeanSearch {
    fn new(damping: f64, max_step: f64) -> Self {
        Self {
            last: None,
            prev: None,
            neg: None,
            pos: None,
            prev_step: f64::INFINITY,
            damping,
            max_step,
        }
    }

    /// Records `F(s)` and proposes the next mean height.
    fn next(&mut self, s: f64, f: f64) -> f64 {
        self.prev = self.last;
        self.last = Some((s, f));
        if f < 0.0 {
            self.neg = Some((s, f));
        } else if f > 0.0 {
            self.pos = Some((s, f));
        }
        let clamp = |d: f64| d.clamp(-self.max_step, self.max_step);
        let secant = self.prev.and_then(|(s0, f0)| {
            let slope = (f - f0) / (s - s0);
            (slope.is_finite() && slope != 0.0).then(|| s - f / slope)
        });
        let next = match (self.neg, self.pos) {
            (Some((a, _)), Some((b, _))) => {
                let (lo, hi) = (a.min(b), a.max(b));
                match secant {
                    Some(c) if c > lo && c < hi && (c - s).abs() < 0.5 * self.prev_step => c,
                    _ => 0.5 * (lo + hi),
                }
            }
            _ => match secant {
                Some(c) => s + clamp(c - s),
                None => s + clamp(self.damping * f),
            },
        };
        self.prev_step = (next - s).abs();
        next
    }
}

fn same_line_data(a: &ContactLine, b: &ContactLine) -> bool {
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-14);
    close(a.phi(), b.phi()) && close(&a.line_coefficients(), &b.line_coefficients())
}

/// Solves the free-boundary problem starting from a level line at `seed_height`.
///
/// Different seeds may converge to different solutions.
pub fn solve_free(spec: &SurfaceSpec, seed_height: f64, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let m = cfg.strip_half_height;
    if !(seed_height.abs() < m) {
        return Err(Error::InvalidInput(format!("seed height {seed_height} outside (-{m}, {m})")));
    }
    let grid = cfg.grid(spec.eps())?;
    let ny = grid.ny();
    let lift = |psi: Vec<f64>| -> Result<ContactLine> {
        Ok(ContactLine::from_samples(spec, psi)?.with_element(cfg.line_element))
    };
    let mut psi = vec![seed_height; ny];
    let mut line = lift(psi.clone())?;
    let mut interface = DiscreteInterface::ramp(grid, line.phi().to_vec(), &psi)?;
    let mut search = MeanSearch::new(cfg.damping, spec.eps() / 8.0);
    let mut history = Vec::new();
    let mut iterations = 0;
    for outer in 1..=cfg.max_outer {
        let nu = line.partial_wetting_margin();
        if !(nu < 1.0) {
            return Err(Error::OutsidePartialWetting { nu });
        }
        let p = pinned(&line, cfg, &interface)?;
        iterations += p.iterations;
        let boundary = p.interface.boundary_values();
        if let Some(h) = boundary.iter().find(|v| !(v.abs() < m)) {
            return Err(Error::StripExhausted { height: h.abs(), limit: m });
        }
        let residual: Vec<f64> = boundary.iter().zip(&psi).map(|(a, b)| a - b).collect();
        let change = residual.iter().fold(0.0, |acc: f64, r| acc.max(r.abs()));
        history.push(change);
        let relifted = lift(boundary.clone())?;
        let pinned_ok = p.termination == Termination::Converged;
        let done = pinned_ok && (change < cfg.fixed_point_tol || same_line_data(&line, &relifted));
        if done || !pinned_ok || outer == cfg.max_outer {
            let status = if done {
                SolveStatus::Converged
            } else if !pinned_ok {
                status_of(p.termination)
            } else {
                SolveStatus::FixedPointNotConverged
            };
            let energy = energy_report(&p.model, &p.interface, &line);
            let final_line = if done { relifted } else { line };
            let (young, identity) = residuals(&p.interface, &final_line);
            return Ok(Solution {
                interface: p.interface,
                contact_line: final_line,
                energy,
                young_residual: young,
                identity_residual: identity,
                status,
                gradient_norm: p.gradient_norm,
                iterations,
                outer_iterations: outer,
                fixed_point_history: history,
                energy_trace: p.trace,
                nu: p.model.nu(),
                seed_height,
            });
        }
        let mean_psi = psi.iter().sum::<f64>() / ny as f64;
        let mean_res = residual.iter().sum::<f64>() / ny as f64;
        let next_mean = search.next(mean_psi, mean_res);
        psi = psi
            .iter()
            .zip(&residual)
            .map(|(p, r)| next_mean + (p - mean_psi) + cfg.damping * (r - mean_res))
            .collect();
        if let Some(h) = psi.iter().find(|v| !(v.abs() < m)) {
            return Err(Error::StripExhausted { height: h.abs(), limit: m });
        }
        line = lift(psi.clone())?;
        // Warm start: keep the nodal values, move the wall row to the new line.
        let mut u = p.interface.values().to_vec();
        let shift: Vec<f64> = (0..ny).map(|j| psi[j] - boundary[j]).collect();
        for i in 0..=interface.grid().nx() {
            let w = 1.0 - interface.grid().xh()[i];
            for j in 0..ny {
                u[interface.grid().index(i, j)] += w * shift[j];
            }
        }
        interface = DiscreteInterface::new(p.interface.grid().clone(), line.phi().to_vec(), u)?;
    }
    unreachable!("the loop returns on its last iteration")
}
