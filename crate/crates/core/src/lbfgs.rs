//! Limited-memory BFGS with Armijo backtracking and an optional
//! preconditioner used as the initial inverse-Hessian.

use std::collections::VecDeque;

/// Applies an approximation of the inverse Hessian.
pub trait Preconditioner {
    fn apply(&self, g: &[f64]) -> Vec<f64>;
}

pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// `f(x + t d) - f(x)`; override when a cancellation-free form exists.
    fn change(&self, x: &[f64], d: &[f64], t: f64) -> f64 {
        let moved: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        self.value(&moved) - self.value(x)
    }

    /// Inverse-Hessian approximation at `x`, if available.
    fn preconditioner(&self, _x: &[f64]) -> Option<Box<dyn Preconditioner>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking factor.
    pub shrink: f64,
    pub max_iterations: usize,
    /// Stop when `max |g| <= gradient_tol` ...
    pub gradient_tol: f64,
    /// ... and the preconditioned step `max |P g| <= step_tol`.
    pub step_tol: f64,
    /// Rebuild the preconditioner every this many accepted steps.
    pub precondition_every: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            armijo: 1e-4,
            shrink: 0.5,
            max_iterations: 500,
            gradient_tol: 1e-9,
            step_tol: 1e-10,
            precondition_every: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Memory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    cap: usize,
}

impl Memory {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if !(sy > 0.0) || !sy.is_finite() {
            return;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    fn direction(&self, g: &[f64], pre: Option<&dyn Preconditioner>) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alpha = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alpha.push(a);
        }
        let mut r = match pre {
            Some(p) => p.apply(&q),
            None => {
                let gamma = self
                    .pairs
                    .back()
                    .map(|(s, y, _)| dot(s, y) / dot(y, y))
                    .filter(|g| g.is_finite() && *g > 0.0)
                    .unwrap_or(1.0);
                q.iter().map(|v| gamma * v).collect()
            }
        };
        for ((s, y, rho), a) in self.pairs.iter().zip(alpha.iter().rev()) {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += (a - b) * si;
            }
        }
        r.iter().map(|v| -v).collect()
    }
}

/// Minimizes `f` from `x0`. The objective never increases along the trace.
pub fn minimize(f: &dyn Objective, x0: Vec<f64>, cfg: &LbfgsConfig) -> LbfgsOutcome {
    let mut x = x0;
    let mut g = f.gradient(&x);
    let mut value = f.value(&x);
    let mut trace = vec![value];
    let mut memory = Memory { pairs: VecDeque::new(), cap: cfg.memory.max(1) };
    let mut pre: Option<Box<dyn Preconditioner>> = None;
    let mut age = usize::MAX;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    while iterations < cfg.max_iterations {
        let gnorm = max_abs(&g);
        let small = gnorm <= cfg.gradient_tol;
        if age >= cfg.precondition_every.max(1) || (small && age > 0) {
            pre = f.preconditioner(&x);
            age = 0;
        }
        let mut d = if small {
            let d: Vec<f64> = match &pre {
                Some(p) => p.apply(&g).iter().map(|v| -v).collect(),
                None => g.iter().map(|v| -v).collect(),
            };
            if max_abs(&d) <= cfg.step_tol {
                termination = Termination::Converged;
                break;
            }
            d
        } else {
            memory.direction(&g, pre.as_deref())
        };
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            memory.pairs.clear();
            d = match &pre {
                Some(p) => p.apply(&g).iter().map(|v| -v).collect(),
                None => g.iter().map(|v| -v).collect(),
            };
            slope = dot(&g, &d);
            if !(slope < 0.0) {
                termination = if small { Termination::Converged } else { Termination::LineSearchFailed };
                break;
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            let delta = f.change(&x, &d, t);
            if delta.is_finite() && delta <= cfg.armijo * t * slope {
                accepted = Some(delta);
                break;
            }
            t *= cfg.shrink;
        }
        let Some(delta) = accepted else {
            if !memory.pairs.is_empty() {
                memory.pairs.clear();
                age = usize::MAX;
                continue;
            }
            termination = if small { Termination::Converged } else { Termination::LineSearchFailed };
            break;
        };
        let s: Vec<f64> = d.iter().map(|v| t * v).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let g_new = f.gradient(&x);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        memory.push(s, y);
        g = g_new;
        value += delta;
        trace.push(value);
        iterations += 1;
        age = age.saturating_add(1);
    }
    let gradient_norm = max_abs(&g);
    LbfgsOutcome { x, value, gradient_norm, iterations, termination, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> f64 {
            (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![
                -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                200.0 * (x[1] - x[0] * x[0]),
            ]
        }
    }

    /// Ill-conditioned quadratic with an exact inverse as preconditioner.
    struct Quadratic {
        diag: Vec<f64>,
    }

    struct DiagInverse(Vec<f64>);

    impl Preconditioner for DiagInverse {
        fn apply(&self, g: &[f64]) -> Vec<f64> {
            g.iter().zip(&self.0).map(|(a, b)| a / b).collect()
        }
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.diag.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().zip(&self.diag).map(|(v, d)| 0.5 * d * (v - 1.0) * (v - 1.0)).sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter().zip(&self.diag).map(|(v, d)| d * (v - 1.0)).collect()
        }
        fn preconditioner(&self, _x: &[f64]) -> Option<Box<dyn Preconditioner>> {
            Some(Box::new(DiagInverse(self.diag.clone())))
        }
    }

    #[test]
    fn rosenbrock_converges_monotonically() {
        let cfg = LbfgsConfig { max_iterations: 2000, gradient_tol: 1e-10, ..Default::default() };
        let out = minimize(&Rosenbrock, vec![-1.2, 1.0], &cfg);
        assert_eq!(out.termination, Termination::Converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exact_preconditioner_takes_one_step() {
        let q = Quadratic { diag: (0..50).map(|i| 10f64.powi(i % 7)).collect() };
        let out = minimize(&q, vec![0.0; 50], &LbfgsConfig::default());
        assert_eq!(out.termination, Termination::Converged);
        assert_eq!(out.iterations, 1);
        assert!(out.x.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn reports_iteration_limit() {
        let cfg = LbfgsConfig { max_iterations: 3, ..Default::default() };
        let out = minimize(&Rosenbrock, vec![-1.2, 1.0], &cfg);
        assert_eq!(out.termination, Termination::MaxIterations);
        assert_eq!(out.iterations, 3);
        assert!(out.gradient_norm > 0.0);
    }
}
