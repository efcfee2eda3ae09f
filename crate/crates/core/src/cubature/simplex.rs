//! Thin wrapper around argmin's Nelder-Mead solver.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

/// Surrogate value for configurations whose linear system is singular.
pub const INFEASIBLE: f64 = 1e300;

struct Problem<'a> {
    f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        let v = (self.f)(p);
        Ok(if v.is_finite() { v.min(INFEASIBLE) } else { INFEASIBLE })
    }
}

/// Axis-aligned initial simplex: `x0` plus `x0 + edge·e_i`.
pub fn initial_simplex(x0: &[f64], edge: f64) -> Vec<Vec<f64>> {
    let mut s = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += edge;
        s.push(v);
    }
    s
}

pub fn centroid(simplex: &[Vec<f64>]) -> Vec<f64> {
    let n = simplex.len() as f64;
    let mut c = vec![0.0; simplex[0].len()];
    for v in simplex {
        for (ci, vi) in c.iter_mut().zip(v) {
            *ci += vi / n;
        }
    }
    c
}

/// Runs Nelder-Mead with the standard coefficients and returns the best
/// vertex with its cost.
pub fn minimize(f: &(dyn Fn(&[f64]) -> f64 + Sync), simplex: Vec<Vec<f64>>, max_iters: u64) -> (Vec<f64>, f64) {
    let fallback = simplex[0].clone();
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .and_then(|s| s.with_alpha(1.0))
        .and_then(|s| s.with_gamma(2.0))
        .and_then(|s| s.with_rho(0.5))
        .and_then(|s| s.with_sigma(0.5))
        .expect("standard Nelder-Mead coefficients are valid");
    let run = Executor::new(Problem { f }, solver)
        .configure(|s| s.max_iters(max_iters))
        .ctrlc(false)
        .run();
    match run {
        Ok(res) => {
            let st = res.state();
            match st.get_best_param() {
                Some(p) => (p.clone(), st.get_best_cost()),
                None => {
                    let c = f(&fallback);
                    (fallback, c)
                }
            }
        }
        Err(_) => {
            let c = f(&fallback);
            (fallback, c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.1).powi(2);
        let (p, c) = minimize(&f, initial_simplex(&[0.0, 0.0], 0.2), 400);
        assert!(c < 1e-12);
        assert!((p[0] - 0.3).abs() < 1e-6 && (p[1] + 0.1).abs() < 1e-6);
    }

    #[test]
    fn constant_objective_stays_at_start() {
        let f = |_: &[f64]| 1.0;
        let (p, c) = minimize(&f, initial_simplex(&[0.25], 0.1), 400);
        assert_eq!(c, 1.0);
        assert_eq!(p, vec![0.25]);
    }
}
