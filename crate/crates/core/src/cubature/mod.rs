//! Cubature rules `NI[g] = Σ_j A_j g(x_j)` that are exact on an orthonormal
//! basis. Points are placed one at a time by Nelder-Mead so that the
//! condition bound `λ = ‖R⁻¹β‖₂` stays small.

mod simplex;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthogonalization::OrthonormalBasis;
use crate::projection::{truncated_eval, Expansion};
use crate::weights::DomainSpec;

pub use simplex::INFEASIBLE;

/// Relative pivot threshold below which `R` is treated as singular.
pub const PIVOT_RATIO: f64 = 1e-13;
/// Largest exactness residual accepted for a built rule.
/// Iterations between restarts of the joint simplex.
const POLISH_CHUNK: u64 = 2000;
/// Relative gain below which the joint polish stops restarting.
const POLISH_STALL: f64 = 1e-3;
pub const EXACTNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubatureRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub basis_ref: String,
    pub exactness_residual: f64,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: CubatureRule = serde_json::from_str(s)?;
        if r.points.len() != r.weights.len() {
            return Err(Error::InvalidArgument(
                "rule has different numbers of points and weights".into(),
            ));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Nelder-Mead runs per placed point.
    pub restarts: usize,
    /// Initial simplex edge as a fraction of the domain diameter.
    pub simplex_scale: f64,
    /// Nelder-Mead iterations per restart.
    pub max_iters: u64,
    /// Joint Nelder-Mead over all point coordinates after placement,
    /// restarted from the best point every few thousand iterations.
    pub joint_polish: bool,
    /// Total iteration budget of the joint polish.
    pub polish_iters: u64,
    pub seed: u64,
    /// Coefficient of the squared distance to the domain for outside points.
    pub penalty: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            simplex_scale: 0.1,
            max_iters: 400,
            joint_polish: true,
            polish_iters: 60_000,
            seed: 0,
            penalty: 1e6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.simplex_scale > 0.0 && self.simplex_scale.is_finite()) {
            return Err(Error::InvalidArgument("simplex_scale must be positive".into()));
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return Err(Error::InvalidArgument("penalty must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Outcome of one sequential placement step, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Objective at the accepted candidate, before projection onto the domain.
    pub accepted: f64,
    /// Objective at each restart's initial simplex centroid.
    pub start_centroids: Vec<f64>,
    pub restart: usize,
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub rule: CubatureRule,
    pub placements: Vec<Placement>,
    /// `λ` before the joint polish (equal to the final value without polish).
    pub lambda_sequential: f64,
}

/// `R[i][j] = Ψ_i(x_j)` for the first `points.len()` basis functions.
pub fn assemble_r(b: &OrthonormalBasis, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = points.len();
    if n > b.len() {
        return Err(Error::InvalidArgument(format!(
            "{n} points but only {} basis functions",
            b.len()
        )));
    }
    let mut r = DMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for (j, x) in points.iter().enumerate() {
        if x.len() != b.dim() {
            return Err(Error::InvalidArgument(format!("point {j} has the wrong dimension")));
        }
        b.eval_into(x, &mut col);
        for i in 0..n {
            r[(i, j)] = col[i];
        }
    }
    Ok(r)
}

/// Solves `R A = β` by LU with partial pivoting. Returns `A` and `‖RA − β‖₂`.
pub fn solve_weights(r: &DMatrix<f64>, beta: &[f64]) -> Result<(Vec<f64>, f64)> {
    if !r.is_square() || r.nrows() != beta.len() {
        return Err(Error::InvalidArgument("R must be square and match β".into()));
    }
    let norm = inf_norm(r);
    let lu = r.clone().lu();
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(pivot >= PIVOT_RATIO * norm) || norm == 0.0 {
        return Err(Error::SingularSystem { pivot, norm });
    }
    let rhs = DVector::from_column_slice(beta);
    let a = lu.solve(&rhs).ok_or(Error::SingularSystem { pivot, norm })?;
    let residual = (r * &a - rhs).norm();
    Ok((a.iter().copied().collect(), residual))
}

fn inf_norm(r: &DMatrix<f64>) -> f64 {
    r.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖R⁻¹β‖₂` for columns of basis values, or `None` when `R` is singular.
fn lambda_of_columns(cols: &[&[f64]], beta0: f64) -> Option<f64> {
    let n = cols.len();
    let r = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let mut beta = vec![0.0; n];
    beta[0] = beta0;
    solve_weights(&r, &beta).ok().map(|(a, _)| norm2(&a))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Objective for placing `candidate` next to `fixed`: `‖R⁻¹β‖₂` on the
/// sub-basis of size `fixed.len() + 1`, evaluated at the projection of
/// `candidate` onto the closed domain, plus `penalty·dist(candidate, Ω)²`.
/// The projected point is the one a build keeps, so the two always agree.
/// Singular configurations return [`INFEASIBLE`].
pub fn objective(fixed: &[Vec<f64>], candidate: &[f64], b: &OrthonormalBasis, penalty: f64) -> f64 {
    let n = fixed.len() + 1;
    if n > b.len() || candidate.len() != b.dim() {
        return INFEASIBLE;
    }
    let cols: Vec<Vec<f64>> = fixed
        .iter()
        .map(|x| {
            let mut c = vec![0.0; n];
            b.eval_into(x, &mut c);
            c
        })
        .collect();
    Placer::new(b, penalty).value(&cols, candidate)
}

struct Placer<'a> {
    b: &'a OrthonormalBasis,
    beta0: f64,
    penalty: f64,
}

impl<'a> Placer<'a> {
    fn new(b: &'a OrthonormalBasis, penalty: f64) -> Self {
        Self {
            b,
            beta0: b.mass().sqrt(),
            penalty,
        }
    }

    /// `cols[j]` holds at least `cols.len() + 1` basis values at fixed point `j`.
    fn value(&self, cols: &[Vec<f64>], x: &[f64]) -> f64 {
        let n = cols.len() + 1;
        let mut cand = vec![0.0; n];
        self.b.eval_into(&self.b.domain().project(x), &mut cand);
        let mut all: Vec<&[f64]> = cols.iter().map(|c| &c[..n]).collect();
        all.push(&cand);
        let lam = match lambda_of_columns(&all, self.beta0) {
            Some(l) if l.is_finite() => l,
            _ => return INFEASIBLE,
        };
        let d2 = self.b.domain().distance_sq(x);
        if d2 > 0.0 {
            lam + self.penalty * d2
        } else {
            lam
        }
    }

    fn joint_value(&self, flat: &[f64]) -> f64 {
        let d = self.b.dim();
        let n = flat.len() / d;
        let mut cols = Vec::with_capacity(n);
        let mut pen = 0.0;
        for x in flat.chunks(d) {
            let mut c = vec![0.0; n];
            self.b.eval_into(&self.b.domain().project(x), &mut c);
            cols.push(c);
            pen += self.b.domain().distance_sq(x);
        }
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        match lambda_of_columns(&refs, self.beta0) {
            Some(l) if l.is_finite() => l + self.penalty * pen,
            _ => INFEASIBLE,
        }
    }
}

/// Uniform sample of the domain by rejection from its bounding box.
pub fn sample_domain(domain: &DomainSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bb = domain.bounding_box();
    loop {
        let x: Vec<f64> = bb.iter().map(|[lo, hi]| rng.gen_range(*lo..=*hi)).collect();
        if domain.contains(&x) {
            return x;
        }
    }
}

fn default_ref(b: &OrthonormalBasis) -> String {
    format!("dim{}-degree{}-size{}", b.dim(), b.degree(), b.len())
}

/// Builds a rule with `b.len()` points.
pub fn build_rule(b: &OrthonormalBasis, cfg: &OptimizerConfig) -> Result<CubatureRule> {
    build_rule_report(b, cfg).map(|r| r.rule)
}

/// As [`build_rule`], also returning per-placement diagnostics.
pub fn build_rule_report(b: &OrthonormalBasis, cfg: &OptimizerConfig) -> Result<BuildReport> {
    cfg.validate()?;
    let m = b.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let domain = b.domain();
    let edge = cfg.simplex_scale * domain.diameter();
    let placer = Placer::new(b, cfg.penalty);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut placements = Vec::with_capacity(m);
    for _ in 0..m {
        let starts: Vec<Vec<f64>> = (0..cfg.restarts).map(|_| sample_domain(domain, &mut rng)).collect();
        let f = |x: &[f64]| placer.value(&cols, x);
        let runs: Vec<(Vec<f64>, f64, f64)> = starts
            .par_iter()
            .map(|s| {
                let simplex = simplex::initial_simplex(s, edge);
                let c = simplex::centroid(&simplex);
                let cv = f(&c);
                let (p, v) = simplex::minimize(&f, simplex, cfg.max_iters);
                if cv < v {
                    (c, cv, cv)
                } else {
                    (p, v, cv)
                }
            })
            .collect();
        let mut best = 0;
        for (i, r) in runs.iter().enumerate() {
            if r.1 < runs[best].1 {
                best = i;
            }
        }
        let (p, v, _) = &runs[best];
        if *v >= INFEASIBLE {
            return Err(Error::RuleConstructionFailed {
                lambda: f64::INFINITY,
                residual: f64::INFINITY,
            });
        }
        placements.push(Placement {
            accepted: *v,
            start_centroids: runs.iter().map(|r| r.2).collect(),
            restart: best,
        });
        let x = domain.project(p);
        let mut c = vec![0.0; m];
        b.eval_into(&x, &mut c);
        points.push(x);
        cols.push(c);
    }

    let (weights, lambda_sequential) = weights_and_lambda(b, &points)?;
    let mut best_points = points;
    let mut best_weights = weights;
    let mut best_lambda = lambda_sequential;
    if cfg.joint_polish && m > 1 {
        let g = |x: &[f64]| placer.joint_value(x);
        let mut left = cfg.polish_iters;
        while left > 0 {
            let iters = left.min(POLISH_CHUNK);
            left -= iters;
            let flat: Vec<f64> = best_points.iter().flatten().copied().collect();
            let simplex = simplex::initial_simplex(&flat, 0.1 * edge);
            let (p, _) = simplex::minimize(&g, simplex, iters);
            let polished: Vec<Vec<f64>> = p.chunks(b.dim()).map(|x| domain.project(x)).collect();
            match weights_and_lambda(b, &polished) {
                Ok((w, lam)) if lam < best_lambda => {
                    let gain = best_lambda - lam;
                    best_points = polished;
                    best_weights = w;
                    best_lambda = lam;
                    if gain < POLISH_STALL * best_lambda {
                        break;
                    }
                }
                _ => break,
            }
        }
    }

    let mut rule = CubatureRule {
        points: best_points,
        weights: best_weights,
        lambda: best_lambda,
        basis_ref: default_ref(b),
        exactness_residual: 0.0,
    };
    rule.exactness_residual = exactness_check(&rule, b)?;
    if !(rule.exactness_residual <= EXACTNESS_TOL) {
        return Err(Error::RuleConstructionFailed {
            lambda: rule.lambda,
            residual: rule.exactness_residual,
        });
    }
    Ok(BuildReport {
        rule,
        placements,
        lambda_sequential,
    })
}

fn weights_and_lambda(b: &OrthonormalBasis, points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let r = assemble_r(b, points)?;
    let (a, _) = solve_weights(&r, &b.beta(points.len()))?;
    let lam = norm2(&a);
    Ok((a, lam))
}

/// Rule on given points with weights solved exactly; no optimization.
pub fn rule_from_points(b: &OrthonormalBasis, points: Vec<Vec<f64>>) -> Result<CubatureRule> {
    let (weights, lambda) = weights_and_lambda(b, &points)?;
    let mut rule = CubatureRule {
        points,
        weights,
        lambda,
        basis_ref: default_ref(b),
        exactness_residual: 0.0,
    };
    rule.exactness_residual = exactness_check(&rule, b)?;
    Ok(rule)
}

/// Rule on `b.len()` uniformly random points of the domain.
pub fn random_rule(b: &OrthonormalBasis, seed: u64) -> Result<CubatureRule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..b.len()).map(|_| sample_domain(b.domain(), &mut rng)).collect();
    rule_from_points(b, points)
}

/// `Σ_j A_j f(x_j)`.
pub fn apply_rule<F>(r: &CubatureRule, f: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    r.points.iter().zip(&r.weights).map(|(x, a)| a * f(x)).sum()
}

/// `max_k |Σ_j A_j Ψ_k(x_j) − β_k|` over the first `r.len()` basis functions.
pub fn exactness_check(r: &CubatureRule, b: &OrthonormalBasis) -> Result<f64> {
    let n = r.len();
    if n > b.len() {
        return Err(Error::InvalidArgument("rule is larger than the basis".into()));
    }
    let mut sums = vec![0.0; n];
    let mut vals = vec![0.0; n];
    for (x, a) in r.points.iter().zip(&r.weights) {
        b.eval_into(x, &mut vals);
        for (s, v) in sums.iter_mut().zip(&vals) {
            *s += a * v;
        }
    }
    let beta = b.beta(n);
    Ok(sums.iter().zip(&beta).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max))
}

/// `λ = ‖A‖₂`.
pub fn condition_bound(r: &CubatureRule) -> f64 {
    norm2(&r.weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub j: usize,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Substitution check `|f(x_j) − (P_M f)(x_j)| ≤ M^{−θ}` at every rule point,
/// with `P_M f` the full expansion `e`.
pub fn verify_theta<F>(r: &CubatureRule, f: F, e: &Expansion, theta: f64) -> Result<Vec<ThetaRow>>
where
    F: Fn(&[f64]) -> f64,
{
    if e.coeffs().len() != r.len() {
        return Err(Error::InvalidArgument(format!(
            "expansion has {} terms but the rule has {} points",
            e.coeffs().len(),
            r.len()
        )));
    }
    let m = (r.len() - 1) as f64;
    let bound = m.powf(-theta);
    let degree = e.basis().degree();
    r.points
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let residual = (f(x) - truncated_eval(e, degree, x)?).abs();
            Ok(ThetaRow {
                j,
                residual,
                bound,
                pass: residual <= bound,
            })
        })
        .collect()
}
