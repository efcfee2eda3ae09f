//! Integration error of optimized cubature rules against the oracle, with a
//! random-point baseline for the condition bound.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::builtins;
use super::{fmt_num, write_outputs, Table};
use crate::cubature::{apply_rule, build_rule, random_rule, CubatureRule, OptimizerConfig};
use crate::error::{Error, Result};
use crate::orthogonalization::gram_schmidt;
use crate::projection::linear_fit;
use crate::refquad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub optimizer: OptimizerConfig,
    pub tol: f64,
    /// Seeds of the random-point baseline.
    pub random_seeds: u64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            tol: 1e-13,
            random_seeds: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationRow {
    pub degree: usize,
    pub points: usize,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub lambda: Option<f64>,
    pub exactness_residual: Option<f64>,
    /// Median `λ` over the random-point rules of the same size.
    pub random_lambda: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub example: usize,
    pub weight: String,
    pub function: String,
    pub exact: f64,
    pub rows: Vec<IntegrationRow>,
    pub rules: Vec<CubatureRule>,
}

impl IntegrationResult {
    /// Least-squares slope of `log10(error)` against the point count over
    /// rules with at least `min_points` points.
    pub fn error_slope(&self, min_points: usize) -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter(|r| r.points >= min_points)
            .filter_map(|r| r.error.map(|e| (r.points as f64, e.max(1e-300).log10())))
            .unzip();
        linear_fit(&xs, &ys).map(|(s, _)| s)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let mut errors = Table::new(&[
            "degree",
            "points",
            "value",
            "error",
            "log10_error",
            "lambda",
            "random_lambda",
            "exactness_residual",
            "failure",
        ]);
        for r in &self.rows {
            errors.push(vec![
                r.degree.to_string(),
                r.points.to_string(),
                opt(r.value),
                opt(r.error),
                opt(r.error.map(|e| e.log10())),
                opt(r.lambda),
                opt(r.random_lambda),
                opt(r.exactness_residual),
                r.failure.clone().unwrap_or_default(),
            ]);
        }
        let dim = self.rules.first().map(|r| r.points[0].len()).unwrap_or(1);
        let mut head = vec!["points", "j", "weight"];
        let coords = ["x", "y", "z"];
        head.extend(&coords[..dim]);
        let mut pts = Table::new(&head);
        for r in &self.rules {
            for (j, (x, a)) in r.points.iter().zip(&r.weights).enumerate() {
                let mut row = vec![r.len().to_string(), j.to_string(), fmt_num(*a)];
                row.extend(x.iter().map(|v| fmt_num(*v)));
                pts.push(row);
            }
        }
        let e = self.example;
        write_outputs(
            dir,
            &[
                (&format!("integrate{e}_errors"), &errors),
                (&format!("integrate{e}_points"), &pts),
            ],
            &format!("integrate{e}.json"),
            self,
        )
    }
}

/// Weight name, function name and largest rule degree of an example.
pub fn example_setup(example: usize) -> Result<(&'static str, &'static str, usize)> {
    match example {
        1 => Ok(("step1d", "exp1d", 11)),
        2 => Ok(("step2d", "trig2d", 6)),
        3 => Ok(("triangle2d", "trig2d", 6)),
        other => Err(Error::InvalidArgument(format!(
            "integration example must be 1, 2 or 3, got {other}"
        ))),
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Builds rules exact through degrees `1..=max_degree` and compares them
/// with the oracle integral. A failed rule is recorded and the run goes on.
pub fn run_integration_example(example: usize, cfg: &IntegrationConfig) -> Result<IntegrationResult> {
    let (wname, fname, max_degree) = example_setup(example)?;
    let wd = builtins::weighted_domain(wname)?;
    let func = builtins::function(fname)?;
    let exact = refquad::integrate(&func.f, &wd.weight, &wd.domain, cfg.tol)?.value;
    let full = gram_schmidt(&wd.weight, &wd.domain, max_degree, refquad::DEFAULT_TOL)?;
    let mut rows = Vec::new();
    let mut rules = Vec::new();
    for degree in 1..=max_degree {
        let b = full.truncate(degree)?;
        let lambdas: Vec<f64> = (0..cfg.random_seeds)
            .filter_map(|s| random_rule(&b, s).ok())
            .map(|r| r.lambda)
            .collect();
        let random_lambda = median(lambdas);
        let mut row = IntegrationRow {
            degree,
            points: b.len(),
            value: None,
            error: None,
            lambda: None,
            exactness_residual: None,
            random_lambda,
            failure: None,
        };
        match build_rule(&b, &cfg.optimizer) {
            Ok(mut rule) => {
                rule.basis_ref = format!("{wname}/degree{degree}");
                let v = apply_rule(&rule, func.f);
                row.value = Some(v);
                row.error = Some((v - exact).abs());
                row.lambda = Some(rule.lambda);
                row.exactness_residual = Some(rule.exactness_residual);
                rules.push(rule);
            }
            Err(e) if e.is_numerical() => row.failure = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    Ok(IntegrationResult {
        example,
        weight: wname.to_string(),
        function: fname.to_string(),
        exact,
        rows,
        rules,
    })
}
