//! Stochastic collocation for `u(z₁, z₂) = cos(z₁ − z₂) + sin(1.1(z₁ + z₂)) + 4`
//! under the dependent density `(2/9)(χ_Q + 1)`: expansion coefficients from
//! the oracle against those from a cubature rule.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::builtins;
use super::{fmt_num, write_outputs, Table};
use crate::cubature::{build_rule, OptimizerConfig};
use crate::error::{Error, Result};
use crate::orthogonalization::{gram_schmidt_with, GsOptions};
use crate::polycore::basis_size;
use crate::projection::project;
use crate::refquad::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcConfig {
    pub n_max: usize,
    pub optimizer: OptimizerConfig,
    pub tol: f64,
}

impl Default for GpcConfig {
    fn default() -> Self {
        Self {
            n_max: 8,
            optimizer: OptimizerConfig::default(),
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcRow {
    pub n: usize,
    /// `C(2N + 2, 2)`, the number of basis polynomials of degree ≤ 2N.
    pub points: usize,
    /// `H(N) = Σ_{|k| ≤ N} (ũ_k − û_k)²`.
    pub h: f64,
    pub lambda: f64,
    pub exactness_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpcResult {
    pub rows: Vec<GpcRow>,
    /// `û_k` for `|k| ≤ n_max`, from the oracle.
    pub symbolic: Vec<f64>,
    /// `ũ_k` for `|k| ≤ N`, one vector per `N`.
    pub numerical: Vec<Vec<f64>>,
}

impl GpcResult {
    pub fn h_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut h = Table::new(&["N", "points", "H", "log10_H", "lambda", "exactness_residual"]);
        for r in &self.rows {
            h.push(vec![
                r.n.to_string(),
                r.points.to_string(),
                fmt_num(r.h),
                fmt_num(r.h.log10()),
                fmt_num(r.lambda),
                fmt_num(r.exactness_residual),
            ]);
        }
        let mut coeffs = Table::new(&["N", "k", "numerical", "symbolic"]);
        for (row, num) in self.rows.iter().zip(&self.numerical) {
            for (k, v) in num.iter().enumerate() {
                coeffs.push(vec![
                    row.n.to_string(),
                    k.to_string(),
                    fmt_num(*v),
                    fmt_num(self.symbolic[k]),
                ]);
            }
        }
        write_outputs(dir, &[("H", &h), ("gpc_coeffs", &coeffs)], "gpc.json", self)
    }
}

pub fn run_gpc(cfg: &GpcConfig) -> Result<GpcResult> {
    if cfg.n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let wd = builtins::weighted_domain("step2d")?;
    let u = builtins::function("gpc2d")?;
    let top = 2 * cfg.n_max;
    let opts = GsOptions {
        cap: basis_size(2, top)?,
        tol: cfg.tol,
        ..GsOptions::default()
    };
    let full = Arc::new(gram_schmidt_with(&wd.weight, &wd.domain, top, &opts)?);
    let coarse = Arc::new(full.truncate(cfg.n_max)?);
    let symbolic = project(&u.f, &coarse, cfg.tol)?.coeffs().to_vec();

    let mut rows = Vec::new();
    let mut numerical = Vec::new();
    for n in 1..=cfg.n_max {
        let b = full.truncate(2 * n)?;
        let mut rule = build_rule(&b, &cfg.optimizer)?;
        rule.basis_ref = format!("step2d/degree{}", 2 * n);
        let m = b.order().prefix_len(n);
        let mut acc = vec![0.0; m];
        let mut vals = vec![0.0; m];
        for (x, a) in rule.points.iter().zip(&rule.weights) {
            b.eval_into(x, &mut vals);
            let ux = (u.f)(x);
            for (s, v) in acc.iter_mut().zip(&vals) {
                *s += a * ux * v;
            }
        }
        let h = acc.iter().zip(&symbolic).map(|(t, s)| (t - s).powi(2)).sum();
        rows.push(GpcRow {
            n,
            points: b.len(),
            h,
            lambda: rule.lambda,
            exactness_residual: rule.exactness_residual,
        });
        numerical.push(acc);
    }
    Ok(GpcResult {
        rows,
        symbolic,
        numerical,
    })
}
