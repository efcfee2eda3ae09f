//! Coefficient decay under a classical and a nonstandard weight, plus the
//! tail-norm comparison table between the two.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::builtins::{self, TestFunction};
use super::{fmt_num, index_string, write_outputs, Table};
use crate::error::{Error, Result};
use crate::orthogonalization::{gram_schmidt_with, GsOptions, OrthonormalBasis};
use crate::projection::{
    auto_constant, comparison_check, decay_report_coeffs, noise_floor, project_with, ComparisonRow, DecayReport,
};
use crate::refquad::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub tol: f64,
    pub degree_1d: usize,
    pub degree_2d: usize,
    pub cap_2d: usize,
    /// Envelope points used by the 1D fits.
    pub n_fit_1d: usize,
    /// Degree-block peaks used by the 2D fits.
    pub n_fit_2d: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            degree_1d: 40,
            degree_2d: 22,
            cap_2d: 300,
            n_fit_1d: 20,
            n_fit_2d: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCase {
    pub function: String,
    pub weight: String,
    pub multi_indices: Vec<Vec<u32>>,
    pub coeffs: Vec<f64>,
    pub report: DecayReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCase {
    pub function: String,
    pub weight1: String,
    pub weight2: String,
    pub constant: f64,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySuite {
    pub example: usize,
    pub cases: Vec<DecayCase>,
    pub lemma: Vec<LemmaCase>,
}

impl DecaySuite {
    pub fn case(&self, function: &str, weight: &str) -> Option<&DecayCase> {
        self.cases.iter().find(|c| c.function == function && c.weight == weight)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut coeffs = Table::new(&["function", "weight", "k", "multi_index", "degree", "coeff", "log10_abs"]);
        let mut fits = Table::new(&["function", "weight", "slope", "intercept", "fit_points"]);
        for c in &self.cases {
            for (row, idx) in c.report.rows.iter().zip(&c.multi_indices) {
                coeffs.push(vec![
                    c.function.clone(),
                    c.weight.clone(),
                    row.k.to_string(),
                    index_string(idx),
                    row.degree.to_string(),
                    fmt_num(row.coeff),
                    fmt_num(row.log10_abs),
                ]);
            }
            fits.push(vec![
                c.function.clone(),
                c.weight.clone(),
                fmt_num(c.report.slope),
                fmt_num(c.report.intercept),
                c.report
                    .fit_points
                    .iter()
                    .map(|k| (k + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ]);
        }
        let mut lemma = Table::new(&["function", "constant", "n", "tail2", "bound", "pass"]);
        for l in &self.lemma {
            for r in &l.rows {
                lemma.push(vec![
                    l.function.clone(),
                    fmt_num(l.constant),
                    r.n.to_string(),
                    fmt_num(r.tail2),
                    fmt_num(r.bound),
                    r.pass.to_string(),
                ]);
            }
        }
        let e = self.example;
        write_outputs(
            dir,
            &[
                (&format!("decay{e}_coeffs"), &coeffs),
                (&format!("decay{e}_fits"), &fits),
                (&format!("decay{e}_lemma"), &lemma),
            ],
            &format!("decay{e}.json"),
            self,
        )
    }
}

/// Weight names and function names of a decay example.
pub fn example_setup(example: usize) -> Result<(&'static str, &'static str, Vec<&'static str>)> {
    match example {
        1 => Ok(("legendre1d", "parabolic1d", vec!["smooth1d", "c3kink1d", "kink1d"])),
        2 => Ok(("chebyshev1d", "invsqrt1d", vec!["smooth1d", "c3kink1d", "kink1d"])),
        3 => Ok(("legendre2d", "step2d", vec!["smooth2d"])),
        other => Err(Error::InvalidArgument(format!(
            "decay example must be 1, 2 or 3, got {other}"
        ))),
    }
}

pub(crate) fn basis_for(name: &str, cfg: &DecayConfig) -> Result<Arc<OrthonormalBasis>> {
    let wd = builtins::weighted_domain(name)?;
    let (degree, cap) = if wd.domain.dim() == 1 {
        (cfg.degree_1d, crate::orthogonalization::DEFAULT_CAP)
    } else {
        (cfg.degree_2d, cfg.cap_2d)
    };
    let opts = GsOptions {
        cap,
        tol: cfg.tol,
        ..GsOptions::default()
    };
    Ok(Arc::new(gram_schmidt_with(&wd.weight, &wd.domain, degree, &opts)?))
}

pub(crate) fn decay_case(
    f: &TestFunction,
    weight: &str,
    b: &Arc<OrthonormalBasis>,
    cfg: &DecayConfig,
) -> Result<DecayCase> {
    let e = project_with(&f.f, b, cfg.tol, &f.hints)?;
    let n_fit = if b.dim() == 1 { cfg.n_fit_1d } else { cfg.n_fit_2d };
    let report = decay_report_coeffs(b.order(), e.coeffs(), n_fit, noise_floor(&e))?;
    Ok(DecayCase {
        function: f.name.to_string(),
        weight: weight.to_string(),
        multi_indices: b.order().indices().iter().map(|m| m.0.clone()).collect(),
        coeffs: e.coeffs().to_vec(),
        report,
    })
}

/// Projects every function of the example under both weights, fits the
/// decay envelopes and tabulates the comparison inequality.
pub fn run_decay_suite(example: usize, cfg: &DecayConfig) -> Result<DecaySuite> {
    let (w1, w2, functions) = example_setup(example)?;
    let b1 = basis_for(w1, cfg)?;
    let b2 = basis_for(w2, cfg)?;
    let c = auto_constant(b1.weight(), b2.weight(), b1.domain())?;
    let mut cases = Vec::new();
    let mut lemma = Vec::new();
    for name in functions {
        let f = builtins::function(name)?;
        cases.push(decay_case(&f, w1, &b1, cfg)?);
        cases.push(decay_case(&f, w2, &b2, cfg)?);
        let rows = comparison_check(&f.f, &b1, &b2, c, b1.degree(), cfg.tol, &f.hints)?;
        lemma.push(LemmaCase {
            function: name.to_string(),
            weight1: w1.to_string(),
            weight2: w2.to_string(),
            constant: c,
            rows,
        });
    }
    Ok(DecaySuite { example, cases, lemma })
}

/// The discontinuous `g = f·(2/9)(χ_Q + 1)` in the Legendre-type basis next
/// to the smooth `f` in the basis of the discontinuous weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GfunResult {
    pub g_legendre: DecayCase,
    pub f_step: DecayCase,
}

impl GfunResult {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut coeffs = Table::new(&["k", "multi_index", "degree", "g_legendre", "f_step"]);
        for (i, (a, b)) in self
            .g_legendre
            .report
            .rows
            .iter()
            .zip(&self.f_step.report.rows)
            .enumerate()
        {
            coeffs.push(vec![
                a.k.to_string(),
                index_string(&self.g_legendre.multi_indices[i]),
                a.degree.to_string(),
                fmt_num(a.coeff),
                fmt_num(b.coeff),
            ]);
        }
        let mut fits = Table::new(&["case", "slope", "intercept"]);
        for (name, c) in [("g_legendre", &self.g_legendre), ("f_step", &self.f_step)] {
            fits.push(vec![name.into(), fmt_num(c.report.slope), fmt_num(c.report.intercept)]);
        }
        write_outputs(
            dir,
            &[("gfun_coeffs", &coeffs), ("gfun_fits", &fits)],
            "gfun.json",
            self,
        )
    }
}

pub fn run_gfun(cfg: &DecayConfig) -> Result<GfunResult> {
    let b1 = basis_for("legendre2d", cfg)?;
    let b2 = basis_for("step2d", cfg)?;
    let g = builtins::function("gfun2d")?;
    let f = builtins::function("smooth2d")?;
    Ok(GfunResult {
        g_legendre: decay_case(&g, "legendre2d", &b1, cfg)?,
        f_step: decay_case(&f, "step2d", &b2, cfg)?,
    })
}
