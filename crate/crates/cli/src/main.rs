//! `specweight` command-line front-end.
//!
//! Exit codes: 0 on success, 1 on a numerical failure, 2 on a usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use specweight::cubature::{apply_rule, build_rule, verify_theta, CubatureRule, OptimizerConfig};
use specweight::experiments::builtins::{self, TestFunction};
use specweight::experiments::decay::{run_decay_suite, run_gfun, DecayConfig};
use specweight::experiments::gpc::{run_gpc, GpcConfig};
use specweight::experiments::integration::{run_integration_example, IntegrationConfig};
use specweight::experiments::lshape::run_lshape;
use specweight::experiments::{fmt_num, index_string, Table};
use specweight::orthogonalization::{gram_schmidt, OrthonormalBasis};
use specweight::projection::{auto_constant, comparison_check, decay_report, project_with};
use specweight::refquad::DEFAULT_TOL;
use specweight::weights::{DomainSpec, WeightSpec};
use specweight::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "specweight",
    version,
    about = "Orthonormal bases, spectral expansions and cubature for arbitrary weights"
)]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "SPECWEIGHT_THREADS")]
    threads: Option<usize>,

    /// Absolute tolerance of the reference quadrature.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    oracle_tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an orthonormal basis and save it as JSON.
    Basis {
        #[command(flatten)]
        source: WeightSource,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expand a builtin function and write its coefficients as CSV.
    Project {
        #[command(flatten)]
        source: BasisSource,
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the tail-norm comparison between two builtin weights.
    Compare {
        #[arg(long)]
        weight1: String,
        #[arg(long)]
        weight2: String,
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        degree: usize,
        /// Comparison constant; derived from the weights when omitted.
        #[arg(long)]
        constant: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(subcommand)]
    Cubature(CubatureCmd),
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Subcommand, Debug)]
enum CubatureCmd {
    /// Build a rule with one point per basis function.
    Build {
        #[command(flatten)]
        source: BasisSource,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a saved rule to a builtin function.
    Apply {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long = "fn")]
        function: String,
    },
    /// Check `|f(x_j) − P_M f(x_j)| ≤ M^(−θ)` at every rule point.
    VerifyTheta {
        #[arg(long)]
        rule: PathBuf,
        #[command(flatten)]
        source: BasisSource,
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ExpCmd {
    /// Coefficient decay and tail comparison (examples 1, 2, 3).
    Decay {
        #[arg(long, default_value_t = 1)]
        example: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discontinuous integrand in the constant-weight basis.
    Gfun {
        #[arg(long)]
        out: PathBuf,
    },
    /// Piecewise approximation on the L-shaped domain.
    Lshape {
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integration error of built rules (examples 1, 2, 3).
    Integrate {
        #[arg(long, default_value_t = 1)]
        example: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stochastic collocation error H(N).
    Gpc {
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct WeightSource {
    /// Name of a builtin weight and domain.
    #[arg(long, conflicts_with = "config")]
    builtin: Option<String>,
    /// JSON file with `{"weight": ..., "domain": ...}`.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BasisSource {
    #[command(flatten)]
    weight: WeightSource,
    /// Previously saved basis; replaces `--builtin`/`--config`.
    #[arg(long, conflicts_with_all = ["builtin", "config"])]
    basis: Option<PathBuf>,
    /// Total degree; with `--basis` the saved basis is truncated to it.
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Args, Debug)]
struct OptimizerArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// JSON file with optimizer settings; flags override it.
    #[arg(long)]
    optimizer: Option<PathBuf>,
}

#[derive(Deserialize)]
struct WeightConfig {
    weight: WeightSpec,
    domain: DomainSpec,
}

impl WeightSource {
    fn load(&self) -> Result<(WeightSpec, DomainSpec)> {
        match (&self.builtin, &self.config) {
            (Some(name), None) => {
                let wd = builtins::weighted_domain(name)?;
                Ok((wd.weight, wd.domain))
            }
            (None, Some(path)) => {
                let c: WeightConfig = serde_json::from_str(&read(path)?)?;
                c.weight.validate()?;
                c.domain.validate()?;
                Ok((c.weight, c.domain))
            }
            _ => Err(Error::InvalidArgument(
                "give exactly one of --builtin or --config".into(),
            )),
        }
    }
}

impl BasisSource {
    fn load(&self, tol: f64) -> Result<Arc<OrthonormalBasis>> {
        let b = match &self.basis {
            Some(path) => {
                let b = OrthonormalBasis::from_json(&read(path)?)?;
                match self.degree {
                    Some(n) => b.truncate(n)?,
                    None => b,
                }
            }
            None => {
                let n = self
                    .degree
                    .ok_or_else(|| Error::InvalidArgument("--degree is required".into()))?;
                let (w, d) = self.weight.load()?;
                gram_schmidt(&w, &d, n, tol)?
            }
        };
        Ok(Arc::new(b))
    }
}

impl OptimizerArgs {
    fn config(&self) -> Result<OptimizerConfig> {
        let mut cfg = match &self.optimizer {
            Some(path) => serde_json::from_str(&read(path)?)?,
            None => OptimizerConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::write(path, text)?)
}

fn function(name: &str, dim: usize) -> Result<TestFunction> {
    let f = builtins::function(name)?;
    if f.dim != dim {
        return Err(Error::InvalidArgument(format!(
            "function '{name}' is {}D but the basis is {dim}D",
            f.dim
        )));
    }
    Ok(f)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite")))
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let tol = cli.oracle_tol;
    positive("--oracle-tol", tol)?;
    match cli.command {
        Command::Basis { source, degree, out } => {
            let (w, d) = source.load()?;
            let b = gram_schmidt(&w, &d, degree, tol)?;
            write_file(&out, &b.to_json()?)?;
            println!("{} functions, gram residual {:e}", b.len(), b.gram_residual());
        }
        Command::Project {
            source,
            function: name,
            out,
        } => {
            let b = source.load(tol)?;
            let f = function(&name, b.dim())?;
            let e = project_with(&f.f, &b, tol, &f.hints)?;
            let mut t = Table::new(&["k", "multi_index", "coeff", "log10_abs"]);
            for (k, (c, m)) in e.coeffs().iter().zip(b.order().indices()).enumerate() {
                t.push(vec![
                    k.to_string(),
                    index_string(&m.0),
                    fmt_num(*c),
                    fmt_num(c.abs().log10()),
                ]);
            }
            t.write_csv(&out)?;
            if let Ok(r) = decay_report(&e, if b.dim() == 1 { 20 } else { 4 }) {
                println!("slope {:e}, intercept {:e}", r.slope, r.intercept);
            }
        }
        Command::Compare {
            weight1,
            weight2,
            function: name,
            degree,
            constant,
            out,
        } => {
            let a = builtins::weighted_domain(&weight1)?;
            let c = builtins::weighted_domain(&weight2)?;
            if a.domain != c.domain {
                return Err(Error::InvalidArgument("the weights live on different domains".into()));
            }
            let f = function(&name, a.domain.dim())?;
            let b1 = Arc::new(gram_schmidt(&a.weight, &a.domain, degree, tol)?);
            let b2 = Arc::new(gram_schmidt(&c.weight, &c.domain, degree, tol)?);
            let k = match constant {
                Some(k) => {
                    positive("--constant", k)?;
                    k
                }
                None => auto_constant(&a.weight, &c.weight, &a.domain)?,
            };
            let rows = comparison_check(&f.f, &b1, &b2, k, degree, tol, &f.hints)?;
            let mut t = Table::new(&["n", "tail2", "bound", "pass"]);
            for r in &rows {
                t.push(vec![
                    r.n.to_string(),
                    fmt_num(r.tail2),
                    fmt_num(r.bound),
                    r.pass.to_string(),
                ]);
            }
            t.write_csv(&out)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            println!("constant {k:e}; {failed} of {} rows fail", rows.len());
        }
        Command::Cubature(cmd) => cubature(cmd, tol)?,
        Command::Exp(cmd) => experiment(cmd, tol)?,
    }
    Ok(())
}

fn cubature(cmd: CubatureCmd, tol: f64) -> Result<()> {
    match cmd {
        CubatureCmd::Build { source, opt, out } => {
            let b = source.load(tol)?;
            let rule = build_rule(&b, &opt.config()?)?;
            write_file(&out, &rule.to_json()?)?;
            println!(
                "{} points, lambda {:e}, exactness residual {:e}",
                rule.len(),
                rule.lambda,
                rule.exactness_residual
            );
        }
        CubatureCmd::Apply { rule, function: name } => {
            let r = CubatureRule::from_json(&read(&rule)?)?;
            let dim = r.points.first().map_or(0, |p| p.len());
            let f = function(&name, dim)?;
            println!("{}", fmt_num(apply_rule(&r, f.f)));
        }
        CubatureCmd::VerifyTheta {
            rule,
            source,
            function: name,
            theta,
            out,
        } => {
            positive("--theta", theta)?;
            let r = CubatureRule::from_json(&read(&rule)?)?;
            let b = source.load(tol)?;
            let f = function(&name, b.dim())?;
            let e = project_with(&f.f, &b, tol, &f.hints)?;
            let rows = verify_theta(&r, f.f, &e, theta)?;
            let mut t = Table::new(&["j", "residual", "bound", "pass"]);
            for row in &rows {
                t.push(vec![
                    row.j.to_string(),
                    fmt_num(row.residual),
                    fmt_num(row.bound),
                    row.pass.to_string(),
                ]);
            }
            match out {
                Some(path) => t.write_csv(&path)?,
                None => {
                    println!("{}", t.headers.join(","));
                    for row in &t.rows {
                        println!("{}", row.join(","));
                    }
                }
            }
            let passed = rows.iter().all(|r| r.pass);
            eprintln!("theta check {}", if passed { "passed" } else { "failed" });
        }
    }
    Ok(())
}

fn experiment(cmd: ExpCmd, tol: f64) -> Result<()> {
    let decay_cfg = DecayConfig {
        tol,
        ..DecayConfig::default()
    };
    let paths = match cmd {
        ExpCmd::Decay { example, out } => run_decay_suite(example, &decay_cfg)?.write(&out)?,
        ExpCmd::Gfun { out } => run_gfun(&decay_cfg)?.write(&out)?,
        ExpCmd::Lshape { max_degree, out } => {
            if max_degree == 0 {
                return Err(Error::InvalidArgument("--max-degree must be at least 1".into()));
            }
            run_lshape(max_degree, tol)?.write(&out)?
        }
        ExpCmd::Integrate { example, opt, out } => {
            let cfg = IntegrationConfig {
                optimizer: opt.config()?,
                ..IntegrationConfig::default()
            };
            run_integration_example(example, &cfg)?.write(&out)?
        }
        ExpCmd::Gpc { nmax, opt, out } => {
            let cfg = GpcConfig {
                n_max: nmax,
                optimizer: opt.config()?,
                tol,
            };
            run_gpc(&cfg)?.write(&out)?
        }
    };
    print_paths(&paths);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 1 } else { 2 })
        }
    }
}
