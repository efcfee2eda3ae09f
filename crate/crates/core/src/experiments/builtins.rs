//! Named weights, domains and test functions used by the experiments, so
//! every run works without external input.

use crate::error::{Error, Result};
use crate::weights::{DomainSpec, PolyTerm, StructureMap, WeightKind, WeightSpec};

/// A weight together with the domain it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDomain {
    pub weight: WeightSpec,
    pub domain: DomainSpec,
}

/// A closed-form test function with the features the oracle should follow.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: &'static str,
    pub dim: usize,
    pub f: fn(&[f64]) -> f64,
    pub hints: StructureMap,
}

pub const WEIGHT_NAMES: &[&str] = &[
    "legendre1d",
    "parabolic1d",
    "chebyshev1d",
    "invsqrt1d",
    "step1d",
    "legendre2d",
    "step2d",
    "triangle2d",
];

pub const FUNCTION_NAMES: &[&str] = &[
    "smooth1d", "c3kink1d", "kink1d", "exp1d", "smooth2d", "gfun2d", "trig2d", "gpc2d",
];

/// `Q = {−1/2 ≤ x ≤ 1/2, −1/2 ≤ y ≤ −x}`.
pub fn q_triangle() -> DomainSpec {
    DomainSpec::triangle([-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5])
}

/// `(2/9)(χ_Q + 1)` on `[−1, 1]²`.
pub fn step2d_weight() -> WeightSpec {
    WeightSpec::scaled(WeightKind::IndicatorComposite { region: q_triangle() }, 2.0 / 9.0)
}

pub fn weighted_domain(name: &str) -> Result<WeightedDomain> {
    let i = DomainSpec::interval(-1.0, 1.0);
    let sq = DomainSpec::square(-1.0, 1.0);
    let (weight, domain) = match name {
        "legendre1d" => (WeightSpec::constant(0.5), i),
        "parabolic1d" => (
            WeightSpec::new(WeightKind::PolyFactor {
                terms: vec![
                    PolyTerm {
                        coeff: 0.75,
                        exponents: vec![0],
                    },
                    PolyTerm {
                        coeff: -0.75,
                        exponents: vec![2],
                    },
                ],
            }),
            i,
        ),
        "chebyshev1d" => (WeightSpec::new(WeightKind::Chebyshev1d), i),
        "invsqrt1d" => (WeightSpec::scaled(WeightKind::InvSqrt1d, 0.5), i),
        "step1d" => (
            WeightSpec::scaled(
                WeightKind::IndicatorComposite {
                    region: DomainSpec::interval(-0.5, 0.5),
                },
                1.0 / 3.0,
            ),
            i,
        ),
        "legendre2d" => (WeightSpec::constant(0.25), sq),
        "step2d" => (step2d_weight(), sq),
        "triangle2d" => (
            WeightSpec::constant(2.0),
            DomainSpec::triangle([0.0, 0.0], [1.0, 0.0], [1.0, 1.0]),
        ),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown builtin weight '{other}' (known: {})",
                WEIGHT_NAMES.join(", ")
            )))
        }
    };
    Ok(WeightedDomain { weight, domain })
}

fn smooth1d(x: &[f64]) -> f64 {
    (10.0 * x[0]).sin() + (8.0 * x[0]).cos()
}

fn c3kink1d(x: &[f64]) -> f64 {
    let t = x[0] + 0.5;
    t.powi(3) * t.abs()
}

fn kink1d(x: &[f64]) -> f64 {
    (x[0] + 0.5).abs()
}

fn exp1d(x: &[f64]) -> f64 {
    (1.1 * x[0]).exp() + (1.2 * x[0]).cos()
}

fn smooth2d(x: &[f64]) -> f64 {
    (4.0 * (x[0] + x[1])).sin() + (6.0 * (x[0] - x[1])).cos()
}

fn gfun2d(x: &[f64]) -> f64 {
    let chi = if q_triangle().contains(x) { 2.0 } else { 1.0 };
    smooth2d(x) * (2.0 / 9.0) * chi
}

fn trig2d(x: &[f64]) -> f64 {
    (1.1 * (x[0] + x[1])).sin() + (1.2 * (x[0] - x[1])).cos()
}

fn gpc2d(x: &[f64]) -> f64 {
    (x[0] - x[1]).cos() + (1.1 * (x[0] + x[1])).sin() + 4.0
}

pub fn function(name: &str) -> Result<TestFunction> {
    let kink = StructureMap::with_breakpoints(&[-0.5]);
    let (dim, f, hints): (usize, fn(&[f64]) -> f64, StructureMap) = match name {
        "smooth1d" => (1, smooth1d, StructureMap::default()),
        "c3kink1d" => (1, c3kink1d, kink),
        "kink1d" => (1, kink1d, kink),
        "exp1d" => (1, exp1d, StructureMap::default()),
        "smooth2d" => (2, smooth2d, StructureMap::default()),
        "gfun2d" => (2, gfun2d, step2d_weight().structure_map(&DomainSpec::square(-1.0, 1.0))),
        "trig2d" => (2, trig2d, StructureMap::default()),
        "gpc2d" => (2, gpc2d, StructureMap::default()),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown builtin function '{other}' (known: {})",
                FUNCTION_NAMES.join(", ")
            )))
        }
    };
    let name = FUNCTION_NAMES.iter().find(|n| **n == name).copied().unwrap_or("");
    Ok(TestFunction { name, dim, f, hints })
}
