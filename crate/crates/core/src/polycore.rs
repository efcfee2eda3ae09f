//! Multi-indices, the graded ordering of the monomial basis, and dense
//! polynomials stored over that basis.
//!
//! Within one total degree, multi-indices are sorted lexicographically with
//! the first coordinate most significant and larger exponents first, so in
//! two dimensions degree 2 reads `x^2, xy, y^2`. Lower-degree prefixes of the
//! order are stable when the maximum degree grows.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|ν|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Ordered list of all multi-indices of dimension `d` and degree at most `N`.
#[derive(Debug, Clone)]
pub struct GradedOrder {
    dim: usize,
    max_degree: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl PartialEq for GradedOrder {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.max_degree == other.max_degree
    }
}

/// Number of polynomials of total degree at most `n` in `d` variables, `C(n+d, d)`.
pub fn basis_size(d: usize, n: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    // C(n+d, d) built incrementally; each partial product is itself a binomial
    // coefficient so the division is exact.
    let mut acc: usize = 1;
    for k in 1..=d {
        let num = n
            .checked_add(k)
            .ok_or_else(|| Error::Overflow(format!("C({}+{d}, {d})", n)))?;
        acc = acc
            .checked_mul(num)
            .ok_or_else(|| Error::Overflow(format!("C({}+{d}, {d})", n)))?
            / k;
    }
    Ok(acc)
}

/// Enumerates the graded-lexicographic order of multi-indices.
pub fn enumerate_multi_indices(d: usize, n: usize) -> Result<GradedOrder> {
    let size = basis_size(d, n)?;
    let mut indices = Vec::with_capacity(size);
    let mut buf = vec![0u32; d];
    for degree in 0..=n {
        push_degree_block(&mut buf, 0, degree as u32, &mut indices);
    }
    debug_assert_eq!(indices.len(), size);
    let positions = indices.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    Ok(GradedOrder {
        dim: d,
        max_degree: n,
        indices,
        positions,
    })
}

fn push_degree_block(buf: &mut [u32], slot: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if slot + 1 == buf.len() {
        buf[slot] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[slot] = e;
        push_degree_block(buf, slot + 1, remaining - e, out);
    }
}

impl GradedOrder {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, position: usize) -> Option<&MultiIndex> {
        self.indices.get(position)
    }

    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.positions.get(index).copied()
    }

    /// Number of leading entries with total degree at most `degree`.
    pub fn prefix_len(&self, degree: usize) -> usize {
        if degree >= self.max_degree {
            return self.len();
        }
        basis_size(self.dim, degree).unwrap_or(self.len())
    }
}

/// Per-coordinate power table `x_j^e` for `e ≤ max_degree`, built by repeated
/// multiplication.
pub(crate) fn power_table(x: &[f64], max_degree: usize) -> Vec<Vec<f64>> {
    x.iter()
        .map(|&xj| {
            let mut row = Vec::with_capacity(max_degree + 1);
            let mut p = 1.0;
            row.push(p);
            for _ in 0..max_degree {
                p *= xj;
                row.push(p);
            }
            row
        })
        .collect()
}

/// Dense polynomial over the graded monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    order: Arc<GradedOrder>,
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(order: Arc<GradedOrder>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != order.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                order.len(),
                coeffs.len()
            )));
        }
        Ok(Self { order, coeffs })
    }

    pub fn zero(order: Arc<GradedOrder>) -> Self {
        let n = order.len();
        Self {
            order,
            coeffs: vec![0.0; n],
        }
    }

    /// The single monomial `x^ν` (coefficient one).
    pub fn monomial(order: Arc<GradedOrder>, index: &MultiIndex) -> Result<Self> {
        let pos = order
            .position(index)
            .ok_or_else(|| Error::InvalidArgument(format!("{index} not in order")))?;
        let mut p = Self::zero(order);
        p.coeffs[pos] = 1.0;
        Ok(p)
    }

    pub fn order(&self) -> &Arc<GradedOrder> {
        &self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.order.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "point has dimension {}, polynomial has {}",
                x.len(),
                self.dim()
            )));
        }
        let powers = power_table(x, self.order.max_degree());
        Ok(self.eval_with_powers(&powers))
    }

    pub(crate) fn eval_with_powers(&self, powers: &[Vec<f64>]) -> f64 {
        self.order
            .indices()
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| m.0.iter().zip(powers).fold(*c, |acc, (&e, row)| acc * row[e as usize]))
            .sum()
    }

    /// Coefficient-wise `a·p + q`.
    pub fn axpy(a: f64, p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
        if !Arc::ptr_eq(&p.order, &q.order) && *p.order != *q.order {
            return Err(Error::InvalidArgument("polynomials use different graded orders".into()));
        }
        let coeffs = p.coeffs.iter().zip(&q.coeffs).map(|(pc, qc)| a * pc + qc).collect();
        Ok(Polynomial {
            order: q.order.clone(),
            coeffs,
        })
    }

    /// Highest-position nonzero coefficient, if any.
    pub fn leading(&self) -> Option<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i, *c))
    }
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    dimension: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialRepr {
            dimension: self.order.dim(),
            degree: self.order.max_degree(),
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolynomialRepr::deserialize(d)?;
        let order = enumerate_multi_indices(repr.dimension, repr.degree).map_err(serde::de::Error::custom)?;
        Polynomial::new(Arc::new(order), repr.coeffs).map_err(serde::de::Error::custom)
    }
}
