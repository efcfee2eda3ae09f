//! Orthonormal polynomial bases for a weight on a domain.
//!
//! Gram-Schmidt runs on vectors of function values at oracle nodes rather
//! than on monomial coefficients. The input for the basis function of
//! multi-index `ν` is `x_j·Ψ_p`, where `p` is the position of `ν - e_j`;
//! because graded-lex is a monomial order this spans the same nested spaces
//! as the monomials, while avoiding the ill-conditioned monomial Gram matrix.
//! Each orthogonalization step is recorded as a recurrence row, which also
//! gives a stable way to evaluate the basis at arbitrary points. Monomial
//! coefficients are carried along for persistence and inspection.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{enumerate_multi_indices, GradedOrder, MultiIndex, Polynomial};
use crate::refquad::{NodeSet, Oracle};
use crate::weights::{DomainSpec, StructureMap, WeightSpec};

pub const DEFAULT_CAP: usize = 200;
/// Relative norm below which a new direction counts as linearly dependent.
pub const DEGENERACY_RATIO: f64 = 1e-8;

/// `Ψ_k = (x_coord·Ψ_parent - Σ_{i<k} h_i Ψ_i) / norm`.
/// For `k = 0` only `norm` is used and `Ψ_0 = 1 / norm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRow {
    pub coord: usize,
    pub parent: usize,
    pub h: Vec<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct GsOptions {
    /// Maximum number of basis functions.
    pub cap: usize,
    /// Oracle tolerance for validating the node set.
    pub tol: f64,
    /// Extra features to align the quadrature partition with.
    pub hints: StructureMap,
}

impl Default for GsOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            tol: crate::refquad::DEFAULT_TOL,
            hints: StructureMap::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    order: Arc<GradedOrder>,
    polys: Vec<Polynomial>,
    rows: Vec<RecurrenceRow>,
    weight: WeightSpec,
    domain: DomainSpec,
    gram_residual: f64,
    mass: f64,
}

/// Gauss order per panel axis that integrates `Ψ_i Ψ_j · x · w` exactly on
/// smooth panels for polynomial weights.
pub(crate) fn oracle_order(w: &WeightSpec, degree: usize) -> usize {
    (degree + 2 + w.polynomial_degree().div_ceil(2)).max(crate::refquad::DEFAULT_ORDER)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of total degree `n` under the default options.
pub fn gram_schmidt(w: &WeightSpec, domain: &DomainSpec, n: usize, tol: f64) -> Result<OrthonormalBasis> {
    gram_schmidt_with(
        w,
        domain,
        n,
        &GsOptions {
            tol,
            ..GsOptions::default()
        },
    )
}

pub fn gram_schmidt_with(w: &WeightSpec, domain: &DomainSpec, n: usize, opts: &GsOptions) -> Result<OrthonormalBasis> {
    let order = Arc::new(enumerate_multi_indices(domain.dim(), n)?);
    if order.len() > opts.cap {
        return Err(Error::InvalidArgument(format!(
            "basis of {} functions exceeds the cap of {}",
            order.len(),
            opts.cap
        )));
    }
    let oracle = Oracle::new(opts.tol).with_order(oracle_order(w, n));
    let (nodes, check_nodes) = oracle.validated_nodes(w, domain, &opts.hints, 2 * n + 1)?;
    let rows = orthogonalize(&order, &nodes)?;
    let polys = monomial_coefficients(&order, &rows)?;
    let mass = rows[0].norm * rows[0].norm;
    let mut basis = OrthonormalBasis {
        order,
        polys,
        rows,
        weight: w.clone(),
        domain: domain.clone(),
        gram_residual: 0.0,
        mass,
    };
    basis.gram_residual = basis.discrete_gram_deviation(&check_nodes);
    Ok(basis)
}

/// Parent coordinate and position for every non-constant multi-index.
fn parents(order: &GradedOrder) -> Vec<(usize, usize)> {
    order
        .indices()
        .iter()
        .map(|nu| {
            let Some(j) = nu.0.iter().rposition(|&e| e > 0) else {
                return (0, 0);
            };
            let mut e = nu.0.clone();
            e[j] -= 1;
            (j, order.position(&MultiIndex(e)).expect("parent lies in the order"))
        })
        .collect()
}

fn orthogonalize(order: &GradedOrder, nodes: &NodeSet) -> Result<Vec<RecurrenceRow>> {
    let n = nodes.len();
    let sw: Vec<f64> = nodes.weights().iter().map(|w| w.max(0.0).sqrt()).collect();
    let coord = |j: usize| (0..n).map(move |i| nodes.point(i)[j]);
    let mut psi: Vec<Vec<f64>> = Vec::with_capacity(order.len());
    let mut rows = Vec::with_capacity(order.len());

    let norm0 = dot(&sw, &sw).sqrt();
    if !(norm0 > 0.0 && norm0.is_finite()) {
        return Err(Error::InvalidWeight("weight has no mass on the domain".into()));
    }
    psi.push(sw.iter().map(|s| s / norm0).collect());
    rows.push(RecurrenceRow {
        coord: 0,
        parent: 0,
        h: Vec::new(),
        norm: norm0,
    });

    for (k, (j, p)) in parents(order).into_iter().enumerate().skip(1) {
        let mut u: Vec<f64> = coord(j).zip(&psi[p]).map(|(x, v)| x * v).collect();
        let input_norm = dot(&u, &u).sqrt();
        let mut h = vec![0.0; k];
        for _pass in 0..2 {
            for (i, v) in psi.iter().enumerate() {
                let c = dot(&u, v);
                h[i] += c;
                u.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = dot(&u, &u).sqrt();
        if !(norm >= DEGENERACY_RATIO * input_norm) || norm == 0.0 {
            return Err(Error::DegenerateBasis {
                index: order.indices()[k].0.clone(),
                ratio: norm / input_norm,
            });
        }
        u.iter_mut().for_each(|a| *a /= norm);
        psi.push(u);
        rows.push(RecurrenceRow {
            coord: j,
            parent: p,
            h,
            norm,
        });
    }
    Ok(rows)
}

fn monomial_coefficients(order: &Arc<GradedOrder>, rows: &[RecurrenceRow]) -> Result<Vec<Polynomial>> {
    let k_total = order.len();
    let d = order.dim();
    // shift[j][m] = position of (monomial m) + e_j, when inside the order
    let shift: Vec<Vec<Option<usize>>> = (0..d)
        .map(|j| {
            order
                .indices()
                .iter()
                .map(|m| {
                    let mut e = m.0.clone();
                    e[j] += 1;
                    order.position(&MultiIndex(e))
                })
                .collect()
        })
        .collect();
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(k_total);
    let mut c0 = vec![0.0; k_total];
    c0[0] = 1.0 / rows[0].norm;
    coeffs.push(c0);
    for (k, row) in rows.iter().enumerate().skip(1) {
        let mut c = vec![0.0; k_total];
        for (m, &v) in coeffs[row.parent].iter().enumerate() {
            if v != 0.0 {
                let target = shift[row.coord][m]
                    .ok_or_else(|| Error::InvalidArgument("recurrence leaves the graded order".into()))?;
                c[target] += v;
            }
        }
        for (i, &hi) in row.h.iter().enumerate() {
            if hi != 0.0 {
                c.iter_mut().zip(&coeffs[i]).for_each(|(a, b)| *a -= hi * b);
            }
        }
        c.iter_mut().for_each(|a| *a /= row.norm);
        debug_assert!(k < k_total);
        coeffs.push(c);
    }
    coeffs.into_iter().map(|c| Polynomial::new(order.clone(), c)).collect()
}

impl OrthonormalBasis {
    pub fn order(&self) -> &Arc<GradedOrder> {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.order.dim()
    }

    pub fn degree(&self) -> usize {
        self.order.max_degree()
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn rows(&self) -> &[RecurrenceRow] {
        &self.rows
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// `∫_Ω w`, equal to one for normalized weights.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Moments `β_k = ∫ Ψ_k w`, which are `(√mass, 0, …, 0)`.
    pub fn beta(&self, len: usize) -> Vec<f64> {
        let mut b = vec![0.0; len];
        if len > 0 {
            b[0] = self.mass.sqrt();
        }
        b
    }

    /// Values of the first `out.len()` basis functions at `x`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let k_max = out.len().min(self.rows.len());
        if k_max == 0 {
            return;
        }
        out[0] = 1.0 / self.rows[0].norm;
        for k in 1..k_max {
            let r = &self.rows[k];
            let s: f64 = r.h.iter().zip(&out[..k]).map(|(h, v)| h * v).sum();
            out[k] = (x[r.coord] * out[r.parent] - s) / r.norm;
        }
    }

    /// Values of all basis functions at `x`.
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval(&self, k: usize, x: &[f64]) -> f64 {
        let mut out = vec![0.0; k + 1];
        self.eval_into(x, &mut out);
        out[k]
    }

    /// Sub-basis of total degree `degree` (a prefix in graded order).
    pub fn truncate(&self, degree: usize) -> Result<OrthonormalBasis> {
        if degree > self.degree() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate degree {} basis to degree {degree}",
                self.degree()
            )));
        }
        let order = Arc::new(enumerate_multi_indices(self.dim(), degree)?);
        let k = order.len();
        let polys = self.polys[..k]
            .iter()
            .map(|p| Polynomial::new(order.clone(), p.coeffs()[..k].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(OrthonormalBasis {
            order,
            polys,
            rows: self.rows[..k].to_vec(),
            weight: self.weight.clone(),
            domain: self.domain.clone(),
            gram_residual: self.gram_residual,
            mass: self.mass,
        })
    }

    /// Max deviation of the Gram matrix from the identity on a node set.
    fn discrete_gram_deviation(&self, nodes: &NodeSet) -> f64 {
        let k = self.len();
        let mut vals = vec![vec![0.0; nodes.len()]; k];
        let mut buf = vec![0.0; k];
        for i in 0..nodes.len() {
            self.eval_into(nodes.point(i), &mut buf);
            let s = nodes.weights()[i].max(0.0).sqrt();
            for (row, v) in vals.iter_mut().zip(&buf) {
                row[i] = v * s;
            }
        }
        let mut dev: f64 = 0.0;
        for i in 0..k {
            for j in 0..=i {
                let g = dot(&vals[i], &vals[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g - target).abs());
            }
        }
        dev
    }

    pub fn to_file(&self) -> BasisFile {
        BasisFile {
            dimension: self.dim(),
            degree: self.degree(),
            weight: self.weight.clone(),
            domain: self.domain.clone(),
            gram_residual: self.gram_residual,
            mass: self.mass,
            multi_indices: self.order.indices().iter().map(|m| m.0.clone()).collect(),
            coeffs: self.polys.iter().map(|p| p.coeffs().to_vec()).collect(),
            recurrence: self.rows.clone(),
        }
    }

    pub fn from_file(f: BasisFile) -> Result<Self> {
        let order = Arc::new(enumerate_multi_indices(f.dimension, f.degree)?);
        if f.coeffs.len() != order.len() || f.recurrence.len() != order.len() {
            return Err(Error::InvalidArgument("basis file has inconsistent sizes".into()));
        }
        let polys = f
            .coeffs
            .into_iter()
            .map(|c| Polynomial::new(order.clone(), c))
            .collect::<Result<Vec<_>>>()?;
        Ok(OrthonormalBasis {
            order,
            polys,
            rows: f.recurrence,
            weight: f.weight,
            domain: f.domain,
            gram_residual: f.gram_residual,
            mass: f.mass,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }
}

/// On-disk form of a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub dimension: usize,
    pub degree: usize,
    pub weight: WeightSpec,
    pub domain: DomainSpec,
    pub gram_residual: f64,
    pub mass: f64,
    pub multi_indices: Vec<Vec<u32>>,
    /// Row `k` holds the monomial coefficients of `Ψ_k` in graded order.
    pub coeffs: Vec<Vec<f64>>,
    pub recurrence: Vec<RecurrenceRow>,
}

/// Recomputes the Gram matrix with an independent oracle run at `tol/10`
/// and returns the max deviation from the identity.
pub fn verify_orthonormality(b: &OrthonormalBasis, tol: f64) -> Result<f64> {
    let k = b.len();
    let m = k * (k + 1) / 2;
    let oracle = Oracle::new(tol / 10.0).with_order(oracle_order(b.weight(), b.degree()));
    let f = |x: &[f64], out: &mut [f64]| {
        let v = b.eval_all(x);
        let mut idx = 0;
        for i in 0..k {
            for j in 0..=i {
                out[idx] = v[i] * v[j];
                idx += 1;
            }
        }
    };
    let r = oracle.integrate_many(&f, m, b.weight(), b.domain(), &StructureMap::default())?;
    let mut dev: f64 = 0.0;
    let mut idx = 0;
    for i in 0..k {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((r.values[idx] - target).abs());
            idx += 1;
        }
    }
    Ok(dev)
}
