//! Reference ("oracle") integration of `f·w` over a domain.
//!
//! Composite tensor Gauss-Legendre on a partition aligned with the weight's
//! discontinuities, with a quadratic change of variables on the panels next
//! to singular points. Refinement is global: level `L` splits every
//! panel axis into `2^L` pieces, and the result is accepted once two
//! successive levels agree.

mod partition;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weights::{DomainSpec, StructureMap, WeightSpec};
use partition::{Cell, UnitRule};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_ORDER: usize = 20;
pub const MAX_DEPTH: usize = 12;
pub const NODE_BUDGET: usize = 4_000_000;

/// Chunk size for the deterministic partial-sum reduction.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: usize,
}

/// Vector-valued counterpart of [`OracleResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct ManyResult {
    pub values: Vec<f64>,
    pub error_estimate: f64,
    pub level: usize,
    pub panels_used: usize,
}

/// Quadrature nodes with the weight function and Jacobians folded into the
/// node weights.
#[derive(Debug, Clone)]
pub struct NodeSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    level: usize,
    panels: usize,
}

impl NodeSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_i w_i v_i` for values already evaluated at the nodes.
    pub fn dot(&self, values: &[f64]) -> f64 {
        neumaier(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    /// Integrates `m` outputs of `f` at once.
    pub fn integrate_many<F>(&self, m: usize, f: &F) -> Vec<f64>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let partials: Vec<Vec<f64>> = (0..self.len())
            .step_by(CHUNK)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&start| {
                let end = (start + CHUNK).min(self.len());
                let mut acc = vec![0.0; m];
                let mut comp = vec![0.0; m];
                let mut buf = vec![0.0; m];
                for i in start..end {
                    f(self.point(i), &mut buf);
                    let w = self.weights[i];
                    for k in 0..m {
                        neumaier_step(&mut acc[k], &mut comp[k], w * buf[k]);
                    }
                }
                acc.iter().zip(&comp).map(|(a, c)| a + c).collect()
            })
            .collect();
        let mut acc = vec![0.0; m];
        let mut comp = vec![0.0; m];
        for p in &partials {
            for k in 0..m {
                neumaier_step(&mut acc[k], &mut comp[k], p[k]);
            }
        }
        acc.iter().zip(&comp).map(|(a, c)| a + c).collect()
    }

    pub fn integrate<F>(&self, f: &F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.integrate_many(1, &|x: &[f64], out: &mut [f64]| out[0] = f(x))[0]
    }
}

fn neumaier_step(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

fn neumaier(iter: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in iter {
        neumaier_step(&mut s, &mut c, x);
    }
    s + c
}

/// Oracle configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oracle {
    /// Gauss order per panel axis.
    pub order: usize,
    pub max_depth: usize,
    pub tol: f64,
    pub node_budget: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            max_depth: MAX_DEPTH,
            tol: DEFAULT_TOL,
            node_budget: NODE_BUDGET,
        }
    }
}

impl Oracle {
    pub fn new(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order.max(DEFAULT_ORDER);
        self
    }

    fn check(&self, w: &WeightSpec, domain: &DomainSpec) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument("oracle tolerance must be positive".into()));
        }
        domain.validate()?;
        w.validate()
    }

    fn features(w: &WeightSpec, domain: &DomainSpec, hints: &StructureMap) -> StructureMap {
        let mut map = w.structure_map(domain);
        let mut extra = hints.clone();
        extra.singular_points.retain(|p| domain.contains(p));
        map.merge(&extra);
        map
    }

    fn cells(w: &WeightSpec, domain: &DomainSpec, hints: &StructureMap) -> Vec<Cell> {
        partition::base_cells(domain, &Self::features(w, domain, hints))
    }

    fn count(&self, cells: &[Cell], level: usize) -> usize {
        cells
            .iter()
            .map(|c| partition::node_count(c, level, self.order, 2 * self.order))
            .sum()
    }

    /// Node set at a fixed refinement level.
    pub fn nodes(&self, w: &WeightSpec, domain: &DomainSpec, hints: &StructureMap, level: usize) -> Result<NodeSet> {
        self.check(w, domain)?;
        let cells = Self::cells(w, domain, hints);
        self.nodes_from_cells(&cells, w, domain.dim(), level)
    }

    fn nodes_from_cells(&self, cells: &[Cell], w: &WeightSpec, dim: usize, level: usize) -> Result<NodeSet> {
        let rule = UnitRule::gauss_legendre(self.order);
        let sing_rule = UnitRule::gauss_legendre(2 * self.order);
        let mut coords = Vec::with_capacity(self.count(cells, level) * dim);
        let mut weights = Vec::with_capacity(self.count(cells, level));
        for c in cells {
            partition::emit(c, level, &rule, &sing_rule, &mut coords, &mut weights);
        }
        for (i, wt) in weights.iter_mut().enumerate() {
            *wt *= w.evaluate(&coords[i * dim..(i + 1) * dim])?;
        }
        Ok(NodeSet {
            dim,
            coords,
            weights,
            level,
            panels: cells.len() << (dim * level),
        })
    }

    /// Refines level by level until `accept(prev, next)` holds.
    fn refine<T>(
        &self,
        w: &WeightSpec,
        domain: &DomainSpec,
        hints: &StructureMap,
        mut eval: impl FnMut(&NodeSet) -> T,
        diff: impl Fn(&T, &T) -> (f64, bool),
        best: impl Fn(&T) -> f64,
    ) -> Result<(T, NodeSet, NodeSet, f64)> {
        self.check(w, domain)?;
        let cells = Self::cells(w, domain, hints);
        let mut prev_nodes = self.nodes_from_cells(&cells, w, domain.dim(), 0)?;
        let mut prev = eval(&prev_nodes);
        let mut last_estimate = f64::INFINITY;
        for level in 1..=self.max_depth {
            if self.count(&cells, level) > self.node_budget {
                break;
            }
            let nodes = self.nodes_from_cells(&cells, w, domain.dim(), level)?;
            let next = eval(&nodes);
            let (estimate, ok) = diff(&prev, &next);
            if ok {
                return Ok((next, prev_nodes, nodes, estimate));
            }
            last_estimate = estimate;
            prev = next;
            prev_nodes = nodes;
        }
        Err(Error::AccuracyNotReached {
            best: best(&prev),
            estimate: last_estimate,
            level: prev_nodes.level,
        })
    }

    /// Integrates the `m` outputs of `f` against `w`; every component must
    /// converge to `tol·max(1, |I|)` between successive levels.
    pub fn integrate_many<F>(
        &self,
        f: &F,
        m: usize,
        w: &WeightSpec,
        domain: &DomainSpec,
        hints: &StructureMap,
    ) -> Result<ManyResult>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let tol = self.tol;
        let (values, _, nodes, estimate) = self.refine(
            w,
            domain,
            hints,
            |n| n.integrate_many(m, f),
            |a: &Vec<f64>, b: &Vec<f64>| {
                let mut est: f64 = 0.0;
                let mut ok = true;
                for (x, y) in a.iter().zip(b) {
                    let d = (x - y).abs();
                    est = est.max(d);
                    ok &= d < tol * y.abs().max(1.0);
                }
                (est, ok)
            },
            |v| v.first().copied().unwrap_or(0.0),
        )?;
        Ok(ManyResult {
            values,
            error_estimate: estimate,
            level: nodes.level,
            panels_used: nodes.panels,
        })
    }

    pub fn integrate<F>(&self, f: &F, w: &WeightSpec, domain: &DomainSpec, hints: &StructureMap) -> Result<OracleResult>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let r = self.integrate_many(&|x: &[f64], o: &mut [f64]| o[0] = f(x), 1, w, domain, hints)?;
        Ok(OracleResult {
            value: r.values[0],
            error_estimate: r.error_estimate,
            panels_used: r.panels_used,
        })
    }

    /// Values of `∫ f w` at levels `0..levels`, for convergence studies.
    pub fn level_history<F>(
        &self,
        f: &F,
        w: &WeightSpec,
        domain: &DomainSpec,
        hints: &StructureMap,
        levels: usize,
    ) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.check(w, domain)?;
        let cells = Self::cells(w, domain, hints);
        (0..levels)
            .map(|l| Ok(self.nodes_from_cells(&cells, w, domain.dim(), l)?.integrate(f)))
            .collect()
    }

    /// Smallest node set on which all tensor Chebyshev products of total
    /// degree `≤ probe_degree` (over the bounding box) agree with the next
    /// refinement level to `tol`. Polynomials of that degree, times `w`, are
    /// then integrated to oracle accuracy by plain summation over the set.
    /// Returns the validated set and the finer set it was checked against.
    pub fn validated_nodes(
        &self,
        w: &WeightSpec,
        domain: &DomainSpec,
        hints: &StructureMap,
        probe_degree: usize,
    ) -> Result<(NodeSet, NodeSet)> {
        let bb = domain.bounding_box();
        let d = domain.dim();
        let probes = crate::polycore::enumerate_multi_indices(d, probe_degree)?;
        let exps: Vec<Vec<u32>> = probes.indices().iter().map(|m| m.0.clone()).collect();
        let m = exps.len();
        let probe = |x: &[f64], out: &mut [f64]| {
            let tables: Vec<Vec<f64>> = (0..d)
                .map(|k| {
                    let t = (2.0 * x[k] - bb[k][0] - bb[k][1]) / (bb[k][1] - bb[k][0]);
                    let mut c = vec![1.0; probe_degree + 1];
                    if probe_degree >= 1 {
                        c[1] = t;
                    }
                    for j in 2..=probe_degree {
                        c[j] = 2.0 * t * c[j - 1] - c[j - 2];
                    }
                    c
                })
                .collect();
            for (o, e) in out.iter_mut().zip(&exps) {
                *o = e.iter().enumerate().map(|(k, &p)| tables[k][p as usize]).product();
            }
        };
        let tol = self.tol;
        let (_, coarse, fine, _) = self.refine(
            w,
            domain,
            hints,
            |n| n.integrate_many(m, &probe),
            |a: &Vec<f64>, b: &Vec<f64>| {
                let mut est: f64 = 0.0;
                let mut ok = true;
                for (x, y) in a.iter().zip(b) {
                    let dlt = (x - y).abs();
                    est = est.max(dlt);
                    ok &= dlt < tol * y.abs().max(1.0);
                }
                (est, ok)
            },
            |v| v.first().copied().unwrap_or(0.0),
        )?;
        Ok((coarse, fine))
    }
}

/// `∫_Ω f·w` with the default oracle at tolerance `tol`.
pub fn integrate<F>(f: &F, w: &WeightSpec, domain: &DomainSpec, tol: f64) -> Result<OracleResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Oracle::new(tol).integrate(f, w, domain, &StructureMap::default())
}

/// `⟨f, g⟩_w` with the default oracle at tolerance `tol`.
pub fn inner_product<F, G>(f: &F, g: &G, w: &WeightSpec, domain: &DomainSpec, tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    Ok(integrate(&|x: &[f64]| f(x) * g(x), w, domain, tol)?.value)
}
