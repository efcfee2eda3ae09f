//! Integration regions and weight functions.
//!
//! Weights form a closed set of named variants so that the location of every
//! discontinuity and singularity is known up front; the reference quadrature
//! aligns its panels with those features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::refquad;

const GEOM_EPS: f64 = 1e-12;

/// A line segment (a single point in one dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Segment {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        Self { a, b }
    }

    pub fn point(p: Vec<f64>) -> Self {
        Self { a: p.clone(), b: p }
    }
}

/// Region of integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Interval {
        a: f64,
        b: f64,
    },
    /// Axis-aligned box, one `[lo, hi]` pair per axis.
    Box {
        bounds: Vec<[f64; 2]>,
    },
    Triangle {
        vertices: [[f64; 2]; 3],
    },
    /// Union of axis-aligned boxes with pairwise disjoint interiors.
    CellUnion {
        boxes: Vec<Vec<[f64; 2]>>,
    },
}

fn box_measure(b: &[[f64; 2]]) -> f64 {
    b.iter().map(|[lo, hi]| hi - lo).product()
}

fn box_clamp(b: &[[f64; 2]], x: &[f64]) -> Vec<f64> {
    b.iter().zip(x).map(|([lo, hi], &xi)| xi.clamp(*lo, *hi)).collect()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn closest_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * d[0], a[1] + t * d[1]]
}

fn boxes_overlap(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    a.iter().zip(b).all(|(p, q)| p[0].max(q[0]) < p[1].min(q[1]) - GEOM_EPS)
}

fn box_edges(b: &[[f64; 2]]) -> Vec<Segment> {
    match b.len() {
        1 => vec![Segment::point(vec![b[0][0]]), Segment::point(vec![b[0][1]])],
        2 => {
            let [x0, x1] = b[0];
            let [y0, y1] = b[1];
            vec![
                Segment::new(vec![x0, y0], vec![x1, y0]),
                Segment::new(vec![x1, y0], vec![x1, y1]),
                Segment::new(vec![x1, y1], vec![x0, y1]),
                Segment::new(vec![x0, y1], vec![x0, y0]),
            ]
        }
        _ => Vec::new(),
    }
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Self {
        DomainSpec::Interval { a, b }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        DomainSpec::Box {
            bounds: vec![[lo, hi], [lo, hi]],
        }
    }

    pub fn rect(x: [f64; 2], y: [f64; 2]) -> Self {
        DomainSpec::Box { bounds: vec![x, y] }
    }

    pub fn triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        DomainSpec::Triangle { vertices: [a, b, c] }
    }

    /// `([-1,1]×[-1,0]) ∪ ([0,1]×[0,1])`, the L-shaped region with its
    /// re-entrant corner at the origin.
    pub fn l_shape() -> Self {
        DomainSpec::CellUnion {
            boxes: vec![vec![[-1.0, 1.0], [-1.0, 0.0]], vec![[0.0, 1.0], [0.0, 1.0]]],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Box { bounds } => bounds.len(),
            DomainSpec::Triangle { .. } => 2,
            DomainSpec::CellUnion { boxes } => boxes.first().map_or(0, Vec::len),
        }
    }

    /// Checks positive measure and, for cell unions, disjoint interiors.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("domain: {m}")));
        match self {
            DomainSpec::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return bad("interval needs a < b");
                }
            }
            DomainSpec::Box { bounds } => {
                if bounds.is_empty() || bounds.len() > 3 {
                    return bad("box dimension must be 1..=3");
                }
                if bounds.iter().any(|[lo, hi]| !(hi > lo)) {
                    return bad("box needs lo < hi on every axis");
                }
            }
            DomainSpec::Triangle { vertices } => {
                if cross(vertices[0], vertices[1], vertices[2]).abs() <= GEOM_EPS {
                    return bad("degenerate triangle");
                }
            }
            DomainSpec::CellUnion { boxes } => {
                if boxes.is_empty() {
                    return bad("empty cell union");
                }
                let d = boxes[0].len();
                if d == 0 || d > 3 || boxes.iter().any(|b| b.len() != d) {
                    return bad("cell union boxes must share a dimension in 1..=3");
                }
                if boxes.iter().flatten().any(|[lo, hi]| !(hi > lo)) {
                    return bad("cell union box needs lo < hi on every axis");
                }
                for i in 0..boxes.len() {
                    for j in i + 1..boxes.len() {
                        if boxes_overlap(&boxes[i], &boxes[j]) {
                            return bad("cell union boxes overlap");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn measure(&self) -> f64 {
        match self {
            DomainSpec::Interval { a, b } => b - a,
            DomainSpec::Box { bounds } => box_measure(bounds),
            DomainSpec::Triangle { vertices: v } => 0.5 * cross(v[0], v[1], v[2]).abs(),
            DomainSpec::CellUnion { boxes } => boxes.iter().map(|b| box_measure(b)).sum(),
        }
    }

    /// Closed-set membership with a small geometric tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.distance_sq(x) <= GEOM_EPS * GEOM_EPS
    }

    /// Nearest point of the closed domain.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            DomainSpec::Interval { a, b } => vec![x[0].clamp(*a, *b)],
            DomainSpec::Box { bounds } => box_clamp(bounds, x),
            DomainSpec::Triangle { vertices: v } => {
                let p = [x[0], x[1]];
                let orient = cross(v[0], v[1], v[2]).signum();
                let inside = (0..3).all(|i| cross(v[i], v[(i + 1) % 3], p) * orient >= 0.0);
                if inside {
                    return x.to_vec();
                }
                let best = (0..3)
                    .map(|i| closest_on_segment(p, v[i], v[(i + 1) % 3]))
                    .min_by(|a, b| dist_sq(a, &p).total_cmp(&dist_sq(b, &p)))
                    .unwrap();
                best.to_vec()
            }
            DomainSpec::CellUnion { boxes } => boxes
                .iter()
                .map(|b| box_clamp(b, x))
                .min_by(|a, b| dist_sq(a, x).total_cmp(&dist_sq(b, x)))
                .unwrap(),
        }
    }

    /// Squared Euclidean distance to the closed domain (zero inside).
    pub fn distance_sq(&self, x: &[f64]) -> f64 {
        dist_sq(&self.project(x), x)
    }

    pub fn bounding_box(&self) -> Vec<[f64; 2]> {
        match self {
            DomainSpec::Interval { a, b } => vec![[*a, *b]],
            DomainSpec::Box { bounds } => bounds.clone(),
            DomainSpec::Triangle { vertices: v } => (0..2)
                .map(|k| {
                    let lo = v.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
                    let hi = v.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
                    [lo, hi]
                })
                .collect(),
            DomainSpec::CellUnion { boxes } => {
                let d = self.dim();
                (0..d)
                    .map(|k| {
                        let lo = boxes.iter().map(|b| b[k][0]).fold(f64::INFINITY, f64::min);
                        let hi = boxes.iter().map(|b| b[k][1]).fold(f64::NEG_INFINITY, f64::max);
                        [lo, hi]
                    })
                    .collect()
            }
        }
    }

    /// Diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        self.bounding_box()
            .iter()
            .map(|[lo, hi]| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    /// Boundary pieces, used when this domain is the set of an indicator.
    pub fn boundary_segments(&self) -> Vec<Segment> {
        match self {
            DomainSpec::Interval { a, b } => vec![Segment::point(vec![*a]), Segment::point(vec![*b])],
            DomainSpec::Box { bounds } => box_edges(bounds),
            DomainSpec::Triangle { vertices: v } => (0..3)
                .map(|i| Segment::new(v[i].to_vec(), v[(i + 1) % 3].to_vec()))
                .collect(),
            DomainSpec::CellUnion { boxes } => boxes.iter().flat_map(|b| box_edges(b)).collect(),
        }
    }
}

/// One term `coeff · x^exponents` of a closed-form polynomial factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// Shape of a weight function, before the normalization factor is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightKind {
    Constant {
        value: f64,
    },
    /// Closed-form polynomial such as `1 - x^2`.
    PolyFactor {
        terms: Vec<PolyTerm>,
    },
    /// `χ_Q + 1` for a closed region `Q`.
    IndicatorComposite {
        region: DomainSpec,
    },
    /// `1 / sqrt(1 - |x|)` on `[-1, 1]`.
    InvSqrt1d,
    /// `1 / sqrt(1 - x^2)` on `[-1, 1]`.
    Chebyshev1d,
    /// `(|x|^2)^alpha`, centered at the origin, `alpha > -1`.
    RadialPower {
        alpha: f64,
    },
    Product {
        factors: Vec<WeightSpec>,
    },
}

fn default_normalization() -> f64 {
    1.0
}

/// A weight function: a shape times a positive scale factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    #[serde(default = "default_normalization")]
    pub normalization: f64,
}

/// Discontinuities and singular features of a weight on a domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureMap {
    pub discontinuity_segments: Vec<Segment>,
    pub singular_points: Vec<Vec<f64>>,
    pub singular_edges: Vec<Segment>,
}

impl StructureMap {
    pub fn is_empty(&self) -> bool {
        self.discontinuity_segments.is_empty() && self.singular_points.is_empty() && self.singular_edges.is_empty()
    }

    pub fn merge(&mut self, other: &StructureMap) {
        self.discontinuity_segments
            .extend(other.discontinuity_segments.iter().cloned());
        for p in &other.singular_points {
            if !self.singular_points.iter().any(|q| dist_sq(p, q) < GEOM_EPS) {
                self.singular_points.push(p.clone());
            }
        }
        self.singular_edges.extend(other.singular_edges.iter().cloned());
    }

    pub fn with_breakpoints(points: &[f64]) -> Self {
        Self {
            discontinuity_segments: points.iter().map(|&p| Segment::point(vec![p])).collect(),
            ..Self::default()
        }
    }

    pub fn with_singular_point(p: Vec<f64>) -> Self {
        Self {
            singular_points: vec![p],
            ..Self::default()
        }
    }
}

impl WeightSpec {
    pub fn new(kind: WeightKind) -> Self {
        Self {
            kind,
            normalization: 1.0,
        }
    }

    pub fn scaled(kind: WeightKind, normalization: f64) -> Self {
        Self { kind, normalization }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(WeightKind::Constant { value })
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.normalization.is_finite() && self.normalization > 0.0) {
            return Err(Error::InvalidWeight("normalization must be positive".into()));
        }
        match &self.kind {
            WeightKind::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                Err(Error::InvalidWeight("constant weight must be positive".into()))
            }
            WeightKind::RadialPower { alpha } if !(*alpha > -1.0) => {
                Err(Error::InvalidWeight("radial power needs alpha > -1".into()))
            }
            WeightKind::IndicatorComposite { region } => region.validate(),
            WeightKind::PolyFactor { terms } if terms.is_empty() => {
                Err(Error::InvalidWeight("empty polynomial factor".into()))
            }
            WeightKind::Product { factors } => factors.iter().try_for_each(WeightSpec::validate),
            _ => Ok(()),
        }
    }

    /// Pointwise value including the normalization factor.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(self.normalization * self.shape_value(x)?)
    }

    fn shape_value(&self, x: &[f64]) -> Result<f64> {
        let singular = || Error::SingularEvaluation { point: x.to_vec() };
        match &self.kind {
            WeightKind::Constant { value } => Ok(*value),
            WeightKind::PolyFactor { terms } => {
                let v: f64 = terms
                    .iter()
                    .map(|t| {
                        t.exponents
                            .iter()
                            .zip(x)
                            .fold(t.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
                    })
                    .sum();
                if v < -1e-12 {
                    return Err(Error::InvalidWeight(format!(
                        "polynomial factor negative ({v:e}) at {x:?}"
                    )));
                }
                Ok(v.max(0.0))
            }
            WeightKind::IndicatorComposite { region } => Ok(if region.contains(x) { 2.0 } else { 1.0 }),
            WeightKind::InvSqrt1d => {
                let t = 1.0 - x[0].abs();
                if t <= 0.0 {
                    return Err(singular());
                }
                Ok(1.0 / t.sqrt())
            }
            WeightKind::Chebyshev1d => {
                let t = (1.0 - x[0]) * (1.0 + x[0]);
                if t <= 0.0 {
                    return Err(singular());
                }
                Ok(1.0 / t.sqrt())
            }
            WeightKind::RadialPower { alpha } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    return if *alpha < 0.0 {
                        Err(singular())
                    } else if *alpha == 0.0 {
                        Ok(1.0)
                    } else {
                        Ok(0.0)
                    };
                }
                Ok(r2.powf(*alpha))
            }
            WeightKind::Product { factors } => factors.iter().try_fold(1.0, |acc, f| Ok(acc * f.evaluate(x)?)),
        }
    }

    /// Features of this weight restricted to the closure of `domain`.
    pub fn structure_map(&self, domain: &DomainSpec) -> StructureMap {
        let mut map = StructureMap::default();
        self.collect_features(domain.dim(), &mut map);
        map.singular_points.retain(|p| domain.contains(p));
        map
    }

    fn collect_features(&self, dim: usize, map: &mut StructureMap) {
        match &self.kind {
            WeightKind::Constant { .. } | WeightKind::PolyFactor { .. } => {}
            WeightKind::IndicatorComposite { region } => {
                map.discontinuity_segments.extend(region.boundary_segments());
            }
            WeightKind::InvSqrt1d => {
                map.singular_points.push(vec![-1.0]);
                map.singular_points.push(vec![1.0]);
                map.discontinuity_segments.push(Segment::point(vec![0.0]));
            }
            WeightKind::Chebyshev1d => {
                map.singular_points.push(vec![-1.0]);
                map.singular_points.push(vec![1.0]);
            }
            WeightKind::RadialPower { .. } => {
                map.singular_points.push(vec![0.0; dim]);
            }
            WeightKind::Product { factors } => {
                for f in factors {
                    let mut sub = StructureMap::default();
                    f.collect_features(dim, &mut sub);
                    map.merge(&sub);
                }
            }
        }
    }

    /// Degree of the polynomial part of the weight, used to size quadrature
    /// rules so polynomial weights integrate exactly.
    pub fn polynomial_degree(&self) -> usize {
        match &self.kind {
            WeightKind::PolyFactor { terms } => terms
                .iter()
                .map(|t| t.exponents.iter().sum::<u32>() as usize)
                .max()
                .unwrap_or(0),
            WeightKind::Product { factors } => factors.iter().map(WeightSpec::polynomial_degree).sum(),
            _ => 0,
        }
    }
}

/// Rescales `w` so that it integrates to one over `domain`.
pub fn normalize(w: &WeightSpec, domain: &DomainSpec) -> Result<WeightSpec> {
    w.validate()?;
    domain.validate()?;
    let mass = refquad::integrate(&|_: &[f64]| 1.0, w, domain, refquad::DEFAULT_TOL)
        .map_err(|e| match e {
            Error::AccuracyNotReached { best, .. } => {
                Error::InvalidWeight(format!("weight mass did not converge (best {best:e})"))
            }
            other => other,
        })?
        .value;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidWeight(format!("weight mass {mass:e} is not positive")));
    }
    Ok(WeightSpec {
        kind: w.kind.clone(),
        normalization: w.normalization / mass,
    })
}

/// Free-function form of [`WeightSpec::evaluate`].
pub fn evaluate_weight(w: &WeightSpec, x: &[f64]) -> Result<f64> {
    w.evaluate(x)
}

/// Free-function form of [`WeightSpec::structure_map`].
pub fn structure_map(w: &WeightSpec, domain: &DomainSpec) -> StructureMap {
    w.structure_map(domain)
}
