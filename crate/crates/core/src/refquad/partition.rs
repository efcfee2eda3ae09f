//! Structure-aligned partition of a domain into panels, and node emission.
//!
//! 1D domains are split at every breakpoint. 2D domains are cut into convex
//! polygons along the supporting line of every discontinuity segment; each
//! polygon becomes either an axis-aligned rectangle or a fan of triangles.
//! Panels that touch a singular point carry a flag that switches on a
//! quadratic change of variables toward the point.

use crate::weights::{DomainSpec, StructureMap};

const EPS: f64 = 1e-13;

/// Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitRule {
    pub fn gauss_legendre(q: usize) -> Self {
        let gl =
            gauss_quad::legendre::GaussLegendre::new(std::num::NonZeroUsize::new(q.max(1)).expect("nonzero order"));
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            nodes: pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect(),
            weights: pairs.iter().map(|p| 0.5 * p.1).collect(),
        }
    }
}

/// Which end of an interval (or which Duffy vertex) is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    None,
    Low,
    High,
}

#[derive(Debug, Clone)]
pub(crate) enum Cell {
    Interval {
        a: f64,
        b: f64,
        singular: Side,
    },
    Rect {
        x: [f64; 2],
        y: [f64; 2],
    },
    /// Triangle; when `singular` is set the feature sits at `v[0]`.
    Tri {
        v: [[f64; 2]; 3],
        singular: bool,
    },
    Box3 {
        b: [[f64; 2]; 3],
    },
}

type Poly = Vec<[f64; 2]>;

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn poly_area(p: &Poly) -> f64 {
    let n = p.len();
    0.5 * (0..n)
        .map(|i| p[i][0] * p[(i + 1) % n][1] - p[(i + 1) % n][0] * p[i][1])
        .sum::<f64>()
}

fn rect_poly(x: [f64; 2], y: [f64; 2]) -> Poly {
    vec![[x[0], y[0]], [x[1], y[0]], [x[1], y[1]], [x[0], y[1]]]
}

fn dedupe(p: Poly, scale: f64) -> Poly {
    let mut out: Poly = Vec::with_capacity(p.len());
    for v in p {
        if out
            .last()
            .is_none_or(|l| (l[0] - v[0]).abs() + (l[1] - v[1]).abs() > EPS * scale)
        {
            out.push(v);
        }
    }
    while out.len() > 1 {
        let (f, l) = (out[0], out[out.len() - 1]);
        if (f[0] - l[0]).abs() + (f[1] - l[1]).abs() <= EPS * scale {
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// Splits a convex polygon by the line through `a` with direction `d`.
fn clip(p: &Poly, a: [f64; 2], d: [f64; 2], scale: f64) -> Vec<Poly> {
    let side = |v: [f64; 2]| d[0] * (v[1] - a[1]) - d[1] * (v[0] - a[0]);
    let s: Vec<f64> = p.iter().map(|&v| side(v)).collect();
    let tol = EPS * scale * (d[0].abs() + d[1].abs());
    if s.iter().all(|&x| x >= -tol) || s.iter().all(|&x| x <= tol) {
        return vec![p.clone()];
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    let n = p.len();
    for i in 0..n {
        let (v, sv) = (p[i], s[i]);
        let (u, su) = (p[(i + 1) % n], s[(i + 1) % n]);
        if sv >= -tol {
            left.push(v);
        }
        if sv <= tol {
            right.push(v);
        }
        if (sv > tol && su < -tol) || (sv < -tol && su > tol) {
            let t = sv / (sv - su);
            let c = [v[0] + t * (u[0] - v[0]), v[1] + t * (u[1] - v[1])];
            left.push(c);
            right.push(c);
        }
    }
    [left, right]
        .into_iter()
        .map(|q| dedupe(q, scale))
        .filter(|q| q.len() >= 3 && poly_area(q).abs() > EPS * scale * scale)
        .collect()
}

fn is_rect(p: &Poly) -> Option<([f64; 2], [f64; 2])> {
    if p.len() != 4 {
        return None;
    }
    let aligned = (0..4).all(|i| {
        let (a, b) = (p[i], p[(i + 1) % 4]);
        a[0] == b[0] || a[1] == b[1]
    });
    if !aligned {
        return None;
    }
    let xs = p.iter().map(|v| v[0]);
    let ys = p.iter().map(|v| v[1]);
    let x = [
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    ];
    let y = [
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    ];
    Some((x, y))
}

/// Location of `p` relative to a convex CCW polygon: inside or on the boundary.
fn touches(poly: &Poly, p: [f64; 2], scale: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], p) >= -EPS * scale * scale)
}

fn fan(poly: &Poly, apex: Option<[f64; 2]>, scale: f64, out: &mut Vec<Cell>) {
    let n = poly.len();
    match apex {
        Some(p) => {
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                if cross(p, a, b).abs() > EPS * scale * scale {
                    out.push(Cell::Tri {
                        v: [p, a, b],
                        singular: true,
                    });
                }
            }
        }
        None => {
            for i in 1..n - 1 {
                let t = [poly[0], poly[i], poly[i + 1]];
                if cross(t[0], t[1], t[2]).abs() > EPS * scale * scale {
                    out.push(Cell::Tri { v: t, singular: false });
                }
            }
        }
    }
}

fn base_polys(domain: &DomainSpec) -> Vec<Poly> {
    match domain {
        DomainSpec::Box { bounds } => vec![rect_poly(bounds[0], bounds[1])],
        DomainSpec::Triangle { vertices: v } => {
            if cross(v[0], v[1], v[2]) > 0.0 {
                vec![v.to_vec()]
            } else {
                vec![vec![v[0], v[2], v[1]]]
            }
        }
        DomainSpec::CellUnion { boxes } => boxes.iter().map(|b| rect_poly(b[0], b[1])).collect(),
        DomainSpec::Interval { .. } => Vec::new(),
    }
}

fn cells_1d(lo: f64, hi: f64, features: &StructureMap) -> Vec<Cell> {
    let scale = (hi - lo).abs().max(1.0);
    let inside = |x: f64| x > lo + EPS * scale && x < hi - EPS * scale;
    let singular: Vec<f64> = features
        .singular_points
        .iter()
        .filter(|p| p.len() == 1)
        .map(|p| p[0])
        .collect();
    let mut cuts = vec![lo, hi];
    cuts.extend(
        features
            .discontinuity_segments
            .iter()
            .filter(|s| s.a.len() == 1)
            .flat_map(|s| [s.a[0], s.b[0]])
            .filter(|&x| inside(x)),
    );
    cuts.extend(singular.iter().copied().filter(|&x| inside(x)));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= EPS * scale);
    let is_sing = |x: f64| singular.iter().any(|&s| (s - x).abs() <= EPS * scale);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        match (is_sing(a), is_sing(b)) {
            (true, true) => {
                let m = 0.5 * (a + b);
                out.push(Cell::Interval {
                    a,
                    b: m,
                    singular: Side::Low,
                });
                out.push(Cell::Interval {
                    a: m,
                    b,
                    singular: Side::High,
                });
            }
            (true, false) => out.push(Cell::Interval {
                a,
                b,
                singular: Side::Low,
            }),
            (false, true) => out.push(Cell::Interval {
                a,
                b,
                singular: Side::High,
            }),
            (false, false) => out.push(Cell::Interval {
                a,
                b,
                singular: Side::None,
            }),
        }
    }
    out
}

/// Initial partition of `domain` aligned with `features`.
pub(crate) fn base_cells(domain: &DomainSpec, features: &StructureMap) -> Vec<Cell> {
    match domain.dim() {
        1 => {
            let bb = domain.bounding_box();
            cells_1d(bb[0][0], bb[0][1], features)
        }
        2 => {
            let scale = domain.diameter().max(1.0);
            let mut polys = base_polys(domain);
            let mut lines: Vec<([f64; 2], [f64; 2])> = Vec::new();
            for s in &features.discontinuity_segments {
                if s.a.len() != 2 {
                    continue;
                }
                let a = [s.a[0], s.a[1]];
                let d = [s.b[0] - s.a[0], s.b[1] - s.a[1]];
                let len = d[0].hypot(d[1]);
                if len <= EPS * scale {
                    continue;
                }
                let d = [d[0] / len, d[1] / len];
                let duplicate = lines.iter().any(|(p, e)| {
                    (e[0] * d[1] - e[1] * d[0]).abs() < 1e-12
                        && (e[0] * (a[1] - p[1]) - e[1] * (a[0] - p[0])).abs() < 1e-12 * scale
                });
                if !duplicate {
                    lines.push((a, d));
                }
            }
            for (a, d) in &lines {
                polys = polys.iter().flat_map(|p| clip(p, *a, *d, scale)).collect();
            }
            let singular: Vec<[f64; 2]> = features
                .singular_points
                .iter()
                .filter(|p| p.len() == 2)
                .map(|p| [p[0], p[1]])
                .collect();
            let mut out = Vec::new();
            for p in &polys {
                let apex = singular.iter().copied().find(|&s| touches(p, s, scale));
                match (apex, is_rect(p)) {
                    (None, Some((x, y))) => out.push(Cell::Rect { x, y }),
                    (apex, _) => fan(p, apex, scale, &mut out),
                }
            }
            out
        }
        _ => {
            let bb = domain.bounding_box();
            let boxes: Vec<Vec<[f64; 2]>> = match domain {
                DomainSpec::CellUnion { boxes } => boxes.clone(),
                _ => vec![bb],
            };
            boxes
                .into_iter()
                .map(|b| Cell::Box3 { b: [b[0], b[1], b[2]] })
                .collect()
        }
    }
}

/// Pieces of `[0, 1]` for one axis at a refinement level. With `singular`
/// the first piece is flagged for the quadratic substitution toward zero.
fn breaks(level: usize, singular: bool) -> Vec<(f64, f64, bool)> {
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    (0..n)
        .map(|i| (i as f64 * h, (i + 1) as f64 * h, singular && i == 0))
        .collect()
}

/// Emits nodes for the unit interval pieces; returns `(t, jacobian·weight,
/// substituted)`.
fn axis_nodes(level: usize, singular: bool, rule: &UnitRule, sing_rule: &UnitRule) -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    for (lo, hi, subst) in breaks(level, singular) {
        let len = hi - lo;
        if subst {
            // u = len·s², du = 2·len·s ds
            for (&s, &ws) in sing_rule.nodes.iter().zip(&sing_rule.weights) {
                out.push((lo + len * s * s, 2.0 * len * s * ws, true));
            }
        } else {
            for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
                out.push((lo + len * s, len * ws, false));
            }
        }
    }
    out
}

/// Appends the nodes of `cell` at `level` as flattened coordinates and
/// geometric weights (the weight function is applied later).
pub(crate) fn emit(
    cell: &Cell,
    level: usize,
    rule: &UnitRule,
    sing_rule: &UnitRule,
    coords: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    match cell {
        Cell::Interval { a, b, singular } => {
            let len = b - a;
            let h = 1.0 / (1usize << level) as f64;
            for (t, wt, subst) in axis_nodes(level, *singular != Side::None, rule, sing_rule) {
                let (x, offset) = match singular {
                    Side::High => {
                        let x = b - len * t;
                        (x, b - x)
                    }
                    _ => {
                        let x = a + len * t;
                        (x, x - a)
                    }
                };
                coords.push(x);
                if subst {
                    // Rounding moves x relative to the singular end; rebuild
                    // the Jacobian 2·sqrt(c·δ) of δ = c·s² from the realized
                    // offset so it stays consistent with w(x).
                    let c = len * h;
                    let s_w = wt / (2.0 * h * (t / h).sqrt());
                    weights.push(2.0 * (c * offset).sqrt() * s_w);
                } else {
                    weights.push(len * wt);
                }
            }
        }
        Cell::Rect { x, y } => {
            let ux = axis_nodes(level, false, rule, sing_rule);
            let (lx, ly) = (x[1] - x[0], y[1] - y[0]);
            for &(s, ws, _) in &ux {
                for &(t, wt, _) in &ux {
                    coords.push(x[0] + lx * s);
                    coords.push(y[0] + ly * t);
                    weights.push(lx * ly * ws * wt);
                }
            }
        }
        Cell::Tri { v, singular } => {
            let area2 = cross(v[0], v[1], v[2]).abs();
            let un = axis_nodes(level, *singular, rule, sing_rule);
            let vn = axis_nodes(level, false, rule, sing_rule);
            for &(u, wu, _) in &un {
                for &(t, wt, _) in &vn {
                    // collapsed map: v0 + u(v1 - v0) + u t (v2 - v1)
                    for k in 0..2 {
                        coords.push(v[0][k] + u * (v[1][k] - v[0][k]) + u * t * (v[2][k] - v[1][k]));
                    }
                    weights.push(area2 * u * wu * wt);
                }
            }
        }
        Cell::Box3 { b } => {
            let un = axis_nodes(level, false, rule, sing_rule);
            let l = [b[0][1] - b[0][0], b[1][1] - b[1][0], b[2][1] - b[2][0]];
            for &(s, ws, _) in &un {
                for &(t, wt, _) in &un {
                    for &(r, wr, _) in &un {
                        coords.extend([b[0][0] + l[0] * s, b[1][0] + l[1] * t, b[2][0] + l[2] * r]);
                        weights.push(l[0] * l[1] * l[2] * ws * wt * wr);
                    }
                }
            }
        }
    }
}

/// Number of nodes `emit` would produce.
pub(crate) fn node_count(cell: &Cell, level: usize, q: usize, qs: usize) -> usize {
    let n = 1usize << level;
    let singular_axis = qs + (n - 1) * q;
    let axis = n * q;
    match cell {
        Cell::Interval { singular, .. } => {
            if *singular == Side::None {
                axis
            } else {
                singular_axis
            }
        }
        Cell::Rect { .. } => axis * axis,
        Cell::Tri { singular, .. } => axis * if *singular { singular_axis } else { axis },
        Cell::Box3 { .. } => axis * axis * axis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Segment;

    #[test]
    fn one_dimensional_cuts() {
        let f = StructureMap {
            discontinuity_segments: vec![Segment::point(vec![0.0])],
            singular_points: vec![vec![-1.0], vec![1.0]],
            singular_edges: vec![],
        };
        let cells = base_cells(&DomainSpec::interval(-1.0, 1.0), &f);
        assert_eq!(cells.len(), 2);
        assert!(matches!(
            cells[0],
            Cell::Interval {
                singular: Side::Low,
                ..
            }
        ));
        assert!(matches!(
            cells[1],
            Cell::Interval {
                singular: Side::High,
                ..
            }
        ));
    }

    #[test]
    fn triangle_indicator_cuts_cover_the_square() {
        let q = DomainSpec::triangle([-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5]);
        let f = StructureMap {
            discontinuity_segments: q.boundary_segments(),
            ..StructureMap::default()
        };
        let cells = base_cells(&DomainSpec::square(-1.0, 1.0), &f);
        let area: f64 = cells
            .iter()
            .map(|c| match c {
                Cell::Rect { x, y } => (x[1] - x[0]) * (y[1] - y[0]),
                Cell::Tri { v, .. } => 0.5 * cross(v[0], v[1], v[2]).abs(),
                _ => 0.0,
            })
            .sum();
        assert!((area - 4.0).abs() < 1e-14);
    }

    #[test]
    fn singular_corner_becomes_apex() {
        let f = StructureMap::with_singular_point(vec![0.0, 0.0]);
        let cells = base_cells(&DomainSpec::rect([0.0, 1.0 / 3.0], [-1.0 / 3.0, 0.0]), &f);
        assert_eq!(cells.len(), 2);
        for c in cells {
            match c {
                Cell::Tri { v, singular } => {
                    assert!(singular);
                    assert_eq!(v[0], [0.0, 0.0]);
                }
                _ => panic!("expected triangles"),
            }
        }
    }

    #[test]
    fn node_counts_match_emission() {
        let rule = UnitRule::gauss_legendre(5);
        let srule = UnitRule::gauss_legendre(10);
        let cells = [
            Cell::Interval {
                a: 0.0,
                b: 1.0,
                singular: Side::High,
            },
            Cell::Rect {
                x: [0.0, 1.0],
                y: [0.0, 2.0],
            },
            Cell::Tri {
                v: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
                singular: true,
            },
        ];
        for c in &cells {
            for level in 0..3 {
                let (mut xs, mut ws) = (Vec::new(), Vec::new());
                emit(c, level, &rule, &srule, &mut xs, &mut ws);
                assert_eq!(ws.len(), node_count(c, level, 5, 10));
            }
        }
    }
}
