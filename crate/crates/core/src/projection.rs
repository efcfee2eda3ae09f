//! Spectral expansions in an orthonormal basis, tail norms, coefficient
//! decay reports and the tail-norm comparison check between two weights.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthogonalization::{oracle_order, OrthonormalBasis};
use crate::polycore::GradedOrder;
use crate::refquad::Oracle;
use crate::weights::{DomainSpec, StructureMap, WeightKind, WeightSpec};

/// Coefficients `f̂_k = ⟨f, Ψ_k⟩_w` together with `‖f‖²_w`.
#[derive(Debug, Clone)]
pub struct Expansion {
    basis: Arc<OrthonormalBasis>,
    coeffs: Vec<f64>,
    norm_sq: f64,
    oracle_tol: f64,
}

impl Expansion {
    /// Assembles an expansion from precomputed parts.
    pub fn from_parts(basis: Arc<OrthonormalBasis>, coeffs: Vec<f64>, norm_sq: f64, oracle_tol: f64) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a basis of {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self {
            basis,
            coeffs,
            norm_sq,
            oracle_tol,
        })
    }

    pub fn basis(&self) -> &Arc<OrthonormalBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `‖f‖²_w` from the oracle.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn oracle_tol(&self) -> f64 {
        self.oracle_tol
    }

    fn prefix(&self, n: usize) -> Result<usize> {
        if n > self.basis.degree() {
            return Err(Error::InvalidArgument(format!(
                "degree {n} exceeds the basis degree {}",
                self.basis.degree()
            )));
        }
        Ok(self.basis.order().prefix_len(n))
    }
}

/// Projects `f` onto `b`; coefficients and `‖f‖²` come from one vector
/// oracle integral.
pub fn project<F>(f: &F, b: &Arc<OrthonormalBasis>, tol: f64) -> Result<Expansion>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    project_with(f, b, tol, &StructureMap::default())
}

/// As [`project`], with extra features of `f` (kinks, singular points) that
/// the quadrature partition should follow.
pub fn project_with<F>(f: &F, b: &Arc<OrthonormalBasis>, tol: f64, hints: &StructureMap) -> Result<Expansion>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = b.len();
    let oracle = Oracle::new(tol).with_order(oracle_order(b.weight(), b.degree()));
    let g = |x: &[f64], out: &mut [f64]| {
        let fx = f(x);
        b.eval_into(x, &mut out[..k]);
        out[..k].iter_mut().for_each(|v| *v *= fx);
        out[k] = fx * fx;
    };
    let r = oracle.integrate_many(&g, k + 1, b.weight(), b.domain(), hints)?;
    let mut coeffs = r.values;
    let norm_sq = coeffs.pop().unwrap_or(0.0);
    Expansion::from_parts(b.clone(), coeffs, norm_sq, tol)
}

/// `Σ_{|ν_k| ≤ n} f̂_k Ψ_k(x)`.
pub fn truncated_eval(e: &Expansion, n: usize, x: &[f64]) -> Result<f64> {
    let m = e.prefix(n)?;
    if x.len() != e.basis.dim() {
        return Err(Error::InvalidArgument("point dimension mismatch".into()));
    }
    let mut v = vec![0.0; m];
    e.basis.eval_into(x, &mut v);
    Ok(v.iter().zip(&e.coeffs).map(|(a, c)| a * c).sum())
}

/// `‖Q_n f‖_w` from the Parseval residual `‖f‖² - Σ_{|ν_k| ≤ n} f̂_k²`.
pub fn tail_norm(e: &Expansion, n: usize) -> Result<f64> {
    let m = e.prefix(n)?;
    let captured: f64 = e.coeffs[..m].iter().map(|c| c * c).sum();
    let radicand = e.norm_sq - captured;
    if radicand < -10.0 * e.oracle_tol * e.norm_sq.max(1.0) {
        return Err(Error::InconsistentExpansion { radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `‖f - P_n f‖_w` for `n = 0..=degree`, each integrated directly. Avoids
/// the cancellation of the Parseval form once the tail drops below
/// `sqrt(tol)`.
pub fn tail_norms_direct<F>(f: &F, e: &Expansion, hints: &StructureMap) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let b = &e.basis;
    let n_max = b.degree();
    let ends: Vec<usize> = (0..=n_max).map(|n| b.order().prefix_len(n)).collect();
    let oracle = Oracle::new(e.oracle_tol).with_order(oracle_order(b.weight(), b.degree()));
    let g = |x: &[f64], out: &mut [f64]| {
        let mut v = vec![0.0; b.len()];
        b.eval_into(x, &mut v);
        let mut acc = 0.0;
        let mut k = 0;
        for (n, &end) in ends.iter().enumerate() {
            while k < end {
                acc += e.coeffs[k] * v[k];
                k += 1;
            }
            let r = f(x) - acc;
            out[n] = r * r;
        }
    };
    let r = oracle.integrate_many(&g, n_max + 1, b.weight(), b.domain(), hints)?;
    Ok(r.values.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: usize,
    pub degree: usize,
    pub coeff: f64,
    pub log10_abs: f64,
}

/// Coefficient table plus a least-squares line through the last envelope
/// points. The fit abscissa is the 1-based basis position `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub envelope_points: Vec<usize>,
    pub fit_points: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
}

/// Envelope of a coefficient sequence.
///
/// In 1D every coefficient above `noise_floor` is an envelope point. In
/// higher dimensions each total-degree block contributes its largest
/// coefficient, kept only if it is a local maximum of the sequence of block
/// maxima (end blocks compare against their single neighbour) and above the
/// noise floor.
pub fn envelope(order: &GradedOrder, coeffs: &[f64], noise_floor: f64) -> Vec<usize> {
    if order.dim() == 1 {
        return (0..coeffs.len()).filter(|&k| coeffs[k].abs() > noise_floor).collect();
    }
    let mut block_max: Vec<(usize, f64)> = Vec::new();
    for n in 0..=order.max_degree() {
        let lo = if n == 0 { 0 } else { order.prefix_len(n - 1) };
        let hi = order.prefix_len(n).min(coeffs.len());
        if lo >= hi {
            break;
        }
        let mut best = (lo, coeffs[lo].abs());
        for (k, c) in coeffs.iter().enumerate().take(hi).skip(lo + 1) {
            if c.abs() > best.1 {
                best = (k, c.abs());
            }
        }
        block_max.push(best);
    }
    let m = block_max.len();
    (0..m)
        .filter(|&i| {
            let v = block_max[i].1;
            let left = i == 0 || v >= block_max[i - 1].1;
            let right = i + 1 == m || v >= block_max[i + 1].1;
            v > noise_floor && left && right
        })
        .map(|i| block_max[i].0)
        .collect()
}

/// Least-squares line through `(x_i, y_i)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::FitUndefined("fewer than two points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUndefined("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Decay report from a raw coefficient vector in graded order.
pub fn decay_report_coeffs(
    order: &GradedOrder,
    coeffs: &[f64],
    n_fit_peaks: usize,
    noise_floor: f64,
) -> Result<DecayReport> {
    let rows: Vec<DecayRow> = coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| DecayRow {
            k,
            degree: order.indices()[k].degree() as usize,
            coeff: c,
            log10_abs: c.abs().log10(),
        })
        .collect();
    let env = envelope(order, coeffs, noise_floor);
    if env.is_empty() {
        return Err(Error::FitUndefined("all coefficients are below the noise floor".into()));
    }
    if env.len() < n_fit_peaks.max(2) {
        return Err(Error::FitUndefined(format!(
            "{} envelope points, {} requested",
            env.len(),
            n_fit_peaks
        )));
    }
    let fit_points = env[env.len() - n_fit_peaks.max(2)..].to_vec();
    let xs: Vec<f64> = fit_points.iter().map(|&k| (k + 1) as f64).collect();
    let ys: Vec<f64> = fit_points.iter().map(|&k| coeffs[k].abs().log10()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys)?;
    Ok(DecayReport {
        rows,
        envelope_points: env,
        fit_points,
        slope,
        intercept,
    })
}

/// Default noise floor for an expansion: coefficients below it are treated
/// as quadrature noise.
pub fn noise_floor(e: &Expansion) -> f64 {
    let max = e.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    (1e3 * f64::EPSILON * max).max(10.0 * e.oracle_tol)
}

pub fn decay_report(e: &Expansion, n_fit_peaks: usize) -> Result<DecayReport> {
    decay_report_coeffs(e.basis.order(), &e.coeffs, n_fit_peaks, noise_floor(e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    /// `‖Q_n² f‖₂`
    pub tail2: f64,
    /// `C·‖Q_n¹ f‖₁`
    pub bound: f64,
    pub pass: bool,
}

/// Checks `‖Q_n² f‖₂ ≤ C‖Q_n¹ f‖₁ + slack` for `n = 0..=n_max`, with tails
/// integrated directly.
pub fn comparison_check<F>(
    f: &F,
    basis1: &Arc<OrthonormalBasis>,
    basis2: &Arc<OrthonormalBasis>,
    c: f64,
    n_max: usize,
    tol: f64,
    hints: &StructureMap,
) -> Result<Vec<ComparisonRow>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if basis1.domain() != basis2.domain() {
        return Err(Error::InvalidArgument("bases live on different domains".into()));
    }
    if n_max > basis1.degree().min(basis2.degree()) {
        return Err(Error::InvalidArgument(format!("n_max {n_max} exceeds a basis degree")));
    }
    let e1 = project_with(f, basis1, tol, hints)?;
    let e2 = project_with(f, basis2, tol, hints)?;
    let t1 = tail_norms_direct(f, &e1, hints)?;
    let t2 = tail_norms_direct(f, &e2, hints)?;
    let slack = 10.0 * tol;
    Ok((0..=n_max)
        .map(|n| {
            let bound = c * t1[n];
            ComparisonRow {
                n,
                tail2: t2[n],
                bound,
                pass: t2[n] <= bound + slack,
            }
        })
        .collect())
}

/// Supremum of a weight over a domain when it has a closed form.
fn sup_weight(w: &WeightSpec, domain: &DomainSpec) -> Option<f64> {
    let s = w.normalization;
    match &w.kind {
        WeightKind::Constant { value } => Some(s * value),
        WeightKind::IndicatorComposite { .. } => Some(2.0 * s),
        WeightKind::RadialPower { alpha } if *alpha >= 0.0 => {
            let r2: f64 = domain
                .bounding_box()
                .iter()
                .map(|[lo, hi]| lo.abs().max(hi.abs()).powi(2))
                .sum();
            Some(s * r2.powf(*alpha))
        }
        WeightKind::PolyFactor { terms } if domain.dim() == 1 => {
            let bb = domain.bounding_box()[0];
            let mut coef = Vec::<f64>::new();
            for t in terms {
                let e = t.exponents[0] as usize;
                if coef.len() <= e {
                    coef.resize(e + 1, 0.0);
                }
                coef[e] += t.coeff;
            }
            Some(s * poly_max(&coef, bb[0], bb[1]))
        }
        _ => None,
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Maximum of a 1D polynomial on `[a, b]`: endpoints plus the roots of the
/// derivative, bracketed on a fine grid and refined by bisection.
fn poly_max(c: &[f64], a: f64, b: f64) -> f64 {
    let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
    let mut best = horner(c, a).max(horner(c, b));
    let n = 4096;
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (mut flo, fhi) = (horner(&d, lo), horner(&d, hi));
        if flo == 0.0 {
            best = best.max(horner(c, lo));
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let fm = horner(&d, mid);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        best = best.max(horner(c, 0.5 * (lo + hi)));
    }
    best
}

/// `C = sqrt(sup_Ω w₂/w₁)` for weight pairs with a closed-form ratio.
pub fn auto_constant(w1: &WeightSpec, w2: &WeightSpec, domain: &DomainSpec) -> Result<f64> {
    let ratio = match (&w1.kind, &w2.kind) {
        (WeightKind::Chebyshev1d, WeightKind::InvSqrt1d) => {
            // w₂/w₁ = (s₂/s₁)·sqrt(1 + |x|)
            let bb = domain.bounding_box()[0];
            let m = bb[0].abs().max(bb[1].abs()).min(1.0);
            Some(w2.normalization / w1.normalization * (1.0 + m).sqrt())
        }
        (WeightKind::Constant { value }, _) => sup_weight(w2, domain).map(|s| s / (w1.normalization * value)),
        _ => None,
    };
    match ratio {
        Some(r) if r.is_finite() && r > 0.0 => Ok(r.sqrt()),
        _ => Err(Error::CannotDeriveConstant(format!(
            "no closed-form bound for sup w2/w1 with w1 = {:?}, w2 = {:?}",
            w1.kind, w2.kind
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthogonalization::gram_schmidt;
    use crate::polycore::enumerate_multi_indices;
    use crate::refquad::DEFAULT_TOL;
    use crate::weights::PolyTerm;

    fn legendre(n: usize) -> Arc<OrthonormalBasis> {
        Arc::new(
            gram_schmidt(
                &WeightSpec::constant(0.5),
                &DomainSpec::interval(-1.0, 1.0),
                n,
                DEFAULT_TOL,
            )
            .unwrap(),
        )
    }

    fn quad_weight() -> WeightSpec {
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
        })
    }

    #[test]
    fn projection_examples() {
        let b = legendre(6);
        let psi3 = |x: &[f64]| b.eval(3, x);
        let e = project(&psi3, &b, DEFAULT_TOL).unwrap();
        for (k, c) in e.coeffs().iter().enumerate() {
            let target = if k == 3 { 1.0 } else { 0.0 };
            assert!((c - target).abs() < 1e-10);
        }
        let e = project(&|x: &[f64]| x[0], &b, DEFAULT_TOL).unwrap();
        assert!((e.coeffs()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(e.coeffs().iter().enumerate().all(|(k, c)| k == 1 || c.abs() < 1e-14));
    }

    #[test]
    fn spectral_decay_of_analytic_function() {
        let b = legendre(40);
        let f = |x: &[f64]| (10.0 * x[0]).sin() + (8.0 * x[0]).cos();
        let e = project(&f, &b, DEFAULT_TOL).unwrap();
        assert!(e.coeffs()[30..].iter().all(|c| c.abs() < 1e-6));
        let parseval: f64 = e.coeffs().iter().map(|c| c * c).sum();
        assert!(parseval <= e.norm_sq() + 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn truncated_eval_examples() {
        let b = legendre(5);
        let p = |x: &[f64]| 1.0 - 2.0 * x[0] + 0.5 * x[0].powi(4);
        let e = project(&p, &b, DEFAULT_TOL).unwrap();
        for i in 0..20 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((truncated_eval(&e, 5, &[x]).unwrap() - p(&[x])).abs() < 1e-9);
        }
        // n = 0 gives the weighted mean: ∫ (1 - 2x + x⁴/2)/2 = 1 + 1/10
        assert!((truncated_eval(&e, 0, &[0.3]).unwrap() - 1.1).abs() < 1e-13);
        assert!(matches!(truncated_eval(&e, 6, &[0.0]), Err(Error::InvalidArgument(_))));

        let b = legendre(10);
        let h = |x: &[f64]| (x[0] + 0.5).abs();
        let hints = StructureMap::with_breakpoints(&[-0.5]);
        let e = project_with(&h, &b, DEFAULT_TOL, &hints).unwrap();
        let band = tail_norm(&e, 10).unwrap();
        // pointwise error at a smooth point stays within a few tail norms
        assert!((truncated_eval(&e, 10, &[0.0]).unwrap() - 0.5).abs() < 5.0 * band);
    }

    #[test]
    fn tail_norm_examples() {
        let b = legendre(4);
        let e = project(&|x: &[f64]| x[0] * x[0], &b, DEFAULT_TOL).unwrap();
        assert!(tail_norm(&e, 2).unwrap() < 1e-8);
        let expect = 2.0 / (3.0 * 5f64.sqrt());
        assert!((tail_norm(&e, 1).unwrap() - expect).abs() < 1e-12);

        let bad = Expansion::from_parts(b.clone(), vec![2.0, 0.0, 0.0, 0.0, 0.0], 1.0, DEFAULT_TOL).unwrap();
        assert!(matches!(tail_norm(&bad, 0), Err(Error::InconsistentExpansion { .. })));
    }

    #[test]
    fn direct_tails_match_parseval_where_both_are_accurate() {
        let b = Arc::new(gram_schmidt(&quad_weight(), &DomainSpec::interval(-1.0, 1.0), 20, DEFAULT_TOL).unwrap());
        let f = |x: &[f64]| (10.0 * x[0]).sin() + (8.0 * x[0]).cos();
        let e = project(&f, &b, DEFAULT_TOL).unwrap();
        let direct = tail_norms_direct(&f, &e, &StructureMap::default()).unwrap();
        for n in 0..=20 {
            let p = tail_norm(&e, n).unwrap();
            if p > 1e-4 {
                assert!((p - direct[n]).abs() < 1e-9 * p.max(1.0), "n={n}");
            }
        }
        assert!(direct[20] > 0.0);
    }

    #[test]
    fn best_approximation_property() {
        use rand::{Rng, SeedableRng};
        let b = legendre(6);
        let f = |x: &[f64]| (x[0] + 0.5).abs();
        let hints = StructureMap::with_breakpoints(&[-0.5]);
        let e = project_with(&f, &b, DEFAULT_TOL, &hints).unwrap();
        let best = tail_norm(&e, 6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gf = |x: &[f64]| f(x) - g.iter().rev().fold(0.0, |a, c| a * x[0] + c);
            let err = crate::refquad::Oracle::new(DEFAULT_TOL)
                .integrate(
                    &|x: &[f64]| gf(x).powi(2),
                    &WeightSpec::constant(0.5),
                    &DomainSpec::interval(-1.0, 1.0),
                    &hints,
                )
                .unwrap()
                .value
                .sqrt();
            assert!(best <= err + 10.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn geometric_coefficients_fit_exactly() {
        let order = enumerate_multi_indices(1, 30).unwrap();
        let c: Vec<f64> = (0..=30).map(|k| 10f64.powf(-0.1 * k as f64)).collect();
        let r = decay_report_coeffs(&order, &c, 10, 0.0).unwrap();
        assert!((r.slope + 0.1).abs() < 1e-12);
        let zeros = vec![0.0; 31];
        assert!(matches!(
            decay_report_coeffs(&order, &zeros, 4, 1e-300),
            Err(Error::FitUndefined(_))
        ));
    }

    #[test]
    fn two_dimensional_envelope_uses_block_peaks() {
        let order = enumerate_multi_indices(2, 6).unwrap();
        // odd degree blocks are tiny, so only even blocks form peaks
        let c: Vec<f64> = order
            .indices()
            .iter()
            .map(|m| {
                let d = m.degree() as i32;
                let mid = m.0[0] as i32 == d / 2;
                let base = 10f64.powi(-d);
                if d % 2 == 1 {
                    base * 1e-3
                } else if mid {
                    base
                } else {
                    base * 1e-1
                }
            })
            .collect();
        let env = envelope(&order, &c, 0.0);
        let degrees: Vec<u32> = env.iter().map(|&k| order.indices()[k].degree()).collect();
        assert_eq!(degrees, vec![0, 2, 4, 6]);
        for &k in &env {
            let m = &order.indices()[k];
            assert_eq!(m.0[0], m.degree() / 2);
        }
    }

    #[test]
    fn auto_constants() {
        let i = DomainSpec::interval(-1.0, 1.0);
        let c = auto_constant(&WeightSpec::constant(0.5), &quad_weight(), &i).unwrap();
        assert!((c - 1.5f64.sqrt()).abs() < 1e-12);
        let c = auto_constant(
            &WeightSpec::new(WeightKind::Chebyshev1d),
            &WeightSpec::scaled(WeightKind::InvSqrt1d, 0.5),
            &i,
        )
        .unwrap();
        assert!((c - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!(matches!(
            auto_constant(
                &WeightSpec::constant(0.5),
                &WeightSpec::new(WeightKind::Chebyshev1d),
                &i
            ),
            Err(Error::CannotDeriveConstant(_))
        ));
    }

    #[test]
    fn lemma_holds_for_kink_function() {
        let i = DomainSpec::interval(-1.0, 1.0);
        let b1 = legendre(40);
        let b2 = Arc::new(gram_schmidt(&quad_weight(), &i, 40, DEFAULT_TOL).unwrap());
        let c = auto_constant(b1.weight(), b2.weight(), &i).unwrap();
        let h = |x: &[f64]| (x[0] + 0.5).abs();
        let rows = comparison_check(
            &h,
            &b1,
            &b2,
            c,
            40,
            DEFAULT_TOL,
            &StructureMap::with_breakpoints(&[-0.5]),
        )
        .unwrap();
        assert_eq!(rows.len(), 41);
        assert!(rows.iter().all(|r| r.pass));
    }
}
