use std::sync::Arc;

use specweight::cubature::{build_rule, verify_theta, OptimizerConfig};
use specweight::experiments::builtins;
use specweight::experiments::decay::{run_decay_suite, run_gfun, DecayConfig};
use specweight::experiments::gpc::{run_gpc, GpcConfig};
use specweight::experiments::integration::{run_integration_example, IntegrationConfig};
use specweight::experiments::lshape::{reference_scale, run_lshape};
use specweight::orthogonalization::gram_schmidt;
use specweight::projection::{project, project_with};
use specweight::refquad::Oracle;

#[test]
fn example_one_decay_rates() {
    let suite = run_decay_suite(1, &DecayConfig::default()).unwrap();
    let s1 = suite.case("smooth1d", "legendre1d").unwrap().report.slope;
    let s2 = suite.case("smooth1d", "parabolic1d").unwrap().report.slope;
    assert!((s1 - s2).abs() <= 0.1 * s1.abs().max(s2.abs()), "{s1} {s2}");
    for w in ["legendre1d", "parabolic1d"] {
        let f = suite.case("smooth1d", w).unwrap().report.slope;
        let g = suite.case("c3kink1d", w).unwrap().report.slope;
        let h = suite.case("kink1d", w).unwrap().report.slope;
        assert!(f < g && g < h, "{w}: {f} {g} {h}");
    }
    assert!(suite.lemma.iter().all(|l| l.rows.iter().all(|r| r.pass)));
}

#[test]
fn example_two_constant_and_lemma() {
    let suite = run_decay_suite(2, &DecayConfig::default()).unwrap();
    for l in &suite.lemma {
        assert!((l.constant - 2f64.powf(-0.25)).abs() < 1e-12);
        assert_eq!(l.rows.len(), 41);
        assert!(l.rows.iter().all(|r| r.pass), "{}", l.function);
    }
}

#[test]
fn discontinuous_integrand_decays_slowly() {
    let cfg = DecayConfig::default();
    let r = run_gfun(&cfg).unwrap();
    assert!(r.g_legendre.report.slope > 0.5 * r.f_step.report.slope);
    let late = r.g_legendre.coeffs[180..200].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    assert!(late >= 1e-4, "{late}");
}

#[test]
fn discontinuous_integrand_matches_step_weight_moments() {
    // g = f·w₂, so its constant-weight coefficients are ⟨f, Φ_k⟩_{w₂} / 4.
    let sq = builtins::weighted_domain("legendre2d").unwrap();
    let step = builtins::weighted_domain("step2d").unwrap();
    let b = Arc::new(gram_schmidt(&sq.weight, &sq.domain, 5, 1e-12).unwrap());
    let g = builtins::function("gfun2d").unwrap();
    let f = builtins::function("smooth2d").unwrap();
    let e = project_with(&g.f, &b, 1e-12, &g.hints).unwrap();
    let k = b.len();
    let integrand = |x: &[f64], out: &mut [f64]| {
        b.eval_into(x, out);
        let fx = (f.f)(x);
        out.iter_mut().for_each(|v| *v *= fx);
    };
    let m = Oracle::new(1e-12)
        .integrate_many(&integrand, k, &step.weight, &step.domain, &Default::default())
        .unwrap();
    for (c, v) in e.coeffs().iter().zip(&m.values) {
        assert!((c - v / 4.0).abs() < 1e-10, "{c} {v}");
    }
}

#[test]
fn example_one_integration_reaches_target() {
    let r = run_integration_example(1, &IntegrationConfig::default()).unwrap();
    let last = r.rows.last().unwrap();
    assert_eq!(last.points, 12);
    assert!(last.error.unwrap() < 1e-6);
    assert!(r.error_slope(1).unwrap() < 0.0);
    assert!(r.rows.iter().all(|row| row.failure.is_none()));
}

#[test]
fn triangle_rules_stay_inside() {
    let r = run_integration_example(3, &IntegrationConfig::default()).unwrap();
    let wd = builtins::weighted_domain("triangle2d").unwrap();
    assert_eq!(r.rules.len(), 6);
    for rule in &r.rules {
        for x in &rule.points {
            assert!(wd.domain.contains(x), "{x:?}");
        }
    }
}

#[test]
fn theta_check_holds_for_example_one() {
    let wd = builtins::weighted_domain("step1d").unwrap();
    let f = builtins::function("exp1d").unwrap();
    let b = Arc::new(gram_schmidt(&wd.weight, &wd.domain, 9, 1e-12).unwrap());
    let rule = build_rule(&b, &OptimizerConfig::default()).unwrap();
    assert_eq!(rule.len(), 10);
    let e = project(&f.f, &b, 1e-12).unwrap();
    let rows = verify_theta(&rule, f.f, &e, 1.0).unwrap();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!((r.bound - 1.0 / 9.0).abs() < 1e-15);
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn lshape_totals_and_symmetry() {
    let r = run_lshape(4, 1e-12).unwrap();
    for d in 0..4 {
        let m: f64 = r.cells.iter().map(|c| c.modified[d].powi(2)).sum();
        let c: f64 = r.cells.iter().map(|c| c.classical[d].powi(2)).sum();
        assert!((r.total_modified[d].powi(2) - m).abs() <= 1e-12 * m);
        assert!((r.total_classical[d].powi(2) - c).abs() <= 1e-12 * c);
    }
    assert!(r.symmetry_defect() <= 1e-8);
    let s = &r.cells[r.singular_cell];
    let scale = reference_scale();
    assert!((s.modified[1] * scale / 1.3364e-6 - 1.0).abs() < 0.1);
    assert!((s.classical[1] * scale / 1.28745e-3 - 1.0).abs() < 0.1);
    assert!(r.improvement_factor(2) >= 300.0);
}

#[test]
fn gpc_coefficients_converge() {
    let r = run_gpc(&GpcConfig {
        n_max: 3,
        ..GpcConfig::default()
    })
    .unwrap();
    let h = r.h_values();
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
    assert_eq!(r.numerical.iter().map(|v| v.len()).collect::<Vec<_>>(), [3, 6, 10]);
    assert_eq!(r.symbolic.len(), 10);
    for (n, num) in r.numerical.iter().enumerate() {
        let h_n: f64 = num.iter().zip(&r.symbolic).map(|(a, b)| (a - b).powi(2)).sum();
        assert_eq!(h_n, h[n]);
    }
}
