use std::f64::consts::PI;
use std::sync::Arc;

use eigenshape::functionals::SetFunctional;
use eigenshape::variational::{self as var, OptimizerConfig, ProblemKind, VariationalProblem};
use eigenshape::Error;

mod common;
use common::bessel_zero;

fn quick() -> OptimizerConfig {
    OptimizerConfig {
        max_evaluations: 120,
        modes: 4,
        ..OptimizerConfig::default()
    }
}

#[test]
fn faber_krahn_anchor() {
    let c = 2.0 * PI.sqrt();
    let run = var::minimize_ik("perimeter", 1, c, &OptimizerConfig::default(), 1).unwrap();
    let exact = PI * bessel_zero(0, 1).powi(2);
    assert!((run.value - exact).abs() / exact < 0.02, "{}", run.value);
    assert!(run.diagnostics["hausdorff_to_disc_rel"] < 0.05);
    assert!(run.diagnostics["constraint_residual"] < 1e-12);
    // history only ever improves
    assert!(run.history.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn minimizer_beats_rescaled_disc() {
    // I_k(c) ≤ λ_k(α_c D): the disc with perimeter c is feasible
    let c = 2.0 * PI.sqrt();
    let run = var::minimize_ik("perimeter", 2, c, &quick(), 3).unwrap();
    let disc_l2 = PI * bessel_zero(1, 1).powi(2);
    assert!(run.value <= disc_l2 * 1.01, "{} vs {disc_l2}", run.value);
}

#[test]
fn two_equal_discs_for_second_eigenvalue() {
    // λ_2 at unit measure: two discs of area 1/2 give 2πj01²
    let p = VariationalProblem::union(ProblemKind::Mk, 2, 1.0, 2);
    let run = var::optimize(&p, &quick(), 5, None).unwrap();
    let exact = 2.0 * PI * bessel_zero(0, 1).powi(2);
    assert!((run.value - exact).abs() / exact < 0.03, "{}", run.value);
    assert_eq!(run.minimizer.components().len(), 2);
    assert!((run.minimizer.measure() - 1.0).abs() < 1e-9);
}

#[test]
fn runs_are_deterministic() {
    let p = VariationalProblem::hk("moment", 1);
    let cfg = OptimizerConfig {
        max_evaluations: 40,
        ..quick()
    };
    let a = var::optimize(&p, &cfg, 9, None).unwrap();
    let b = var::optimize(&p, &cfg, 9, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn custom_functional_must_be_homogeneous() {
    let f = SetFunctional::custom(
        "shifted",
        1.0,
        Arc::new(|b: &eigenshape::ConvexBody| b.perimeter() + 0.5),
    )
    .unwrap();
    let p = VariationalProblem::ik("shifted", 1, 1.0);
    let err = var::optimize_with(&p, &f, &quick(), 1, None).unwrap_err();
    assert!(matches!(err, Error::HypothesisFailed(_)), "{err:?}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let p = VariationalProblem::ik("perimeter", 1, 1.0);
    let bad = OptimizerConfig {
        max_evaluations: 5000,
        ..quick()
    };
    assert!(var::optimize(&p, &bad, 1, None).is_err());
    let bad = OptimizerConfig {
        modes: 40,
        ..quick()
    };
    assert!(var::optimize(&p, &bad, 1, None).is_err());
    let unknown = VariationalProblem::ik("volume", 1, 1.0);
    assert!(var::optimize(&unknown, &quick(), 1, None).is_err());
}

#[test]
fn jk_curve_envelope_is_exact() {
    let grid = [1.0, 2.0, 2.0 * PI.sqrt(), 5.0];
    let cfg = OptimizerConfig {
        max_evaluations: 60,
        ..quick()
    };
    let curve = var::jk_curve(1, &grid, 1, &cfg, 2, None).unwrap();
    let v: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
    for (i, w) in v.windows(2).enumerate() {
        assert!(w[1] <= w[0]);
        let (c0, c1) = (grid[i], grid[i + 1]);
        assert!(c0 * c0 * w[0] <= c1 * c1 * w[1]);
    }
    assert!(curve.to_csv().starts_with("c,J_k,regime_label\n"));
    assert!(var::jk_curve(1, &[2.0, 1.0], 1, &cfg, 2, None).is_err());
}

#[test]
fn thresholds_for_k1_are_closed_form() {
    let est = var::estimate_thresholds(1, &quick(), 0).unwrap();
    assert_eq!(est.mu_k, 2.0 * PI.sqrt());
    assert_eq!(est.pi_k, 1.0 / (4.0 * PI));
    assert_eq!(var::regime_label(4.0, Some(&est)), "measure-bound");
    assert_eq!(var::regime_label(3.0, Some(&est)), "perimeter-bound");
}

#[test]
fn mismatched_runs_are_refused() {
    let cfg = OptimizerConfig {
        max_evaluations: 20,
        ..quick()
    };
    let a = var::minimize_ik("perimeter", 1, 1.0, &cfg, 1).unwrap();
    let h = var::minimize_hk("moment", 1, &cfg, 1).unwrap();
    assert!(matches!(
        var::penalized_equivalence(&a, &h),
        Err(Error::MismatchedRuns(_))
    ));
    let b = var::minimize_ik("perimeter", 3, 1.0, &cfg, 1).unwrap();
    assert!(matches!(
        var::convergence_diagnostics(&[a, b], 0.05),
        Err(Error::MismatchedRuns(_))
    ));
}
