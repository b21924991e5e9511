//! End-to-end checks of the full pipeline on the bundled cattle data.
//!
//! The frozen constants below were computed with an independent
//! implementation of the same estimator (NumPy/SciPy): ordinary least
//! squares by normal equations, the subspace objective optimized by
//! randomized multistart descent, and chi-squared quantiles from SciPy.

use approx::assert_relative_eq;
use wenvelope::cattle::cattle_dataset;
use wenvelope::diagnostics::{lrt_statistic, select_dimension_lrt};
use wenvelope::weights::{compute_weights, select_dimension_ic};
use wenvelope::{fit_weighted_envelope, OptimizerSettings, Scheme};

/// Likelihood-ratio ladder from the independent implementation.
const LAMBDA_ORACLE: [f64; 10] = [
    13.147002, 7.069194, 3.192121, 1.777427, 0.799492, 0.169128, 0.051608, 0.023929, 0.008019,
    0.0,
];

/// Criterion values from the independent implementation.
const B_ORACLE: [f64; 10] = [
    4078.932649, 4076.949187, 4077.166458, 4079.846109, 4082.962518, 4086.426498, 4090.403323,
    4094.469989, 4098.548423, 4102.634749,
];

const LOGLIK_FULL_ORACLE: f64 = -1897.7794534170;

const BETA_OLS_ORACLE: [f64; 10] = [
    -2.43333333, -3.33333333, -3.13333333, -4.73333333, -4.73333333, -5.50000000, 4.80000000,
    4.53333333, 2.86666667, -5.00000000,
];

#[test]
fn cattle_pipeline_matches_independent_implementation() {
    let analysis = fit_weighted_envelope(
        cattle_dataset().unwrap(),
        Scheme::Bic,
        &OptimizerSettings::default(),
    )
    .unwrap();

    assert_eq!(analysis.ols.n, 60);
    assert_eq!(analysis.ols.p(), 1);
    assert_eq!(analysis.ols.r(), 10);

    // moments agree to high precision (pure linear algebra)
    assert_relative_eq!(analysis.ols.loglik_full, LOGLIK_FULL_ORACLE, epsilon = 1e-6);
    for (got, want) in analysis.ols.beta_ols.iter().zip(BETA_OLS_ORACLE) {
        assert_relative_eq!(*got, want, epsilon = 1e-7);
    }

    // optimizer outputs agree with the independent optimizer
    for (fit, want) in analysis.fit.per_dimension.iter().zip(LAMBDA_ORACLE) {
        let lambda = lrt_statistic(fit, &analysis.ols).unwrap().lambda;
        assert!(
            (lambda - want).abs() < 1e-3,
            "j = {}: lambda {lambda} vs oracle {want}",
            fit.j
        );
    }
    for (got, want) in analysis.criteria.iter().zip(B_ORACLE) {
        assert!((got - want).abs() < 1e-3, "criterion {got} vs {want}");
    }

    // selections: the likelihood ratio test stops at dimension 1; the
    // criterion argmin lands on dimension 2 (b_2 beats b_3 by 0.22)
    let u_lrt = select_dimension_lrt(&analysis.fit.per_dimension, &analysis.ols, 0.05).unwrap();
    assert_eq!(u_lrt, 1);
    let u_ic = select_dimension_ic(&analysis.criteria).unwrap();
    assert_eq!(u_ic, 2);

    // weights concentrate on dimensions 2 and 3
    let w = compute_weights(&analysis.criteria, Scheme::Bic).unwrap();
    assert!((w.w[1] - 0.5000).abs() < 1e-2, "w_2 = {}", w.w[1]);
    assert!((w.w[2] - 0.4024).abs() < 1e-2, "w_3 = {}", w.w[2]);
    assert!(w.w[0] < 0.08);

    // the weighted estimate is closest to the dimension-2 fit in
    // Frobenius norm among the ladder
    let bw = &analysis.fit.beta_w;
    let mut closest = 0;
    let mut best = f64::INFINITY;
    for (idx, fit) in analysis.fit.per_dimension.iter().enumerate() {
        let d = (bw - &fit.beta_env).norm();
        if d < best {
            best = d;
            closest = idx + 1;
        }
    }
    assert_eq!(closest, 2);
}
