//! Likelihood-ratio machinery over the dimension ladder and the
//! associated finite-sample bias diagnostics.

use nalgebra::DMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::envelope::EnvelopeFit;
use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, sym_inv_sqrt, sym_sqrt};
use crate::ols::OlsFit;

/// Likelihood-ratio statistic of a dimension-j fit against the full
/// model, with the determinant lower-bound factor and the standardized
/// bias matrix computed from the fitted complement.
#[derive(Debug, Clone)]
pub struct BiasDiagnostic {
    pub j: usize,
    /// lambda_j = 2 { l(full) - l(j) }.
    pub lambda: f64,
    /// Determinant factor bounding lambda_j / n from below (>= 1).
    pub a_jn: f64,
    /// Standardized complement-side coefficient, (r - j) by p; zero in
    /// expectation when the dimension-j model is true.
    pub b_jn: DMatrix<f64>,
}

/// Computes the likelihood-ratio diagnostic for one ladder fit.
pub fn lrt_statistic(fit: &EnvelopeFit, moments: &OlsFit) -> Result<BiasDiagnostic> {
    let ld_res = logdet_spd(&moments.sigma_res, "sigma_res")?;
    let n = moments.n as f64;
    let lambda = n * (fit.objective - ld_res);

    let g0 = &fit.gamma0;
    let sx_half = sym_sqrt(&moments.sigma_x);
    let (a_jn, b_jn) = if g0.ncols() == 0 {
        (1.0, DMatrix::zeros(0, moments.p()))
    } else {
        let g0_beta = g0.transpose() * &moments.beta_ols; // (r-j) x p
        let block = g0.transpose() * &moments.sigma_res * g0;
        let chol = block.cholesky().ok_or_else(|| {
            Error::DegenerateCovariance("complement residual block is singular".into())
        })?;
        let solved = chol.solve(&g0_beta); // (G0' S_res G0)^{-1} G0' beta
        let inner = &sx_half * g0_beta.transpose() * solved * &sx_half;
        let a = (DMatrix::identity(moments.p(), moments.p()) + inner).determinant();

        // standardized bias: (G0' Sigma_hat G0)^{-1/2} G0' beta Sx^{1/2},
        // where G0' Sigma_hat G0 is the fitted immaterial covariance
        let b = sym_inv_sqrt(&fit.omega0) * g0.transpose() * &moments.beta_ols * &sx_half;
        (a, b)
    };
    Ok(BiasDiagnostic {
        j: fit.j,
        lambda,
        a_jn,
        b_jn,
    })
}

/// Upper-tail chi-squared p-value for a ladder statistic with
/// p(r - j) degrees of freedom; 1 when the degrees of freedom vanish.
pub fn chi2_pvalue(lambda: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive dof");
    1.0 - dist.cdf(lambda.max(0.0))
}

fn chi2_quantile(prob: f64, df: usize) -> f64 {
    let dist = ChiSquared::new(df as f64).expect("positive dof");
    dist.inverse_cdf(prob)
}

/// Sequential likelihood-ratio selection: the smallest dimension whose
/// statistic stays below the chi-squared critical value at the given
/// significance level; r when every test rejects.
pub fn select_dimension_lrt(
    fits: &[EnvelopeFit],
    moments: &OlsFit,
    level: f64,
) -> Result<usize> {
    if fits.is_empty() {
        return Err(Error::ContractViolation("empty fit ladder".into()));
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(Error::ContractViolation(format!(
            "significance level must lie in (0, 1), got {level}"
        )));
    }
    let r = moments.r();
    let p = moments.p();
    if fits.len() != r {
        return Err(Error::ContractViolation(format!(
            "need a complete ladder of {r} fits, got {}",
            fits.len()
        )));
    }
    for fit in fits {
        if fit.j == r {
            return Ok(r);
        }
        let df = p * (r - fit.j);
        let lambda = lrt_statistic(fit, moments)?.lambda;
        if lambda <= chi2_quantile(1.0 - level, df) {
            return Ok(fit.j);
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::envelope::{fit_envelope, fit_ladder, OptimizerSettings};
    use crate::ols::fit_ols;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
    use rand_distr::{Distribution, StandardNormal};

    fn toy_moments(seed: u64, n: usize, p: usize, r: usize) -> OlsFit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let coef = DMatrix::from_fn(r, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let noise = DMatrix::from_fn(n, r, |_, _| rng.gen::<f64>() - 0.5);
        let y = &x * coef.transpose() + noise;
        fit_ols(&Dataset::new(x, y).unwrap().center().unwrap()).unwrap()
    }

    #[test]
    fn full_dimension_statistic_vanishes() {
        let moments = toy_moments(1, 80, 2, 3);
        let fit = fit_envelope(&moments, 3, &OptimizerSettings::default()).unwrap();
        let diag = lrt_statistic(&fit, &moments).unwrap();
        assert!(diag.lambda.abs() < 1e-8);
        assert_relative_eq!(diag.a_jn, 1.0, epsilon = 1e-12);
        assert_eq!(diag.b_jn.nrows(), 0);
    }

    #[test]
    fn lambda_agrees_with_loglik_difference() {
        let moments = toy_moments(2, 120, 2, 4);
        for j in 1..4 {
            let fit = fit_envelope(&moments, j, &OptimizerSettings::default()).unwrap();
            let diag = lrt_statistic(&fit, &moments).unwrap();
            let direct = 2.0 * (moments.loglik_full - fit.loglik);
            assert_relative_eq!(diag.lambda, direct, epsilon = 1e-7);
            assert!(diag.lambda >= -1e-6);
            assert!(diag.a_jn >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn lambda_dominates_determinant_bound() {
        // a structured instance with a genuinely low-dimensional envelope,
        // so fits below the truth show bias: lambda_j / n >= log(a_jn)
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 300;
        let q = {
            let m = DMatrix::from_fn(3, 3, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            m.qr().q()
        };
        let eigen: [f64; 3] = [50.0, 10.0, 0.01];
        let mut chol_like = DMatrix::zeros(3, 3);
        for i in 0..3 {
            chol_like += eigen[i].sqrt() * q.column(i) * q.column(i).transpose();
        }
        let beta = q.columns(1, 2) * DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let x = DMatrix::from_fn(n, 2, |_, _| {
            4.0 + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        });
        let noise = DMatrix::from_fn(n, 3, |_, _| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        }) * chol_like.transpose();
        let y = &x * beta.transpose() + noise;
        let moments = fit_ols(&Dataset::new(x, y).unwrap().center().unwrap()).unwrap();
        let fit = fit_envelope(&moments, 1, &OptimizerSettings::default()).unwrap();
        let diag = lrt_statistic(&fit, &moments).unwrap();
        assert!(diag.a_jn > 1.0);
        assert!(diag.lambda / n as f64 >= diag.a_jn.ln() - 1e-8);
        assert!(diag.b_jn.amax() > 0.0);
    }

    #[test]
    fn lrt_selects_one_when_nothing_rejects() {
        // response unrelated to the predictor: every dimension is acceptable
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(100, 1, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let y = DMatrix::from_fn(100, 3, |_, _| rng.gen::<f64>() - 0.5);
        let moments = fit_ols(&Dataset::new(x, y).unwrap().center().unwrap()).unwrap();
        let fits = fit_ladder(&moments, &OptimizerSettings::default()).unwrap();
        let selected = select_dimension_lrt(&fits, &moments, 0.05).unwrap();
        assert_eq!(selected, 1);
    }

    #[test]
    fn pvalue_degrees_of_freedom_edge() {
        assert_relative_eq!(chi2_pvalue(5.0, 0), 1.0);
        assert!(chi2_pvalue(100.0, 2) < 1e-12);
    }
}
