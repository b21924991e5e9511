//! Ordinary least squares fit of the full multivariate linear model and
//! the sample moments consumed by every envelope fit.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, PD_RTOL};

/// Full-model maximum-likelihood fit.
///
/// All covariance estimates use the MLE divisor n. `loglik_full` is the
/// exact Gaussian log-likelihood at the MLE; it is `+inf` when the
/// residual covariance is singular (perfect fit), in which case the
/// envelope layer rejects the moments.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Intercept estimate: the response column means.
    pub alpha_hat: DVector<f64>,
    /// Coefficient matrix, r by p.
    pub beta_ols: DMatrix<f64>,
    /// Residual covariance, r by r.
    pub sigma_res: DMatrix<f64>,
    /// Marginal response covariance, r by r.
    pub sigma_y: DMatrix<f64>,
    /// Predictor covariance, p by p.
    pub sigma_x: DMatrix<f64>,
    pub loglik_full: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn p(&self) -> usize {
        self.beta_ols.ncols()
    }

    pub fn r(&self) -> usize {
        self.beta_ols.nrows()
    }
}

/// Solves the normal equations through a QR decomposition of the centered
/// design matrix.
pub fn fit_ols(data: &Dataset) -> Result<OlsFit> {
    if !data.is_centered() {
        return Err(Error::ContractViolation(
            "fit_ols requires a centered dataset".into(),
        ));
    }
    let (x, y) = (data.x(), data.y());
    let (n, r) = (data.n(), data.r());
    let nf = n as f64;

    let singular_values = x.clone().svd(false, false).singular_values;
    let s_max = singular_values.iter().cloned().fold(0.0, f64::max);
    let s_min = singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    // cond(X'X) = (s_max / s_min)^2; reject under the shared PD threshold
    if s_min <= 0.0 || (s_min / s_max).powi(2) <= PD_RTOL {
        let condition = if s_min > 0.0 {
            (s_max / s_min).powi(2)
        } else {
            f64::INFINITY
        };
        return Err(Error::RankDeficient { condition });
    }

    let qr = x.clone().qr();
    let q = qr.q();
    let r_mat = qr.r();
    // beta' = R^{-1} Q' Y  (p by r)
    let mut beta_t = q.transpose() * y;
    if !r_mat.solve_upper_triangular_mut(&mut beta_t) {
        return Err(Error::RankDeficient {
            condition: (s_max / s_min).powi(2),
        });
    }
    let beta_ols = beta_t.transpose();

    let residuals = y - x * beta_ols.transpose();
    let sigma_res = residuals.transpose() * &residuals / nf;
    let sigma_y = y.transpose() * y / nf;
    let sigma_x = x.transpose() * x / nf;

    let loglik_full = match linalg::logdet_spd(&sigma_res, "sigma_res") {
        Ok(ld) => gaussian_profile_loglik(n, r, ld),
        // perfect interpolation: the likelihood diverges; flagged when used
        Err(_) => f64::INFINITY,
    };

    let alpha_hat = data
        .y_means()
        .cloned()
        .unwrap_or_else(|| DVector::zeros(r));

    Ok(OlsFit {
        alpha_hat,
        beta_ols,
        sigma_res,
        sigma_y,
        sigma_x,
        loglik_full,
        n,
    })
}

/// Gaussian log-likelihood at a profile optimum with log-determinant `ld`
/// of the fitted covariance: -(nr/2) log(2 pi) - nr/2 - (n/2) ld.
pub(crate) fn gaussian_profile_loglik(n: usize, r: usize, ld: f64) -> f64 {
    let nf = n as f64;
    let rf = r as f64;
    -0.5 * nf * rf * ((2.0 * std::f64::consts::PI).ln() + 1.0) - 0.5 * nf * ld
}
