//! One-call pipeline: center, fit OLS, fit the dimension ladder, weight.

use crate::dataset::Dataset;
use crate::envelope::{fit_ladder, OptimizerSettings};
use crate::error::Result;
use crate::ols::{fit_ols, OlsFit};
use crate::weights::{compute_weights, criterion_ladder, weighted_estimator, Scheme, WeightedFit};

/// Everything produced by a single weighted-envelope analysis.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// The centered dataset the fits were computed on.
    pub data: Dataset,
    pub ols: OlsFit,
    /// Criterion values b_1..b_r under the scheme's criterion.
    pub criteria: Vec<f64>,
    /// Weighted estimate plus the full per-dimension ladder.
    pub fit: WeightedFit,
}

/// Runs the full pipeline on a dataset (centering it if necessary).
pub fn fit_weighted_envelope(
    data: Dataset,
    scheme: Scheme,
    opts: &OptimizerSettings,
) -> Result<Analysis> {
    let data = data.center()?;
    let ols = fit_ols(&data)?;
    let ladder = fit_ladder(&ols, opts)?;
    let criteria = criterion_ladder(&ladder, ols.n, scheme.criterion())?;
    let weights = compute_weights(&criteria, scheme)?;
    let fit = weighted_estimator(ladder, weights)?;
    Ok(Analysis {
        data,
        ols,
        criteria,
        fit,
    })
}
