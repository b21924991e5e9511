//! Residual bootstrap around a chosen center estimator.
//!
//! Each replicate regenerates responses as `Y* = alpha 1' + X c' + e*`,
//! where the rows of `e*` are drawn with replacement from the full-model
//! OLS residual rows and `c` is the center coefficient estimate. The
//! entire pipeline (OLS, dimension ladder, weights) is re-run on every
//! replicate.
//!
//! Replicate i draws from an independent RNG stream derived from the
//! master seed and i, so results are bit-identical for a fixed seed no
//! matter how replicates are scheduled across threads. Two runs sharing a
//! seed consume identical residual streams replicate-by-replicate and are
//! therefore paired.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::envelope::{fit_envelope, fit_ladder, OptimizerSettings};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm_sym, vec_of};
use crate::ols::{fit_ols, OlsFit};
use crate::weights::{compute_weights, criterion_ladder, select_dimension_ic, IcKind, Scheme};

/// Fraction of failed replicates above which the bootstrap aborts.
const MAX_FAILURE_RATE: f64 = 0.05;

/// Which estimator the bootstrap is centered on (and recomputes per
/// replicate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Center {
    /// The criterion-weighted estimate.
    Weighted,
    /// The envelope estimate at one fixed dimension.
    Fixed(usize),
    /// The full-model OLS estimate.
    FullModel,
}

impl std::fmt::Display for Center {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Center::Weighted => write!(f, "weighted"),
            Center::Fixed(j) => write!(f, "fixed-{j}"),
            Center::FullModel => write!(f, "ols"),
        }
    }
}

/// Bootstrap configuration.
#[derive(Debug, Clone)]
pub struct BootstrapSpec {
    /// Number of replicates.
    pub b: usize,
    /// Master seed; replicate i uses stream i.
    pub seed: u64,
    pub center: Center,
    /// Weighting scheme used when refitting with a weighted center.
    pub scheme: Scheme,
    /// Add the intercept back when regenerating responses.
    pub include_intercept: bool,
    pub optimizer: OptimizerSettings,
    /// Re-fit the full dimension ladder on every replicate to tally the
    /// BIC-selected dimension. Can only be disabled for fixed or
    /// full-model centers, where the estimator itself does not need the
    /// ladder.
    pub compute_tally: bool,
}

impl BootstrapSpec {
    pub fn new(b: usize, seed: u64, center: Center) -> Self {
        Self {
            b,
            seed,
            center,
            scheme: Scheme::Bic,
            include_intercept: true,
            optimizer: OptimizerSettings::default(),
            compute_tally: true,
        }
    }
}

/// Replicate-level estimates and their sample covariance.
#[derive(Debug, Clone)]
pub struct BootstrapResult {
    /// B by (r*p) matrix of vectorized per-replicate estimates; rows of
    /// failed replicates are NaN.
    pub estimates: DMatrix<f64>,
    /// Per-replicate ladder weights (B by r) when the center is weighted.
    pub weights: Option<DMatrix<f64>>,
    /// Sample covariance of the successful replicate estimates.
    pub var_hat: DMatrix<f64>,
    /// Standard errors: square roots of the diagonal of `var_hat`.
    pub se: DVector<f64>,
    /// Count of replicates whose BIC-selected dimension was j (index j-1).
    pub u_tally: Vec<usize>,
    /// Per-replicate BIC selections; None for failed replicates or when
    /// the tally was skipped or degenerate.
    pub u_hats: Vec<Option<usize>>,
    /// Replicates whose selection ladder could not be fit even though the
    /// required estimate succeeded (degenerate refit covariance).
    pub ladder_degenerate: usize,
    /// Indices of replicates whose required estimate failed; excluded
    /// from `var_hat`.
    pub failures: Vec<usize>,
    /// Vectorized center estimate used to regenerate responses.
    pub center_estimate: DVector<f64>,
    pub center: Center,
    pub scheme: Scheme,
    pub b: usize,
    pub seed: u64,
    pub n: usize,
    pub r: usize,
    pub p: usize,
}

impl BootstrapResult {
    /// Number of replicates contributing to the covariance.
    pub fn successes(&self) -> usize {
        self.b - self.failures.len()
    }
}

struct ReplicateOk {
    estimate: DVector<f64>,
    u_hat: Option<usize>,
    weights: Option<Vec<f64>>,
}

/// Runs the residual bootstrap. The dataset must be centered; the center
/// estimator is recomputed from it before resampling begins.
pub fn residual_bootstrap(
    data: &Dataset,
    ols: &OlsFit,
    spec: &BootstrapSpec,
) -> Result<BootstrapResult> {
    if !data.is_centered() {
        return Err(Error::ContractViolation(
            "residual_bootstrap requires a centered dataset".into(),
        ));
    }
    if spec.b == 0 {
        return Err(Error::ContractViolation("need at least one replicate".into()));
    }
    let (n, p, r) = (data.n(), data.p(), data.r());
    if let Center::Fixed(j) = spec.center {
        if j == 0 || j > r {
            return Err(Error::ContractViolation(format!(
                "fixed center dimension must satisfy 1 <= j <= r = {r}, got {j}"
            )));
        }
    }
    if spec.center == Center::Weighted && !spec.compute_tally {
        return Err(Error::ContractViolation(
            "a weighted center already fits the ladder; tally cannot be skipped".into(),
        ));
    }

    let center_beta = center_estimate(ols, spec)?;
    let residuals = data.y() - data.x() * ols.beta_ols.transpose();
    let alpha = spec.include_intercept.then(|| ols.alpha_hat.clone());

    let outcomes: Vec<std::result::Result<ReplicateOk, String>> = (0..spec.b)
        .into_par_iter()
        .map(|i| {
            run_replicate(
                i,
                data,
                &residuals,
                &center_beta,
                alpha.as_ref().map(|v| v.as_slice()),
                spec,
            )
        })
        .collect();

    let rp = r * p;
    let mut estimates = DMatrix::from_element(spec.b, rp, f64::NAN);
    let mut weights = match spec.center {
        Center::Weighted => Some(DMatrix::from_element(spec.b, r, f64::NAN)),
        _ => None,
    };
    let mut u_tally = vec![0usize; r];
    let mut u_hats = vec![None; spec.b];
    let mut ladder_degenerate = 0usize;
    let mut failures = Vec::new();
    let mut first_failure = String::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rep) => {
                for (c, v) in rep.estimate.iter().enumerate() {
                    estimates[(i, c)] = *v;
                }
                match rep.u_hat {
                    Some(u) => {
                        u_tally[u - 1] += 1;
                        u_hats[i] = Some(u);
                    }
                    None => ladder_degenerate += usize::from(spec.compute_tally),
                }
                if let (Some(w_mat), Some(w)) = (weights.as_mut(), rep.weights) {
                    for (c, v) in w.iter().enumerate() {
                        w_mat[(i, c)] = *v;
                    }
                }
            }
            Err(message) => {
                if failures.is_empty() {
                    first_failure = message;
                }
                failures.push(i);
            }
        }
    }

    if (failures.len() as f64) > MAX_FAILURE_RATE * spec.b as f64 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: spec.b,
            limit: MAX_FAILURE_RATE * 100.0,
            detail: first_failure,
        });
    }

    let (var_hat, se) = covariance_of_rows(&estimates, &failures);
    Ok(BootstrapResult {
        estimates,
        weights,
        var_hat,
        se,
        u_tally,
        u_hats,
        ladder_degenerate,
        failures,
        center_estimate: vec_of(&center_beta),
        center: spec.center,
        scheme: spec.scheme,
        b: spec.b,
        seed: spec.seed,
        n,
        r,
        p,
    })
}

fn center_estimate(ols: &OlsFit, spec: &BootstrapSpec) -> Result<DMatrix<f64>> {
    match spec.center {
        Center::FullModel => Ok(ols.beta_ols.clone()),
        Center::Fixed(j) => Ok(fit_envelope(ols, j, &spec.optimizer)?.beta_env),
        Center::Weighted => {
            let ladder = fit_ladder(ols, &spec.optimizer)?;
            let b = criterion_ladder(&ladder, ols.n, spec.scheme.criterion())?;
            let w = compute_weights(&b, spec.scheme)?;
            let fit = crate::weights::weighted_estimator(ladder, w)?;
            Ok(fit.beta_w)
        }
    }
}

fn run_replicate(
    index: usize,
    data: &Dataset,
    residuals: &DMatrix<f64>,
    center_beta: &DMatrix<f64>,
    alpha: Option<&[f64]>,
    spec: &BootstrapSpec,
) -> std::result::Result<ReplicateOk, String> {
    let n = data.n();
    let r = data.r();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let mut y_star = data.x() * center_beta.transpose();
    for row in 0..n {
        let pick = rng.gen_range(0..n);
        for col in 0..r {
            y_star[(row, col)] += residuals[(pick, col)];
            if let Some(a) = alpha {
                y_star[(row, col)] += a[col];
            }
        }
    }

    let replicate = data.with_responses(y_star).map_err(|e| e.to_string())?;
    let ols = fit_ols(&replicate).map_err(|e| e.to_string())?;

    match spec.center {
        Center::Weighted => {
            let ladder = fit_ladder(&ols, &spec.optimizer).map_err(|e| e.to_string())?;
            let b = criterion_ladder(&ladder, ols.n, spec.scheme.criterion())
                .map_err(|e| e.to_string())?;
            let w = compute_weights(&b, spec.scheme).map_err(|e| e.to_string())?;
            let u_hat = bic_selected(&ladder, ols.n)?;
            let mut estimate = DMatrix::zeros(ols.r(), ols.p());
            for (fit, &wj) in ladder.iter().zip(&w.w) {
                estimate += wj * &fit.beta_env;
            }
            Ok(ReplicateOk {
                estimate: vec_of(&estimate),
                u_hat: Some(u_hat),
                weights: Some(w.w),
            })
        }
        Center::Fixed(j) => {
            if spec.compute_tally {
                let ladder = fit_ladder(&ols, &spec.optimizer).map_err(|e| e.to_string())?;
                let u_hat = bic_selected(&ladder, ols.n)?;
                Ok(ReplicateOk {
                    estimate: vec_of(&ladder[j - 1].beta_env),
                    u_hat: Some(u_hat),
                    weights: None,
                })
            } else {
                let fit = fit_envelope(&ols, j, &spec.optimizer).map_err(|e| e.to_string())?;
                Ok(ReplicateOk {
                    estimate: vec_of(&fit.beta_env),
                    u_hat: None,
                    weights: None,
                })
            }
        }
        Center::FullModel => {
            let estimate = vec_of(&ols.beta_ols);
            // best effort: the OLS estimate stands even when the refit
            // covariance is too degenerate for a selection ladder
            let u_hat = if spec.compute_tally {
                fit_ladder(&ols, &spec.optimizer)
                    .ok()
                    .map(|ladder| bic_selected(&ladder, ols.n))
                    .transpose()?
            } else {
                None
            };
            Ok(ReplicateOk {
                estimate,
                u_hat,
                weights: None,
            })
        }
    }
}

fn bic_selected(
    ladder: &[crate::envelope::EnvelopeFit],
    n: usize,
) -> std::result::Result<usize, String> {
    let b = criterion_ladder(ladder, n, IcKind::Bic).map_err(|e| e.to_string())?;
    select_dimension_ic(&b).map_err(|e| e.to_string())
}

/// Sample covariance (divisor B-1) over the non-failed rows, plus the
/// standard errors. Zero when fewer than two rows contribute.
fn covariance_of_rows(
    estimates: &DMatrix<f64>,
    failures: &[usize],
) -> (DMatrix<f64>, DVector<f64>) {
    let rp = estimates.ncols();
    let good: Vec<usize> = (0..estimates.nrows())
        .filter(|i| !failures.contains(i))
        .collect();
    let m = good.len();
    if m < 2 {
        return (DMatrix::zeros(rp, rp), DVector::zeros(rp));
    }
    let mut mean = DVector::zeros(rp);
    for &i in &good {
        mean += estimates.row(i).transpose();
    }
    mean /= m as f64;
    let mut cov = DMatrix::zeros(rp, rp);
    for &i in &good {
        let d = estimates.row(i).transpose() - &mean;
        cov += &d * d.transpose();
    }
    cov /= (m - 1) as f64;
    let se = DVector::from_iterator(rp, cov.diagonal().iter().map(|v| v.sqrt()));
    (cov, se)
}

/// Ratio of full-model to envelope-type bootstrap standard errors at one
/// coordinate of vec(beta); values above one favor the envelope side.
pub fn se_ratio(full: &BootstrapResult, other: &BootstrapResult, coordinate: usize) -> Result<f64> {
    if full.r != other.r || full.p != other.p {
        return Err(Error::DimensionMismatch(
            "bootstrap results have different coefficient shapes".into(),
        ));
    }
    let rp = full.r * full.p;
    if coordinate >= rp {
        return Err(Error::ContractViolation(format!(
            "coordinate {coordinate} out of range for {rp} coefficients"
        )));
    }
    let denom = other.se[coordinate];
    if denom == 0.0 {
        return Err(Error::DegenerateVariance(format!(
            "zero bootstrap standard error at coordinate {coordinate}"
        )));
    }
    Ok(full.se[coordinate] / denom)
}

/// Spectral norm of the estimated variance of the difference between two
/// bootstrap estimators.
///
/// Paired mode requires both runs to share seed, replicate count and
/// sample size (identical resampled residual streams) and uses the
/// per-replicate differences. Unpaired mode treats the runs as
/// independent and sums their covariances.
pub fn variance_of_difference(
    a: &BootstrapResult,
    b: &BootstrapResult,
    paired: bool,
) -> Result<f64> {
    if a.b != b.b || a.r != b.r || a.p != b.p {
        return Err(Error::DimensionMismatch(
            "bootstrap runs differ in replicate count or coefficient shape".into(),
        ));
    }
    if !paired {
        return Ok(spectral_norm_sym(&(&a.var_hat + &b.var_hat)));
    }
    if a.seed != b.seed || a.n != b.n {
        return Err(Error::UnpairedResults(format!(
            "seeds/sample sizes differ (seed {} vs {}, n {} vs {})",
            a.seed, b.seed, a.n, b.n
        )));
    }
    let diffs = &a.estimates - &b.estimates;
    let mut failures: Vec<usize> = a.failures.iter().chain(&b.failures).cloned().collect();
    failures.sort_unstable();
    failures.dedup();
    let (cov, _) = covariance_of_rows(&diffs, &failures);
    Ok(spectral_norm_sym(&cov))
}
