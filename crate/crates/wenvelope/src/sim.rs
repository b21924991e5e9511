//! Seeded data generators for the reference simulation studies.
//!
//! Every generator is a pure function of (seed, sizes): byte-identical
//! datasets on every call and platform. Draw order is fixed (the design
//! matrix row-by-row, then the error matrix row-by-row).

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::envelope::EnvelopeFit;
use crate::error::{Error, Result};

/// The generating truth behind a simulated dataset.
#[derive(Debug, Clone)]
pub struct TruthRecord {
    /// True coefficient matrix, r by p.
    pub beta_true: DMatrix<f64>,
    /// True error covariance, r by r.
    pub sigma_true: DMatrix<f64>,
    /// True envelope dimension.
    pub u_true: usize,
    /// Orthonormal basis of the true envelope, r by u.
    pub envelope_basis_true: DMatrix<f64>,
}

/// Fixed orthonormal triple used by the three-response study; the QR
/// factor (signs normalized positive on the diagonal of R) of
/// [[2, -1, 0.5], [1, 2, -1], [-0.5, 1, 2]], committed as literals for
/// reproducibility.
const BASIS3: [[f64; 3]; 3] = [
    [
        0.872_871_560_943_969_5,
        -0.331_806_024_802_501_26,
        0.357_770_876_399_966_41,
    ],
    [
        0.436_435_780_471_984_78,
        0.858_792_064_194_709_2,
        -0.268_328_157_299_974_78,
    ],
    [
        -0.218_217_890_235_992_39,
        0.390_360_029_179_413_3,
        0.894_427_190_999_915_9,
    ],
];

/// Eigenvalues of the three-response error covariance.
const EIGEN3: [f64; 3] = [50.0, 10.0, 0.01];

/// Coefficients of the true beta in the coordinates of eigenvectors 2
/// and 3.
const BETA_COORDS: [[f64; 2]; 2] = [[1.0, 1.0], [1.0, -1.0]];

fn basis3() -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| BASIS3[j][i])
}

/// Three responses, two continuous predictors: the error covariance has
/// eigenvalues (50, 10, 0.01) on a fixed orthonormal triple and beta
/// spans eigenvectors 2 and 3, so the true envelope dimension is 2.
/// Predictor entries are drawn N(4, 1).
pub fn gen_example1(n: usize, seed: u64) -> Result<(Dataset, TruthRecord)> {
    if n < 4 {
        return Err(Error::DegenerateInput(format!(
            "need n >= 4 for this design, got {n}"
        )));
    }
    let v = basis3();
    let mut sigma = DMatrix::zeros(3, 3);
    let mut sigma_half = DMatrix::zeros(3, 3);
    for i in 0..3 {
        let outer = v.column(i) * v.column(i).transpose();
        sigma += EIGEN3[i] * &outer;
        sigma_half += EIGEN3[i].sqrt() * &outer;
    }
    let coords = DMatrix::from_fn(2, 2, |i, j| BETA_COORDS[i][j]);
    let beta = v.columns(1, 2) * coords;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, 2, |_, _| 4.0 + standard_normal(&mut rng));
    let z = DMatrix::from_fn(n, 3, |_, _| standard_normal(&mut rng));
    let y = &x * beta.transpose() + z * sigma_half.transpose();

    let truth = TruthRecord {
        beta_true: beta,
        sigma_true: sigma,
        u_true: 2,
        envelope_basis_true: v.columns(1, 2).clone_owned(),
    };
    Ok((Dataset::new(x, y)?, truth))
}

/// Five responses with compound-symmetric errors (unit diagonal,
/// off-diagonal 0.5) and beta = 10 * 1_r 1_p'; the true envelope is the
/// span of the ones vector, dimension 1. Predictors are N(0, I_p).
pub fn gen_example2(n: usize, p: usize, seed: u64) -> Result<(Dataset, TruthRecord)> {
    let r = 5usize;
    if p == 0 || n <= p.max(r) {
        return Err(Error::DegenerateInput(format!(
            "need n > max(p, {r}) and p >= 1; got n = {n}, p = {p}"
        )));
    }
    let ones = DVector::from_element(r, 1.0);
    let proj1 = &ones * ones.transpose() / r as f64;
    let sigma = DMatrix::from_fn(r, r, |i, j| if i == j { 1.0 } else { 0.5 });
    // closed-form square root: sqrt(a) on span(1), sqrt(b) on its complement
    let a = 1.0 + 0.5 * (r as f64 - 1.0);
    let b: f64 = 0.5;
    let sigma_half =
        a.sqrt() * &proj1 + b.sqrt() * (DMatrix::identity(r, r) - &proj1);
    let beta = DMatrix::from_element(r, p, 10.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| standard_normal(&mut rng));
    let z = DMatrix::from_fn(n, r, |_, _| standard_normal(&mut rng));
    let y = &x * beta.transpose() + z * sigma_half.transpose();

    let truth = TruthRecord {
        beta_true: beta,
        sigma_true: sigma,
        u_true: 1,
        envelope_basis_true: DMatrix::from_fn(r, 1, |_, _| 1.0 / (r as f64).sqrt()),
    };
    Ok((Dataset::new(x, y)?, truth))
}

/// Growth-curve style simulation: responses are generated from an
/// envelope fit (its coefficient estimate and reconstructed covariance)
/// plus an intercept profile, with a binary treatment split evenly
/// between the groups and assigned at random. Odd n puts the extra
/// animal in the control group.
pub fn gen_cattle_sim(
    n: usize,
    seed: u64,
    fitted: &EnvelopeFit,
    alpha: &DVector<f64>,
) -> Result<Dataset> {
    let r = fitted.gamma.nrows();
    let p = fitted.beta_env.ncols();
    if p != 1 {
        return Err(Error::ContractViolation(
            "the treatment design needs a single binary predictor".into(),
        ));
    }
    if alpha.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "intercept has length {} but the fit has r = {r}",
            alpha.len()
        )));
    }
    if n < 4 {
        return Err(Error::DegenerateInput(format!(
            "need n >= 4 for two treatment groups, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0.0f64; n];
    for slot in assignment.iter_mut().take(n / 2) {
        *slot = 1.0;
    }
    assignment.shuffle(&mut rng);
    let x = DMatrix::from_fn(n, 1, |i, _| assignment[i]);

    let sigma_half = crate::linalg::sym_sqrt(&fitted.sigma_hat());
    let z = DMatrix::from_fn(n, r, |_, _| standard_normal(&mut rng));
    let mut y = &x * fitted.beta_env.transpose() + z * sigma_half.transpose();
    for row in 0..n {
        for col in 0..r {
            y[(row, col)] += alpha[col];
        }
    }
    Dataset::new(x, y)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{fit_envelope, OptimizerSettings};
    use crate::linalg::{spectral_norm_sym, subspace_distance};
    use crate::ols::fit_ols;
    use approx::assert_relative_eq;

    #[test]
    fn example1_covariance_spectrum_is_exact() {
        let (_, truth) = gen_example1(50, 1).unwrap();
        let mut eigen: Vec<f64> = truth
            .sigma_true
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        eigen.sort_by(|a, b| b.total_cmp(a));
        assert_relative_eq!(eigen[0], 50.0, max_relative = 1e-10);
        assert_relative_eq!(eigen[1], 10.0, max_relative = 1e-10);
        assert_relative_eq!(eigen[2], 0.01, max_relative = 1e-10);
    }

    #[test]
    fn example1_beta_lies_in_the_envelope() {
        let (_, truth) = gen_example1(50, 2).unwrap();
        let basis = &truth.envelope_basis_true;
        let projected = basis * basis.transpose() * &truth.beta_true;
        assert!((projected - &truth.beta_true).amax() < 1e-12);
        assert_eq!(truth.u_true, 2);
    }

    #[test]
    fn example2_matches_its_construction() {
        let (data, truth) = gen_example2(40, 3, 3).unwrap();
        assert_eq!(data.p(), 3);
        assert_eq!(data.r(), 5);
        assert_relative_eq!(truth.sigma_true[(0, 0)], 1.0);
        assert_relative_eq!(truth.sigma_true[(0, 1)], 0.5);
        assert!(truth.beta_true.iter().all(|&v| v == 10.0));
        assert_eq!(truth.u_true, 1);
    }

    #[test]
    fn generators_are_deterministic() {
        let (a, _) = gen_example1(30, 9).unwrap();
        let (b, _) = gen_example1(30, 9).unwrap();
        assert_eq!(a.x().as_slice(), b.x().as_slice());
        assert_eq!(a.y().as_slice(), b.y().as_slice());
        let (c, _) = gen_example1(30, 10).unwrap();
        assert!(a.y() != c.y());
    }

    #[test]
    fn sample_covariance_converges_to_truth() {
        let n = 100_000;
        let (data, truth) = gen_example1(n, 4).unwrap();
        let centered = data.center().unwrap();
        let ols = fit_ols(&centered).unwrap();
        let gap = &ols.sigma_res - &truth.sigma_true;
        let rel = spectral_norm_sym(&gap) / spectral_norm_sym(&truth.sigma_true);
        assert!(rel < 0.05, "relative spectral gap {rel}");
    }

    #[test]
    fn fitting_at_the_true_dimension_recovers_the_span() {
        let (data, truth) = gen_example1(10_000, 5).unwrap();
        let ols = fit_ols(&data.center().unwrap()).unwrap();
        let fit = fit_envelope(&ols, truth.u_true, &OptimizerSettings::default()).unwrap();
        let angle = subspace_distance(&fit.gamma, &truth.envelope_basis_true);
        assert!(angle < 0.1, "principal angle {angle}");
    }

    #[test]
    fn cattle_sim_splits_groups_evenly() {
        // a single-predictor source fit drives the treatment design
        let (data, _) = gen_example1(200, 6).unwrap();
        let x1 = data.x().columns(0, 1).clone_owned();
        let single = crate::dataset::Dataset::new(x1, data.y().clone_owned()).unwrap();
        let ols = fit_ols(&single.center().unwrap()).unwrap();
        let fit = fit_envelope(&ols, 3, &OptimizerSettings::default()).unwrap();
        let alpha = DVector::from_element(3, 100.0);
        let sim = gen_cattle_sim(60, 11, &fit, &alpha).unwrap();
        let treated: f64 = sim.x().column(0).sum();
        assert_relative_eq!(treated, 30.0);
        let sim = gen_cattle_sim(61, 11, &fit, &alpha).unwrap();
        let treated: f64 = sim.x().column(0).sum();
        assert_relative_eq!(treated, 30.0);
    }
}
