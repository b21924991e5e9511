//! Data container for the multivariate linear regression model and
//! column centering.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A fixed design matrix `x` (n by p) paired with a response matrix `y`
/// (n by r).
///
/// Model fitting requires the predictors to be mean-centered; call
/// [`Dataset::center`] first. Centering also removes the response column
/// means and records them so the intercept can be recovered later.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    centered: bool,
    x_means: Option<DVector<f64>>,
    y_means: Option<DVector<f64>>,
}

impl Dataset {
    /// Builds an uncentered dataset, validating shapes and finiteness.
    /// Requires n > p and n > r so that the residual covariance can be
    /// positive definite.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        let n = x.nrows();
        if y.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "x has {n} rows but y has {}",
                y.nrows()
            )));
        }
        if n == 0 || x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::DegenerateInput(
                "dataset must have at least one row, one predictor and one response".into(),
            ));
        }
        if n <= x.ncols() || n <= y.ncols() {
            return Err(Error::DegenerateInput(format!(
                "need n > p and n > r; got n = {n}, p = {}, r = {}",
                x.ncols(),
                y.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(
                "dataset contains non-finite entries".into(),
            ));
        }
        Ok(Self {
            x,
            y,
            centered: false,
            x_means: None,
            y_means: None,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn r(&self) -> usize {
        self.y.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Column means removed from the predictors, when centered.
    pub fn x_means(&self) -> Option<&DVector<f64>> {
        self.x_means.as_ref()
    }

    /// Column means removed from the responses, when centered. These are
    /// the intercept estimate of the centered model.
    pub fn y_means(&self) -> Option<&DVector<f64>> {
        self.y_means.as_ref()
    }

    /// Removes column means from both predictors and responses and
    /// records them. Idempotent: a centered dataset is returned as-is.
    pub fn center(self) -> Result<Dataset> {
        if self.centered {
            return Ok(self);
        }
        let n = self.n();
        if n < 2 {
            return Err(Error::DegenerateInput(
                "centering needs at least 2 rows".into(),
            ));
        }
        let x_means = column_means(&self.x);
        let y_means = column_means(&self.y);
        let mut x = self.x;
        let mut y = self.y;
        subtract_column_means(&mut x, &x_means);
        subtract_column_means(&mut y, &y_means);
        Ok(Dataset {
            x,
            y,
            centered: true,
            x_means: Some(x_means),
            y_means: Some(y_means),
        })
    }

    /// Rebuilds a centered dataset around new responses sharing this
    /// dataset's (already centered) design matrix. Used by the residual
    /// bootstrap, which regenerates responses on a fixed design.
    pub(crate) fn with_responses(&self, y_raw: DMatrix<f64>) -> Result<Dataset> {
        debug_assert!(self.centered);
        let y_means = column_means(&y_raw);
        let mut y = y_raw;
        subtract_column_means(&mut y, &y_means);
        Ok(Dataset {
            x: self.x.clone(),
            y,
            centered: true,
            x_means: self.x_means.clone(),
            y_means: Some(y_means),
        })
    }
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}

fn subtract_column_means(m: &mut DMatrix<f64>, means: &DVector<f64>) {
    for (j, mean) in means.iter().enumerate() {
        for v in m.column_mut(j).iter_mut() {
            *v -= mean;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_col(x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(x.len(), 1, x)
    }

    #[test]
    fn centering_removes_means() {
        let data = Dataset::new(two_col(&[1.0, 3.0]), two_col(&[5.0, 9.0])).unwrap();
        let centered = data.center().unwrap();
        assert_eq!(centered.x().as_slice(), &[-1.0, 1.0]);
        assert_relative_eq!(centered.x_means().unwrap()[0], 2.0);
        assert_relative_eq!(centered.y_means().unwrap()[0], 7.0);
        assert!(centered.is_centered());
    }

    #[test]
    fn centering_is_idempotent() {
        let data = Dataset::new(two_col(&[1.0, 3.0, 2.0]), two_col(&[5.0, 9.0, 7.0])).unwrap();
        let once = data.center().unwrap();
        let x_once = once.x().clone();
        let twice = once.center().unwrap();
        assert!((twice.x() - &x_once).amax() < 1e-15);
    }

    #[test]
    fn centered_column_mean_is_tiny() {
        // values shaped like the simulated predictors: mean 4, unit spread
        let raw: Vec<f64> = (0..40).map(|i| 4.0 + ((i * 37 % 17) as f64 - 8.0) / 8.0).collect();
        let oracle_mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let data = Dataset::new(two_col(&raw), two_col(&raw)).unwrap().center().unwrap();
        assert_relative_eq!(data.x_means().unwrap()[0], oracle_mean, epsilon = 1e-12);
        let resid_mean = data.x().column(0).sum() / raw.len() as f64;
        assert!(resid_mean.abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_and_nonfinite() {
        assert!(Dataset::new(two_col(&[1.0]), two_col(&[2.0])).is_err());
        assert!(Dataset::new(two_col(&[1.0, f64::NAN, 2.0]), two_col(&[2.0, 1.0, 0.0])).is_err());
    }
}
