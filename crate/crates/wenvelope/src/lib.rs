//! Weighted envelope estimation for the multivariate linear regression
//! model.
//!
//! Envelope models reparameterize the regression `Y = alpha + beta X + e`
//! around the smallest subspace of the response space that carries all of
//! the material information about X, which can shrink estimator variance
//! dramatically when much of Y's variation is immaterial. The subspace
//! dimension must be selected from data, and conditioning on that
//! selection understates variance. This crate implements the remedy:
//! maximum-likelihood envelope fits at every candidate dimension,
//! information-criterion weights across the ladder, the weighted
//! coefficient estimate, and a residual bootstrap that consistently
//! estimates the weighted estimator's sampling variance.
//!
//! The crate also ships seeded data generators and a study harness that
//! reproduce the estimator's reference experiments, a bundled cattle
//! growth dataset, and a small CLI (`fit`, `bootstrap`, `simulate`).
//!
//! Entry points: [`pipeline::fit_weighted_envelope`] for a one-call
//! analysis, [`bootstrap::residual_bootstrap`] for variance estimation,
//! [`study::run_study`] for the simulation harness. The `examples/`
//! directory walks through each capability.

pub mod bootstrap;
pub mod cattle;
pub mod dataset;
pub mod diagnostics;
pub mod envelope;
pub mod error;
pub mod io;
pub mod linalg;
pub mod ols;
pub mod pipeline;
pub mod report;
pub mod sim;
pub mod study;
pub mod weights;

pub use bootstrap::{
    residual_bootstrap, se_ratio, variance_of_difference, BootstrapResult, BootstrapSpec, Center,
};
pub use dataset::Dataset;
pub use diagnostics::{chi2_pvalue, lrt_statistic, select_dimension_lrt, BiasDiagnostic};
pub use envelope::{envelope_objective, fit_envelope, fit_ladder, EnvelopeFit, OptimizerSettings};
pub use error::{Error, Result};
pub use ols::{fit_ols, OlsFit};
pub use pipeline::{fit_weighted_envelope, Analysis};
pub use sim::{gen_cattle_sim, gen_example1, gen_example2, TruthRecord};
pub use study::{run_study, ScenarioSpec, Study, StudyReport};
pub use weights::{
    compute_weights, information_criterion, param_count, select_dimension_ic, weighted_estimator,
    IcKind, Scheme, WeightVector, WeightedFit,
};
