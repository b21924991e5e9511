//! Bundled cattle growth dataset.
//!
//! Sixty animals from a parasite-control trial, thirty per treatment,
//! weighed (kg) at weeks 2, 4, ..., 18 and 19 after treatment. The file
//! is transcribed from Kenward (1987), Applied Statistics 36, Table 1;
//! treatment A is coded 0 and treatment B is coded 1. The bundled
//! header is normative: ten response columns `wk2`..`wk19` plus the
//! `treatment` predictor.

use crate::dataset::Dataset;
use crate::error::Result;
use crate::io::read_csv_str;

/// Raw CSV, embedded at compile time.
pub const CATTLE_CSV: &str = include_str!("../data/cattle.csv");

/// Response column names, weeks 2 through 19.
pub const CATTLE_RESPONSES: [&str; 10] = [
    "wk2", "wk4", "wk6", "wk8", "wk10", "wk12", "wk14", "wk16", "wk18", "wk19",
];

/// Predictor column name.
pub const CATTLE_PREDICTOR: &str = "treatment";

/// Parses the bundled data into an (uncentered) dataset.
pub fn cattle_dataset() -> Result<Dataset> {
    let responses: Vec<String> = CATTLE_RESPONSES.iter().map(|s| s.to_string()).collect();
    read_csv_str(CATTLE_CSV, "<bundled cattle>", &responses, &[CATTLE_PREDICTOR.to_string()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_has_documented_shape() {
        let data = cattle_dataset().unwrap();
        assert_eq!(data.n(), 60);
        assert_eq!(data.r(), 10);
        assert_eq!(data.p(), 1);
        let treated: f64 = data.x().column(0).sum();
        assert_eq!(treated, 30.0);
        // weights are plausible kilograms
        assert!(data.y().iter().all(|&w| (150.0..500.0).contains(&w)));
    }
}
