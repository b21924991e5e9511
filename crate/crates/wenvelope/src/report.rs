//! Analysis reports: construction, serialization, parsing and rendering.
//!
//! The structured-text format is pretty-printed JSON with stable key
//! names; floating-point values round-trip exactly. The csv-bundle
//! format writes one file per table plus a JSON provenance block.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapResult;
use crate::diagnostics::{chi2_pvalue, lrt_statistic, select_dimension_lrt};
use crate::envelope::OptimizerSettings;
use crate::error::{Error, Result};
use crate::pipeline::Analysis;
use crate::weights::Scheme;

/// Dimension-stamped dense matrix in column-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixData {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.as_slice().to_vec(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }
}

/// One row of the per-dimension ladder table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerDimensionRow {
    pub j: usize,
    pub loglik: f64,
    /// Criterion value b_j under the report's scheme.
    pub criterion: f64,
    pub weight: f64,
    pub lambda: f64,
    pub p_value: f64,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub scheme: Scheme,
    pub seed: Option<u64>,
    pub data_fingerprint: String,
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Bootstrap summary attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSection {
    pub b: usize,
    pub seed: u64,
    pub center: String,
    pub successes: usize,
    pub failures: usize,
    pub ladder_degenerate: usize,
    pub u_tally: Vec<usize>,
    /// Bootstrap standard errors of the centered estimator, vec order.
    pub se: Vec<f64>,
    /// Standard errors of the full-model estimator from a paired run.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se_full: Option<Vec<f64>>,
    /// Coordinatewise se_full / se.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se_ratio: Option<Vec<f64>>,
}

impl BootstrapSection {
    pub fn from_result(result: &BootstrapResult, full: Option<&BootstrapResult>) -> Self {
        let se: Vec<f64> = result.se.iter().cloned().collect();
        let se_full: Option<Vec<f64>> = full.map(|f| f.se.iter().cloned().collect());
        let se_ratio = se_full
            .as_ref()
            .map(|fs| fs.iter().zip(&se).map(|(f, s)| f / s).collect());
        Self {
            b: result.b,
            seed: result.seed,
            center: result.center.to_string(),
            successes: result.successes(),
            failures: result.failures.len(),
            ladder_degenerate: result.ladder_degenerate,
            u_tally: result.u_tally.clone(),
            se,
            se_full,
            se_ratio,
        }
    }
}

/// Full analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub per_dimension: Vec<PerDimensionRow>,
    /// Dimension selected by the report scheme's criterion.
    pub u_ic: usize,
    /// Dimension selected by the sequential likelihood-ratio test at 5%.
    pub u_lrt: usize,
    pub alpha_hat: Vec<f64>,
    pub beta_w: MatrixData,
    pub beta_per_dimension: Vec<MatrixData>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bootstrap: Option<BootstrapSection>,
}

/// Assembles a report from a finished analysis.
pub fn build_report(
    analysis: &Analysis,
    provenance: Provenance,
    bootstrap: Option<BootstrapSection>,
) -> Result<Report> {
    let ols = &analysis.ols;
    let fits = &analysis.fit.per_dimension;
    let weights = &analysis.fit.weights;
    let p = ols.p();
    let r = ols.r();
    let mut per_dimension = Vec::with_capacity(fits.len());
    for fit in fits {
        let diag = lrt_statistic(fit, ols)?;
        per_dimension.push(PerDimensionRow {
            j: fit.j,
            loglik: fit.loglik,
            criterion: analysis.criteria[fit.j - 1],
            weight: weights.w[fit.j - 1],
            lambda: diag.lambda,
            p_value: chi2_pvalue(diag.lambda, p * (r - fit.j)),
        });
    }
    let u_lrt = select_dimension_lrt(fits, ols, 0.05)?;
    Ok(Report {
        provenance,
        n: ols.n,
        p,
        r,
        per_dimension,
        u_ic: weights.u_hat,
        u_lrt,
        alpha_hat: ols.alpha_hat.iter().cloned().collect(),
        beta_w: MatrixData::from_matrix(&analysis.fit.beta_w),
        beta_per_dimension: fits
            .iter()
            .map(|f| MatrixData::from_matrix(&f.beta_env))
            .collect(),
        bootstrap,
    })
}

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// One JSON document.
    StructuredText,
    /// A directory of CSV tables plus a provenance JSON.
    CsvBundle,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" | "structured-text" => Ok(ReportFormat::StructuredText),
            "csv" | "csv-bundle" => Ok(ReportFormat::CsvBundle),
            other => Err(Error::ContractViolation(format!(
                "unknown report format '{other}' (expected json | csv)"
            ))),
        }
    }
}

pub fn report_to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn report_from_json(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "<json>".into(),
        message: e.to_string(),
    })
}

/// Writes a report in the requested format. Structured text goes to a
/// single file; the csv bundle treats `path` as a directory.
pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::StructuredText => write_text(path, &report_to_json(report)),
        ReportFormat::CsvBundle => write_csv_bundle(report, path),
    }
}

/// Reads back a structured-text report.
pub fn parse_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    report_from_json(&text)
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_csv_bundle(report: &Report, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut per_dim = String::from("j,loglik,criterion,weight,lambda,p_value\n");
    for row in &report.per_dimension {
        per_dim.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?}\n",
            row.j, row.loglik, row.criterion, row.weight, row.lambda, row.p_value
        ));
    }
    write_text(&dir.join("per_dimension.csv"), &per_dim)?;

    write_text(&dir.join("beta_w.csv"), &matrix_csv(&report.beta_w))?;

    let mut ladder = String::from("j,row,col,value\n");
    for (fit_idx, m) in report.beta_per_dimension.iter().enumerate() {
        for col in 0..m.cols {
            for row in 0..m.rows {
                ladder.push_str(&format!(
                    "{},{},{},{:?}\n",
                    fit_idx + 1,
                    row,
                    col,
                    m.data[col * m.rows + row]
                ));
            }
        }
    }
    write_text(&dir.join("beta_ladder.csv"), &ladder)?;

    if let Some(boot) = &report.bootstrap {
        let mut tally = String::from("j,count\n");
        for (idx, count) in boot.u_tally.iter().enumerate() {
            tally.push_str(&format!("{},{}\n", idx + 1, count));
        }
        write_text(&dir.join("u_tally.csv"), &tally)?;

        let mut se = String::from("coordinate,se,se_full,ratio\n");
        for i in 0..boot.se.len() {
            let full = boot
                .se_full
                .as_ref()
                .map(|v| format!("{:?}", v[i]))
                .unwrap_or_default();
            let ratio = boot
                .se_ratio
                .as_ref()
                .map(|v| format!("{:?}", v[i]))
                .unwrap_or_default();
            se.push_str(&format!("{},{:?},{},{}\n", i, boot.se[i], full, ratio));
        }
        write_text(&dir.join("bootstrap_se.csv"), &se)?;
    }

    let provenance = serde_json::to_string_pretty(&report.provenance).expect("serializes");
    write_text(&dir.join("provenance.json"), &provenance)
}

fn matrix_csv(m: &MatrixData) -> String {
    let mut out = String::new();
    for row in 0..m.rows {
        let cells: Vec<String> = (0..m.cols)
            .map(|col| format!("{:?}", m.data[col * m.rows + row]))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Plain-text rendering for terminal output (numbers shown to four
/// significant digits; the machine report keeps full precision).
pub fn render_human(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "n = {}, p = {}, r = {}   scheme = {}\n",
        report.n, report.p, report.r, report.provenance.scheme
    ));
    out.push_str(&format!(
        "selected dimension: {} ({}), {} (lrt 5%)\n\n",
        report.u_ic, report.provenance.scheme, report.u_lrt
    ));
    out.push_str("  j      loglik    criterion   weight     lambda    p-value\n");
    for row in &report.per_dimension {
        out.push_str(&format!(
            "{:3}  {:>10.4}  {:>11.4}  {:>7.4}  {:>9.4}  {:>9.4}\n",
            row.j, row.loglik, row.criterion, row.weight, row.lambda, row.p_value
        ));
    }
    out.push_str("\nweighted coefficient estimate (rows = responses):\n");
    let bw = report.beta_w.to_matrix();
    for row in 0..bw.nrows() {
        let cells: Vec<String> = (0..bw.ncols())
            .map(|col| format!("{:>10.4}", bw[(row, col)]))
            .collect();
        out.push_str(&format!("  {}\n", cells.join(" ")));
    }
    if let Some(boot) = &report.bootstrap {
        out.push_str(&format!(
            "\nbootstrap: B = {}, center = {}, seed = {}, failures = {}\n",
            boot.b, boot.center, boot.seed, boot.failures
        ));
        out.push_str("  dimension tally: ");
        let tally: Vec<String> = boot
            .u_tally
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}:{}", i + 1, c))
            .collect();
        out.push_str(&tally.join(" "));
        out.push('\n');
        if let Some(ratios) = &boot.se_ratio {
            out.push_str("  se ratios (full / center): ");
            let cells: Vec<String> = ratios.iter().map(|v| format!("{v:.3}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::fit_weighted_envelope;
    use crate::Dataset;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn sample_report() -> Report {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = DMatrix::from_fn(50, 2, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let coef = DMatrix::from_fn(3, 2, |_, _| rng.gen::<f64>());
        let noise = DMatrix::from_fn(50, 3, |_, _| rng.gen::<f64>() - 0.5);
        let y = &x * coef.transpose() + noise;
        let analysis = fit_weighted_envelope(
            Dataset::new(x, y).unwrap(),
            Scheme::Bic,
            &OptimizerSettings::default(),
        )
        .unwrap();
        let provenance = Provenance {
            command: "test".into(),
            scheme: Scheme::Bic,
            seed: Some(7),
            data_fingerprint: "abc".into(),
            optimizer: OptimizerSettings::default(),
            notes: vec![],
        };
        build_report(&analysis, provenance, None).unwrap()
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let report = sample_report();
        let text = report_to_json(&report);
        let parsed = report_from_json(&text).unwrap();
        assert_eq!(report, parsed);
    }

    #[test]
    fn file_roundtrip_is_exact() {
        let report = sample_report();
        let path = std::env::temp_dir().join("wenv_report_roundtrip.json");
        write_report(&report, &path, ReportFormat::StructuredText).unwrap();
        let parsed = parse_report(&path).unwrap();
        assert_eq!(report, parsed);
    }

    #[test]
    fn csv_bundle_writes_expected_tables() {
        let report = sample_report();
        let dir = std::env::temp_dir().join("wenv_report_bundle");
        let _ = std::fs::remove_dir_all(&dir);
        write_report(&report, &dir, ReportFormat::CsvBundle).unwrap();
        for file in ["per_dimension.csv", "beta_w.csv", "beta_ladder.csv", "provenance.json"] {
            assert!(dir.join(file).exists(), "{file} missing");
        }
    }

    #[test]
    fn weights_in_report_form_a_simplex() {
        let report = sample_report();
        let total: f64 = report.per_dimension.iter().map(|r| r.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(report.per_dimension.iter().all(|r| r.weight >= 0.0));
    }
}
