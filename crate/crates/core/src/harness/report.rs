//! Experiment reports and their JSON / CSV serialization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::DatasetIdentity;
use crate::analytics::Estimator;
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// What a record compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// `M_emp` against the closed-form mean.
    Mean,
    /// `V_emp` against the closed-form variance.
    Variance,
    /// Covariance of two ORF frequency cosines.
    Covariance,
    /// Frobenius MSE of one trial against its expectation.
    Mse,
}

/// Uniform grid `min, min + step, …` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ZGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || min < 0.0 || max < min {
            return Err(Error::invalid(format!(
                "z-grid needs 0 <= z-min <= z-max, got [{min}, {max}]"
            )));
        }
        if step <= 0.0 {
            return Err(Error::invalid(format!("z-step must be > 0, got {step}")));
        }
        Ok(Self { min, max, step })
    }

    pub fn single(z: f64) -> Result<Self> {
        Self::new(z, z, 1.0)
    }

    /// Points are `min + k·step`, computed by multiplication so that the
    /// grid does not drift; `max` is included when it lies on the grid.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

/// Everything needed to rerun an experiment; the worker count is omitted on
/// purpose since it does not change the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub estimator: Estimator,
    pub d: usize,
    pub p: Vec<usize>,
    pub s: Option<usize>,
    pub trials: Option<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub z_grid: Option<ZGrid>,
    pub quantities: Vec<Quantity>,
    pub dataset: Option<DatasetIdentity>,
    pub bandwidth: Option<f64>,
}

/// One theory/empirical comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub z: Option<f64>,
    pub p: usize,
    pub repeat: usize,
    pub quantity: Quantity,
    pub theory: f64,
    pub empirical: f64,
    pub abs_error: f64,
    pub stderr: f64,
}

impl Record {
    pub fn new(z: Option<f64>, p: usize, repeat: usize, quantity: Quantity, theory: f64, empirical: f64, stderr: f64) -> Self {
        Self {
            z,
            p,
            repeat,
            quantity,
            theory,
            empirical,
            abs_error: (empirical - theory).abs(),
            stderr,
        }
    }

    /// `|empirical - theory| / stderr`; 0 when both vanish.
    pub fn error_in_stderrs(&self) -> f64 {
        if self.abs_error == 0.0 {
            0.0
        } else {
            self.abs_error / self.stderr
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub records: usize,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub max_error_in_stderrs: f64,
}

impl Aggregate {
    pub fn of(records: &[Record]) -> Self {
        let n = records.len();
        let max_abs_error = records.iter().map(|r| r.abs_error).fold(0.0, f64::max);
        let mean_abs_error = if n == 0 {
            0.0
        } else {
            records.iter().map(|r| r.abs_error).sum::<f64>() / n as f64
        };
        let max_error_in_stderrs = records.iter().map(Record::error_in_stderrs).fold(0.0, f64::max);
        Self {
            records: n,
            max_abs_error,
            mean_abs_error,
            max_error_in_stderrs,
        }
    }
}

/// Mean and spread over repeats of one `(quantity, z, p)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub quantity: Quantity,
    pub z: Option<f64>,
    pub p: usize,
    pub theory: f64,
    pub mean_abs_error: f64,
    pub std_abs_error: f64,
}

/// Kernel MSE over trials for one `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseSummary {
    pub estimator: Estimator,
    pub p: usize,
    pub trials: usize,
    pub mean_mse: f64,
    pub std_mse: f64,
    /// Standard error of `mean_mse`.
    pub stderr: f64,
    /// `(1/n²) Σ_{i,j} V[k̃(x_i, x_j)]` from the closed-form variances.
    pub expected_mse: f64,
    /// `max(α_d, β_d)`.
    pub dominance_interval_end: f64,
    /// Fraction of pairs `i < j` whose scaled distance lies in
    /// `[0, max(α_d, β_d)]`.
    pub fraction_in_dominance_interval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    pub rng: String,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub aggregate: Aggregate,
    pub summaries: Vec<RepeatSummary>,
    pub mse: Vec<MseSummary>,
}

/// Flat CSV row of a record.
#[derive(Serialize)]
struct CsvRow {
    quantity: Quantity,
    z: Option<f64>,
    p: usize,
    repeat: usize,
    theory: f64,
    empirical: f64,
    abs_error: f64,
    stderr: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ser_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Serialization {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// JSON: the whole nested report. CSV: one row per record.
pub fn write_report(report: &ExperimentReport, format: Format, out: impl Write, label: &Path) -> Result<()> {
    match format {
        Format::Json => write_json(report, out, label),
        Format::Csv => {
            let rows = report.records.iter().map(|r| CsvRow {
                quantity: r.quantity,
                z: r.z,
                p: r.p,
                repeat: r.repeat,
                theory: r.theory,
                empirical: r.empirical,
                abs_error: r.abs_error,
                stderr: r.stderr,
            });
            write_csv(rows, out, label)
        }
    }
}

pub fn emit_report(report: &ExperimentReport, format: Format, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_report(report, format, &mut w, path)?;
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(value: &T, mut out: impl Write, label: &Path) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| ser_err(label, e))?;
    out.write_all(b"\n").map_err(io_err(label))
}

pub fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, out: impl Write, label: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| ser_err(label, e))?;
    }
    w.flush().map_err(io_err(label))
}

pub fn read_json_report(path: &Path) -> Result<ExperimentReport> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| ser_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let records = vec![
            Record::new(Some(0.5), 10, 0, Quantity::Mean, 0.9, 0.9001, 0.001),
            Record::new(Some(1.0), 10, 0, Quantity::Variance, 0.01, 0.0098, 0.0005),
            Record::new(None, 10, 1, Quantity::Mse, 0.1 / 3.0, 0.034, 0.002),
        ];
        ExperimentReport {
            tool_version: TOOL_VERSION.into(),
            rng: crate::sampling::RNG_ID.into(),
            config: ExperimentConfig {
                command: "mc".into(),
                estimator: Estimator::Orf,
                d: 8,
                p: vec![10],
                s: Some(50),
                trials: None,
                repeats: 2,
                seed: u64::MAX,
                z_grid: Some(ZGrid::new(0.5, 1.0, 0.5).unwrap()),
                quantities: vec![Quantity::Mean, Quantity::Variance],
                dataset: None,
                bandwidth: Some(1.234_567_890_123_456_7),
            },
            aggregate: Aggregate::of(&records),
            records,
            summaries: vec![],
            mse: vec![],
        }
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let report = sample_report();
        emit_report(&report, Format::Json, &path).unwrap();
        assert_eq!(read_json_report(&path).unwrap(), report);
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&sample_report(), Format::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("quantity,z,p,repeat,theory,empirical,abs_error,stderr\n"));
        assert!(text.contains("\nmse,,10,1,"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_report(&sample_report(), Format::Csv, Path::new("/nonexistent/dir/r.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn grid_points() {
        assert_eq!(ZGrid::new(0.0, 1.0, 0.25).unwrap().points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(ZGrid::single(24.0).unwrap().points(), vec![24.0]);
        assert_eq!(ZGrid::new(0.0, 0.3, 0.1).unwrap().points().len(), 4);
        assert!(ZGrid::new(1.0, 0.5, 0.1).is_err());
        assert!(ZGrid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn aggregate_statistics() {
        let a = sample_report().aggregate;
        assert_eq!(a.records, 3);
        assert!((a.max_abs_error - (0.034 - 0.1 / 3.0f64)).abs() < 1e-15);
        assert!((a.max_error_in_stderrs - 0.4).abs() < 1e-9);
    }
}
