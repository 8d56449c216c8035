//! Point clouds: CSV ingestion, synthetic normal data and the bandwidth
//! heuristic.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::gaussian_matrix;

/// `n × d` matrix of points, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    name: String,
    source: String,
}

/// What a report needs to identify a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIdentity {
    pub name: String,
    pub source: String,
    pub n: usize,
    pub d: usize,
}

impl Dataset {
    /// Checks `n ≥ 2`, `d ≥ 1` and that every entry is finite.
    pub fn new(x: DMatrix<f64>, name: impl Into<String>, source: impl Into<String>) -> Result<Self> {
        if x.nrows() < 2 || x.ncols() == 0 {
            return Err(Error::DegenerateDataset(format!(
                "need at least 2 points with d >= 1, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (row, col) = (pos % x.nrows(), pos / x.nrows());
            return Err(Error::DegenerateDataset(format!(
                "non-finite entry at point {row}, coordinate {col}"
            )));
        }
        Ok(Self {
            x,
            name: name.into(),
            source: source.into(),
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// File path, or `"synthetic"`.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn identity(&self) -> DatasetIdentity {
        DatasetIdentity {
            name: self.name.clone(),
            source: self.source.clone(),
            n: self.n(),
            d: self.d(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// 0-based index of a column (typically a label) to discard.
    pub drop_column: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            drop_column: None,
        }
    }
}

/// Reads one point per row. Parse errors report 1-based line and column
/// numbers of the file.
pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let mut count = 0;
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == options.drop_column {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                col: col + 1,
                msg: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    col: col + 1,
                    msg: format!("non-finite value {cell:?}"),
                });
            }
            data.push(value);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Parse {
                    row: line,
                    col: record.len(),
                    msg: format!("expected {w} feature columns, found {count}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }

    let d = width.unwrap_or(0);
    if rows == 0 || d == 0 {
        return Err(Error::DegenerateDataset(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(
        DMatrix::from_row_slice(rows, d, &data),
        name,
        path.display().to_string(),
    )
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            row,
            col: 0,
            msg: format!("{other:?}"),
        },
    }
}

/// `n × d` i.i.d. standard normal points.
pub fn synthetic_normal(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n < 2 || d == 0 {
        return Err(Error::DegenerateDataset(format!(
            "synthetic data needs n >= 2 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    let x = gaussian_matrix(n, d, seed)?.entries().clone();
    Dataset::new(x, format!("normal-{n}x{d}-seed{seed}"), "synthetic")
}

/// `σ = √((1/n²) Σ_{i,j} ‖x_i - x_j‖²)`, the diagonal zeros included.
///
/// Computed as `√(2 (1/n) Σ_i ‖x_i - x̄‖²)`, which is the same sum.
pub fn bandwidth_heuristic(x: &DMatrix<f64>) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::DegenerateDataset(format!(
            "bandwidth needs at least 2 points, got {n}"
        )));
    }
    let mean = x.row_mean();
    let spread: f64 = x.row_iter().map(|r| (r - &mean).norm_squared()).sum();
    Ok((2.0 * spread / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_plain_csv() {
        let f = write_tmp("1,2\n3,4\n5,6\n");
        let ds = load_dataset(f.path(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.x(), &DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        assert_ne!(ds.source(), "synthetic");
    }

    #[test]
    fn header_row_is_skipped() {
        let f = write_tmp("1,2\n3,4\n5,6");
        let opts = LoadOptions {
            has_header: true,
            ..LoadOptions::default()
        };
        let ds = load_dataset(f.path(), &opts).unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
        let f = write_tmp("a,b\n1,2\n3,4\n5,6");
        assert_eq!(load_dataset(f.path(), &opts).unwrap().n(), 3);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let f = write_tmp("1,2\n3,abc\n5,6\n");
        match load_dataset(f.path(), &LoadOptions::default()) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_column_and_delimiter() {
        let f = write_tmp("0.5;good;1\n1.5;bad;2\n");
        let opts = LoadOptions {
            delimiter: b';',
            has_header: false,
            drop_column: Some(1),
        };
        let ds = load_dataset(f.path(), &opts).unwrap();
        assert_eq!(ds.x(), &DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 1.5, 2.0]));
    }

    #[test]
    fn ragged_and_empty_files() {
        let f = write_tmp("1,2\n3\n");
        assert!(matches!(
            load_dataset(f.path(), &LoadOptions::default()),
            Err(Error::Parse { row: 2, .. })
        ));
        let f = write_tmp("");
        assert!(matches!(
            load_dataset(f.path(), &LoadOptions::default()),
            Err(Error::DegenerateDataset(_))
        ));
        let f = write_tmp("1,2\n");
        assert!(matches!(
            load_dataset(f.path(), &LoadOptions::default()),
            Err(Error::DegenerateDataset(_))
        ));
        assert!(matches!(
            load_dataset(Path::new("/nonexistent/x.csv"), &LoadOptions::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn bandwidth_examples() {
        let same = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(bandwidth_heuristic(&same).unwrap(), 0.0);
        let two = DMatrix::from_row_slice(2, 1, &[0.0, 2f64.sqrt()]);
        assert!((bandwidth_heuristic(&two).unwrap() - 1.0).abs() < 1e-15);
        assert!(bandwidth_heuristic(&DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn bandwidth_matches_double_loop() {
        let x = gaussian_matrix(10, 3, 5).unwrap().entries().clone();
        let mut total = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                total += (x.row(i) - x.row(j)).norm_squared();
            }
        }
        let brute = (total / 100.0).sqrt();
        assert!((bandwidth_heuristic(&x).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn synthetic_data() {
        let a = synthetic_normal(5, 3, 1).unwrap();
        assert_eq!((a.n(), a.d(), a.source()), (5, 3, "synthetic"));
        assert_eq!(a, synthetic_normal(5, 3, 1).unwrap());
        assert!(synthetic_normal(1, 3, 1).is_err());
    }
}
