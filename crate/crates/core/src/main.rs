use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use orfkit::analytics::{bound_constants, Estimator};
use orfkit::harness::report::{write_csv, write_json, write_report, TOOL_VERSION};
use orfkit::harness::{
    bias_table, load_dataset, mc_sweep, mse_experiment, synthetic_normal, variance_table,
    ExperimentReport, Format, LoadOptions, McSetup, MseSetup, Quantity, ZGrid, DEFAULT_P_GRID,
    DEFAULT_REPEATS,
};
use orfkit::specfun::zeros;
use orfkit::{Error, Result};

/// Closed forms, bounds and Monte-Carlo checks for random Fourier features
/// (RFF) and orthogonal random features (ORF).
#[derive(Debug, Parser)]
#[command(name = "orfkit", version)]
struct Cli {
    /// Worker threads; the output does not depend on this
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct Grid {
    #[arg(long, default_value_t = 0.0)]
    z_min: f64,
    #[arg(long, default_value_t = 5.0)]
    z_max: f64,
    #[arg(long, default_value_t = 0.05)]
    z_step: f64,
}

#[derive(Debug, Args)]
struct McGrid {
    #[arg(long, default_value_t = 24.0)]
    z_min: f64,
    #[arg(long, default_value_t = 24.0)]
    z_max: f64,
    #[arg(long, default_value_t = 1.0)]
    z_step: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form biases of both estimators and the ORF bias envelope over a z-grid
    Bias {
        #[arg(long, default_value_t = 32)]
        d: usize,
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form variances of both estimators and the ORF variance envelope
    Variance {
        #[arg(long, default_value_t = 32)]
        d: usize,
        /// Comma-separated feature counts
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 4, 16])]
        p: Vec<usize>,
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        output: Output,
    },
    /// Bound constants b_d, c_d, alpha_d, beta_d and the first zero
    Bounds {
        #[arg(long, default_value_t = 32)]
        d: usize,
        #[command(flatten)]
        output: Output,
    },
    /// First m zeros of j_(d/2-1) with the Rayleigh partial sums
    Zeros {
        #[arg(long, default_value_t = 32)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Monte-Carlo moments against their closed forms
    Mc {
        #[arg(long, value_enum, default_value_t = Estimator::Orf)]
        estimator: Estimator,
        #[arg(long, default_value_t = 300)]
        d: usize,
        /// Comma-separated feature counts
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P_GRID)]
        p: Vec<usize>,
        /// Weight draws per point
        #[arg(long, default_value_t = 50)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        /// Comma-separated quantities
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Quantity::Mean, Quantity::Variance])]
        quantity: Vec<Quantity>,
        #[command(flatten)]
        grid: McGrid,
        #[command(flatten)]
        output: Output,
    },
    /// Kernel-matrix MSE on a CSV dataset or synthetic normal data
    Mse {
        #[arg(long, value_enum, default_value_t = Estimator::Orf)]
        estimator: Estimator,
        /// CSV file with one point per row; synthetic normal data when absent
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
        /// The first row of the dataset is a header
        #[arg(long)]
        header: bool,
        /// 0-based index of a column to drop, typically the label
        #[arg(long)]
        drop_label_col: Option<usize>,
        /// Synthetic data: number of points
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Synthetic data: dimension
        #[arg(long, default_value_t = 32)]
        d: usize,
        /// Synthetic data: seed of the points
        #[arg(long, default_value_t = 0)]
        data_seed: u64,
        /// Comma-separated feature counts
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_P_GRID)]
        p: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Serialize)]
struct Table<'a, T> {
    tool_version: &'a str,
    command: &'a str,
    d: usize,
    rows: Vec<T>,
}

#[derive(Serialize)]
struct ZeroRow {
    index: usize,
    zero: f64,
    rayleigh_partial: f64,
    rayleigh_limit: f64,
}

fn emit_rows<T: Serialize>(command: &str, d: usize, rows: Vec<T>, output: &Output) -> Result<()> {
    let table = Table {
        tool_version: TOOL_VERSION,
        command,
        d,
        rows,
    };
    with_sink(output, |w, label| match output.format {
        Format::Json => write_json(&table, w, label),
        Format::Csv => write_csv(&table.rows, w, label),
    })
}

fn emit(report: &ExperimentReport, output: &Output) -> Result<()> {
    with_sink(output, |w, label| write_report(report, output.format, w, label))
}

fn with_sink(output: &Output, f: impl FnOnce(&mut dyn Write, &Path) -> Result<()>) -> Result<()> {
    match &output.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w, path)?;
            w.flush().map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock, Path::new("<stdout>"))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Bias { d, grid, output } => {
            let grid = ZGrid::new(grid.z_min, grid.z_max, grid.z_step)?;
            emit_rows("bias", d, bias_table(d, &grid)?, &output)
        }
        Command::Variance { d, p, grid, output } => {
            let grid = ZGrid::new(grid.z_min, grid.z_max, grid.z_step)?;
            emit_rows("variance", d, variance_table(d, &p, &grid)?, &output)
        }
        Command::Bounds { d, output } => emit_rows("bounds", d, vec![bound_constants(d)?], &output),
        Command::Zeros { d, m, output } => {
            let table = zeros(d, m)?;
            let mut partial = 0.0;
            let rows = table
                .zeros()
                .iter()
                .enumerate()
                .map(|(k, &a)| {
                    partial += 1.0 / (a * a);
                    ZeroRow {
                        index: k + 1,
                        zero: a,
                        rayleigh_partial: partial,
                        rayleigh_limit: 1.0 / (2.0 * d as f64),
                    }
                })
                .collect();
            emit_rows("zeros", d, rows, &output)
        }
        Command::Mc {
            estimator,
            d,
            p,
            s,
            seed,
            repeats,
            quantity,
            grid,
            output,
        } => {
            let setup = McSetup {
                estimator,
                d,
                p_grid: p,
                s,
                repeats,
                seed,
                z_grid: ZGrid::new(grid.z_min, grid.z_max, grid.z_step)?,
                quantities: quantity,
            };
            emit(&mc_sweep(&setup)?, &output)
        }
        Command::Mse {
            estimator,
            dataset,
            delimiter,
            header,
            drop_label_col,
            n,
            d,
            data_seed,
            p,
            trials,
            seed,
            output,
        } => {
            let data = match dataset {
                Some(path) => {
                    if !delimiter.is_ascii() {
                        return Err(Error::InvalidArgument(format!(
                            "delimiter must be a single ASCII character, got {delimiter:?}"
                        )));
                    }
                    let options = LoadOptions {
                        delimiter: delimiter as u8,
                        has_header: header,
                        drop_column: drop_label_col,
                    };
                    load_dataset(&path, &options)?
                }
                None => synthetic_normal(n, d, data_seed)?,
            };
            let setup = MseSetup {
                estimator,
                p_grid: p,
                trials,
                seed,
            };
            emit(&mse_experiment(&data, &setup)?, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be >= 1");
            return ExitCode::from(2);
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: could not start worker pool: {e}");
            return ExitCode::from(3);
        }
    };

    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
