//! Experiment drivers behind the CLI subcommands.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{bandwidth_heuristic, Dataset};
use super::report::{
    Aggregate, ExperimentConfig, ExperimentReport, MseSummary, Quantity, Record, RepeatSummary,
    ZGrid, TOOL_VERSION,
};
use super::stats::{draw_weights, kernel_replicates, mc_covariance, pair_at_distance, Moments};
use crate::analytics::{
    bias_bounds, orf_bias, orf_variance, rff_bias, rff_variance, variance_bounds,
    variance_dominance_interval, Estimator,
};
use crate::error::{Error, Result};
use crate::features::gram_matrix;
use crate::sampling::{sub_seed, RNG_ID};
use crate::specfun::normalized_bessel;

/// Default feature counts of the synthetic sweep.
pub const DEFAULT_P_GRID: [usize; 7] = [10, 50, 100, 150, 200, 250, 300];

/// Default number of repeats of the synthetic sweep.
pub const DEFAULT_REPEATS: usize = 10;

/// Settings of a Monte-Carlo sweep over `z`, `p` and repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct McSetup {
    pub estimator: Estimator,
    pub d: usize,
    pub p_grid: Vec<usize>,
    pub s: usize,
    pub repeats: usize,
    pub seed: u64,
    pub z_grid: ZGrid,
    pub quantities: Vec<Quantity>,
}

fn theory(estimator: Estimator, quantity: Quantity, d: usize, p: usize, z: f64) -> Result<f64> {
    match (quantity, estimator) {
        (Quantity::Mean, Estimator::Rff) => rff_bias(z),
        (Quantity::Mean, Estimator::Orf) => orf_bias(d, z),
        (Quantity::Variance, Estimator::Rff) => rff_variance(p, z),
        (Quantity::Variance, Estimator::Orf) => orf_variance(d, p, z),
        (Quantity::Covariance, _) => {
            let j = normalized_bessel(d, z)?;
            Ok(normalized_bessel(d, std::f64::consts::SQRT_2 * z)? - j * j)
        }
        (Quantity::Mse, _) => Err(Error::invalid("the MSE is not a Monte-Carlo sweep quantity")),
    }
}

/// For every repeat `r`, `p` and `z` of the setup, compares the requested
/// quantities with their closed forms. Repeat `r` uses base seed
/// `sub_seed(seed, r)` for both the point pair and the weights, so all `z`
/// and `p` of one repeat share their random numbers.
pub fn mc_sweep(setup: &McSetup) -> Result<ExperimentReport> {
    if setup.s < 2 || setup.repeats == 0 || setup.p_grid.is_empty() || setup.quantities.is_empty() {
        return Err(Error::invalid("mc needs s >= 2, repeats >= 1, a p-grid and a quantity"));
    }
    if setup.quantities.contains(&Quantity::Mse) {
        return Err(Error::invalid("quantity mse belongs to the mse command"));
    }
    if setup.quantities.contains(&Quantity::Covariance) && setup.estimator != Estimator::Orf {
        return Err(Error::invalid("the covariance quantity is defined for orf only"));
    }
    crate::specfun::BesselOrderDim::new(setup.d)?;
    let zs = setup.z_grid.points();

    let mut jobs = Vec::new();
    for repeat in 0..setup.repeats {
        for &p in &setup.p_grid {
            for &z in &zs {
                jobs.push((repeat, p, z));
            }
        }
    }
    let per_job: Vec<Vec<Record>> = jobs
        .into_par_iter()
        .map(|(repeat, p, z)| mc_point(setup, repeat, p, z))
        .collect::<Result<_>>()?;
    let records: Vec<Record> = per_job.into_iter().flatten().collect();

    Ok(ExperimentReport {
        tool_version: TOOL_VERSION.into(),
        rng: RNG_ID.into(),
        config: ExperimentConfig {
            command: "mc".into(),
            estimator: setup.estimator,
            d: setup.d,
            p: setup.p_grid.clone(),
            s: Some(setup.s),
            trials: None,
            repeats: setup.repeats,
            seed: setup.seed,
            z_grid: Some(setup.z_grid),
            quantities: setup.quantities.clone(),
            dataset: None,
            bandwidth: None,
        },
        aggregate: Aggregate::of(&records),
        summaries: summarize_repeats(&records),
        records,
        mse: Vec::new(),
    })
}

fn mc_point(setup: &McSetup, repeat: usize, p: usize, z: f64) -> Result<Vec<Record>> {
    let base = sub_seed(setup.seed, repeat as u64);
    let (d, kind) = (setup.d, setup.estimator);
    let needs_kernel = setup
        .quantities
        .iter()
        .any(|q| matches!(q, Quantity::Mean | Quantity::Variance));
    let moments = if needs_kernel {
        let (x, y) = pair_at_distance(d, z, base)?;
        Some(Moments::from_samples(&kernel_replicates(kind, d, p, &x, &y, setup.s, base)?)?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(setup.quantities.len());
    for &q in &setup.quantities {
        let t = theory(kind, q, d, p, z)?;
        let (value, stderr) = match (q, moments) {
            (Quantity::Mean, Some(m)) => (m.mean, m.mean_stderr),
            (Quantity::Variance, Some(m)) => (m.variance, m.variance_stderr),
            _ => {
                let c = mc_covariance(d, z, setup.s.max(100), base)?;
                (c.value, c.stderr)
            }
        };
        out.push(Record::new(Some(z), p, repeat, q, t, value, stderr));
    }
    Ok(out)
}

/// Mean ± standard deviation of the absolute error over repeats, per
/// `(quantity, z, p)` in first-appearance order.
fn summarize_repeats(records: &[Record]) -> Vec<RepeatSummary> {
    let mut keys: Vec<(Quantity, Option<f64>, usize, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|k| k.0 == r.quantity && k.1 == r.z && k.2 == r.p) {
            keys.push((r.quantity, r.z, r.p, r.theory));
        }
    }
    keys.into_iter()
        .map(|(quantity, z, p, theory)| {
            let errs: Vec<f64> = records
                .iter()
                .filter(|r| r.quantity == quantity && r.z == z && r.p == p)
                .map(|r| r.abs_error)
                .collect();
            let (mean, std) = mean_std(&errs);
            RepeatSummary {
                quantity,
                z,
                p,
                theory,
                mean_abs_error: mean,
                std_abs_error: std,
            }
        })
        .collect()
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Settings of a kernel-matrix MSE benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct MseSetup {
    pub estimator: Estimator,
    pub p_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// Bandwidth-scaled inputs, their pairwise distances (`i < j`, row-major)
/// and the reference kernel matrix.
struct ScaledProblem {
    x: DMatrix<f64>,
    dists: Vec<f64>,
    reference: DMatrix<f64>,
}

fn scaled_problem(data: &Dataset, estimator: Estimator, sigma: f64) -> Result<ScaledProblem> {
    let x = data.x() / sigma;
    let (n, d) = (x.nrows(), x.ncols());
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((x.row(i) - x.row(j)).norm());
        }
    }
    let values: Vec<f64> = dists
        .par_iter()
        .map(|&z| match estimator {
            Estimator::Rff => rff_bias(z),
            Estimator::Orf => normalized_bessel(d, z),
        })
        .collect::<Result<_>>()?;
    let mut reference = DMatrix::from_element(n, n, 1.0);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            reference[(i, j)] = values[k];
            reference[(j, i)] = values[k];
            k += 1;
        }
    }
    Ok(ScaledProblem { x, dists, reference })
}

/// `‖K - K̃‖_F² / n²` for each trial and each `p`, after scaling the inputs by
/// the bandwidth heuristic `σ`. The reference `K` is the Gaussian kernel for
/// RFF and the Bessel kernel `j_{d/2-1}` for ORF; trial `t` draws its weights
/// with `sub_seed(seed, t)`.
pub fn mse_experiment(data: &Dataset, setup: &MseSetup) -> Result<ExperimentReport> {
    if setup.trials == 0 || setup.p_grid.is_empty() || setup.p_grid.contains(&0) {
        return Err(Error::invalid("mse needs trials >= 1 and p >= 1"));
    }
    let (n, d) = (data.n(), data.d());
    if setup.estimator == Estimator::Orf && d < 2 {
        return Err(Error::invalid("ORF needs d >= 2"));
    }
    let sigma = bandwidth_heuristic(data.x())?;
    if sigma == 0.0 {
        return Err(Error::DegenerateDataset(
            "all points coincide, bandwidth is 0".into(),
        ));
    }
    let problem = scaled_problem(data, setup.estimator, sigma)?;
    // the interval is defined through the Bessel order, which needs d ≥ 2
    let end = if d >= 2 { variance_dominance_interval(d)? } else { 0.0 };
    let inside = problem.dists.iter().filter(|&&z| z <= end).count();
    let fraction = inside as f64 / problem.dists.len() as f64;
    let n2 = (n * n) as f64;

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &p in &setup.p_grid {
        let variances: Vec<f64> = problem
            .dists
            .par_iter()
            .map(|&z| match setup.estimator {
                Estimator::Rff => rff_variance(p, z),
                Estimator::Orf => orf_variance(d, p, z),
            })
            .collect::<Result<_>>()?;
        let expected = 2.0 * variances.iter().sum::<f64>() / n2;

        let mses: Vec<f64> = (0..setup.trials as u64)
            .into_par_iter()
            .map(|t| {
                let w = draw_weights(setup.estimator, d, p, sub_seed(setup.seed, t))?;
                let k = gram_matrix(&w, &problem.x)?;
                Ok((k.entries() - &problem.reference).norm_squared() / n2)
            })
            .collect::<Result<_>>()?;
        let (mean, std) = mean_std(&mses);
        for (t, &m) in mses.iter().enumerate() {
            records.push(Record::new(None, p, t, Quantity::Mse, expected, m, std));
        }
        summaries.push(MseSummary {
            estimator: setup.estimator,
            p,
            trials: setup.trials,
            mean_mse: mean,
            std_mse: std,
            stderr: std / (setup.trials as f64).sqrt(),
            expected_mse: expected,
            dominance_interval_end: end,
            fraction_in_dominance_interval: fraction,
        });
    }

    Ok(ExperimentReport {
        tool_version: TOOL_VERSION.into(),
        rng: RNG_ID.into(),
        config: ExperimentConfig {
            command: "mse".into(),
            estimator: setup.estimator,
            d,
            p: setup.p_grid.clone(),
            s: None,
            trials: Some(setup.trials),
            repeats: 1,
            seed: setup.seed,
            z_grid: None,
            quantities: vec![Quantity::Mse],
            dataset: Some(data.identity()),
            bandwidth: Some(sigma),
        },
        aggregate: Aggregate::of(&records),
        summaries: Vec::new(),
        records,
        mse: summaries,
    })
}

/// One row of the `bias` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub z: f64,
    pub rff: f64,
    pub orf: f64,
    pub lower: f64,
    pub upper: f64,
    pub in_validity_interval: bool,
}

/// One row of the `variance` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub z: f64,
    pub p: usize,
    pub rff: f64,
    pub orf: f64,
    pub lower: f64,
    pub upper: f64,
    pub in_validity_interval: bool,
    pub in_dominance_interval: bool,
}

pub fn bias_table(d: usize, grid: &ZGrid) -> Result<Vec<BiasRow>> {
    grid.points()
        .into_par_iter()
        .map(|z| {
            let e = bias_bounds(d, z)?;
            Ok(BiasRow {
                z,
                rff: rff_bias(z)?,
                orf: orf_bias(d, z)?,
                lower: e.lower,
                upper: e.upper,
                in_validity_interval: e.in_validity_interval,
            })
        })
        .collect()
}

pub fn variance_table(d: usize, p_grid: &[usize], grid: &ZGrid) -> Result<Vec<VarianceRow>> {
    let end = variance_dominance_interval(d)?;
    let mut jobs = Vec::new();
    for &p in p_grid {
        for z in grid.points() {
            jobs.push((p, z));
        }
    }
    jobs.into_par_iter()
        .map(|(p, z)| {
            let e = variance_bounds(d, p, z)?;
            Ok(VarianceRow {
                z,
                p,
                rff: rff_variance(p, z)?,
                orf: orf_variance(d, p, z)?,
                lower: e.lower,
                upper: e.upper,
                in_validity_interval: e.in_validity_interval,
                in_dominance_interval: z <= end,
            })
        })
        .collect()
}
