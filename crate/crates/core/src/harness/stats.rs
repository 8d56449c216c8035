//! Monte-Carlo moments of the kernel estimators.
//!
//! Replicate `l` of a run with seed `seed` always draws its weights with
//! `sub_seed(seed, l)` and replicates are collected in index order, so the
//! output does not depend on the rayon pool size.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::Estimator;
use crate::error::{Error, Result};
use crate::features::kernel_along;
use crate::sampling::{gaussian_matrix, orf_weight_matrix, rff_weight_matrix, sub_seed, WeightMatrix};

/// Stream reserved for the synthetic `(x, y)` pair of a run.
const PAIR_STREAM: u64 = u64::MAX - 1;

/// Weights of one replicate of `kind`.
pub fn draw_weights(kind: Estimator, d: usize, p: usize, seed: u64) -> Result<WeightMatrix> {
    match kind {
        Estimator::Rff => rff_weight_matrix(d, p, seed),
        Estimator::Orf => orf_weight_matrix(d, p, seed),
    }
}

/// Sample moments of `s` kernel replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `M_emp = (1/s) Σ k_l`
    pub mean: f64,
    /// `V_emp = (1/s) Σ (k_l - M_emp)²`
    pub variance: f64,
    /// `√(V_emp/s)`
    pub mean_stderr: f64,
    /// Delete-1 jackknife standard error of `V_emp`.
    pub variance_stderr: f64,
    pub samples: usize,
}

impl Moments {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let s = samples.len();
        if s < 2 {
            return Err(Error::invalid(format!("need at least 2 replicates, got {s}")));
        }
        let sf = s as f64;
        let mean = samples.iter().sum::<f64>() / sf;
        let centered: Vec<f64> = samples.iter().map(|k| k - mean).collect();
        let ss: f64 = centered.iter().map(|c| c * c).sum();
        let variance = ss / sf;

        // leave-one-out V_(i) = (ss - c_i²)/(s-1) - (c_i/(s-1))²
        let m = sf - 1.0;
        let loo: Vec<f64> = centered
            .iter()
            .map(|c| (ss - c * c) / m - (c / m) * (c / m))
            .collect();
        let loo_mean = loo.iter().sum::<f64>() / sf;
        let spread: f64 = loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).sum();

        Ok(Self {
            mean,
            variance,
            mean_stderr: (variance / sf).sqrt(),
            variance_stderr: (m / sf * spread).sqrt(),
            samples: s,
        })
    }
}

fn difference(d: usize, x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    for v in [x, y] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    Ok(DVector::from_iterator(d, x.iter().zip(y).map(|(a, b)| a - b)))
}

/// The `s` values `k̃_l(x, y)`, replicate `l` seeded with `sub_seed(seed, l)`.
pub fn kernel_replicates(
    kind: Estimator,
    d: usize,
    p: usize,
    x: &[f64],
    y: &[f64],
    s: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let diff = difference(d, x, y)?;
    (0..s as u64)
        .into_par_iter()
        .map(|l| Ok(kernel_along(&draw_weights(kind, d, p, sub_seed(seed, l))?, &diff)))
        .collect()
}

/// `M_emp`, `V_emp` and their standard errors over `s` independent weight
/// draws.
pub fn empirical_moments(
    kind: Estimator,
    d: usize,
    p: usize,
    x: &[f64],
    y: &[f64],
    s: usize,
    seed: u64,
) -> Result<Moments> {
    if s < 2 {
        return Err(Error::invalid(format!("need s >= 2 replicates, got {s}")));
    }
    Moments::from_samples(&kernel_replicates(kind, d, p, x, y, s, seed)?)
}

/// A Monte-Carlo estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Covariance of `cos(w_1ᵀΔ)` and `cos(w_2ᵀΔ)` for two columns of one Haar
/// block, `Δ = z e_1`, over `s` draws. The standard error is the standard
/// deviation of `(a_l - ā)(b_l - b̄)` over `√s`.
pub fn mc_covariance(d: usize, z: f64, s: usize, seed: u64) -> Result<Estimate> {
    if s < 100 {
        return Err(Error::invalid(format!("covariance needs s >= 100, got {s}")));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::invalid(format!("z must be finite and >= 0, got {z}")));
    }
    let pairs: Vec<(f64, f64)> = (0..s as u64)
        .into_par_iter()
        .map(|l| {
            let w = orf_weight_matrix(d, 2, sub_seed(seed, l))?;
            let e = w.entries();
            Ok(((z * e[(0, 0)]).cos(), (z * e[(0, 1)]).cos()))
        })
        .collect::<Result<_>>()?;

    let sf = s as f64;
    let mean_a = pairs.iter().map(|p| p.0).sum::<f64>() / sf;
    let mean_b = pairs.iter().map(|p| p.1).sum::<f64>() / sf;
    let u: Vec<f64> = pairs.iter().map(|(a, b)| (a - mean_a) * (b - mean_b)).collect();
    let value = u.iter().sum::<f64>() / sf;
    let var_u = u.iter().map(|v| (v - value) * (v - value)).sum::<f64>() / (sf - 1.0);
    Ok(Estimate {
        value,
        stderr: (var_u / sf).sqrt(),
        samples: s,
    })
}

/// Two standard normal points in `R^d`, with `y` moved along `y - x` so that
/// `‖x - y‖ = z` exactly.
pub fn pair_at_distance(d: usize, z: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = gaussian_matrix(d, 2, sub_seed(seed, PAIR_STREAM))?;
    let x: Vec<f64> = g.entries().column(0).iter().copied().collect();
    let dir = g.entries().column(1) - g.entries().column(0);
    let norm = dir.norm();
    if norm == 0.0 {
        return Err(Error::NumericalFailure("synthetic pair coincides".into()));
    }
    let y = x.iter().zip(dir.iter()).map(|(a, u)| a + z * u / norm).collect();
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_have_no_spread() {
        for kind in [Estimator::Rff, Estimator::Orf] {
            let x = [0.3, -1.0, 2.0];
            let m = empirical_moments(kind, 3, 5, &x, &x, 50, 1).unwrap();
            assert_eq!((m.mean, m.variance, m.mean_stderr, m.variance_stderr), (1.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let x = [0.0; 3];
        assert!(matches!(
            empirical_moments(Estimator::Orf, 3, 2, &x, &[0.0; 2], 10, 0),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(empirical_moments(Estimator::Orf, 3, 2, &x, &x, 1, 0).is_err());
        assert!(mc_covariance(4, 1.0, 99, 0).is_err());
    }

    #[test]
    fn moments_formulas() {
        let m = Moments::from_samples(&[1.0, 2.0, 3.0, 6.0]).unwrap();
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.variance, 3.5);
        assert!((m.mean_stderr - (3.5f64 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let samples: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 / 17.0).collect();
        let s = samples.len();
        let v_emp = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
        };
        let loo: Vec<f64> = (0..s)
            .map(|i| {
                let rest: Vec<f64> = samples.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                v_emp(&rest)
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / s as f64;
        let brute = ((s as f64 - 1.0) / s as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
        let m = Moments::from_samples(&samples).unwrap();
        assert!((m.variance - v_emp(&samples)).abs() < 1e-13);
        assert!((m.variance_stderr - brute).abs() < 1e-12 * brute);
    }

    #[test]
    fn replicates_are_reproducible() {
        let (x, y) = pair_at_distance(6, 1.3, 9).unwrap();
        let a = kernel_replicates(Estimator::Orf, 6, 4, &x, &y, 64, 3).unwrap();
        let b = kernel_replicates(Estimator::Orf, 6, 4, &x, &y, 64, 3).unwrap();
        assert_eq!(a, b);
        let w = draw_weights(Estimator::Orf, 6, 4, sub_seed(3, 10)).unwrap();
        let direct = crate::features::approx_kernel(&w, &x, &y).unwrap();
        assert_eq!(a[10], direct);
    }

    #[test]
    fn pair_has_exact_distance() {
        let (x, y) = pair_at_distance(300, 24.0, 0).unwrap();
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!((dist - 24.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_vanishes_at_origin() {
        let c = mc_covariance(5, 0.0, 200, 4).unwrap();
        assert_eq!((c.value, c.stderr), (0.0, 0.0));
    }
}
