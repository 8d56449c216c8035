//! Closed-form moments of the RFF and ORF kernel estimators, the bound
//! constants of the Gaussian sandwich and of the variance dominance, and the
//! envelopes built from them.
//!
//! Everything is a function of `z = ‖x - y‖`, the input dimension `d` and the
//! number of features `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::block_sizes;
use crate::specfun::{first_zero, normalized_bessel, zero_bound_linear, zero_bound_power};

/// Variances below this are reported as numerical failures instead of
/// being clamped to zero.
pub const VARIANCE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Rff,
    Orf,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Rff => "rff",
            Estimator::Orf => "orf",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() && z >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("z must be finite and >= 0, got {z}")))
    }
}

fn check_p(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("number of features p must be >= 1"));
    }
    Ok(())
}

/// `E[k̃_RFF] = e^{-z²/2}`.
pub fn rff_bias(z: f64) -> Result<f64> {
    check_z(z)?;
    Ok((-0.5 * z * z).exp())
}

/// `V[k̃_RFF] = (1/(2p)) (1 - e^{-z²})²`.
pub fn rff_variance(p: usize, z: f64) -> Result<f64> {
    check_p(p)?;
    check_z(z)?;
    let t = -(-z * z).exp_m1();
    Ok(t * t / (2.0 * p as f64))
}

/// `E[k̃_ORF] = j_{d/2-1}(z)`, for any `p`.
pub fn orf_bias(d: usize, z: f64) -> Result<f64> {
    check_z(z)?;
    normalized_bessel(d, z)
}

/// The three Bessel values an ORF variance needs.
#[derive(Debug, Clone, Copy)]
struct OrfMoments {
    /// `V[cos(wᵀΔ)] = (1 + j(2z))/2 - j(z)²`
    single: f64,
    /// `cov[cos(w_1ᵀΔ), cos(w_2ᵀΔ)] = j(√2 z) - j(z)²` for two columns of one block
    pair: f64,
}

impl OrfMoments {
    fn new(d: usize, z: f64) -> Result<Self> {
        let j = normalized_bessel(d, z)?;
        let j2 = normalized_bessel(d, 2.0 * z)?;
        let jr = normalized_bessel(d, std::f64::consts::SQRT_2 * z)?;
        Ok(Self {
            single: 0.5 * (1.0 + j2) - j * j,
            pair: jr - j * j,
        })
    }

    /// Blocked variance: independent blocks of sizes `d, …, d, p mod d`, each
    /// contributing `b·single + b(b-1)·pair`, the total divided by `p²`.
    fn variance(self, d: usize, p: usize) -> f64 {
        let total: f64 = block_sizes(d, p)
            .into_iter()
            .map(|b| {
                let b = b as f64;
                b * self.single + b * (b - 1.0) * self.pair
            })
            .sum();
        total / (p as f64 * p as f64)
    }
}

/// `V[k̃_ORF]`. For `p ≤ d` this is
/// `(1/p){(1 + j(2z))/2 + (p-1) j(√2 z) - p j(z)²}`; for `p > d` the
/// independent blocks are summed.
pub fn orf_variance(d: usize, p: usize, z: f64) -> Result<f64> {
    check_p(p)?;
    check_z(z)?;
    Ok(OrfMoments::new(d, z)?.variance(d, p))
}

/// Bias and variance of one estimator at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSummary {
    pub estimator: Estimator,
    pub d: usize,
    pub p: usize,
    pub z: f64,
    pub bias: f64,
    pub variance: f64,
}

/// Evaluates the closed forms, checking the variance is not negative beyond
/// [`VARIANCE_FLOOR`] (tiny negative round-off is clamped to 0).
pub fn closed_form(estimator: Estimator, d: usize, p: usize, z: f64) -> Result<ClosedFormSummary> {
    crate::specfun::BesselOrderDim::new(d)?;
    let (bias, variance) = match estimator {
        Estimator::Rff => (rff_bias(z)?, rff_variance(p, z)?),
        Estimator::Orf => (orf_bias(d, z)?, orf_variance(d, p, z)?),
    };
    if variance < VARIANCE_FLOOR || !variance.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "{estimator} variance {variance:e} is negative at d = {d}, p = {p}, z = {z}"
        )));
    }
    Ok(ClosedFormSummary {
        estimator,
        d,
        p,
        z,
        bias,
        variance: variance.max(0.0),
    })
}

/// `f_d(u) = u √(1 - 4/(2u² - d))`, evaluated at the two lower bounds of
/// `a_{d,1}`.
fn f_d(d: usize, u: f64) -> Option<f64> {
    let denom = 2.0 * u * u - d as f64;
    let inner = 1.0 - 4.0 / denom;
    (denom > 0.0 && inner > 0.0).then(|| u * inner.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub d: usize,
    pub b_d: f64,
    /// Only defined for `d ≥ 5`.
    pub c_d: Option<f64>,
    pub alpha_d: f64,
    pub beta_d: f64,
    /// `max(b_d, c_d)`, equal to `b_d` when `d ≤ 4`.
    pub bias_interval_end: f64,
    /// `max(α_d, β_d)`.
    pub variance_interval_end: f64,
    /// `a_{d,1}`.
    pub first_zero: f64,
}

fn b_d(d: usize) -> f64 {
    // 2u² - d = 2√2 d^{3/2} - d > 4 for every d ≥ 2
    f_d(d, zero_bound_power(d)).expect("b_d is defined for d >= 2")
}

fn c_d(d: usize) -> Option<f64> {
    if d < 5 {
        return None;
    }
    f_d(d, zero_bound_linear(d))
}

fn alpha_d(d: usize) -> f64 {
    (d as f64 / 2.0).powf(0.75)
}

fn beta_d(d: usize) -> f64 {
    0.5 * zero_bound_linear(d)
}

pub fn bound_constants(d: usize) -> Result<BoundConstants> {
    crate::specfun::BesselOrderDim::new(d)?;
    let b = b_d(d);
    let c = c_d(d);
    let (alpha, beta) = (alpha_d(d), beta_d(d));
    Ok(BoundConstants {
        d,
        b_d: b,
        c_d: c,
        alpha_d: alpha,
        beta_d: beta,
        bias_interval_end: c.map_or(b, |c| b.max(c)),
        variance_interval_end: alpha.max(beta),
        first_zero: first_zero(d)?,
    })
}

/// `max(α_d, β_d)`: the variance of ORF is below that of RFF for every `z`
/// in `[0, max(α_d, β_d)]`.
pub fn variance_dominance_interval(d: usize) -> Result<f64> {
    crate::specfun::BesselOrderDim::new(d)?;
    Ok(alpha_d(d).max(beta_d(d)))
}

/// Lower and upper envelope at one `z`, and whether `z` lies in the closed
/// interval `[0, max(b_d, c_d)]` where the envelope is proven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
    pub in_validity_interval: bool,
}

fn bias_interval_end(d: usize) -> f64 {
    let b = b_d(d);
    c_d(d).map_or(b, |c| b.max(c))
}

/// `e^{-z²/2} ≤ E[k̃_ORF] ≤ e^{-z²/(2d)}`.
pub fn bias_bounds(d: usize, z: f64) -> Result<Envelope> {
    crate::specfun::BesselOrderDim::new(d)?;
    check_z(z)?;
    let z2 = z * z;
    Ok(Envelope {
        lower: (-0.5 * z2).exp(),
        upper: (-0.5 * z2 / d as f64).exp(),
        in_validity_interval: z <= bias_interval_end(d),
    })
}

/// Envelope of `V[k̃_ORF]` obtained by plugging the bias sandwich into the
/// variance formula. The lower value is not clamped and may be negative.
pub fn variance_bounds(d: usize, p: usize, z: f64) -> Result<Envelope> {
    crate::specfun::BesselOrderDim::new(d)?;
    check_p(p)?;
    check_z(z)?;
    let z2 = z * z;
    let df = d as f64;
    let pf = p as f64;
    let w = (pf - 1.0) / pf;
    let lower = (1.0 + (-2.0 * z2).exp()) / (2.0 * pf) + w * (-z2).exp() - (-z2 / df).exp();
    let upper = (1.0 + (-2.0 * z2 / df).exp()) / (2.0 * pf) + w * (-z2 / df).exp() - (-z2).exp();
    Ok(Envelope {
        lower,
        upper,
        in_validity_interval: z <= bias_interval_end(d),
    })
}

/// Uniform grid on `[0, end]` with step `min(0.01, end/1000)`; the last
/// point is `end` itself.
pub fn inequality_grid(end: f64) -> Vec<f64> {
    if end <= 0.0 {
        return vec![0.0];
    }
    let step = (end / 1000.0).min(0.01);
    let n = (end / step).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    if end - grid[n] > 1e-12 * end {
        grid.push(end);
    } else {
        grid[n] = end;
    }
    grid
}
