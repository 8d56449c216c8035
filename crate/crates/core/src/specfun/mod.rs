//! The normalized Bessel function of the first kind
//!
//! ```text
//! j_ν(z) = Γ(ν+1) (2/z)^ν J_ν(z) = Σ_n (-1)^n Γ(ν+1) / (n! Γ(n+ν+1)) (z/2)^{2n}
//! ```
//!
//! with `ν = d/2 - 1` for an input dimension `d ≥ 2`. It is the exact
//! expectation of the ORF kernel estimator and shows up in every ORF moment.
//!
//! Two independent evaluation routes are provided:
//!
//! * [`normalized_bessel_series`]: the power series, summed in double-double
//!   arithmetic so that alternating cancellation costs at most ~32 digits;
//! * [`normalized_bessel_quadrature`]: the Poisson integral
//!   `Γ(ν+1)/(√π Γ(ν+1/2)) ∫_{-1}^{1} cos(zu) (1-u²)^{ν-1/2} du`, with
//!   `u = cos θ` so the integrand is analytic on `[0, π]`.
//!
//! [`normalized_bessel`] uses the series whenever its largest term stays
//! below [`SERIES_PEAK_LIMIT`] (or below the loss the other branch would
//! incur). Past that it evaluates `J_ν` from Schläfli's integral and rescales
//! by `Γ(ν+1)(2/z)^ν`, which keeps relative accuracy where `j_ν` is tiny
//! (large `d` near the first zeros); the Poisson quadrature cannot resolve
//! such values since its error is absolute.

mod quadrature;
mod schlafli;
mod series;
mod zeros;

pub use quadrature::{normalized_bessel_quadrature, quadrature_nodes_for, MIN_NODES};
pub use series::{normalized_bessel_series, MAX_SERIES_TERMS};
pub use zeros::{
    first_zero, joshi_lower_bound, rayleigh_partial, weierstrass_partial, zero_bound_linear,
    zero_bound_power, zero_lower_bound, zeros, ZeroTable, ZERO_BISECTION_WIDTH, ZERO_TOLERANCE,
};

use crate::error::{Error, Result};

/// Largest admissible series term (in absolute value) for the hybrid
/// evaluator. Double-double carries ~1e-32 relative precision, so the
/// series' absolute error stays below ~1e-19 under this limit.
pub const SERIES_PEAK_LIMIT: f64 = 1e12;

/// Tolerance handed to the series by [`normalized_bessel`].
const HYBRID_SERIES_TOL: f64 = 1e-30;

/// `ln(1e16)`: relative precision gap between double-double and `f64`.
const LN_DD_GAIN: f64 = 36.841_361_487_904_734;

/// Input dimension `d ≥ 2` and the associated Bessel order `ν = d/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrderDim {
    d: usize,
}

impl BesselOrderDim {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("dimension d must be >= 2, got {d}")));
        }
        Ok(Self { d })
    }

    pub fn d(self) -> usize {
        self.d
    }

    /// `ν = d/2 - 1`; a half-integer when `d` is odd.
    pub fn nu(self) -> f64 {
        self.d as f64 / 2.0 - 1.0
    }
}

fn check_finite(z: f64) -> Result<f64> {
    if z.is_finite() {
        Ok(z.abs())
    } else {
        Err(Error::invalid(format!("argument z must be finite, got {z}")))
    }
}

/// Natural log of the largest term magnitude of the series at `(ν, z)`.
///
/// Terms grow while `(z/2)² > (n+1)(n+1+ν)`, so the peak sits at the first
/// `n` where the ratio drops below one.
pub(crate) fn log_peak_term(nu: f64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut log_term = 0.0_f64;
    let mut n = 0.0_f64;
    loop {
        let ratio = q / ((n + 1.0) * (n + 1.0 + nu));
        if ratio <= 1.0 {
            return log_term;
        }
        log_term += ratio.ln();
        n += 1.0;
    }
}

/// `j_{d/2-1}(z)` for `d ≥ 2` and any finite `z` (the function is even).
///
/// The series' rounding error is about `peak · 1e-32`, the integral
/// route's about `Γ(ν+1)(2/z)^ν · 1e-16`; the series is kept whenever its
/// peak is below [`SERIES_PEAK_LIMIT`] or its error is the smaller one. The
/// result is clamped to `[-1, 1]`.
pub fn normalized_bessel(d: usize, z: f64) -> Result<f64> {
    let order = BesselOrderDim::new(d)?;
    let z = check_finite(z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    let nu = order.nu();
    let log_peak = log_peak_term(nu, z);
    let value = if log_peak <= SERIES_PEAK_LIMIT.ln()
        || log_peak <= schlafli::ln_scale(nu, z) + LN_DD_GAIN
    {
        series::series_unchecked(nu, z, HYBRID_SERIES_TOL)?
    } else {
        schlafli::normalized_via_schlafli(nu, z)
    };
    Ok(value.clamp(-1.0, 1.0))
}
