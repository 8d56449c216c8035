//! Random Fourier features (RFF) and orthogonal random features (ORF) for
//! Gaussian and Bessel kernel approximation.
//!
//! The crate is split along the pipeline it implements:
//!
//! * [`specfun`]: the normalized Bessel function `j_{d/2-1}`, its zeros,
//!   Rayleigh partial sums and Weierstrass partial products.
//! * [`sampling`]: seeded Gaussian and Haar-orthogonal weight matrices.
//! * [`features`]: the sin/cos feature map, the approximate kernel and Gram
//!   matrices.
//! * [`analytics`]: closed-form biases and variances of both estimators, the
//!   bound constants and the intervals on which the inequalities hold.
//! * [`harness`]: Monte-Carlo experiments, dataset ingestion, MSE
//!   benchmarking and report emission used by the `orfkit` binary.
//!
//! Every function here is a pure function of its arguments. Randomness is
//! always driven by an explicit `u64` seed, see [`sampling::sub_seed`].

pub mod analytics;
pub mod error;
pub mod features;
pub mod harness;
pub mod sampling;
pub mod specfun;

pub use analytics::{BoundConstants, ClosedFormSummary, Estimator};
pub use error::{Error, Result};
pub use features::{FeatureVector, GramMatrix};
pub use sampling::{WeightKind, WeightMatrix};
pub use specfun::{normalized_bessel, ZeroTable};
