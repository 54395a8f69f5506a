//! Certified sample sizes for bounded means, and probability minimization
//! through an empirical Chernoff surrogate.
//!
//! * [`tail_bounds`] holds the Hoeffding exponent, its tail bounds and the
//!   closed-form sample size for the mixed absolute/relative criterion.
//! * [`estimator`] draws (or takes) samples and issues [`Certificate`]s.
//! * [`chernoff_opt`] minimizes `mean_i exp(-lambda Y(theta, delta_i))` by
//!   backtracking gradient descent and certifies the result on fresh draws.
//! * [`verification`] turns the supporting inequalities into executable scans.
//! * [`cli`] is the command-line front end used by the `probcert` binary.

pub mod chernoff_opt;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod seed;
pub mod sum;
pub mod tail_bounds;
pub mod verification;

pub use error::{Error, Result};
pub use estimator::{Certificate, CertificateKind, SampleSource};
pub use tail_bounds::{ErrorSpec, SamplePlan};
