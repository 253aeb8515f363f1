//! Numerical toolkit for the binary deletion channel at small deletion
//! probability `d`.
//!
//! * [`constants`]: series constants and `C_est(d) = 1 + d log2 d - A1 d + A2 d^2`.
//! * [`sources`]: Bernoulli, Markov and renewal sources, including the
//!   capacity-achieving run-length law from [`sources::dagger_distribution`].
//! * [`channel`]: deletion masks, runs, super-runs and parent-run blocks.
//! * [`likelihood`]: embedding-count DP and exact small-block information.
//! * [`runstats`]: empirical run-length, k-block and super-run statistics.
//! * [`analytics`]: closed-form expansions and Markov rate bounds.
//! * [`estimation`]: seeded, replica-parallel Monte Carlo rate estimates.
//! * [`cli`] and [`verify`]: the `delcap` command surface.
//!
//! ```
//! use deletion_capacity::constants::{capacity_estimate, default_constants};
//!
//! let c = capacity_estimate(0.05, default_constants()).unwrap();
//! assert!((c - 0.7304).abs() < 5e-5);
//! ```

pub mod analytics;
pub mod channel;
pub mod cli;
pub mod constants;
pub mod error;
pub mod estimation;
pub mod likelihood;
pub mod numeric;
pub mod rng;
pub mod runstats;
pub mod sources;
pub mod verify;
