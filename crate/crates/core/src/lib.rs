//! Evolution strategies with a constant number of fitness resamplings on
//! noisy sphere objectives whose noise shrinks near the optimum.
//!
//! - [`rng`]: hierarchical, replayable Gaussian streams.
//! - [`problem`]: the noisy objective `‖x − x*‖^p + ‖x − x*‖^(pz/2) · η`.
//! - [`strategy`]: the self-adaptive (μ,λ)-ES with `Y` resamplings.
//! - [`analysis`]: rate fits, run aggregation and closed-form thresholds.
//! - [`probe`]: Monte Carlo estimates of misranking probabilities.
//! - [`harness`]: experiment configuration, batch execution and output files.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod probe;
pub mod problem;
pub mod rng;
pub mod strategy;

pub use error::{Error, Result};
pub use problem::{NoiseKind, ProblemSpec};
pub use rng::{SeedSpec, Stream};
pub use strategy::{run_es, RunStatus, RunTrace, StrategyConfig};
