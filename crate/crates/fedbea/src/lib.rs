//! Deterministic federated-optimization simulator with a verification engine
//! for the modified losses that discrete federated updates actually follow.
//!
//! The crate has two halves that check each other:
//!
//! * [`fedcore`] runs FedAvg, FedAvg without the dispersion bias, FedSAM,
//!   SCAFFOLD (ideal control variates), and a centralized SGD baseline, all
//!   bit-reproducible from a single seed.
//! * [`bea`] evaluates each algorithm's implicit-regularizer terms in closed
//!   form, predicts expected one-round updates to second order, and verifies
//!   the predictions against exact brute-force enumeration of batch orders
//!   on quadratic task suites.
//!
//! Supporting modules: [`models`] (quadratic / softmax-linear / smooth-MLP
//! objectives with exact derivatives), [`data`] (Dirichlet non-IID
//! partitioning, synthetic tasks, CSV ingestion, deterministic batch
//! schedules), [`analysis`] (gradient variances, Fisher-trace and
//! power-iteration spectrum estimates), and [`cli`] (config-driven
//! simulate / verify / partition runs with CSV and JSON outputs).
//!
//! The `examples/` directory demonstrates each capability end to end; the
//! `fedbea` binary exposes the same flows behind a thin command-line
//! interface.

pub mod analysis;
pub mod bea;
pub mod cli;
pub mod data;
pub mod error;
pub mod fedcore;
pub mod models;
pub mod param;
pub mod rng;

pub use error::{Error, Result};
pub use param::{ParamVector, SquareMatrix};
