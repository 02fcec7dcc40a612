//! Perfect simulation from the law `μ` of the perpetuity `Y = U·Y + U(1 − U)`,
//! the limit law of the normalized number of key exchanges made by Quickselect
//! when it selects a rank of order `o(n)`.
//!
//! [`sampler::PerfectSampler`] runs coupling from the past with a multigamma
//! coupler: a Geometric(1/8) backoff, a common start at `U/4`, and a short run
//! of closed-form quantile updates from [`kernel`]. The [`oracle`] module holds
//! independent checks on both, and [`stats`] the histogram and
//! Kolmogorov-Smirnov machinery used by them and by the CLI.

pub mod kernel;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use kernel::{Breakpoints, DomainError, QuantileCoefficients, Regime, StateX, UnitUniform};
pub use oracle::{OracleConfig, OracleError, ValidationReport};
pub use rng::RngStream;
pub use sampler::{Draw, PerfectSampler, SampleTrace, SamplerError};
pub use stats::{Histogram, HistogramSpec, StatsError};
