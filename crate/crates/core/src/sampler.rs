//! Coupling from the past with a multigamma coupler.
//!
//! Looking backwards in time, each step independently fires the common
//! component of the kernel with probability 1/8. The number of steps `N`
//! between the most recent firing and time 0 is Geometric(1/8) on
//! `{0, 1, 2, ...}`. At the firing time every chain sits at the same `U/4`;
//! the `N` remaining steps are non-coupling updates through `G_x⁻¹`, and the
//! value at time 0 is an exact draw from the stationary law.
//!
//! Stream order per sample: one uniform for `N`, one for the coupled value,
//! then one per update.

use std::thread;

use thiserror::Error;

use crate::kernel::{DomainError, QuantileCoefficients, StateX, UnitUniform, DOMINATING_SUPPORT};
use crate::rng::RngStream;

/// Default cap on `sample_many` batch sizes.
pub const DEFAULT_MAX_COUNT: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SamplerError {
    #[error("requested {requested} samples, limit is {limit}")]
    TooManySamples { requested: u64, limit: u64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// `ln(7/8)`.
const LN_NON_COUPLING: f64 = -0.133_531_392_624_522_63;

/// Geometric(1/8) on `{0, 1, ...}` by inversion: `floor(ln u / ln(7/8))`.
///
/// `u = 0` is replaced by the smallest positive subnormal.
#[inline]
pub fn geometric_from_uniform(u: f64) -> u64 {
    let u = if u > 0.0 { u } else { f64::from_bits(1) };
    (u.ln() / LN_NON_COUPLING).floor() as u64
}

pub fn draw_geometric(stream: &mut RngStream) -> u64 {
    geometric_from_uniform(stream.next_uniform())
}

/// One step of the coupled chain: `u/4` when the common component fires,
/// otherwise `G_x⁻¹(u)`.
pub fn update(x: StateX, coupled: bool, u: UnitUniform) -> Result<StateX, DomainError> {
    if coupled {
        StateX::new(u.get() * DOMINATING_SUPPORT)
    } else {
        StateX::new(QuantileCoefficients::CLOSED_FORM.inverse(x.get(), u.get())?)
    }
}

/// Full history of one perfect draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    /// Number of non-coupling updates after the coupling time.
    pub n: u64,
    pub coupled_value: f64,
    /// Chain values from the coupling time to time 0; `path.len() == n + 1`.
    pub path: Vec<f64>,
    /// Uniforms fed to each update; `update_uniforms.len() == n`.
    pub update_uniforms: Vec<f64>,
}

impl SampleTrace {
    pub fn value(&self) -> f64 {
        *self.path.last().expect("path is never empty")
    }
}

/// Result of one draw together with its backoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub value: f64,
    pub n: u64,
}

impl Draw {
    /// Uniforms consumed after the geometric draw: the coupling uniform plus `n` updates.
    pub fn chain_uniforms(&self) -> u64 {
        self.n + 1
    }
}

#[derive(Debug, Clone)]
pub struct PerfectSampler {
    coefficients: QuantileCoefficients,
    max_count: u64,
}

impl Default for PerfectSampler {
    fn default() -> Self {
        Self::new()
    }
}

impl PerfectSampler {
    pub fn new() -> Self {
        Self {
            coefficients: QuantileCoefficients::CLOSED_FORM,
            max_count: DEFAULT_MAX_COUNT,
        }
    }

    /// Sampler driven by an arbitrary quantile table. Used to check that the
    /// validation suite notices a wrong table.
    pub fn with_coefficients(coefficients: QuantileCoefficients) -> Self {
        Self {
            coefficients,
            ..Self::new()
        }
    }

    pub fn with_max_count(mut self, max_count: u64) -> Self {
        self.max_count = max_count;
        self
    }

    pub fn max_count(&self) -> u64 {
        self.max_count
    }

    #[inline]
    fn step(&self, x: f64, u: f64) -> f64 {
        // x, u ∈ [0, 1) here, where the exact table never fails. A perturbed
        // table may; its NaN then shows up as an out-of-range draw.
        self.coefficients
            .inverse_unchecked(x, u)
            .unwrap_or(f64::NAN)
    }

    pub fn sample_draw(&self, stream: &mut RngStream) -> Draw {
        let n = draw_geometric(stream);
        let mut x = stream.next_uniform() * DOMINATING_SUPPORT;
        for _ in 0..n {
            x = self.step(x, stream.next_uniform());
        }
        Draw { value: x, n }
    }

    pub fn sample_one(&self, stream: &mut RngStream) -> f64 {
        self.sample_draw(stream).value
    }

    pub fn sample_many(
        &self,
        stream: &mut RngStream,
        count: u64,
    ) -> Result<Vec<f64>, SamplerError> {
        self.check_count(count)?;
        Ok((0..count).map(|_| self.sample_one(stream)).collect())
    }

    /// Lazy version of [`Self::sample_many`]; produces the same sequence.
    pub fn sample_iter<'a>(
        &'a self,
        stream: &'a mut RngStream,
        count: u64,
    ) -> Result<impl Iterator<Item = f64> + 'a, SamplerError> {
        self.check_count(count)?;
        Ok((0..count).map(move |_| self.sample_one(stream)))
    }

    pub fn sample_traced(&self, stream: &mut RngStream) -> SampleTrace {
        let n = draw_geometric(stream);
        let coupled_value = stream.next_uniform() * DOMINATING_SUPPORT;
        let mut path = Vec::with_capacity(n as usize + 1);
        let mut update_uniforms = Vec::with_capacity(n as usize);
        path.push(coupled_value);
        let mut x = coupled_value;
        for _ in 0..n {
            let u = stream.next_uniform();
            x = self.step(x, u);
            update_uniforms.push(u);
            path.push(x);
        }
        SampleTrace {
            n,
            coupled_value,
            path,
            update_uniforms,
        }
    }

    /// Splits `count` draws across `workers` threads, each on
    /// `RngStream::for_worker(master_seed, i)`. Output is worker 0's block,
    /// then worker 1's, and so on; it depends on `workers` but not on scheduling.
    pub fn sample_sharded(
        &self,
        master_seed: u64,
        count: u64,
        workers: u64,
    ) -> Result<Vec<f64>, SamplerError> {
        self.check_count(count)?;
        let workers = workers.max(1);
        let base = count / workers;
        let extra = count % workers;
        let blocks: Vec<Vec<f64>> = thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|i| {
                    let share = base + u64::from(i < extra);
                    scope.spawn(move || {
                        let mut stream = RngStream::for_worker(master_seed, i);
                        (0..share)
                            .map(|_| self.sample_one(&mut stream))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        });
        Ok(blocks.concat())
    }

    fn check_count(&self, count: u64) -> Result<(), SamplerError> {
        if count > self.max_count {
            Err(SamplerError::TooManySamples {
                requested: count,
                limit: self.max_count,
            })
        } else {
            Ok(())
        }
    }
}
