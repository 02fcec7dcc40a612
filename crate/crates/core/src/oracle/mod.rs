//! Independent checks on the kernel and the sampler.
//!
//! Nothing here goes through the closed-form quantile function: inversion is
//! redone by bisection on `G_x`, the target law is approximated by running
//! the plain chain `X ← U·X + U(1 − U)` forwards, and moments come from
//! taking expectations of the fixed-point equation.

mod suite;

pub use suite::{
    run_validation_suite, run_validation_suite_with, Bound, CheckResult, ValidationReport,
    MIN_SUITE_SAMPLES,
};

use thiserror::Error;

use crate::kernel::{self, DomainError};
use crate::rng::RngStream;

pub const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OracleError {
    #[error("bisection did not reach width {tol} within {MAX_BISECTION_STEPS} steps")]
    NoConvergence { tol: f64 },
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("validation needs at least {min} samples, got {got}")]
    TooFewSamples { min: u64, got: u64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Settings for the forward-chain approximation and for bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    bisection_tol: f64,
    burn_in: u32,
    start_state: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            bisection_tol: 1e-12,
            burn_in: 100,
            start_state: 0.0,
        }
    }
}

impl OracleConfig {
    pub fn new(bisection_tol: f64, burn_in: u32, start_state: f64) -> Result<Self, OracleError> {
        if bisection_tol.is_nan() || bisection_tol <= 0.0 {
            return Err(OracleError::InvalidConfig("bisection_tol must be positive"));
        }
        if burn_in == 0 {
            return Err(OracleError::InvalidConfig("burn_in must be at least 1"));
        }
        if !(0.0..=1.0).contains(&start_state) {
            return Err(OracleError::InvalidConfig("start_state must lie in [0, 1]"));
        }
        Ok(Self {
            bisection_tol,
            burn_in,
            start_state,
        })
    }

    pub fn bisection_tol(&self) -> f64 {
        self.bisection_tol
    }

    pub fn burn_in(&self) -> u32 {
        self.burn_in
    }

    pub fn start_state(&self) -> f64 {
        self.start_state
    }
}

/// Solves `G_x(y) = z` on `[0, b_x]` by bisection until the bracket is at most `tol` wide.
pub fn inverse_g_bisection(x: f64, z: f64, tol: f64) -> Result<f64, OracleError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(OracleError::InvalidConfig("tol must be positive"));
    }
    let mut hi = kernel::upper_endpoint(x)?;
    if !(0.0..=1.0).contains(&z) {
        return Err(DomainError::OutOfUnitInterval {
            name: "z",
            value: z,
        }
        .into());
    }
    let mut lo = 0.0;
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if kernel::cdf_g(x, mid)? < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(OracleError::NoConvergence { tol })
}

/// One step of the untransformed chain.
#[inline]
pub fn forward_step(x: f64, u: f64) -> f64 {
    u * x + u * (1.0 - u)
}

/// Approximate draw: `burn_in` forward steps from `start_state` on a fresh chain.
///
/// Two copies of the chain driven by the same uniforms contract by a factor
/// `U` per step, so the bias after `k` steps is of order `2⁻ᵏ`.
pub fn forward_chain_sample(stream: &mut RngStream, config: &OracleConfig) -> f64 {
    (0..config.burn_in).fold(config.start_state, |x, _| {
        forward_step(x, stream.next_uniform())
    })
}

/// Mean, second moment and variance of the stationary law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// `E[Uᵃ(1 − U)ᵇ] = a!·b!/(a + b + 1)!`.
fn beta_moment(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 1)
}

/// Exact moments, from `Y = UY + U(1 − U)` with `Y` independent of `U`:
///
/// ```text
/// E[Y]  = E[U]·E[Y] + E[U(1−U)]
/// E[Y²] = E[U²]·E[Y²] + 2·E[U²(1−U)]·E[Y] + E[U²(1−U)²]
/// ```
///
/// giving `(1/3, 2/15, 1/45)`.
pub fn exact_moments() -> Moments {
    let mean = beta_moment(1, 1) / (1.0 - beta_moment(1, 0));
    let second_moment =
        (2.0 * beta_moment(2, 1) * mean + beta_moment(2, 2)) / (1.0 - beta_moment(2, 0));
    Moments {
        mean,
        second_moment,
        variance: second_moment - mean * mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_examples() {
        let y = inverse_g_bisection(0.0, 0.5, 1e-12).unwrap();
        assert!((y - 0.196_067_811_865_475_24).abs() <= 1e-11);
        for &x in &[0.0, 0.2, 0.7, 1.0] {
            assert!(inverse_g_bisection(x, 0.0, 1e-12).unwrap() <= 1e-12);
            let b = kernel::upper_endpoint(x).unwrap();
            assert!((inverse_g_bisection(x, 1.0, 1e-12).unwrap() - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        for &(x, z) in &[(0.0, 0.5), (0.1, 0.3), (0.5, 0.2), (0.7, 0.95), (0.25, 0.5)] {
            let a = inverse_g_bisection(x, z, 1e-12).unwrap();
            let b = kernel::inverse_g(x, z).unwrap();
            assert!((a - b).abs() <= 1e-11, "x={x} z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn bisection_errors() {
        assert!(matches!(
            inverse_g_bisection(0.5, 0.5, 0.0),
            Err(OracleError::InvalidConfig(_))
        ));
        assert!(matches!(
            inverse_g_bisection(1.5, 0.5, 1e-9),
            Err(OracleError::Domain(_))
        ));
        assert!(matches!(
            inverse_g_bisection(0.5, -0.5, 1e-9),
            Err(OracleError::Domain(_))
        ));
        // below the spacing of doubles near the root the bracket cannot shrink
        assert_eq!(
            inverse_g_bisection(0.5, 0.5, 1e-30),
            Err(OracleError::NoConvergence { tol: 1e-30 })
        );
    }

    #[test]
    fn config_validation() {
        assert!(OracleConfig::new(0.0, 10, 0.0).is_err());
        assert!(OracleConfig::new(1e-9, 0, 0.0).is_err());
        assert!(OracleConfig::new(1e-9, 10, 1.5).is_err());
        let c = OracleConfig::default();
        assert_eq!(
            (c.bisection_tol(), c.burn_in(), c.start_state()),
            (1e-12, 100, 0.0)
        );
    }

    #[test]
    fn single_forward_step_from_zero() {
        let config = OracleConfig::new(1e-12, 1, 0.0).unwrap();
        let mut a = RngStream::new(21);
        let mut b = RngStream::new(21);
        for _ in 0..1000 {
            let v = forward_chain_sample(&mut a, &config);
            let u = b.next_uniform();
            assert_eq!(v, u * (1.0 - u));
            assert!((0.0..=0.25).contains(&v));
        }
    }

    #[test]
    fn forward_chain_stays_in_unit_interval() {
        let config = OracleConfig::new(1e-12, 20, 1.0).unwrap();
        let mut s = RngStream::new(22);
        for _ in 0..10_000 {
            let v = forward_chain_sample(&mut s, &config);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn forward_chain_mean() {
        let config = OracleConfig::default();
        let mut s = RngStream::new(23);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| forward_chain_sample(&mut s, &config))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0 / 3.0).abs() <= 0.0008, "mean {mean}");
    }

    #[test]
    fn moments_match_hand_derivation() {
        let m = exact_moments();
        assert!((m.mean - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.second_moment - 2.0 / 15.0).abs() < 1e-15);
        assert!((m.variance - 1.0 / 45.0).abs() < 1e-15);
    }
}
