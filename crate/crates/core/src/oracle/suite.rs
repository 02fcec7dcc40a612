use std::fmt;
use std::io::{self, Write};

use crate::kernel::{self, QuantileCoefficients, Regime, COUPLING_PROBABILITY, DOMINATING_SUPPORT};
use crate::rng::RngStream;
use crate::sampler::PerfectSampler;
use crate::stats::{ks_two_sample, RunningMoments};

use super::{exact_moments, forward_chain_sample, inverse_g_bisection, OracleConfig, OracleError};

pub const MIN_SUITE_SAMPLES: u64 = 10_000;

/// Sample count at which the statistical tolerances below are calibrated.
const REFERENCE_SAMPLES: u64 = 1_000_000;
const KS_REFERENCE_SAMPLES: u64 = 100_000;
const ROUND_TRIPS: usize = 10_000;
const GRID: usize = 512;

/// Acceptance rule of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::AtMost(v) | Bound::AtLeast(v) => v,
        }
    }

    pub fn admits(self, measured: f64) -> bool {
        match self {
            Bound::AtMost(v) => measured <= v,
            Bound::AtLeast(v) => measured >= v,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(v) => write!(f, "<= {v:e}"),
            Bound::AtLeast(v) => write!(f, ">= {v:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// The quantity compared against `bound`.
    pub measured: f64,
    pub bound: Bound,
    /// For checks of an estimate against a known value: `(estimate, target)`.
    /// `measured` is then `|estimate − target|`.
    pub estimate: Option<(f64, f64)>,
    pub passed: bool,
}

impl CheckResult {
    fn bounded(name: &str, measured: f64, bound: Bound) -> Self {
        Self {
            name: name.to_owned(),
            measured,
            bound,
            // NaN never passes
            passed: bound.admits(measured),
            estimate: None,
        }
    }

    fn near(name: &str, estimate: f64, target: f64, tol: f64) -> Self {
        Self {
            estimate: Some((estimate, target)),
            ..Self::bounded(name, (estimate - target).abs(), Bound::AtMost(tol))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub samples: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// CSV with header `check_name,measured,tolerance,pass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "check_name,measured,tolerance,pass")?;
        for c in &self.checks {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{}",
                c.name,
                c.measured,
                c.bound.value(),
                c.passed
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation seed={} samples={}", self.seed, self.samples)?;
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            write!(
                f,
                "{tag} {:<36} measured={:.6e} {}",
                c.name, c.measured, c.bound
            )?;
            if let Some((estimate, target)) = c.estimate {
                write!(f, " (estimate={estimate:.9} target={target:.9})")?;
            }
            writeln!(f)?;
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(
            f,
            "overall {verdict} ({failed} of {} checks failed)",
            self.checks.len()
        )
    }
}

/// Runs every kernel and sampler check with the exact quantile table.
///
/// `n` is the number of perfect draws for the moment and backoff checks; the
/// tolerances are calibrated for `n = 10⁶` and widen by `√(10⁶/n)` below that.
pub fn run_validation_suite(seed: u64, n: u64) -> Result<ValidationReport, OracleError> {
    run_validation_suite_with(seed, n, &QuantileCoefficients::CLOSED_FORM)
}

/// As [`run_validation_suite`], with the quantile function (in both the
/// kernel checks and the sampler) replaced by `coefficients`.
pub fn run_validation_suite_with(
    seed: u64,
    n: u64,
    coefficients: &QuantileCoefficients,
) -> Result<ValidationReport, OracleError> {
    if n < MIN_SUITE_SAMPLES {
        return Err(OracleError::TooFewSamples {
            min: MIN_SUITE_SAMPLES,
            got: n,
        });
    }
    let mut checks = kernel_grid_checks()?;
    checks.extend(quantile_checks(seed, coefficients)?);
    checks.extend(sampler_checks(seed, n, coefficients)?);
    Ok(ValidationReport {
        seed,
        samples: n,
        checks,
    })
}

fn unit_grid(steps: usize) -> impl Iterator<Item = f64> + Clone {
    (0..=steps).map(move |i| i as f64 / steps as f64)
}

/// Checks on the density, the distribution functions and the breakpoints.
fn kernel_grid_checks() -> Result<Vec<CheckResult>, OracleError> {
    let mut decomposition = f64::INFINITY;
    let mut lower = f64::INFINITY;
    let mut normalization: f64 = 0.0;
    let mut coherence: f64 = 0.0;
    for x in unit_grid(GRID) {
        for t in unit_grid(GRID) {
            let phi = kernel::density_phi(x, t)?;
            decomposition = decomposition.min(phi - kernel::dominating_r(t)?);
            if t <= DOMINATING_SUPPORT {
                let t = t.min(DOMINATING_SUPPORT - 1e-9);
                lower = lower.min(kernel::density_phi(x, t)?);
            }
        }
        normalization =
            normalization.max((kernel::cdf_f(x, kernel::upper_endpoint(x)?)? - 1.0).abs());
        let cuts = kernel::breakpoints(x)?;
        let (first, second) = (x.min(DOMINATING_SUPPORT), x.max(DOMINATING_SUPPORT));
        coherence = coherence
            .max((kernel::cdf_g(x, first)? - cuts.cut1).abs())
            .max((kernel::cdf_g(x, second)? - cuts.cut2).abs());
    }

    // central differences of F_x against φ_x, away from the kink at x and the pole at b_x
    let (h, delta) = (1e-6, 1e-3);
    let mut consistency: f64 = 0.0;
    for x in unit_grid(64) {
        let top = kernel::upper_endpoint(x)? - delta;
        for k in 1..400 {
            let y = top * k as f64 / 400.0;
            if y - h <= 0.0 || (y - x).abs() <= 2.0 * h {
                continue;
            }
            let slope = (kernel::cdf_f(x, y + h)? - kernel::cdf_f(x, y - h)?) / (2.0 * h);
            let phi = kernel::density_phi(x, y)?;
            consistency = consistency.max((slope - phi).abs() / (1.0 + phi));
        }
    }

    // midpoint rule on cells aligned with the jump at ¼
    let cells = 1024;
    let mass: f64 = (0..cells)
        .map(|i| kernel::dominating_r((i as f64 + 0.5) / cells as f64))
        .sum::<Result<f64, _>>()?
        / cells as f64;

    Ok(vec![
        CheckResult::bounded(
            "kernel.decomposition.min_remainder",
            decomposition,
            Bound::AtLeast(-1e-12),
        ),
        CheckResult::bounded("kernel.lower_bound.min_density", lower, Bound::AtLeast(0.5)),
        CheckResult::bounded(
            "kernel.cdf_density.max_rel_error",
            consistency,
            Bound::AtMost(1e-4),
        ),
        CheckResult::bounded(
            "kernel.normalization.max_error",
            normalization,
            Bound::AtMost(0.0),
        ),
        CheckResult::bounded(
            "kernel.breakpoints.max_error",
            coherence,
            Bound::AtMost(1e-12),
        ),
        CheckResult::near(
            "kernel.dominating_mass.abs_error",
            mass,
            COUPLING_PROBABILITY,
            0.0,
        ),
    ])
}

/// Checks on the closed-form quantile function.
fn quantile_checks(
    seed: u64,
    coefficients: &QuantileCoefficients,
) -> Result<Vec<CheckResult>, OracleError> {
    let inverse = |x: f64, z: f64| coefficients.inverse(x, z);

    let mut stream = RngStream::for_worker(seed, 0);
    let mut round_trip_a: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for _ in 0..ROUND_TRIPS {
        let (x, z) = (stream.next_uniform(), stream.next_uniform());
        let y = inverse(x, z)?;
        round_trip_a = round_trip_a.max((kernel::cdf_g(x, y)? - z).abs());
        oracle = oracle.max((y - inverse_g_bisection(x, z, 1e-12)?).abs());
    }
    let mut round_trip_b: f64 = 0.0;
    for _ in 0..ROUND_TRIPS {
        let x = stream.next_uniform();
        let y = stream.next_uniform() * kernel::upper_endpoint(x)?;
        round_trip_b = round_trip_b.max((inverse(x, kernel::cdf_g(x, y)?)? - y).abs());
    }

    let (below, above) = (DOMINATING_SUPPORT - 1e-9, DOMINATING_SUPPORT + 1e-9);
    debug_assert!(Regime::of(below) == Regime::Low && Regime::of(above) == Regime::High);
    let mut continuity: f64 = 0.0;
    for z in unit_grid(1024) {
        continuity = continuity.max((inverse(below, z)? - inverse(above, z)?).abs());
    }

    let mut min_increment = f64::INFINITY;
    for x in unit_grid(64) {
        let mut prev = inverse(x, 0.0)?;
        for z in unit_grid(4096).skip(1) {
            let y = inverse(x, z)?;
            min_increment = min_increment.min(y - prev);
            prev = y;
        }
    }

    Ok(vec![
        CheckResult::bounded(
            "quantile.round_trip_a.max_error",
            round_trip_a,
            Bound::AtMost(1e-9),
        ),
        CheckResult::bounded(
            "quantile.round_trip_b.max_error",
            round_trip_b,
            Bound::AtMost(1e-9),
        ),
        CheckResult::bounded(
            "quantile.bisection_agreement.max_error",
            oracle,
            Bound::AtMost(1e-9),
        ),
        CheckResult::bounded(
            "quantile.regime_continuity.max_gap",
            continuity,
            Bound::AtMost(1e-6),
        ),
        CheckResult::bounded(
            "quantile.monotonicity.min_increment",
            min_increment,
            Bound::AtLeast(-1e-12),
        ),
    ])
}

/// Statistical checks on the perfect sampler.
fn sampler_checks(
    seed: u64,
    n: u64,
    coefficients: &QuantileCoefficients,
) -> Result<Vec<CheckResult>, OracleError> {
    let sampler = PerfectSampler::with_coefficients(*coefficients);
    let widen = (REFERENCE_SAMPLES as f64 / n as f64).sqrt().max(1.0);
    let ks_size = n.min(KS_REFERENCE_SAMPLES);

    let mut stream = RngStream::new(seed);
    let mut values = RunningMoments::default();
    let mut backoff = RunningMoments::default();
    let mut coupled_now = 0u64;
    let mut out_of_range = 0u64;
    let mut perfect = Vec::with_capacity(ks_size as usize);
    for i in 0..n {
        let draw = sampler.sample_draw(&mut stream);
        values.push(draw.value);
        backoff.push(draw.n as f64);
        let limit = if draw.n == 0 { DOMINATING_SUPPORT } else { 1.0 };
        if !(0.0..limit).contains(&draw.value) {
            out_of_range += 1;
        }
        if draw.n == 0 {
            coupled_now += 1;
        }
        if i < ks_size {
            perfect.push(draw.value);
        }
    }

    let config = OracleConfig::default();
    let mut forward_stream = RngStream::for_worker(seed, 1);
    let forward: Vec<f64> = (0..ks_size)
        .map(|_| forward_chain_sample(&mut forward_stream, &config))
        .collect();
    let ks = ks_two_sample(&perfect, &forward).expect("both samples are non-empty");
    let ks_widen = (KS_REFERENCE_SAMPLES as f64 / ks_size as f64).sqrt();

    let exact = exact_moments();
    let coupling_rate = coupled_now as f64 / n as f64;
    Ok(vec![
        CheckResult::bounded(
            "sampler.output_range.violations",
            out_of_range as f64,
            Bound::AtMost(0.0),
        ),
        CheckResult::near(
            "sampler.coupling_rate.abs_error",
            coupling_rate,
            COUPLING_PROBABILITY,
            0.002 * widen,
        ),
        CheckResult::near(
            "sampler.mean_backoff.abs_error",
            backoff.mean(),
            7.0,
            0.05 * widen,
        ),
        CheckResult::near(
            "sampler.mean_chain_uniforms.abs_error",
            backoff.mean() + 1.0,
            8.0,
            0.05 * widen,
        ),
        CheckResult::near(
            "sampler.mean.abs_error",
            values.mean(),
            exact.mean,
            0.0008 * widen,
        ),
        CheckResult::near(
            "sampler.variance.abs_error",
            values.variance(),
            exact.variance,
            0.001 * widen,
        ),
        CheckResult::bounded(
            "sampler.ks_vs_forward_chain.statistic",
            ks,
            Bound::AtMost(0.01 * ks_widen),
        ),
    ])
}
