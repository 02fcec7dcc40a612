//! Area-normalized histograms, the two-sample Kolmogorov-Smirnov statistic,
//! and sample moments.

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatsError {
    #[error("no samples")]
    Empty,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid histogram layout: {0}")]
    InvalidSpec(&'static str),
}

/// Bin layout: `bins` equal-width half-open bins covering `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            bins: 200,
            lo: 0.0,
            hi: 1.0,
        }
    }
}

impl HistogramSpec {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self, StatsError> {
        let spec = Self { bins, lo, hi };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), StatsError> {
        if self.bins == 0 {
            return Err(StatsError::InvalidSpec("bins must be positive"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(StatsError::InvalidSpec("need finite lo < hi"));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    /// Edges of bin `i`, computed from the endpoints rather than by accumulation.
    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let span = self.hi - self.lo;
        let n = self.bins as f64;
        let lo = self.lo + span * (i as f64 / n);
        let hi = if i + 1 == self.bins {
            self.hi
        } else {
            self.lo + span * ((i + 1) as f64 / n)
        };
        (lo, hi)
    }

    /// Bin holding `v`, or `None` when `v` is outside `[lo, hi)` or NaN.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        if !(v >= self.lo && v < self.hi) {
            return None;
        }
        let i = ((v - self.lo) / self.bin_width()) as usize;
        Some(i.min(self.bins - 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
    /// `counts[i] / (count_total · bin_width)`.
    pub densities: Vec<f64>,
    pub count_total: u64,
    pub outside_count: u64,
}

impl Histogram {
    /// `Σ densities · bin_width`, the in-range fraction of the samples.
    pub fn area(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.spec.bin_width()
    }

    /// CSV with header `bin_lo,bin_hi,density`, one row per bin.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,density")?;
        for (i, d) in self.densities.iter().enumerate() {
            let (lo, hi) = self.spec.bin_edges(i);
            writeln!(out, "{lo:.12e},{hi:.12e},{d:.12e}")?;
        }
        Ok(())
    }
}

/// Incremental histogram builder, for sample streams too large to hold in memory.
#[derive(Debug, Clone)]
pub struct HistogramAccumulator {
    spec: HistogramSpec,
    counts: Vec<u64>,
    total: u64,
    outside: u64,
}

impl HistogramAccumulator {
    pub fn new(spec: HistogramSpec) -> Result<Self, StatsError> {
        spec.validate()?;
        Ok(Self {
            spec,
            counts: vec![0; spec.bins],
            total: 0,
            outside: 0,
        })
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.total += 1;
        match self.spec.bin_of(v) {
            Some(i) => self.counts[i] += 1,
            None => self.outside += 1,
        }
    }

    pub fn finish(self) -> Result<Histogram, StatsError> {
        if self.total == 0 {
            return Err(StatsError::Empty);
        }
        let scale = 1.0 / (self.total as f64 * self.spec.bin_width());
        let densities = self.counts.iter().map(|&c| c as f64 * scale).collect();
        Ok(Histogram {
            spec: self.spec,
            counts: self.counts,
            densities,
            count_total: self.total,
            outside_count: self.outside,
        })
    }
}

impl Extend<f64> for HistogramAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.push(v);
        }
    }
}

pub fn build_histogram(samples: &[f64], spec: HistogramSpec) -> Result<Histogram, StatsError> {
    let mut acc = HistogramAccumulator::new(spec)?;
    acc.extend(samples.iter().copied());
    acc.finish()
}

/// Supremum distance between the empirical CDFs of `a` and `b`.
///
/// Exact: both samples are sorted and merged, and the distance is taken only
/// after every copy of a tied value has been consumed from both sides.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = if a[i].total_cmp(&b[j]).is_le() {
            a[i]
        } else {
            b[j]
        };
        while i < a.len() && a[i].total_cmp(&v).is_eq() {
            i += 1;
        }
        while j < b.len() && b[j].total_cmp(&v).is_eq() {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sample mean and unbiased variance (divisor `n − 1`), by Welford's recurrence.
pub fn empirical_moments(samples: &[f64]) -> Result<(f64, f64), StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut acc = RunningMoments::default();
    for &v in samples {
        acc.push(v);
    }
    Ok((acc.mean(), acc.variance()))
}

/// Streaming mean/variance accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased variance; NaN with fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}
