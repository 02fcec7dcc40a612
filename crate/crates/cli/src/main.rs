//! `perpetuity`: perfect samples, histograms, self-validation and timing for
//! the fixed point of `Y = U·Y + U(1 − U)`.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use perpetuity_core::oracle::run_validation_suite;
use perpetuity_core::stats::{HistogramAccumulator, HistogramSpec, RunningMoments};
use perpetuity_core::{PerfectSampler, RngStream};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "perpetuity",
    version,
    about = "Perfect simulation of the Quickselect key-exchange limit law"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write perfect samples, one per line
    Sample {
        /// Number of samples
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        common: Common,
        /// Worker threads; above 1 the output is the concatenation of per-worker streams
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
    },
    /// Write an area-normalized histogram of perfect samples as CSV
    Hist {
        #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Equal-width bins on [0, 1)
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        bins: u64,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
    },
    /// Run the kernel and sampler checks and print a report
    Validate {
        /// Perfect samples for the statistical checks (at least 10000)
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        common: Common,
        /// Emit the report as CSV
        #[arg(long)]
        csv: bool,
    },
    /// Time n perfect samples and report backoff statistics
    Bench {
        #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file, or `-` for standard output
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

impl Common {
    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(if self.out.as_os_str() == "-" {
            Box::new(BufWriter::new(io::stdout().lock()))
        } else {
            Box::new(BufWriter::new(File::create(&self.out)?))
        })
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(io::Error),
    Validation,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sample { n, common, workers } => cmd_sample(n, &common, workers),
        Command::Hist {
            n,
            bins,
            common,
            workers,
        } => cmd_hist(n, bins, &common, workers),
        Command::Validate { n, common, csv } => cmd_validate(n, &common, csv),
        Command::Bench { n, common } => cmd_bench(n, &common),
    }
}

/// Calls `f` on each of `n` perfect samples, in the order fixed by the seed and worker count.
fn for_each_sample(
    n: u64,
    seed: u64,
    workers: u64,
    mut f: impl FnMut(f64) -> io::Result<()>,
) -> Result<(), Failure> {
    let sampler = PerfectSampler::new();
    let usage = |e: perpetuity_core::SamplerError| Failure::Usage(e.to_string());
    if workers > 1 {
        for v in sampler.sample_sharded(seed, n, workers).map_err(usage)? {
            f(v)?;
        }
    } else {
        let mut stream = RngStream::new(seed);
        for v in sampler.sample_iter(&mut stream, n).map_err(usage)? {
            f(v)?;
        }
    }
    Ok(())
}

fn cmd_sample(n: u64, common: &Common, workers: u64) -> Result<(), Failure> {
    let mut out = common.writer()?;
    for_each_sample(n, common.seed, workers, |v| writeln!(out, "{v:.16e}"))?;
    out.flush()?;
    Ok(())
}

fn cmd_hist(n: u64, bins: u64, common: &Common, workers: u64) -> Result<(), Failure> {
    let spec =
        HistogramSpec::new(bins as usize, 0.0, 1.0).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut acc = HistogramAccumulator::new(spec).map_err(|e| Failure::Usage(e.to_string()))?;
    for_each_sample(n, common.seed, workers, |v| {
        acc.push(v);
        Ok(())
    })?;
    let hist = acc.finish().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = common.writer()?;
    hist.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_validate(n: u64, common: &Common, csv: bool) -> Result<(), Failure> {
    let report = run_validation_suite(common.seed, n).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = common.writer()?;
    if csv {
        report.write_csv(&mut out)?;
    } else {
        writeln!(out, "{report}")?;
    }
    out.flush()?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn cmd_bench(n: u64, common: &Common) -> Result<(), Failure> {
    let sampler = PerfectSampler::new();
    let mut stream = RngStream::new(common.seed);
    let mut backoff = RunningMoments::default();
    let mut checksum = 0.0;
    let start = Instant::now();
    for _ in 0..n {
        let draw = sampler.sample_draw(&mut stream);
        backoff.push(draw.n as f64);
        checksum += draw.value;
    }
    let elapsed = start.elapsed().as_secs_f64();

    let mut out = common.writer()?;
    writeln!(out, "samples               {n}")?;
    writeln!(out, "seed                  {}", common.seed)?;
    writeln!(out, "wall_time_s           {elapsed:.3}")?;
    writeln!(out, "samples_per_second    {:.0}", n as f64 / elapsed)?;
    writeln!(out, "mean_backoff_n        {:.6}", backoff.mean())?;
    writeln!(out, "mean_chain_uniforms   {:.6}", backoff.mean() + 1.0)?;
    writeln!(
        out,
        "uniforms_per_sample   {:.6}",
        stream.drawn() as f64 / n as f64
    )?;
    writeln!(out, "sample_mean           {:.6}", checksum / n as f64)?;
    out.flush()?;
    Ok(())
}
