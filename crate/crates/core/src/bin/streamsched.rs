use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use streamsched::cli::{self, GeneratorConfig, JobDistribution, Mode, Regime, RunConfig};
use streamsched::search::DEFAULT_BUDGET;

#[derive(Parser)]
#[command(
    name = "streamsched",
    version,
    about = "Streaming makespan scheduling with shared processing intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the value (and optionally a schedule) for a job stream.
    Run(RunArgs),
    /// Write a seeded random instance.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Machine configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Job stream; standard input when omitted.
    #[arg(long)]
    jobs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::OnePass)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Regime::PmaxUnknown)]
    regime: Regime,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long = "pmax-estimate")]
    pmax_estimate: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "gamma0-override")]
    gamma0_override: Option<u32>,
    #[arg(long = "n0-override")]
    n0_override: Option<u64>,
    /// Maximum number of large-job assignments to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Schedule CSV output (two-pass, offline and oracle modes).
    #[arg(long = "schedule-out")]
    schedule_out: Option<PathBuf>,
    /// Also print resource bounds.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    m1: usize,
    #[arg(long, default_value_t = 0.5)]
    e0: f64,
    /// Number of jobs.
    #[arg(long, default_value_t = 100)]
    n: u64,
    /// Shared intervals per machine, as MIN:MAX.
    #[arg(long, default_value = "0:4", value_parser = parse_range::<usize>)]
    intervals: (usize, usize),
    /// Gap between breakpoints, as MIN:MAX.
    #[arg(long, default_value = "1:5", value_parser = parse_range::<u64>)]
    gaps: (u64, u64),
    /// Comma-separated sharing ratios to sample from.
    #[arg(long, default_value = "0.25,0.5,1", value_delimiter = ',')]
    ratios: Vec<f64>,
    /// uniform-int:LO:HI, uniform:LO:HI or exp:MEAN.
    #[arg(long = "job-dist", default_value = "uniform-int:1:16")]
    job_dist: JobDistribution,
    #[arg(long = "config-out")]
    config_out: PathBuf,
    #[arg(long = "jobs-out")]
    jobs_out: PathBuf,
}

fn parse_range<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected MIN:MAX, got {s:?}"))?;
    let parse = |v: &str| v.parse::<T>().map_err(|_| format!("cannot parse {v:?}"));
    Ok((parse(lo)?, parse(hi)?))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match Cli::parse().command {
        Command::Run(args) => {
            let config = RunConfig {
                machines: args.config,
                jobs: args.jobs,
                mode: args.mode,
                regime: args.regime,
                epsilon: args.epsilon,
                pmax: args.pmax,
                pmax_estimate: args.pmax_estimate,
                alpha: args.alpha,
                gamma0_override: args.gamma0_override,
                n0_override: args.n0_override,
                budget: args.budget,
                schedule_out: args.schedule_out,
                stats: args.stats,
            };
            match cli::run(&config) {
                Ok(report) => {
                    print!("{report}");
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::Generate(args) => {
            let config = GeneratorConfig {
                seed: args.seed,
                m: args.m,
                m1: args.m1,
                e0: args.e0,
                n: args.n,
                intervals: args.intervals,
                gaps: args.gaps,
                ratios: args.ratios,
                jobs: args.job_dist,
            };
            match cli::write_instance(&config, &args.config_out, &args.jobs_out) {
                Ok(()) => 0,
                Err(e @ cli::GenerateError::Io { .. }) => {
                    eprintln!("error: {e}");
                    9
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
