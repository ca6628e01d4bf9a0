//! The `run` command: read a park and a job stream, compute the value and
//! optionally a schedule, and report what it cost.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::capacity::MachinePark;
use crate::cli::config::{parse_machine_config, ConfigError};
use crate::cli::jobs::{JobReader, JobStreamError};
use crate::grouping::{GroupLedger, GroupingError, SchedulingParams};
use crate::oracle::{self, OracleError};
use crate::schedule::{self, FirstPass, Schedule, ScheduleError, SecondPass};
use crate::search::{self, SearchError, SearchOutcome, DEFAULT_BUDGET};
use crate::Job;

/// Jobs ingested between two clock reads.
const TIMING_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    OnePass,
    TwoPass,
    Offline,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Regime {
    PmaxGiven,
    PmaxEstimate,
    PmaxUnknown,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::OnePass => "one-pass",
            Mode::TwoPass => "two-pass",
            Mode::Offline => "offline",
            Mode::Oracle => "oracle",
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::PmaxGiven => "pmax-given",
            Regime::PmaxEstimate => "pmax-estimate",
            Regime::PmaxUnknown => "pmax-unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub machines: PathBuf,
    /// Job stream; standard input when absent.
    pub jobs: Option<PathBuf>,
    pub mode: Mode,
    pub regime: Regime,
    pub epsilon: f64,
    pub pmax: Option<f64>,
    pub pmax_estimate: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma0_override: Option<u32>,
    pub n0_override: Option<u64>,
    pub budget: u64,
    pub schedule_out: Option<PathBuf>,
    pub stats: bool,
}

impl RunConfig {
    pub fn new(machines: impl Into<PathBuf>) -> Self {
        Self {
            machines: machines.into(),
            jobs: None,
            mode: Mode::OnePass,
            regime: Regime::PmaxUnknown,
            epsilon: 0.5,
            pmax: None,
            pmax_estimate: None,
            alpha: None,
            gamma0_override: None,
            n0_override: None,
            budget: DEFAULT_BUDGET,
            schedule_out: None,
            stats: false,
        }
    }

    /// Checks flag combinations. The regime only matters for the streaming
    /// modes.
    pub fn validate(&self) -> Result<(), RunError> {
        let usage = |msg: &str| Err(RunError::Usage(msg.to_owned()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return usage("--epsilon must be positive");
        }
        if self.budget == 0 {
            return usage("--budget must be at least 1");
        }
        if matches!(self.mode, Mode::OnePass | Mode::TwoPass) {
            match self.regime {
                Regime::PmaxGiven if self.pmax.is_none() => {
                    return usage("--regime pmax-given requires --pmax")
                }
                Regime::PmaxEstimate if self.pmax_estimate.is_none() || self.alpha.is_none() => {
                    return usage("--regime pmax-estimate requires --pmax-estimate and --alpha")
                }
                Regime::PmaxEstimate if !self.alpha.is_some_and(|a| a >= 1.0) => {
                    return usage("--alpha must be at least 1")
                }
                _ => {}
            }
        }
        if self.mode == Mode::TwoPass && self.jobs.is_none() {
            return usage("two-pass mode reads the stream twice and needs --jobs");
        }
        if self.mode == Mode::OnePass && self.schedule_out.is_some() {
            return usage("one-pass mode does not build a schedule; use two-pass or offline");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Jobs(#[from] JobStreamError),
    #[error(transparent)]
    Grouping(#[from] GroupingError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl RunError {
    fn io(path: &Path, source: io::Error) -> Self {
        RunError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Config(ConfigError::Io { .. }) => 9,
            RunError::Config(_) => 3,
            RunError::Jobs(JobStreamError::Io(_)) => 9,
            RunError::Jobs(_) => 4,
            RunError::Grouping(e) | RunError::Schedule(ScheduleError::Grouping(e)) => {
                grouping_code(e)
            }
            RunError::Search(e) | RunError::Schedule(ScheduleError::Search(e)) => search_code(e),
            RunError::Schedule(ScheduleError::PassMismatch(_)) => 8,
            RunError::Schedule(_) => 1,
            RunError::Oracle(OracleError::BudgetExceeded { .. }) => 7,
            RunError::Io { .. } => 9,
        }
    }
}

fn grouping_code(e: &GroupingError) -> i32 {
    match e {
        GroupingError::BadParams(_) => 2,
        GroupingError::NonPositive { .. } => 4,
        GroupingError::ExceedsPmax { .. } => 5,
        GroupingError::ExceedsEstimate { .. } | GroupingError::EstimateTooLoose { .. } => 6,
    }
}

fn search_code(e: &SearchError) -> i32 {
    match e {
        SearchError::BudgetExceeded { .. } => 7,
        _ => 1,
    }
}

/// What a run produced. Fields that a mode does not compute are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub mode: Option<Mode>,
    pub regime: Option<Regime>,
    pub value: Option<f64>,
    pub t: Option<f64>,
    pub x: Option<usize>,
    pub k_l: Option<i32>,
    pub q0: Option<i32>,
    pub large_jobs: Option<usize>,
    pub total_load: f64,
    pub jobs: u64,
    pub p_max: f64,
    pub gamma0: u32,
    pub n0: u64,
    pub override_mode: bool,
    pub peak_retained: Option<usize>,
    pub peak_group_records: Option<usize>,
    pub makespan: Option<f64>,
    pub optimal_makespan: Option<f64>,
    pub retained_bound: u64,
    pub crossing_allowance: usize,
    pub wall_time: Duration,
    pub ingest_time: Duration,
    pub stats: bool,
}

impl Report {
    /// Mean ingest time per job in nanoseconds, 0 for an empty stream.
    pub fn mean_ingest_ns(&self) -> f64 {
        if self.jobs == 0 {
            0.0
        } else {
            self.ingest_time.as_nanos() as f64 / self.jobs as f64
        }
    }

    /// Lines that do not depend on timing, for comparing runs.
    pub fn deterministic_lines(&self) -> Vec<String> {
        self.to_string()
            .lines()
            .filter(|l| {
                !["wall_time_s=", "mean_ingest_ns=", "ingest_time_s="]
                    .iter()
                    .any(|k| l.starts_with(k))
            })
            .map(str::to_owned)
            .collect()
    }

    /// Value of a `key=value` line as rendered.
    pub fn get(&self, key: &str) -> Option<String> {
        let prefix = format!("{key}=");
        self.to_string()
            .lines()
            .find_map(|l| l.strip_prefix(&prefix).map(str::to_owned))
    }
}

fn opt<T: fmt::Display>(f: &mut fmt::Formatter<'_>, key: &str, v: &Option<T>) -> fmt::Result {
    match v {
        Some(v) => writeln!(f, "{key}={v}"),
        None => Ok(()),
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        opt(f, "mode", &self.mode)?;
        opt(f, "regime", &self.regime)?;
        opt(f, "value", &self.value)?;
        opt(f, "t", &self.t)?;
        opt(f, "x", &self.x)?;
        opt(f, "k_l", &self.k_l)?;
        match (self.value, self.q0) {
            (_, Some(q0)) => writeln!(f, "q0={q0}")?,
            (Some(_), None) => writeln!(f, "q0=none")?,
            _ => {}
        }
        opt(f, "large_jobs", &self.large_jobs)?;
        writeln!(f, "total_load={}", self.total_load)?;
        writeln!(f, "jobs={}", self.jobs)?;
        writeln!(f, "p_max={}", self.p_max)?;
        writeln!(f, "gamma0={}", self.gamma0)?;
        writeln!(f, "n0={}", self.n0)?;
        writeln!(f, "override_mode={}", self.override_mode)?;
        opt(f, "peak_retained", &self.peak_retained)?;
        opt(f, "peak_group_records", &self.peak_group_records)?;
        opt(f, "makespan", &self.makespan)?;
        opt(f, "optimal_makespan", &self.optimal_makespan)?;
        if self.stats {
            writeln!(f, "retained_bound={}", self.retained_bound)?;
            writeln!(f, "crossing_allowance={}", self.crossing_allowance)?;
            writeln!(f, "ingest_time_s={}", self.ingest_time.as_secs_f64())?;
        }
        writeln!(f, "wall_time_s={}", self.wall_time.as_secs_f64())?;
        writeln!(f, "mean_ingest_ns={:.1}", self.mean_ingest_ns())
    }
}

fn open_jobs(path: Option<&Path>) -> Result<JobReader<Box<dyn BufRead>>, RunError> {
    let reader: Box<dyn BufRead> = match path {
        Some(path) => Box::new(BufReader::new(
            File::open(path).map_err(|e| RunError::io(path, e))?,
        )),
        None => Box::new(BufReader::new(io::stdin())),
    };
    Ok(JobReader::new(reader))
}

fn read_all(path: Option<&Path>) -> Result<Vec<Job>, RunError> {
    Ok(open_jobs(path)?.collect::<Result<Vec<_>, _>>()?)
}

fn ledger_for(config: &RunConfig, params: SchedulingParams) -> Result<GroupLedger, RunError> {
    Ok(match config.regime {
        Regime::PmaxGiven => GroupLedger::given_pmax(params, config.pmax.unwrap_or(0.0))?,
        Regime::PmaxEstimate => GroupLedger::estimated_pmax(
            params,
            config.pmax_estimate.unwrap_or(0.0),
            config.alpha.unwrap_or(0.0),
        )?,
        Regime::PmaxUnknown => GroupLedger::unknown_pmax(params),
    })
}

/// Feeds the stream to the ledger, timing only the ingest calls.
fn ingest_stream(
    ledger: &mut GroupLedger,
    jobs: impl Iterator<Item = Result<Job, JobStreamError>>,
) -> Result<Duration, RunError> {
    let mut buffer = Vec::with_capacity(TIMING_CHUNK);
    let mut elapsed = Duration::ZERO;
    let mut flush =
        |ledger: &mut GroupLedger, buffer: &mut Vec<Job>| -> Result<(), GroupingError> {
            let start = Instant::now();
            for job in buffer.drain(..) {
                ledger.ingest(job)?;
            }
            elapsed += start.elapsed();
            Ok(())
        };
    for job in jobs {
        buffer.push(job?);
        if buffer.len() == TIMING_CHUNK {
            flush(ledger, &mut buffer)?;
        }
    }
    flush(ledger, &mut buffer)?;
    Ok(elapsed)
}

fn fill_outcome(report: &mut Report, outcome: &SearchOutcome) {
    report.value = Some(outcome.value);
    report.t = Some(outcome.t);
    report.x = Some(outcome.grid_exponent);
    report.k_l = Some(outcome.k_l);
    report.large_jobs = Some(outcome.large_jobs.len());
}

/// Writes `job_id,machine,start,completion` records in job order and a final
/// `makespan,<value>` line.
pub fn write_schedule_csv<W: Write>(mut out: W, schedule: &Schedule) -> io::Result<()> {
    writeln!(out, "job_id,machine,start,completion")?;
    for p in schedule.placements() {
        writeln!(
            out,
            "{},{},{},{}",
            p.job.id, p.machine, p.start, p.completion
        )?;
    }
    writeln!(out, "makespan,{}", schedule.makespan())?;
    out.flush()
}

fn export(config: &RunConfig, schedule: &Schedule) -> Result<(), RunError> {
    if let Some(path) = &config.schedule_out {
        let file = File::create(path).map_err(|e| RunError::io(path, e))?;
        write_schedule_csv(BufWriter::new(file), schedule).map_err(|e| RunError::io(path, e))?;
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<Report, RunError> {
    let started = Instant::now();
    config.validate()?;
    let park = parse_machine_config(&config.machines)?;
    let params = SchedulingParams::for_park(&park, config.epsilon)?
        .with_overrides(config.gamma0_override, config.n0_override)?;
    if params.overridden {
        log::warn!("gamma0/N0 overridden: the approximation guarantee does not apply");
    }
    let mut report = Report {
        mode: Some(config.mode),
        gamma0: params.gamma0,
        n0: params.n0,
        override_mode: params.overridden,
        retained_bound: params.retained_bound(),
        crossing_allowance: params.crossing_allowance(),
        stats: config.stats,
        ..Report::default()
    };
    match config.mode {
        Mode::OnePass | Mode::TwoPass => streaming(config, &park, params, &mut report)?,
        Mode::Offline => offline(config, &park, params, &mut report)?,
        Mode::Oracle => exact(config, &park, &mut report)?,
    }
    report.wall_time = started.elapsed();
    Ok(report)
}

fn streaming(
    config: &RunConfig,
    park: &MachinePark,
    params: SchedulingParams,
    report: &mut Report,
) -> Result<(), RunError> {
    report.regime = Some(config.regime);
    let mut ledger = ledger_for(config, params)?;
    report.ingest_time = ingest_stream(&mut ledger, open_jobs(config.jobs.as_deref())?)?;
    let large = ledger.finalize()?;
    log::info!(
        "first pass: {} jobs, {} large, k_L = {}",
        large.job_count,
        large.jobs.len(),
        large.k_l
    );
    let outcome = search::enumerate_and_select(park, &params, &large, config.budget)?;
    fill_outcome(report, &outcome);
    report.q0 = large.q0;
    report.total_load = large.total_load;
    report.jobs = large.job_count;
    report.p_max = large.p_max;
    report.peak_retained = Some(ledger.peak_retained());
    report.peak_group_records = Some(ledger.peak_group_records());

    if config.mode == Mode::TwoPass {
        let first = FirstPass::new(outcome, &large);
        let mut pass = SecondPass::new(park, &first)?;
        for job in open_jobs(config.jobs.as_deref())? {
            pass.feed(job?)?;
        }
        let schedule = pass.finish()?;
        report.makespan = Some(schedule.makespan());
        export(config, &schedule)?;
    }
    Ok(())
}

fn offline(
    config: &RunConfig,
    park: &MachinePark,
    params: SchedulingParams,
    report: &mut Report,
) -> Result<(), RunError> {
    let jobs = read_all(config.jobs.as_deref())?;
    let result = schedule::offline_schedule(park, &params, &jobs, config.budget)?;
    fill_outcome(report, &result.outcome);
    report.q0 = result.large.q0;
    report.total_load = result.large.total_load;
    report.jobs = result.large.job_count;
    report.p_max = result.large.p_max;
    report.makespan = Some(result.schedule.makespan());
    export(config, &result.schedule)
}

fn exact(config: &RunConfig, park: &MachinePark, report: &mut Report) -> Result<(), RunError> {
    let jobs = read_all(config.jobs.as_deref())?;
    let best = oracle::exact_optimum(park, &jobs, config.budget)?;
    report.total_load = jobs.iter().fold(0.0, |acc, j| acc + j.processing_time);
    report.jobs = jobs.len() as u64;
    report.p_max = jobs.iter().map(|j| j.processing_time).fold(0.0, f64::max);
    report.optimal_makespan = Some(best.optimal_makespan);
    if config.schedule_out.is_some() {
        let mut sequences = vec![Vec::new(); park.m()];
        for (job, &machine) in jobs.iter().zip(&best.witness) {
            sequences[machine].push(*job);
        }
        let schedule = Schedule::from_sequences(park, &sequences).map_err(ScheduleError::from)?;
        export(config, &schedule)?;
    }
    Ok(())
}
