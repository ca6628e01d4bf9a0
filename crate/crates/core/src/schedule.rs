//! Explicit schedules from a search outcome.
//!
//! Large jobs go where the winning assignment puts them. Small jobs fill the
//! machines in index order up to each machine's capacity at `t`; the job that
//! pushes a machine past `A_i(t)` is that machine's crossing job. Crossing
//! jobs on machines beyond `m1` are moved to the leading machines, whose
//! ratios are at least `e0`, so every job finishes by the reported value.

use thiserror::Error;

use crate::capacity::{CapacityError, MachinePark};
use crate::grouping::{GroupLedger, GroupingError, LargeJobSet, SchedulingParams};
use crate::search::{self, SearchError, SearchOutcome};
use crate::Job;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error(transparent)]
    Grouping(#[from] GroupingError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("job {0} was passed as small but belongs to the large set")]
    LargeJobAsSmall(usize),
    #[error("second pass differs from the first: {0}")]
    PassMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub job: Job,
    pub machine: usize,
    /// Position in the machine's sequence, from 0.
    pub position: usize,
    pub start: f64,
    pub completion: f64,
}

/// Every job with its machine, start and completion time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    placements: Vec<Placement>,
    makespan: f64,
}

impl Schedule {
    /// Runs each machine's jobs back to back from time 0.
    pub fn from_sequences(
        park: &MachinePark,
        sequences: &[Vec<Job>],
    ) -> Result<Self, CapacityError> {
        let mut placements = Vec::with_capacity(sequences.iter().map(Vec::len).sum());
        for (machine, jobs) in sequences.iter().enumerate() {
            let timeline = park.machine(machine);
            let mut end = 0.0;
            for (position, &job) in jobs.iter().enumerate() {
                let completion = timeline.completion_time(end, job.processing_time)?;
                placements.push(Placement {
                    job,
                    machine,
                    position,
                    start: end,
                    completion,
                });
                end = completion;
            }
        }
        Ok(Self::from_placements(placements))
    }

    fn from_placements(mut placements: Vec<Placement>) -> Self {
        placements.sort_by_key(|p| p.job.id);
        let makespan = placements.iter().map(|p| p.completion).fold(0.0, f64::max);
        Self {
            placements,
            makespan,
        }
    }

    /// Placements sorted by job id.
    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn makespan(&self) -> f64 {
        self.makespan
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// Jobs per machine finishing strictly after `t`.
    pub fn crossing_counts(&self, m: usize, t: f64) -> Vec<usize> {
        let mut counts = vec![0; m];
        for p in self.placements.iter().filter(|p| p.completion > t) {
            counts[p.machine] += 1;
        }
        counts
    }
}

/// Large-job sequences of the winning assignment, ids ascending.
fn large_sequences(outcome: &SearchOutcome, m: usize) -> Vec<Vec<Job>> {
    let mut sequences = vec![Vec::new(); m];
    for (job, &machine) in outcome.large_jobs.iter().zip(&outcome.assignment.mapping) {
        sequences[machine].push(*job);
    }
    sequences
}

/// Leading machine with the fewest crossing jobs, lowest index on ties.
fn least_crossed(crossing: &[usize], m1: usize) -> usize {
    (0..m1).min_by_key(|&i| crossing[i]).unwrap_or(0)
}

/// Places the small jobs around the winning large assignment.
///
/// Phase one gives each job to the lowest-index machine whose committed load
/// is still below `A_i(t)`. Phase two moves the crossing jobs of machines
/// `m1..m` onto machines `0..m1`, each time to the one with the fewest
/// crossing jobs so far. Moved jobs run after the machine's own jobs.
pub fn place_small_jobs(
    park: &MachinePark,
    outcome: &SearchOutcome,
    small_jobs: impl IntoIterator<Item = Job>,
) -> Result<Schedule, ScheduleError> {
    let m = park.m();
    let m1 = park.m1();
    let caps: Vec<f64> = park
        .machines()
        .iter()
        .map(|mach| mach.capacity_unchecked(outcome.t))
        .collect();
    let mut committed = outcome.assignment.per_machine_load.clone();
    let mut sequences = large_sequences(outcome, m);
    let mut crossing = vec![0usize; m];
    // (machine it crossed on, job); machine m means no room anywhere
    let mut to_move: Vec<(usize, Job)> = Vec::new();
    let mut cursor = 0;

    for job in small_jobs {
        if outcome.machine_of(job.id).is_some() {
            return Err(ScheduleError::LargeJobAsSmall(job.id));
        }
        while cursor < m && committed[cursor] >= caps[cursor] {
            cursor += 1;
        }
        if cursor == m {
            to_move.push((m, job));
            continue;
        }
        committed[cursor] += job.processing_time;
        if committed[cursor] > caps[cursor] {
            crossing[cursor] += 1;
            if cursor >= m1 {
                to_move.push((cursor, job));
                continue;
            }
        }
        sequences[cursor].push(job);
    }

    for (from, job) in to_move {
        if from < m {
            crossing[from] -= 1;
        }
        let target = least_crossed(&crossing, m1);
        crossing[target] += 1;
        sequences[target].push(job);
    }

    Ok(Schedule::from_sequences(park, &sequences)?)
}

/// Everything the second pass needs from the first.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstPass {
    pub outcome: SearchOutcome,
    pub job_count: u64,
    pub p_max: f64,
}

impl FirstPass {
    pub fn new(outcome: SearchOutcome, large: &LargeJobSet) -> Self {
        Self {
            outcome,
            job_count: large.job_count,
            p_max: large.p_max,
        }
    }
}

/// Online placement of a replayed stream, constant work per job.
///
/// Equivalent to [`place_small_jobs`]: machines fill in index order, so every
/// leading machine has taken its own crossing job before any trailing machine
/// produces one to route.
#[derive(Debug)]
pub struct SecondPass<'a> {
    park: &'a MachinePark,
    first: &'a FirstPass,
    caps: Vec<f64>,
    committed: Vec<f64>,
    crossing: Vec<usize>,
    ends: Vec<f64>,
    lengths: Vec<usize>,
    cursor: usize,
    placements: Vec<Placement>,
    seen: u64,
    large_seen: usize,
}

impl<'a> SecondPass<'a> {
    pub fn new(park: &'a MachinePark, first: &'a FirstPass) -> Result<Self, ScheduleError> {
        let m = park.m();
        let outcome = &first.outcome;
        let caps = park
            .machines()
            .iter()
            .map(|mach| mach.capacity_unchecked(outcome.t))
            .collect();
        let mut pass = Self {
            park,
            first,
            caps,
            committed: outcome.assignment.per_machine_load.clone(),
            crossing: vec![0; m],
            ends: vec![0.0; m],
            lengths: vec![0; m],
            cursor: 0,
            placements: Vec::new(),
            seen: 0,
            large_seen: 0,
        };
        for (machine, jobs) in large_sequences(outcome, m).into_iter().enumerate() {
            for job in jobs {
                pass.append(machine, job)?;
            }
        }
        Ok(pass)
    }

    fn append(&mut self, machine: usize, job: Job) -> Result<(), CapacityError> {
        let start = self.ends[machine];
        let completion = self
            .park
            .machine(machine)
            .completion_time(start, job.processing_time)?;
        self.placements.push(Placement {
            job,
            machine,
            position: self.lengths[machine],
            start,
            completion,
        });
        self.ends[machine] = completion;
        self.lengths[machine] += 1;
        Ok(())
    }

    pub fn feed(&mut self, job: Job) -> Result<(), ScheduleError> {
        self.seen += 1;
        if self.seen > self.first.job_count {
            return Err(ScheduleError::PassMismatch(format!(
                "more than {} jobs",
                self.first.job_count
            )));
        }
        if job.processing_time.is_nan() || job.processing_time > self.first.p_max {
            return Err(ScheduleError::PassMismatch(format!(
                "job {} has processing time {} above the first pass maximum {}",
                job.id, job.processing_time, self.first.p_max
            )));
        }
        let outcome = &self.first.outcome;
        if let Ok(pos) = outcome.large_jobs.binary_search_by_key(&job.id, |j| j.id) {
            if outcome.large_jobs[pos] != job {
                return Err(ScheduleError::PassMismatch(format!(
                    "large job {} changed from {} to {}",
                    job.id, outcome.large_jobs[pos].processing_time, job.processing_time
                )));
            }
            self.large_seen += 1;
            return Ok(());
        }

        let m = self.park.m();
        let m1 = self.park.m1();
        while self.cursor < m && self.committed[self.cursor] >= self.caps[self.cursor] {
            self.cursor += 1;
        }
        let target = if self.cursor == m {
            let target = least_crossed(&self.crossing, m1);
            self.crossing[target] += 1;
            target
        } else {
            let i = self.cursor;
            self.committed[i] += job.processing_time;
            if self.committed[i] > self.caps[i] {
                let target = if i >= m1 {
                    least_crossed(&self.crossing, m1)
                } else {
                    i
                };
                self.crossing[target] += 1;
                target
            } else {
                i
            }
        };
        self.append(target, job)?;
        Ok(())
    }

    pub fn finish(self) -> Result<Schedule, ScheduleError> {
        if self.seen != self.first.job_count {
            return Err(ScheduleError::PassMismatch(format!(
                "read {} jobs, first pass read {}",
                self.seen, self.first.job_count
            )));
        }
        if self.large_seen != self.first.outcome.large_jobs.len() {
            return Err(ScheduleError::PassMismatch(format!(
                "saw {} of {} large jobs",
                self.large_seen,
                self.first.outcome.large_jobs.len()
            )));
        }
        Ok(Schedule::from_placements(self.placements))
    }
}

/// Replays `jobs` against the first-pass artifacts.
pub fn second_pass(
    park: &MachinePark,
    first: &FirstPass,
    jobs: impl IntoIterator<Item = Job>,
) -> Result<Schedule, ScheduleError> {
    let mut pass = SecondPass::new(park, first)?;
    for job in jobs {
        pass.feed(job)?;
    }
    pass.finish()
}

/// Result of the in-memory scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    pub schedule: Schedule,
    pub outcome: SearchOutcome,
    pub large: LargeJobSet,
}

impl OfflineResult {
    pub fn value(&self) -> f64 {
        self.outcome.value
    }
}

/// The whole scheme with every job in memory: group with the true `p_max`,
/// search the large assignments, then place the small jobs.
pub fn offline_schedule(
    park: &MachinePark,
    params: &SchedulingParams,
    jobs: &[Job],
    budget: u64,
) -> Result<OfflineResult, ScheduleError> {
    let large = match jobs.iter().map(|j| j.processing_time).reduce(f64::max) {
        None => GroupLedger::unknown_pmax(*params).finalize()?,
        Some(p_max) => {
            let mut ledger = GroupLedger::given_pmax(*params, p_max)?;
            for &job in jobs {
                ledger.ingest(job)?;
            }
            ledger.finalize()?
        }
    };
    let outcome = search::enumerate_and_select(park, params, &large, budget)?;
    let small = jobs.iter().copied().filter(|j| !large.contains(j.id));
    let schedule = place_small_jobs(park, &outcome, small)?;
    Ok(OfflineResult {
        schedule,
        outcome,
        large,
    })
}
