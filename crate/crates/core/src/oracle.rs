//! Reference implementations used as ground truth in tests.
//!
//! Nothing here shares code paths with the algorithms it checks beyond the
//! capacity arithmetic itself: the optimum is found by trying every job to
//! machine map, the grid time by scanning every exponent, the groups by
//! recomputing band membership from scratch.

use thiserror::Error;

use crate::capacity::{MachinePark, MachineTimeline};
use crate::grouping::{LargeJobSet, SchedulingParams};
use crate::schedule::Schedule;
use crate::search::{feasible, Grid, GridPoint, LargeAssignment};
use crate::Job;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("exhaustive search over {machines}^{jobs} maps exceeds the budget of {budget}")]
    BudgetExceeded {
        machines: usize,
        jobs: usize,
        budget: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimal_makespan: f64,
    /// Machine of each job, in input order.
    pub witness: Vec<usize>,
}

/// Finishing time of `load` units started at 0 on `machine`.
fn finish(machine: &MachineTimeline, load: f64) -> f64 {
    machine
        .completion_time(0.0, load)
        .expect("loads are non-negative")
}

/// Makespan of a job to machine map. Jobs on a machine run back to back, so
/// only the machine's total load matters.
pub fn evaluate_map(park: &MachinePark, jobs: &[Job], map: &[usize]) -> f64 {
    let mut loads = vec![0.0; park.m()];
    for (job, &machine) in jobs.iter().zip(map) {
        loads[machine] += job.processing_time;
    }
    park.machines()
        .iter()
        .zip(&loads)
        .map(|(machine, &load)| finish(machine, load))
        .fold(0.0, f64::max)
}

/// Optimal makespan by trying all `m^n` maps.
pub fn exact_optimum(
    park: &MachinePark,
    jobs: &[Job],
    budget: u64,
) -> Result<OracleResult, OracleError> {
    let m = park.m();
    let exceeded = OracleError::BudgetExceeded {
        machines: m,
        jobs: jobs.len(),
        budget,
    };
    let total = u32::try_from(jobs.len())
        .ok()
        .and_then(|n| (m as u64).checked_pow(n))
        .filter(|&c| c <= budget)
        .ok_or(exceeded)?;

    let mut map = vec![0usize; jobs.len()];
    let mut best = OracleResult {
        optimal_makespan: f64::INFINITY,
        witness: Vec::new(),
    };
    for _ in 0..total {
        let makespan = evaluate_map(park, jobs, &map);
        if makespan < best.optimal_makespan {
            best = OracleResult {
                optimal_makespan: makespan,
                witness: map.clone(),
            };
        }
        // odometer increment
        for digit in map.iter_mut() {
            *digit += 1;
            if *digit < m {
                break;
            }
            *digit = 0;
        }
    }
    Ok(best)
}

/// `A_i(t)` by walking the segments in order.
pub fn naive_capacity(machine: &MachineTimeline, t: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0;
    for (&bp, &ratio) in machine.breakpoints().iter().zip(machine.ratios()) {
        if t > bp {
            acc += (bp - prev) * ratio;
            prev = bp;
        } else {
            return acc + (t - prev) * ratio;
        }
    }
    acc + (t - prev)
}

/// Smallest feasible grid point by trying every exponent in turn.
pub fn grid_scan_t(
    park: &MachinePark,
    assignment: &LargeAssignment,
    total_load: f64,
    epsilon: f64,
) -> Option<GridPoint> {
    let grid = Grid::new(park, total_load, epsilon).ok()?;
    grid.points()
        .iter()
        .enumerate()
        .find(|&(_, &t)| feasible(park, &assignment.per_machine_load, total_load, t))
        .map(|(x, &t)| GridPoint { t, x })
}

/// Smallest integer `a` with `2^a >= p`, by doubling and halving.
fn band_by_search(p: f64) -> i32 {
    let mut a = 0;
    while 2f64.powi(a) < p {
        a += 1;
    }
    while a > -1074 && 2f64.powi(a - 1) >= p {
        a -= 1;
    }
    a
}

/// Large-job set recomputed from the full job list and a known `p_max`.
pub fn replay_grouping(jobs: &[Job], params: &SchedulingParams, p_max: f64) -> LargeJobSet {
    let total_load = jobs.iter().fold(0.0, |acc, j| acc + j.processing_time);
    if jobs.is_empty() {
        return LargeJobSet {
            k_l: -1,
            jobs: Vec::new(),
            total_load,
            band_top: 0.0,
            q0: None,
            job_count: 0,
            p_max: 0.0,
        };
    }
    let gamma0 = params.gamma0 as i32;
    let q0 = band_by_search(p_max) - gamma0 - 1;
    let index_of = |p: f64| {
        let band = band_by_search(p);
        if band <= q0 {
            -1
        } else {
            band - q0 - 1
        }
    };
    let mut counts = vec![0u64; gamma0 as usize + 1];
    for job in jobs {
        let k = index_of(job.processing_time);
        if k >= 0 {
            counts[k as usize] += 1;
        }
    }
    let k_l = (0..=gamma0)
        .rev()
        .find(|&k| counts[k as usize] >= params.n0)
        .unwrap_or(-1);
    let large = jobs
        .iter()
        .copied()
        .filter(|j| index_of(j.processing_time) > k_l)
        .collect();
    LargeJobSet {
        k_l,
        jobs: large,
        total_load,
        band_top: 2f64.powi(q0 + k_l + 1),
        q0: Some(q0),
        job_count: jobs.len() as u64,
        p_max: jobs.iter().map(|j| j.processing_time).fold(0.0, f64::max),
    }
}

/// Checks a schedule from scratch: every job exactly once, machines busy
/// back to back from 0, completion times consistent with the capacity
/// functions and the makespan equal to the latest completion.
pub fn validate_schedule(
    park: &MachinePark,
    jobs: &[Job],
    schedule: &Schedule,
) -> Result<(), String> {
    let placements = schedule.placements();
    if placements.len() != jobs.len() {
        return Err(format!(
            "{} placements for {} jobs",
            placements.len(),
            jobs.len()
        ));
    }
    let mut by_id: Vec<Option<usize>> = vec![None; jobs.len()];
    for (idx, p) in placements.iter().enumerate() {
        let slot = by_id
            .get_mut(p.job.id)
            .ok_or_else(|| format!("unknown job id {}", p.job.id))?;
        if slot.replace(idx).is_some() {
            return Err(format!("job {} placed twice", p.job.id));
        }
    }
    for job in jobs {
        let idx = by_id[job.id].ok_or_else(|| format!("job {} missing", job.id))?;
        if placements[idx].job.processing_time != job.processing_time {
            return Err(format!("job {} has the wrong processing time", job.id));
        }
    }

    let mut per_machine: Vec<Vec<usize>> = vec![Vec::new(); park.m()];
    for (idx, p) in placements.iter().enumerate() {
        per_machine
            .get_mut(p.machine)
            .ok_or_else(|| format!("job {} on unknown machine {}", p.job.id, p.machine))?
            .push(idx);
    }
    let mut latest: f64 = 0.0;
    for (machine, idxs) in per_machine.iter_mut().enumerate() {
        idxs.sort_by_key(|&i| placements[i].position);
        let timeline = park.machine(machine);
        let mut end = 0.0;
        for (position, &i) in idxs.iter().enumerate() {
            let p = &placements[i];
            if p.position != position {
                return Err(format!("machine {machine}: positions are not 0..n"));
            }
            if p.start != end {
                return Err(format!(
                    "job {} starts at {} instead of {end}",
                    p.job.id, p.start
                ));
            }
            let completion = timeline
                .completion_time(p.start, p.job.processing_time)
                .map_err(|e| e.to_string())?;
            if p.completion != completion {
                return Err(format!(
                    "job {} completes at {} but its work finishes at {completion}",
                    p.job.id, p.completion
                ));
            }
            end = completion;
        }
        latest = latest.max(end);
    }
    if schedule.makespan() != latest {
        return Err(format!(
            "makespan {} but last completion {latest}",
            schedule.makespan()
        ));
    }
    Ok(())
}
