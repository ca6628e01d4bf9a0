//! Assignment search over the large jobs.
//!
//! Every mapping of the large jobs to machines is tried. For each one the
//! smallest time `t` on the geometric grid `LB·(1+ε/2)^x` is found at which
//!
//! * (a) the park can absorb the whole load, `A(t) >= P`, and
//! * (b) every machine can absorb its large jobs, `A_i(t) >= P^L_i`.
//!
//! Both conditions are monotone in `t`, so the grid exponent is found by
//! binary search. The assignment with the smallest `t` wins; ties go to the
//! earliest assignment in enumeration order.

use rayon::prelude::*;
use thiserror::Error;

use crate::capacity::MachinePark;
use crate::grouping::{LargeJobSet, SchedulingParams};
use crate::Job;

/// Default cap on `m^|JS|`.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("total load must be finite and non-negative, got {0}")]
    NegativeLoad(f64),
    #[error("enumerating {machines}^{jobs} assignments exceeds the budget of {budget}")]
    BudgetExceeded {
        machines: usize,
        jobs: usize,
        budget: u64,
    },
    #[error("no assignment is feasible on the search grid")]
    NoFeasibleAssignment,
}

/// One mapping of the large jobs to machines.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeAssignment {
    /// Machine of each large job, parallel to the large job list.
    pub mapping: Vec<usize>,
    /// `P^L_i`.
    pub per_machine_load: Vec<f64>,
    /// Position in mixed-radix order, job 0 varying fastest.
    pub ordinal: u64,
}

impl LargeAssignment {
    pub fn new(mapping: Vec<usize>, jobs: &[Job], m: usize, ordinal: u64) -> Self {
        let per_machine_load = machine_loads(&mapping, jobs, m);
        Self {
            mapping,
            per_machine_load,
            ordinal,
        }
    }

    /// Decodes the `ordinal`-th assignment of `jobs` onto `m` machines.
    pub fn from_ordinal(ordinal: u64, jobs: &[Job], m: usize) -> Self {
        let mut mapping = Vec::with_capacity(jobs.len());
        let mut rest = ordinal;
        for _ in jobs {
            mapping.push((rest % m as u64) as usize);
            rest /= m as u64;
        }
        Self::new(mapping, jobs, m, ordinal)
    }

    pub fn empty(m: usize) -> Self {
        Self::new(Vec::new(), &[], m, 0)
    }
}

fn machine_loads(mapping: &[usize], jobs: &[Job], m: usize) -> Vec<f64> {
    let mut loads = vec![0.0; m];
    for (&machine, job) in mapping.iter().zip(jobs) {
        loads[machine] += job.processing_time;
    }
    loads
}

/// Conditions (a) and (b) at time `t`.
pub fn feasible(park: &MachinePark, loads: &[f64], total_load: f64, t: f64) -> bool {
    if t.is_nan() || t < 0.0 {
        return false;
    }
    park.capacity_unchecked(t) >= total_load
        && park
            .machines()
            .iter()
            .zip(loads)
            .all(|(machine, &load)| machine.capacity_unchecked(t) >= load)
}

/// The time grid `LB·(1+ε/2)^x` for `x = 0..=x_max`, where `x_max` is the
/// first exponent whose point reaches `UB = P/e0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(park: &MachinePark, total_load: f64, epsilon: f64) -> Result<Self, SearchError> {
        if !(total_load >= 0.0 && total_load.is_finite()) {
            return Err(SearchError::NegativeLoad(total_load));
        }
        if total_load == 0.0 {
            return Ok(Self { points: vec![0.0] });
        }
        let (lower, upper) = park.search_bounds(total_load);
        let step = 1.0 + epsilon / 2.0;
        let spread = park.m() as f64 / park.e0();
        let mut x_max = 0;
        while step.powi(x_max) < spread {
            x_max += 1;
        }
        while lower * step.powi(x_max) < upper {
            x_max += 1;
        }
        let points = (0..=x_max).map(|x| lower * step.powi(x)).collect();
        Ok(Self { points })
    }

    pub fn x_max(&self) -> usize {
        self.points.len() - 1
    }

    pub fn point(&self, x: usize) -> f64 {
        self.points[x]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// A feasible grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub t: f64,
    pub x: usize,
}

/// Smallest `x` in `0..=x_max` with `pred(x)`, for monotone `pred`.
fn first_true(x_max: usize, mut pred: impl FnMut(usize) -> bool) -> Option<usize> {
    if !pred(x_max) {
        return None;
    }
    let (mut lo, mut hi) = (0, x_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Smallest feasible grid point for `assignment`, or `None` if even the top
/// of the grid fails.
pub fn smallest_grid_t(
    park: &MachinePark,
    assignment: &LargeAssignment,
    total_load: f64,
    epsilon: f64,
) -> Result<Option<GridPoint>, SearchError> {
    let grid = Grid::new(park, total_load, epsilon)?;
    let loads = &assignment.per_machine_load;
    Ok(first_true(grid.x_max(), |x| {
        feasible(park, loads, total_load, grid.point(x))
    })
    .map(|x| GridPoint {
        t: grid.point(x),
        x,
    }))
}

/// `A_i` and `A` evaluated once at every grid point, shared by all
/// assignments.
struct CapacityTable {
    grid: Grid,
    // caps[x * m + i] = A_i(grid[x])
    caps: Vec<f64>,
    totals: Vec<f64>,
    m: usize,
}

impl CapacityTable {
    fn new(park: &MachinePark, grid: Grid) -> Self {
        let m = park.m();
        let mut caps = Vec::with_capacity(grid.points.len() * m);
        let mut totals = Vec::with_capacity(grid.points.len());
        for &t in &grid.points {
            caps.extend(
                park.machines()
                    .iter()
                    .map(|mach| mach.capacity_unchecked(t)),
            );
            totals.push(park.capacity_unchecked(t));
        }
        Self {
            grid,
            caps,
            totals,
            m,
        }
    }

    fn feasible(&self, x: usize, loads: &[f64], total_load: f64) -> bool {
        self.totals[x] >= total_load
            && self.caps[x * self.m..(x + 1) * self.m]
                .iter()
                .zip(loads)
                .all(|(cap, load)| cap >= load)
    }

    fn smallest_x(&self, loads: &[f64], total_load: f64) -> Option<usize> {
        first_true(self.grid.x_max(), |x| self.feasible(x, loads, total_load))
    }
}

/// The winning assignment and the reported value.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub assignment: LargeAssignment,
    /// The large jobs the assignment refers to, sorted by id.
    pub large_jobs: Vec<Job>,
    pub t: f64,
    pub grid_exponent: usize,
    /// `t + ⌈(m-1)/m1⌉·(1/e0)·2^(q0+k_L+1)`.
    pub value: f64,
    pub total_load: f64,
    pub k_l: i32,
    pub band_top: f64,
}

impl SearchOutcome {
    /// Machine assigned to large job `id`, if it is large.
    pub fn machine_of(&self, id: usize) -> Option<usize> {
        self.large_jobs
            .binary_search_by_key(&id, |j| j.id)
            .ok()
            .map(|pos| self.assignment.mapping[pos])
    }
}

/// Number of assignments, if it fits the budget.
pub fn assignment_count(m: usize, jobs: usize, budget: u64) -> Result<u64, SearchError> {
    let exceeded = SearchError::BudgetExceeded {
        machines: m,
        jobs,
        budget,
    };
    let count = u32::try_from(jobs)
        .ok()
        .and_then(|n| (m as u64).checked_pow(n))
        .ok_or(exceeded.clone())?;
    if count > budget {
        return Err(exceeded);
    }
    Ok(count)
}

/// Tries every assignment of `large.jobs` and keeps the one with the smallest
/// feasible grid time.
pub fn enumerate_and_select(
    park: &MachinePark,
    params: &SchedulingParams,
    large: &LargeJobSet,
    budget: u64,
) -> Result<SearchOutcome, SearchError> {
    let m = park.m();
    let jobs = &large.jobs;
    if large.job_count == 0 {
        return Ok(SearchOutcome {
            assignment: LargeAssignment::empty(m),
            large_jobs: Vec::new(),
            t: 0.0,
            grid_exponent: 0,
            value: 0.0,
            total_load: large.total_load,
            k_l: large.k_l,
            band_top: large.band_top,
        });
    }
    let count = assignment_count(m, jobs.len(), budget)?;
    let table = CapacityTable::new(park, Grid::new(park, large.total_load, params.epsilon)?);
    let total_load = large.total_load;

    let chunk = 4096u64;
    let chunks = count.div_ceil(chunk);
    let best = (0..chunks)
        .into_par_iter()
        .filter_map(|c| {
            let mut mapping = vec![0usize; jobs.len()];
            let mut loads = vec![0.0; m];
            let mut best: Option<(usize, u64)> = None;
            for ordinal in c * chunk..((c + 1) * chunk).min(count) {
                let mut rest = ordinal;
                for slot in mapping.iter_mut() {
                    *slot = (rest % m as u64) as usize;
                    rest /= m as u64;
                }
                loads.iter_mut().for_each(|l| *l = 0.0);
                for (&machine, job) in mapping.iter().zip(jobs) {
                    loads[machine] += job.processing_time;
                }
                if let Some(x) = table.smallest_x(&loads, total_load) {
                    if best.is_none_or(|(bx, _)| x < bx) {
                        best = Some((x, ordinal));
                    }
                }
            }
            best
        })
        .min();

    let (x, ordinal) = best.ok_or(SearchError::NoFeasibleAssignment)?;
    let t = table.grid.point(x);
    let value = t + params.crossing_allowance() as f64 * large.band_top / params.e0;
    Ok(SearchOutcome {
        assignment: LargeAssignment::from_ordinal(ordinal, jobs, m),
        large_jobs: jobs.clone(),
        t,
        grid_exponent: x,
        value,
        total_load,
        k_l: large.k_l,
        band_top: large.band_top,
    })
}
