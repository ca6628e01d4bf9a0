//! Machine timelines with shared-processing intervals.
//!
//! Each machine runs primary jobs at a reduced rate (its sharing ratio) during
//! shared intervals. The cumulative capacity `A_i(t)` is the amount of primary
//! processing a machine can complete in `(0, t]`; it is piecewise linear with
//! one piece per interval, and the ratio is 1 after the last breakpoint.
//!
//! Evaluation locates the segment by binary search over the breakpoints and
//! finishes in constant time from a precomputed cumulative table.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),
    #[error("processing amount must be finite and non-negative, got {0}")]
    NegativeAmount(f64),
    #[error("machine {machine}: breakpoint {index} ({value}) must be positive, finite and strictly increasing")]
    BadBreakpoint {
        machine: usize,
        index: usize,
        value: f64,
    },
    #[error("machine {machine}: sharing ratio {index} ({value}) must lie in (0, 1]")]
    BadRatio {
        machine: usize,
        index: usize,
        value: f64,
    },
    #[error("machine {machine}: {breakpoints} breakpoints but {ratios} ratios")]
    LengthMismatch {
        machine: usize,
        breakpoints: usize,
        ratios: usize,
    },
    #[error("park needs at least one machine")]
    NoMachines,
    #[error("m1 = {m1} must satisfy 1 <= m1 <= m = {m}")]
    BadM1 { m1: usize, m: usize },
    #[error("e0 = {0} must lie in (0, 1]")]
    BadE0(f64),
    #[error("machine {machine}: ratio {value} on interval {index} is below e0 = {e0}")]
    BelowE0 {
        machine: usize,
        index: usize,
        value: f64,
        e0: f64,
    },
}

fn check_time(t: f64) -> Result<(), CapacityError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(CapacityError::NegativeTime(t))
    }
}

/// One machine's shared intervals.
///
/// Ratio `ratios[k]` applies on `(breakpoints[k-1], breakpoints[k]]` with an
/// implicit leading breakpoint at 0. Machines are indexed from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineTimeline {
    machine_index: usize,
    breakpoints: Vec<f64>,
    ratios: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MachineTimeline {
    pub fn new(
        machine_index: usize,
        breakpoints: Vec<f64>,
        ratios: Vec<f64>,
    ) -> Result<Self, CapacityError> {
        if breakpoints.len() != ratios.len() {
            return Err(CapacityError::LengthMismatch {
                machine: machine_index,
                breakpoints: breakpoints.len(),
                ratios: ratios.len(),
            });
        }
        let mut prev = 0.0;
        for (index, &value) in breakpoints.iter().enumerate() {
            if !value.is_finite() || value <= prev {
                return Err(CapacityError::BadBreakpoint {
                    machine: machine_index,
                    index,
                    value,
                });
            }
            prev = value;
        }
        for (index, &value) in ratios.iter().enumerate() {
            // NaN fails both comparisons
            if !(value > 0.0 && value <= 1.0) {
                return Err(CapacityError::BadRatio {
                    machine: machine_index,
                    index,
                    value,
                });
            }
        }

        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (&bp, &ratio) in breakpoints.iter().zip(&ratios) {
            acc += (bp - prev) * ratio;
            cumulative.push(acc);
            prev = bp;
        }

        Ok(Self {
            machine_index,
            breakpoints,
            ratios,
            cumulative,
        })
    }

    /// A machine with no shared intervals: `A(t) = t`.
    pub fn unshared(machine_index: usize) -> Self {
        Self {
            machine_index,
            breakpoints: Vec::new(),
            ratios: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    /// Builds a timeline from `(breakpoint, ratio)` pairs.
    pub fn from_pairs(machine_index: usize, pairs: &[(f64, f64)]) -> Result<Self, CapacityError> {
        let (breakpoints, ratios) = pairs.iter().copied().unzip();
        Self::new(machine_index, breakpoints, ratios)
    }

    pub fn machine_index(&self) -> usize {
        self.machine_index
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// `A_i(t_{i,k})` for every breakpoint.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn interval_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Smallest ratio over the listed intervals, 1 for an unshared machine.
    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(1.0, f64::min)
    }

    /// `A_i(t)`: the processing amount this machine completes in `(0, t]`.
    pub fn capacity_at(&self, t: f64) -> Result<f64, CapacityError> {
        check_time(t)?;
        Ok(self.capacity_unchecked(t))
    }

    pub(crate) fn capacity_unchecked(&self, t: f64) -> f64 {
        // first segment whose right end is >= t, so t lies in (prev, bp]
        let k = self.breakpoints.partition_point(|&bp| bp < t);
        if k == self.breakpoints.len() {
            match self.breakpoints.last() {
                Some(&last) => self.cumulative[k - 1] + (t - last),
                None => t,
            }
        } else if k == 0 {
            t * self.ratios[0]
        } else {
            self.cumulative[k - 1] + (t - self.breakpoints[k - 1]) * self.ratios[k]
        }
    }

    /// Completion time of `amount` units of work started at `start`.
    ///
    /// Returns the smallest representable `t >= start` with
    /// `A(t) >= A(start) + amount`. The segment inversion gives the answer up
    /// to rounding; a short ulp walk makes it the exact minimum so that a load
    /// `L <= A(t)` always completes no later than `t`.
    pub fn completion_time(&self, start: f64, amount: f64) -> Result<f64, CapacityError> {
        check_time(start)?;
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(CapacityError::NegativeAmount(amount));
        }
        if amount == 0.0 {
            return Ok(start);
        }
        let target = self.capacity_unchecked(start) + amount;
        let mut t = self.invert(target).max(start);
        while self.capacity_unchecked(t) < target {
            t = t.next_up();
        }
        loop {
            let lower = t.next_down();
            if lower < start || self.capacity_unchecked(lower) < target {
                break;
            }
            t = lower;
        }
        Ok(t)
    }

    /// Segment inversion of `A`, not yet corrected for rounding.
    fn invert(&self, target: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < target);
        if k == self.cumulative.len() {
            match self.breakpoints.last() {
                Some(&last) => last + (target - self.cumulative[k - 1]),
                None => target,
            }
        } else if k == 0 {
            target / self.ratios[0]
        } else {
            self.breakpoints[k - 1] + (target - self.cumulative[k - 1]) / self.ratios[k]
        }
    }
}

/// All machines plus the `m1`/`e0` guarantee on the leading machines.
#[derive(Debug, Clone, PartialEq)]
pub struct MachinePark {
    machines: Vec<MachineTimeline>,
    m1: usize,
    e0: f64,
    total_intervals: usize,
}

impl MachinePark {
    pub fn new(machines: Vec<MachineTimeline>, m1: usize, e0: f64) -> Result<Self, CapacityError> {
        let m = machines.len();
        if m == 0 {
            return Err(CapacityError::NoMachines);
        }
        if m1 == 0 || m1 > m {
            return Err(CapacityError::BadM1 { m1, m });
        }
        if !(e0 > 0.0 && e0 <= 1.0) {
            return Err(CapacityError::BadE0(e0));
        }
        for machine in &machines[..m1] {
            if let Some((index, &value)) = machine.ratios.iter().enumerate().find(|(_, &r)| r < e0)
            {
                return Err(CapacityError::BelowE0 {
                    machine: machine.machine_index,
                    index,
                    value,
                    e0,
                });
            }
        }
        let total_intervals = machines.iter().map(MachineTimeline::interval_count).sum();
        Ok(Self {
            machines,
            m1,
            e0,
            total_intervals,
        })
    }

    /// `m` machines with no shared intervals.
    pub fn identical(m: usize) -> Self {
        let machines = (0..m).map(MachineTimeline::unshared).collect();
        Self::new(machines, m.max(1), 1.0).expect("identical park is valid")
    }

    pub fn machines(&self) -> &[MachineTimeline] {
        &self.machines
    }

    pub fn machine(&self, index: usize) -> &MachineTimeline {
        &self.machines[index]
    }

    pub fn m(&self) -> usize {
        self.machines.len()
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// `ñ`, the number of shared intervals over all machines.
    pub fn total_intervals(&self) -> usize {
        self.total_intervals
    }

    /// `A(t) = Σ A_i(t)`.
    pub fn capacity_at(&self, t: f64) -> Result<f64, CapacityError> {
        check_time(t)?;
        Ok(self.capacity_unchecked(t))
    }

    pub(crate) fn capacity_unchecked(&self, t: f64) -> f64 {
        self.machines.iter().map(|m| m.capacity_unchecked(t)).sum()
    }

    /// Bounds on the optimal makespan for total load `P`: `(P/m, P/e0)`.
    pub fn search_bounds(&self, total_load: f64) -> (f64, f64) {
        (total_load / self.m() as f64, total_load / self.e0)
    }
}
