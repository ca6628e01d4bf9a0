//! Bounded-memory summary of a job stream.
//!
//! Jobs are bucketed by processing time into geometric bands
//! `IH_k = (2^(q0+k), 2^(q0+k+1)]` for `k = 0..=γ0`, plus a low bucket
//! `IH_-1 = (0, 2^q0]`. The top band holds `p_max`. Each band keeps a count,
//! a load and, while its count is below `N0`, the jobs themselves. After the
//! stream ends, the largest saturated band `k_L` splits jobs into large
//! (retained, enumerated exactly) and small (placed greedily).
//!
//! Three ledgers cover the three states of knowledge about `p_max`:
//!
//! * [`GroupLedger::given_pmax`]: `q0` is fixed up front, an array of bands.
//! * [`GroupLedger::estimated_pmax`]: an estimate `p_E` with
//!   `p_max <= p_E <= α·p_max` fixes a wider array with `⌈log2 α⌉` extra low
//!   bands; the bands below the true `q0` are merged at the end.
//! * [`GroupLedger::unknown_pmax`]: an ordered map keyed by band, where bands
//!   that fall below a rising `q0` are folded into the low bucket.
//!
//! All three finalize to the same [`LargeJobSet`] on the same stream.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::capacity::MachinePark;
use crate::Job;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupingError {
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error("job {id}: processing time must be positive and finite, got {p}")]
    NonPositive { id: usize, p: f64 },
    #[error("job {id}: processing time {p} exceeds the given p_max {p_max}")]
    ExceedsPmax { id: usize, p: f64, p_max: f64 },
    #[error("job {id}: processing time {p} exceeds the p_max estimate {estimate}")]
    ExceedsEstimate { id: usize, p: f64, estimate: f64 },
    #[error(
        "p_max estimate {estimate} is more than alpha = {alpha} times the observed p_max {p_max}"
    )]
    EstimateTooLoose {
        estimate: f64,
        alpha: f64,
        p_max: f64,
    },
}

/// `⌈log2 p⌉` for positive finite `p`, computed from the bit pattern.
pub fn ceil_log2(p: f64) -> i32 {
    debug_assert!(p > 0.0 && p.is_finite());
    let bits = p.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        // subnormal: p = mantissa * 2^-1074
        let floor = 63 - mantissa.leading_zeros() as i32 - 1074;
        if mantissa.is_power_of_two() {
            floor
        } else {
            floor + 1
        }
    } else if mantissa == 0 {
        biased - 1023
    } else {
        biased - 1022
    }
}

/// `2^exp` as a double.
pub fn pow2(exp: i32) -> f64 {
    2f64.powi(exp)
}

/// Constants shared by every stage: `γ0`, `N0` and the inputs they come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulingParams {
    pub m: usize,
    pub m1: usize,
    pub e0: f64,
    pub epsilon: f64,
    pub gamma0: u32,
    pub n0: u64,
    /// Set when `γ0` or `N0` were overridden; the `(1+ε)` bound is then void.
    pub overridden: bool,
}

impl SchedulingParams {
    /// Picks `γ0` as the smallest integer with
    /// `2^γ0 >= ⌈(m+m1-1) / ((ε/2)·m1·e0)⌉` and
    /// `N0 = ⌈m(m+m1-1) / ((ε/4)·e0·m1)⌉`.
    pub fn derive(m: usize, m1: usize, e0: f64, epsilon: f64) -> Result<Self, GroupingError> {
        if m == 0 {
            return Err(GroupingError::BadParams("m must be at least 1".into()));
        }
        if m1 == 0 || m1 > m {
            return Err(GroupingError::BadParams(format!(
                "m1 = {m1} must satisfy 1 <= m1 <= m = {m}"
            )));
        }
        if !(e0 > 0.0 && e0 <= 1.0) {
            return Err(GroupingError::BadParams(format!(
                "e0 = {e0} must lie in (0, 1]"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(GroupingError::BadParams(format!(
                "epsilon = {epsilon} must be positive"
            )));
        }
        if epsilon >= 1.0 {
            log::warn!("epsilon = {epsilon} is outside (0, 1)");
        }

        let spread = (m + m1 - 1) as f64;
        let gamma_target = (spread / ((epsilon / 2.0) * m1 as f64 * e0)).ceil();
        let n0 = (m as f64 * spread / ((epsilon / 4.0) * e0 * m1 as f64)).ceil();
        if !gamma_target.is_finite() || !n0.is_finite() || n0 > u64::MAX as f64 {
            return Err(GroupingError::BadParams(format!(
                "epsilon = {epsilon} is too small to size the groups"
            )));
        }
        let gamma0 = ceil_log2(gamma_target).max(0) as u32;

        Ok(Self {
            m,
            m1,
            e0,
            epsilon,
            gamma0,
            n0: n0 as u64,
            overridden: false,
        })
    }

    pub fn for_park(park: &MachinePark, epsilon: f64) -> Result<Self, GroupingError> {
        Self::derive(park.m(), park.m1(), park.e0(), epsilon)
    }

    /// Replaces `γ0` and/or `N0` for desk-scale experiments.
    pub fn with_overrides(
        mut self,
        gamma0: Option<u32>,
        n0: Option<u64>,
    ) -> Result<Self, GroupingError> {
        if let Some(g) = gamma0 {
            self.gamma0 = g;
            self.overridden = true;
        }
        if let Some(n) = n0 {
            if n == 0 {
                return Err(GroupingError::BadParams(
                    "N0 override must be at least 1".into(),
                ));
            }
            self.n0 = n;
            self.overridden = true;
        }
        Ok(self)
    }

    /// `q0` with `p_max ∈ (2^(q0+γ0), 2^(q0+γ0+1)]`.
    pub fn q0_for(&self, p_max: f64) -> i32 {
        ceil_log2(p_max) - self.gamma0 as i32 - 1
    }

    /// `⌈(m-1)/m1⌉`, the crossing-job allowance per leading machine.
    pub fn crossing_allowance(&self) -> usize {
        (self.m - 1).div_ceil(self.m1)
    }

    pub fn retained_bound(&self) -> u64 {
        (self.gamma0 as u64 + 1).saturating_mul(self.n0)
    }
}

/// Group of a job with processing time `p`: `-1` if `p <= 2^q0`, else
/// `⌈log2 p⌉ - q0 - 1`.
pub fn group_index(p: f64, q0: i32) -> Result<i32, GroupingError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(GroupingError::NonPositive { id: 0, p });
    }
    Ok(band_to_index(ceil_log2(p), q0))
}

fn band_to_index(band: i32, q0: i32) -> i32 {
    if band <= q0 {
        -1
    } else {
        band - q0 - 1
    }
}

/// `(n_k, P_k, JS_k)` for one band.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupTriple {
    pub count: u64,
    pub load: f64,
    pub retained: Vec<Job>,
}

impl GroupTriple {
    /// Counts the job and keeps it while the band is below `N0`. Returns the
    /// change in retained jobs.
    fn admit(&mut self, job: Job, n0: u64, retain: bool) -> isize {
        self.count += 1;
        self.load += job.processing_time;
        if self.count >= n0 {
            let dropped = self.retained.len() as isize;
            self.retained = Vec::new();
            -dropped
        } else if retain {
            self.retained.push(job);
            1
        } else {
            0
        }
    }
}

/// Count and load of the low bucket `H_-1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LowBucket {
    pub count: u64,
    pub load: f64,
}

impl LowBucket {
    fn add(&mut self, p: f64) {
        self.count += 1;
        self.load += p;
    }

    fn absorb(&mut self, group: &GroupTriple) {
        self.count += group.count;
        self.load += group.load;
    }
}

#[derive(Debug, Clone)]
enum Groups {
    Given {
        p_max: f64,
        q0: i32,
        // index k = 0..=γ0
        bands: Vec<GroupTriple>,
    },
    Estimated {
        estimate: f64,
        alpha: f64,
        // band exponent of slot 0; slots cover bands lowest_band..=lowest_band+L+γ0
        lowest_band: i32,
        // bands at or below this exponent can no longer become large
        floor: Option<i32>,
        slots: Vec<GroupTriple>,
    },
    Unknown {
        q0: Option<i32>,
        // keyed by band exponent b, i.e. κ = 2^b
        tree: BTreeMap<i32, GroupTriple>,
    },
}

/// The streaming summary.
#[derive(Debug, Clone)]
pub struct GroupLedger {
    params: SchedulingParams,
    groups: Groups,
    low: LowBucket,
    p_max_seen: f64,
    total_load: f64,
    job_count: u64,
    retained: usize,
    peak_retained: usize,
    peak_records: usize,
}

/// A comparable view of a ledger: `q0`, the low bucket and every non-empty
/// band `k >= 0`, as the given-`p_max` ledger would lay them out.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerSnapshot {
    pub q0: Option<i32>,
    pub low: LowBucket,
    pub groups: Vec<(i32, GroupTriple)>,
    pub total_load: f64,
    pub job_count: u64,
    pub p_max: f64,
}

/// Jobs that will be enumerated exactly, plus what the value formula needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeJobSet {
    /// Largest band index with at least `N0` jobs, `-1` if none.
    pub k_l: i32,
    /// Retained jobs of bands above `k_L`, sorted by id.
    pub jobs: Vec<Job>,
    /// `P`, summed in stream order.
    pub total_load: f64,
    /// `2^(q0+k_L+1)`, the size bound on every small job; 0 for an empty stream.
    pub band_top: f64,
    pub q0: Option<i32>,
    pub job_count: u64,
    pub p_max: f64,
}

impl LargeJobSet {
    pub fn contains(&self, id: usize) -> bool {
        self.jobs.binary_search_by_key(&id, |j| j.id).is_ok()
    }
}

impl GroupLedger {
    fn with_groups(params: SchedulingParams, groups: Groups) -> Self {
        let mut ledger = Self {
            params,
            groups,
            low: LowBucket::default(),
            p_max_seen: 0.0,
            total_load: 0.0,
            job_count: 0,
            retained: 0,
            peak_retained: 0,
            peak_records: 0,
        };
        ledger.peak_records = ledger.group_records();
        ledger
    }

    /// Ledger for a known `p_max`.
    pub fn given_pmax(params: SchedulingParams, p_max: f64) -> Result<Self, GroupingError> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(GroupingError::BadParams(format!(
                "p_max = {p_max} must be positive"
            )));
        }
        let q0 = params.q0_for(p_max);
        let bands = vec![GroupTriple::default(); params.gamma0 as usize + 1];
        Ok(Self::with_groups(
            params,
            Groups::Given { p_max, q0, bands },
        ))
    }

    /// Ledger for an estimate with `p_max <= estimate <= alpha·p_max`.
    pub fn estimated_pmax(
        params: SchedulingParams,
        estimate: f64,
        alpha: f64,
    ) -> Result<Self, GroupingError> {
        if !(estimate > 0.0 && estimate.is_finite()) {
            return Err(GroupingError::BadParams(format!(
                "p_max estimate = {estimate} must be positive"
            )));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(GroupingError::BadParams(format!(
                "alpha = {alpha} must be at least 1"
            )));
        }
        let extra = ceil_log2(alpha);
        let q0_est = params.q0_for(estimate);
        let slots = vec![GroupTriple::default(); (extra + params.gamma0 as i32 + 1) as usize];
        Ok(Self::with_groups(
            params,
            Groups::Estimated {
                estimate,
                alpha,
                lowest_band: q0_est - extra + 1,
                floor: None,
                slots,
            },
        ))
    }

    /// Ledger that learns `p_max` from the stream.
    pub fn unknown_pmax(params: SchedulingParams) -> Self {
        Self::with_groups(
            params,
            Groups::Unknown {
                q0: None,
                tree: BTreeMap::new(),
            },
        )
    }

    pub fn params(&self) -> &SchedulingParams {
        &self.params
    }

    /// Reads one job. Constant work per job, amortized for the map-based
    /// ledger's folds.
    pub fn ingest(&mut self, job: Job) -> Result<(), GroupingError> {
        let p = job.processing_time;
        if !(p > 0.0 && p.is_finite()) {
            return Err(GroupingError::NonPositive { id: job.id, p });
        }
        let delta = match &mut self.groups {
            Groups::Given { p_max, q0, bands } => {
                if p > *p_max {
                    return Err(GroupingError::ExceedsPmax {
                        id: job.id,
                        p,
                        p_max: *p_max,
                    });
                }
                match band_to_index(ceil_log2(p), *q0) {
                    -1 => {
                        self.low.add(p);
                        0
                    }
                    k => bands[k as usize].admit(job, self.params.n0, true),
                }
            }
            Groups::Estimated {
                estimate,
                lowest_band,
                floor,
                slots,
                ..
            } => {
                if p > *estimate {
                    return Err(GroupingError::ExceedsEstimate {
                        id: job.id,
                        p,
                        estimate: *estimate,
                    });
                }
                let band = ceil_log2(p);
                let mut delta = 0;
                let new_floor = band - self.params.gamma0 as i32 - 1;
                if floor.is_none_or(|f| new_floor > f) {
                    // bands at or below the new floor stop retaining
                    let from = floor.map_or(*lowest_band, |f| f + 1).max(*lowest_band);
                    for b in from..=new_floor.min(*lowest_band + slots.len() as i32 - 1) {
                        let slot = &mut slots[(b - *lowest_band) as usize];
                        delta -= slot.retained.len() as isize;
                        slot.retained = Vec::new();
                    }
                    *floor = Some(new_floor);
                }
                if band < *lowest_band {
                    self.low.add(p);
                } else {
                    let live = band > floor.unwrap();
                    delta += slots[(band - *lowest_band) as usize].admit(job, self.params.n0, live);
                }
                delta
            }
            Groups::Unknown { q0, tree } => {
                let band = ceil_log2(p);
                let top = self.params.gamma0 as i32 + 1;
                match *q0 {
                    Some(q) if band <= q => {
                        self.low.add(p);
                        0
                    }
                    Some(q) if band <= q + top => {
                        tree.entry(band)
                            .or_default()
                            .admit(job, self.params.n0, true)
                    }
                    _ => {
                        let raised = band - top;
                        let mut delta = 0;
                        let keep = tree.split_off(&(raised + 1));
                        for group in std::mem::replace(tree, keep).values() {
                            self.low.absorb(group);
                            delta -= group.retained.len() as isize;
                        }
                        *q0 = Some(raised);
                        delta
                            + tree
                                .entry(band)
                                .or_default()
                                .admit(job, self.params.n0, true)
                    }
                }
            }
        };

        self.retained = (self.retained as isize + delta) as usize;
        self.peak_retained = self.peak_retained.max(self.retained);
        self.peak_records = self.peak_records.max(self.group_records());
        self.p_max_seen = self.p_max_seen.max(p);
        self.total_load += p;
        self.job_count += 1;
        Ok(())
    }

    pub fn job_count(&self) -> u64 {
        self.job_count
    }

    pub fn total_load(&self) -> f64 {
        self.total_load
    }

    pub fn p_max_seen(&self) -> f64 {
        self.p_max_seen
    }

    /// Jobs currently held in retained lists.
    pub fn retained_jobs(&self) -> usize {
        self.retained
    }

    pub fn peak_retained(&self) -> usize {
        self.peak_retained
    }

    /// Group records currently allocated, the low bucket included.
    pub fn group_records(&self) -> usize {
        1 + match &self.groups {
            Groups::Given { bands, .. } => bands.len(),
            Groups::Estimated { slots, .. } => slots.len(),
            Groups::Unknown { tree, .. } => tree.len(),
        }
    }

    pub fn peak_group_records(&self) -> usize {
        self.peak_records
    }

    /// Current `q0`. For the estimate ledger this is the value implied by
    /// the largest job so far.
    pub fn q0(&self) -> Option<i32> {
        match &self.groups {
            Groups::Given { q0, .. } => Some(*q0),
            Groups::Estimated { floor, .. } => *floor,
            Groups::Unknown { q0, .. } => *q0,
        }
    }

    /// The ledger laid out against its current `q0`, merging estimate bands
    /// below it into the low bucket.
    pub fn snapshot(&self) -> Result<LedgerSnapshot, GroupingError> {
        let mut low = self.low;
        let (q0, groups) = match &self.groups {
            Groups::Given { q0, bands, .. } => {
                let groups = bands
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.count > 0)
                    .map(|(k, g)| (k as i32, g.clone()))
                    .collect();
                (Some(*q0), groups)
            }
            Groups::Estimated {
                estimate,
                alpha,
                lowest_band,
                floor,
                slots,
            } => {
                let Some(q0) = *floor else {
                    return Ok(self.empty_snapshot(None));
                };
                if q0 < *lowest_band - 1 {
                    return Err(GroupingError::EstimateTooLoose {
                        estimate: *estimate,
                        alpha: *alpha,
                        p_max: self.p_max_seen,
                    });
                }
                let mut groups = Vec::new();
                for (offset, slot) in slots.iter().enumerate() {
                    let band = *lowest_band + offset as i32;
                    if band <= q0 {
                        low.absorb(slot);
                    } else if slot.count > 0 {
                        groups.push((band - q0 - 1, slot.clone()));
                    }
                }
                (Some(q0), groups)
            }
            Groups::Unknown { q0, tree } => {
                let groups = tree
                    .iter()
                    .map(|(&band, g)| (band - q0.unwrap() - 1, g.clone()))
                    .collect();
                (*q0, groups)
            }
        };
        Ok(LedgerSnapshot {
            q0,
            low,
            groups,
            total_load: self.total_load,
            job_count: self.job_count,
            p_max: self.p_max_seen,
        })
    }

    fn empty_snapshot(&self, q0: Option<i32>) -> LedgerSnapshot {
        LedgerSnapshot {
            q0,
            low: self.low,
            groups: Vec::new(),
            total_load: self.total_load,
            job_count: self.job_count,
            p_max: self.p_max_seen,
        }
    }

    /// Splits off the large jobs once the stream is exhausted.
    pub fn finalize(&self) -> Result<LargeJobSet, GroupingError> {
        Ok(self.snapshot()?.large_jobs(self.params.n0))
    }
}

impl LedgerSnapshot {
    /// `k_L`, `JS = ∪_{k > k_L} JS_k` and the band top `2^(q0+k_L+1)`.
    pub fn large_jobs(&self, n0: u64) -> LargeJobSet {
        let Some(q0) = self.q0.filter(|_| self.job_count > 0) else {
            return LargeJobSet {
                k_l: -1,
                jobs: Vec::new(),
                total_load: self.total_load,
                band_top: 0.0,
                q0: self.q0,
                job_count: self.job_count,
                p_max: self.p_max,
            };
        };
        let k_l = self
            .groups
            .iter()
            .filter(|(_, g)| g.count >= n0)
            .map(|&(k, _)| k)
            .max()
            .unwrap_or(-1);
        let mut jobs: Vec<Job> = self
            .groups
            .iter()
            .filter(|&&(k, _)| k > k_l)
            .flat_map(|(_, g)| g.retained.iter().copied())
            .collect();
        jobs.sort_by_key(|j| j.id);
        LargeJobSet {
            k_l,
            jobs,
            total_load: self.total_load,
            band_top: pow2(q0 + k_l + 1),
            q0: Some(q0),
            job_count: self.job_count,
            p_max: self.p_max,
        }
    }
}
