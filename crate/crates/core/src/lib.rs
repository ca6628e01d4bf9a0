//! Streaming approximation schemes for makespan minimization on parallel
//! machines whose capacity is partly taken by routine work.
//!
//! A machine processes primary jobs at a fraction of its speed (its sharing
//! ratio) during shared intervals; [`capacity`] models that. The job stream
//! is summarized in one pass with bounded memory by [`grouping`], the few
//! large jobs are assigned exhaustively by [`search`], and [`schedule`]
//! places everything else, either in memory or in a second pass over the
//! stream. [`oracle`] holds brute-force references for testing and [`cli`]
//! the file formats and the command-line driver.
//!
//! ```
//! use streamsched::{capacity::MachinePark, grouping::{GroupLedger, SchedulingParams}};
//! use streamsched::search::{enumerate_and_select, DEFAULT_BUDGET};
//! use streamsched::Job;
//!
//! let park = MachinePark::identical(2);
//! let params = SchedulingParams::for_park(&park, 0.5).unwrap();
//! let mut ledger = GroupLedger::unknown_pmax(params);
//! for (id, p) in [3.0, 5.0, 2.0, 4.0].into_iter().enumerate() {
//!     ledger.ingest(Job::new(id, p)).unwrap();
//! }
//! let large = ledger.finalize().unwrap();
//! let outcome = enumerate_and_select(&park, &params, &large, DEFAULT_BUDGET).unwrap();
//! assert!(outcome.value >= 7.0);
//! ```

pub mod capacity;
pub mod cli;
pub mod grouping;
pub mod oracle;
pub mod schedule;
pub mod search;

/// A primary job: its position in the stream and its processing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub id: usize,
    pub processing_time: f64,
}

impl Job {
    pub fn new(id: usize, processing_time: f64) -> Self {
        Self {
            id,
            processing_time,
        }
    }
}
