//! A million jobs through the map-based ledger: memory stays within
//! (gamma0+1)·N0 retained jobs no matter how long the stream is.

use std::time::Instant;

use streamsched::cli::{generate_instance, GeneratorConfig, JobDistribution};
use streamsched::grouping::{GroupLedger, SchedulingParams};
use streamsched::Job;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = GeneratorConfig {
        seed: 1,
        m: 4,
        m1: 2,
        e0: 0.5,
        n: 1_000_000,
        jobs: JobDistribution::Exponential { mean: 1000.0 },
        ..GeneratorConfig::default()
    };
    let instance = generate_instance(&config)?;
    let params = SchedulingParams::for_park(&instance.park, 0.5)?;
    let mut ledger = GroupLedger::unknown_pmax(params);
    let start = Instant::now();
    for (id, p) in instance.jobs.enumerate() {
        ledger.ingest(Job::new(id, p))?;
        if (id + 1) % 200_000 == 0 {
            println!(
                "{:>8} jobs: {:>5} retained, {} group records",
                id + 1,
                ledger.retained_jobs(),
                ledger.group_records()
            );
        }
    }
    println!(
        "peak {} retained (bound {}), peak {} records (bound {}), {:.1} ns/job including generation",
        ledger.peak_retained(),
        params.retained_bound(),
        ledger.peak_group_records(),
        params.gamma0 + 2,
        start.elapsed().as_nanos() as f64 / 1e6
    );
    Ok(())
}
