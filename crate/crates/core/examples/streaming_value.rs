//! One pass over a job stream under each of the three p_max regimes. The
//! value is the same; only the memory layout differs.

use streamsched::capacity::MachinePark;
use streamsched::cli::{generate_instance, GeneratorConfig, JobDistribution};
use streamsched::grouping::{GroupLedger, SchedulingParams};
use streamsched::search::{enumerate_and_select, DEFAULT_BUDGET};
use streamsched::Job;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = GeneratorConfig {
        seed: 42,
        m: 2,
        m1: 1,
        e0: 1.0,
        n: 20_000,
        jobs: JobDistribution::Exponential { mean: 50.0 },
        ..GeneratorConfig::default()
    };
    let instance = generate_instance(&config)?;
    let park: MachinePark = instance.park;
    let jobs: Vec<Job> = instance
        .jobs
        .enumerate()
        .map(|(id, p)| Job::new(id, p))
        .collect();
    let p_max = jobs.iter().map(|j| j.processing_time).fold(0.0, f64::max);

    let params = SchedulingParams::for_park(&park, 1.0)?;
    println!("gamma0 = {}, N0 = {}", params.gamma0, params.n0);
    let ledgers = [
        ("p_max given", GroupLedger::given_pmax(params, p_max)?),
        (
            "p_max estimated (alpha 4)",
            GroupLedger::estimated_pmax(params, 3.0 * p_max, 4.0)?,
        ),
        ("p_max unknown", GroupLedger::unknown_pmax(params)),
    ];
    for (name, mut ledger) in ledgers {
        for &job in &jobs {
            ledger.ingest(job)?;
        }
        let large = ledger.finalize()?;
        let outcome = enumerate_and_select(&park, &params, &large, DEFAULT_BUDGET)?;
        println!(
            "{name:<26} V = {:.4} (t = {:.4}, k_L = {}, {} large jobs, peak {} retained)",
            outcome.value,
            outcome.t,
            outcome.k_l,
            large.jobs.len(),
            ledger.peak_retained()
        );
    }
    Ok(())
}
