//! First pass computes the value; second pass replays the stream and places
//! every job without holding the stream in memory.

use streamsched::capacity::{MachinePark, MachineTimeline};
use streamsched::grouping::{GroupLedger, SchedulingParams};
use streamsched::schedule::{second_pass, FirstPass};
use streamsched::search::{enumerate_and_select, DEFAULT_BUDGET};
use streamsched::Job;

fn stream() -> impl Iterator<Item = Job> {
    (0..40).map(|id| Job::new(id, (1 + (id * 7) % 13) as f64))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let machines = vec![
        MachineTimeline::from_pairs(0, &[(10.0, 1.0)])?,
        MachineTimeline::from_pairs(1, &[(20.0, 0.5)])?,
        MachineTimeline::from_pairs(2, &[(5.0, 0.25), (30.0, 0.5)])?,
    ];
    let park = MachinePark::new(machines, 1, 1.0)?;
    // small N0 so some bands saturate on a short demo stream
    let params = SchedulingParams::for_park(&park, 1.0)?.with_overrides(None, Some(4))?;

    let mut ledger = GroupLedger::unknown_pmax(params);
    for job in stream() {
        ledger.ingest(job)?;
    }
    let large = ledger.finalize()?;
    let outcome = enumerate_and_select(&park, &params, &large, DEFAULT_BUDGET)?;
    println!(
        "first pass: V = {}, t = {}, {} large jobs",
        outcome.value,
        outcome.t,
        large.jobs.len()
    );

    let t = outcome.t;
    let first = FirstPass::new(outcome, &large);
    let schedule = second_pass(&park, &first, stream())?;
    println!(
        "second pass: makespan {} (bound {})",
        schedule.makespan(),
        first.outcome.value
    );
    println!(
        "jobs finishing after t per machine: {:?}",
        schedule.crossing_counts(park.m(), t)
    );
    for p in schedule.placements().iter().take(5) {
        println!(
            "  job {:>2} on machine {} [{:.3}, {:.3}]",
            p.job.id, p.machine, p.start, p.completion
        );
    }
    Ok(())
}
