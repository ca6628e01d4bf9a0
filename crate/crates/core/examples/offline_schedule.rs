//! The in-memory scheme on the five jobs of a small two-machine example,
//! written out as CSV.

use streamsched::capacity::{MachinePark, MachineTimeline};
use streamsched::cli::write_schedule_csv;
use streamsched::grouping::SchedulingParams;
use streamsched::schedule::offline_schedule;
use streamsched::search::DEFAULT_BUDGET;
use streamsched::Job;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let machines = vec![
        MachineTimeline::from_pairs(0, &[(2.0, 0.5), (5.0, 1.0)])?,
        MachineTimeline::from_pairs(1, &[(3.0, 0.5)])?,
    ];
    let park = MachinePark::new(machines, 1, 0.5)?;
    let jobs: Vec<Job> = [1.0, 2.0, 3.0, 1.0, 5.0]
        .into_iter()
        .enumerate()
        .map(|(id, p)| Job::new(id, p))
        .collect();
    let params = SchedulingParams::for_park(&park, 0.5)?;
    let result = offline_schedule(&park, &params, &jobs, DEFAULT_BUDGET)?;
    println!("value {} at t = {}", result.value(), result.outcome.t);
    write_schedule_csv(std::io::stdout().lock(), &result.schedule)?;
    Ok(())
}
