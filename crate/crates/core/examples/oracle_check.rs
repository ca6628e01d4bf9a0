//! Compare the scheme against the brute-force optimum on random instances.

use streamsched::cli::{generate_instance, GeneratorConfig};
use streamsched::grouping::SchedulingParams;
use streamsched::oracle::{exact_optimum, validate_schedule};
use streamsched::schedule::offline_schedule;
use streamsched::search::DEFAULT_BUDGET;
use streamsched::Job;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epsilon = 0.5;
    let mut worst: f64 = 1.0;
    for seed in 0..50 {
        let config = GeneratorConfig {
            seed,
            m: 3,
            m1: 2,
            n: 8,
            ..GeneratorConfig::default()
        };
        let instance = generate_instance(&config)?;
        let jobs: Vec<Job> = instance
            .jobs
            .enumerate()
            .map(|(id, p)| Job::new(id, p))
            .collect();
        let park = instance.park;
        let params = SchedulingParams::for_park(&park, epsilon)?;
        let result = offline_schedule(&park, &params, &jobs, DEFAULT_BUDGET)?;
        validate_schedule(&park, &jobs, &result.schedule)?;
        let best = exact_optimum(&park, &jobs, DEFAULT_BUDGET)?.optimal_makespan;
        assert!(best <= result.value() && result.value() <= (1.0 + epsilon) * best * (1.0 + 1e-9));
        worst = worst.max(result.value() / best);
    }
    println!("50 instances within the bound; worst value/optimum = {worst:.4}");
    Ok(())
}
