#![allow(dead_code)]

use streamsched::capacity::MachinePark;
use streamsched::cli::{generate_instance, GeneratorConfig, JobDistribution};
use streamsched::Job;

/// A small instance the exhaustive oracle can solve.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub park: MachinePark,
    pub jobs: Vec<Job>,
    pub epsilon: f64,
}

impl Instance {
    pub fn p_max(&self) -> f64 {
        self.jobs
            .iter()
            .map(|j| j.processing_time)
            .fold(0.0, f64::max)
    }
}

pub fn job_list(values: &[f64]) -> Vec<Job> {
    values
        .iter()
        .enumerate()
        .map(|(id, &p)| Job::new(id, p))
        .collect()
}

/// Instance number `seed` of the desk-scale family: m in {2, 3}, every m1,
/// e0 and epsilon in {0.5, 1}, at most 10 integer jobs up to 16, ratios from
/// {0.25, 0.5, 1} and integer breakpoints up to 20.
pub fn desk_instance(seed: u64) -> Instance {
    let m = 2 + (seed % 2) as usize;
    let m1 = 1 + ((seed / 2) % m as u64) as usize;
    let e0 = [0.5, 1.0][((seed / 6) % 2) as usize];
    let epsilon = [0.5, 1.0][((seed / 12) % 2) as usize];
    let n = 1 + (seed.wrapping_mul(2654435761) >> 7) % 10;
    let config = GeneratorConfig {
        seed,
        m,
        m1,
        e0,
        n,
        intervals: (0, 4),
        gaps: (1, 5),
        ratios: vec![0.25, 0.5, 1.0],
        jobs: JobDistribution::UniformInt { lo: 1, hi: 16 },
    };
    let instance = generate_instance(&config).expect("valid generator settings");
    let jobs = instance
        .jobs
        .enumerate()
        .map(|(id, p)| Job::new(id, p))
        .collect();
    Instance {
        seed,
        park: instance.park,
        jobs,
        epsilon,
    }
}

/// `n` generated job sizes.
pub fn stream(seed: u64, n: u64, dist: JobDistribution) -> Vec<Job> {
    let config = GeneratorConfig {
        seed,
        n,
        jobs: dist,
        ..GeneratorConfig::default()
    };
    generate_instance(&config)
        .expect("valid generator settings")
        .jobs
        .enumerate()
        .map(|(id, p)| Job::new(id, p))
        .collect()
}
