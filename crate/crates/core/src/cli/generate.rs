//! Seeded instance generator.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::Path;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use thiserror::Error;

use crate::capacity::{MachinePark, MachineTimeline};
use crate::cli::config::MachineConfig;
use crate::cli::jobs::write_jobs;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("inconsistent generator settings: {0}")]
    Inconsistent(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

fn inconsistent(msg: impl Into<String>) -> GenerateError {
    GenerateError::Inconsistent(msg.into())
}

/// Distribution of job processing times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JobDistribution {
    /// Integers drawn uniformly from `lo..=hi`.
    UniformInt { lo: u64, hi: u64 },
    /// Reals drawn uniformly from `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Exponential with the given mean; zero draws are redrawn.
    Exponential { mean: f64 },
}

impl JobDistribution {
    fn validate(&self) -> Result<(), GenerateError> {
        match *self {
            Self::UniformInt { lo, hi } if lo == 0 || lo > hi => {
                Err(inconsistent(format!("uniform-int bounds {lo}..={hi}")))
            }
            Self::Uniform { lo, hi } if !(lo > 0.0 && lo <= hi && hi.is_finite()) => {
                Err(inconsistent(format!("uniform bounds [{lo}, {hi}]")))
            }
            Self::Exponential { mean } if !(mean > 0.0 && mean.is_finite()) => {
                Err(inconsistent(format!("exponential mean {mean}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for JobDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniformInt { lo, hi } => write!(f, "uniform-int:{lo}:{hi}"),
            Self::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            Self::Exponential { mean } => write!(f, "exp:{mean}"),
        }
    }
}

impl FromStr for JobDistribution {
    type Err = GenerateError;

    /// `uniform-int:LO:HI`, `uniform:LO:HI` or `exp:MEAN`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || inconsistent(format!("cannot parse job distribution {s:?}"));
        let dist = match parts.as_slice() {
            ["uniform-int", lo, hi] => Self::UniformInt {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            ["uniform", lo, hi] => Self::Uniform {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            ["exp", mean] => Self::Exponential {
                mean: mean.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub m: usize,
    pub m1: usize,
    pub e0: f64,
    pub n: u64,
    /// Shared intervals per machine, inclusive range.
    pub intervals: (usize, usize),
    /// Integer gap between consecutive breakpoints, inclusive range.
    pub gaps: (u64, u64),
    /// Ratios to sample from; raised to `e0` on the leading machines.
    pub ratios: Vec<f64>,
    pub jobs: JobDistribution,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            m: 2,
            m1: 1,
            e0: 0.5,
            n: 100,
            intervals: (0, 4),
            gaps: (1, 5),
            ratios: vec![0.25, 0.5, 1.0],
            jobs: JobDistribution::UniformInt { lo: 1, hi: 16 },
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), GenerateError> {
        if self.m == 0 || self.m1 == 0 || self.m1 > self.m {
            return Err(inconsistent(format!("m = {}, m1 = {}", self.m, self.m1)));
        }
        if !(self.e0 > 0.0 && self.e0 <= 1.0) {
            return Err(inconsistent(format!("e0 = {}", self.e0)));
        }
        if self.intervals.0 > self.intervals.1 {
            return Err(inconsistent("interval count range is empty"));
        }
        if self.gaps.0 == 0 || self.gaps.0 > self.gaps.1 {
            return Err(inconsistent(
                "breakpoint gaps must be a non-empty range of positive integers",
            ));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(inconsistent(
                "ratios must be a non-empty set of values in (0, 1]",
            ));
        }
        self.jobs.validate()
    }
}

/// Lazily sampled job processing times.
#[derive(Debug, Clone)]
pub struct JobSampler {
    rng: ChaCha8Rng,
    dist: JobDistribution,
    remaining: u64,
}

impl JobSampler {
    fn sample(&mut self) -> f64 {
        match self.dist {
            JobDistribution::UniformInt { lo, hi } => self.rng.gen_range(lo..=hi) as f64,
            JobDistribution::Uniform { lo, hi } => {
                Uniform::new_inclusive(lo, hi).sample(&mut self.rng)
            }
            JobDistribution::Exponential { mean } => {
                let exp = Exp::new(1.0 / mean).expect("mean validated");
                loop {
                    let v: f64 = exp.sample(&mut self.rng);
                    if v > 0.0 {
                        break v;
                    }
                }
            }
        }
    }
}

impl Iterator for JobSampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.sample())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub park: MachinePark,
    pub jobs: JobSampler,
}

/// Builds a reproducible instance: the machines first, then a job sampler
/// continuing from the same seeded generator.
pub fn generate_instance(config: &GeneratorConfig) -> Result<GeneratedInstance, GenerateError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut machines = Vec::with_capacity(config.m);
    for i in 0..config.m {
        let count = rng.gen_range(config.intervals.0..=config.intervals.1);
        let mut breakpoints = Vec::with_capacity(count);
        let mut ratios = Vec::with_capacity(count);
        let mut at = 0u64;
        for _ in 0..count {
            at += rng.gen_range(config.gaps.0..=config.gaps.1);
            breakpoints.push(at as f64);
            let ratio = config.ratios[rng.gen_range(0..config.ratios.len())];
            ratios.push(if i < config.m1 {
                ratio.max(config.e0)
            } else {
                ratio
            });
        }
        machines.push(
            MachineTimeline::new(i, breakpoints, ratios)
                .map_err(|e| inconsistent(e.to_string()))?,
        );
    }
    let park = MachinePark::new(machines, config.m1, config.e0)
        .map_err(|e| inconsistent(e.to_string()))?;
    Ok(GeneratedInstance {
        park,
        jobs: JobSampler {
            rng,
            dist: config.jobs,
            remaining: config.n,
        },
    })
}

/// Writes the machine config and the job stream of `config`.
pub fn write_instance(
    config: &GeneratorConfig,
    machines: &Path,
    jobs: &Path,
) -> Result<(), GenerateError> {
    let instance = generate_instance(config)?;
    let io_err = |path: &Path, e: io::Error| GenerateError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    std::fs::write(machines, MachineConfig::from_park(&instance.park).to_toml())
        .map_err(|e| io_err(machines, e))?;
    let file = File::create(jobs).map_err(|e| io_err(jobs, e))?;
    write_jobs(BufWriter::new(file), instance.jobs).map_err(|e| io_err(jobs, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let config = GeneratorConfig {
            seed: 7,
            n: 50,
            ..Default::default()
        };
        let a = generate_instance(&config).unwrap();
        let b = generate_instance(&config).unwrap();
        assert_eq!(a.park, b.park);
        assert_eq!(a.jobs.collect::<Vec<_>>(), b.jobs.collect::<Vec<_>>());
        let other = generate_instance(&GeneratorConfig { seed: 8, ..config }).unwrap();
        assert_ne!(
            other.jobs.collect::<Vec<_>>(),
            generate_instance(&GeneratorConfig {
                seed: 7,
                n: 50,
                ..Default::default()
            })
            .unwrap()
            .jobs
            .collect::<Vec<_>>()
        );
    }

    #[test]
    fn leading_machines_respect_e0() {
        let config = GeneratorConfig {
            m: 3,
            m1: 2,
            e0: 1.0,
            intervals: (3, 6),
            ..Default::default()
        };
        for seed in 0..20 {
            let inst = generate_instance(&GeneratorConfig {
                seed,
                ..config.clone()
            })
            .unwrap();
            for mach in &inst.park.machines()[..2] {
                assert!(mach.ratios().iter().all(|&r| r == 1.0));
            }
        }
    }

    #[test]
    fn job_values_follow_distribution() {
        let config = GeneratorConfig {
            n: 1000,
            jobs: JobDistribution::UniformInt { lo: 3, hi: 9 },
            ..Default::default()
        };
        let jobs: Vec<f64> = generate_instance(&config).unwrap().jobs.collect();
        assert_eq!(jobs.len(), 1000);
        assert!(jobs
            .iter()
            .all(|&p| (3.0..=9.0).contains(&p) && p.fract() == 0.0));
        let exp = GeneratorConfig {
            jobs: JobDistribution::Exponential { mean: 2.0 },
            ..config
        };
        assert!(generate_instance(&exp).unwrap().jobs.all(|p| p > 0.0));
    }

    #[test]
    fn files_are_byte_identical_per_seed() {
        let dir = tempfile::tempdir().unwrap();
        let config = GeneratorConfig {
            seed: 3,
            n: 200,
            ..Default::default()
        };
        let paths = |tag: &str| {
            (
                dir.path().join(format!("m{tag}.toml")),
                dir.path().join(format!("j{tag}.txt")),
            )
        };
        let (ma, ja) = paths("a");
        let (mb, jb) = paths("b");
        write_instance(&config, &ma, &ja).unwrap();
        write_instance(&config, &mb, &jb).unwrap();
        assert_eq!(std::fs::read(&ma).unwrap(), std::fs::read(&mb).unwrap());
        assert_eq!(std::fs::read(&ja).unwrap(), std::fs::read(&jb).unwrap());
        let park = crate::cli::config::parse_machine_config(&ma).unwrap();
        assert_eq!(park, generate_instance(&config).unwrap().park);
    }

    #[test]
    fn rejects_inconsistent_bounds() {
        let bad_jobs = GeneratorConfig {
            jobs: JobDistribution::UniformInt { lo: 5, hi: 2 },
            ..Default::default()
        };
        assert!(generate_instance(&bad_jobs).is_err());
        let bad_gaps = GeneratorConfig {
            gaps: (0, 3),
            ..Default::default()
        };
        assert!(generate_instance(&bad_gaps).is_err());
        let bad_ratios = GeneratorConfig {
            ratios: vec![0.0],
            ..Default::default()
        };
        assert!(generate_instance(&bad_ratios).is_err());
        assert!("uniform:2:1".parse::<JobDistribution>().is_err());
        assert!("poisson:3".parse::<JobDistribution>().is_err());
        assert_eq!(
            "uniform-int:1:16".parse::<JobDistribution>().unwrap(),
            JobDistribution::UniformInt { lo: 1, hi: 16 }
        );
    }
}
