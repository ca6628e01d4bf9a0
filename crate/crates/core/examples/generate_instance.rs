//! Write a seeded instance to disk, the same files `streamsched generate`
//! produces. Usage: generate_instance [DIR]

use std::path::PathBuf;

use streamsched::cli::{write_instance, GeneratorConfig, JobDistribution, MachineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let config = GeneratorConfig {
        seed: 7,
        m: 3,
        m1: 2,
        e0: 0.5,
        n: 1000,
        jobs: "uniform:0.5:20".parse::<JobDistribution>()?,
        ..GeneratorConfig::default()
    };
    let (machines, jobs) = (dir.join("machines.toml"), dir.join("jobs.txt"));
    write_instance(&config, &machines, &jobs)?;
    let park = streamsched::cli::parse_machine_config(&machines)?;
    print!("{}", MachineConfig::from_park(&park).to_toml());
    println!("# {} jobs in {}", config.n, jobs.display());
    Ok(())
}
