//! File formats and the command-line driver.
//!
//! Exit codes of the `streamsched` binary:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | invalid flags or parameters |
//! | 3 | invalid machine configuration |
//! | 4 | unparsable or nonpositive job value |
//! | 5 | job above the given `p_max` |
//! | 6 | `p_max` estimate violated |
//! | 7 | enumeration budget exceeded |
//! | 8 | second pass differs from the first |
//! | 9 | I/O failure |

pub mod config;
pub mod generate;
pub mod jobs;
pub mod run;

pub use config::{parse_machine_config, parse_machine_config_str, ConfigError, MachineConfig};
pub use generate::{
    generate_instance, write_instance, GenerateError, GeneratorConfig, JobDistribution,
};
pub use jobs::{parse_jobs_str, JobReader, JobStreamError};
pub use run::{run, write_schedule_csv, Mode, Regime, Report, RunConfig, RunError};
