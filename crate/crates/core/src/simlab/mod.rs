//! Simulation studies of the bootstrap mediation tests: type-I error under
//! the three null configurations and power curves.

mod output;
mod scenario;
mod study;

pub use output::{
    reproduce, work_pool, write_power, write_reproduction, write_type1_qq, Manifest, OutputPaths,
    ReproduceOptions, Reproduction, StudySeed, THREADS_ENV,
};
pub use scenario::{generate_scenario_data, Scenario};
pub use study::{
    ks_below_uniform, qq_data, rejection_rate, run_null_study, run_power_study, run_replications, Hypothesis,
    PowerCurve, PowerPoint, PowerSetting, ReplicationResult,
};
