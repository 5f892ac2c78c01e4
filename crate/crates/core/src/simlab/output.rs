use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::scenario::Scenario;
use super::study::{qq_data, run_null_study, run_power_study, Hypothesis, PowerCurve, PowerSetting, ReplicationResult};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "MEDPATH_THREADS";

/// Worker pool sized by `threads`, else `MEDPATH_THREADS`, else rayon's
/// default.
pub fn work_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let from_env = || -> Result<Option<usize>> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
            Err(_) => Ok(None),
        }
    };
    let n = match threads {
        Some(t) => Some(t),
        None => from_env()?,
    };
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// `hypothesis,method,expected,observed` rows for every null study.
pub fn write_type1_qq<W: Write>(studies: &[(Hypothesis, ReplicationResult)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["hypothesis", "method", "expected", "observed"])?;
    for (h, res) in studies {
        for (method, p) in [("classical_bootstrap", &res.classical), ("adaptive_bootstrap", &res.adaptive)] {
            for (e, o) in qq_data(p)? {
                w.write_record([h.label(), method, &e.to_string(), &o.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `setting,grid_value,method,rejection_rate,mc_se` rows for every curve.
pub fn write_power<W: Write>(curves: &[PowerCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["setting", "grid_value", "method", "rejection_rate", "mc_se"])?;
    for c in curves {
        for pt in &c.points {
            for (method, rate) in [
                ("classical_bootstrap", pt.classical_rate),
                ("adaptive_bootstrap", pt.adaptive_rate),
            ] {
                w.write_record([
                    c.setting.label(),
                    &pt.grid_value.to_string(),
                    method,
                    &rate.to_string(),
                    &pt.mc_se(rate).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct StudySeed {
    pub study: String,
    /// Seed of replication 0; replication `r` uses `derive_seed(master, study, r)`.
    pub first_replicate_seed: u64,
    pub replications: usize,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub scenario: Scenario,
    pub scale: f64,
    pub master_seed: u64,
    pub studies: Vec<StudySeed>,
    pub seed_rule: &'static str,
    pub version: &'static str,
    pub threads: usize,
    pub wall_secs: f64,
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub scenario: Scenario,
    pub master_seed: u64,
    pub scale: f64,
    pub threads: Option<usize>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            master_seed: 2024,
            scale: 1.0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub nulls: Vec<(Hypothesis, ReplicationResult)>,
    pub power: Vec<PowerCurve>,
    pub manifest: Manifest,
}

/// The three null studies and both power settings.
pub fn reproduce(opts: &ReproduceOptions) -> Result<Reproduction> {
    let scenario = opts.scenario.scaled(opts.scale)?;
    scenario.validate()?;
    let pool = work_pool(opts.threads)?;
    let start = Instant::now();
    let (nulls, power) = pool.install(|| -> Result<_> {
        let nulls = Hypothesis::ALL
            .iter()
            .map(|&h| Ok((h, run_null_study(h, &scenario, opts.master_seed)?)))
            .collect::<Result<Vec<_>>>()?;
        let power = PowerSetting::ALL
            .iter()
            .map(|&s| run_power_study(s, &scenario, opts.master_seed))
            .collect::<Result<Vec<_>>>()?;
        Ok((nulls, power))
    })?;
    let mut studies: Vec<StudySeed> = nulls
        .iter()
        .map(|(h, r)| StudySeed {
            study: h.label().to_string(),
            first_replicate_seed: derive_seed(opts.master_seed, h.label(), 0),
            replications: r.classical.len(),
            elapsed_secs: r.elapsed_secs,
        })
        .collect();
    for c in &power {
        for (k, pt) in c.points.iter().enumerate() {
            let label = format!("{}/{k}", c.setting.label());
            studies.push(StudySeed {
                first_replicate_seed: derive_seed(opts.master_seed, &label, 0),
                study: label,
                replications: pt.replications,
                elapsed_secs: pt.elapsed_secs,
            });
        }
    }
    let manifest = Manifest {
        scenario,
        scale: opts.scale,
        master_seed: opts.master_seed,
        studies,
        seed_rule: "replicate r of study L: derive_seed(master, L, r); bootstrap: derive_seed(that, \"bootstrap\", 0)",
        version: env!("CARGO_PKG_VERSION"),
        threads: pool.current_num_threads(),
        wall_secs: start.elapsed().as_secs_f64(),
    };
    Ok(Reproduction { nulls, power, manifest })
}

/// Paths of the files written by [`write_reproduction`].
pub struct OutputPaths {
    pub type1_qq: PathBuf,
    pub power: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `type1_qq.csv`, `power.csv` and `manifest.json` into `dir`.
pub fn write_reproduction(rep: &Reproduction, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir)?;
    let paths = OutputPaths {
        type1_qq: dir.join("type1_qq.csv"),
        power: dir.join("power.csv"),
        manifest: dir.join("manifest.json"),
    };
    write_type1_qq(&rep.nulls, File::create(&paths.type1_qq)?)?;
    write_power(&rep.power, File::create(&paths.power)?)?;
    let json = serde_json::to_string_pretty(&rep.manifest).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&paths.manifest, json + "\n")?;
    Ok(paths)
}
