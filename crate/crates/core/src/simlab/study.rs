use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{generate_scenario_data, Scenario};
use crate::abtest::{bootstrap_tests, AbConfig};
use crate::error::{Error, Result};
use crate::regression::Family;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `(α, β) = (0, 0.5)`.
    H01,
    /// `(α, β) = (0.5, 0)`.
    H02,
    /// `(α, β) = (0, 0)`.
    H03,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 3] = [Hypothesis::H01, Hypothesis::H02, Hypothesis::H03];

    pub fn paths(self) -> (f64, f64) {
        match self {
            Hypothesis::H01 => (0.0, 0.5),
            Hypothesis::H02 => (0.5, 0.0),
            Hypothesis::H03 => (0.0, 0.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::H01 => "H01",
            Hypothesis::H02 => "H02",
            Hypothesis::H03 => "H03",
        }
    }
}

/// Per-replication p-values of both bootstrap tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub label: String,
    pub classical: Vec<f64>,
    pub adaptive: Vec<f64>,
    /// Sum of per-replication compute times, in seconds.
    pub elapsed_secs: f64,
    /// Degenerate bootstrap resamples redrawn over all replications.
    pub redraws: usize,
    /// Replications that failed once and were re-seeded.
    pub reseeded: usize,
}

/// Fraction of p-values at or below `level`.
pub fn rejection_rate(p: &[f64], level: f64) -> f64 {
    p.iter().filter(|&&v| v <= level).count() as f64 / p.len() as f64
}

impl ReplicationResult {
    pub fn classical_size(&self, level: f64) -> f64 {
        rejection_rate(&self.classical, level)
    }

    pub fn adaptive_size(&self, level: f64) -> f64 {
        rejection_rate(&self.adaptive, level)
    }
}

struct Replicate {
    classical: f64,
    adaptive: f64,
    redraws: usize,
    reseeded: bool,
    secs: f64,
}

fn one_replicate(s: &Scenario, seed: u64) -> Result<(f64, f64, usize)> {
    let data = generate_scenario_data(s, seed)?;
    let ab = AbConfig {
        seed: derive_seed(seed, "bootstrap", 0),
        ..s.ab
    };
    let r = bootstrap_tests(&data, Family::Gaussian, &ab)?;
    Ok((r.classical.p_value_nie, r.adaptive.p_value_nie, r.redraws))
}

/// Runs `R` replications of both bootstrap tests on fresh scenario data.
///
/// Replication `r` uses seed `derive_seed(master, label, r)`; a failed
/// replication is re-seeded once from `derive_seed(master, label + "/retry", r)`.
pub fn run_replications(s: &Scenario, label: &str, master_seed: u64) -> Result<ReplicationResult> {
    s.validate()?;
    let retry_label = format!("{label}/retry");
    let reps: Vec<Replicate> = (0..s.replications)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let seed = derive_seed(master_seed, label, r as u64);
            let (out, reseeded) = match one_replicate(s, seed) {
                Ok(v) => (v, false),
                Err(e) => {
                    log::warn!("{label} replication {r} failed ({e}); re-seeding");
                    let v = one_replicate(s, derive_seed(master_seed, &retry_label, r as u64)).map_err(|e| {
                        Error::Estimation(format!("{label} replication {r} failed twice: {e}"))
                    })?;
                    (v, true)
                }
            };
            Ok(Replicate {
                classical: out.0,
                adaptive: out.1,
                redraws: out.2,
                reseeded,
                secs: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ReplicationResult {
        label: label.to_string(),
        classical: reps.iter().map(|r| r.classical).collect(),
        adaptive: reps.iter().map(|r| r.adaptive).collect(),
        elapsed_secs: reps.iter().map(|r| r.secs).sum(),
        redraws: reps.iter().map(|r| r.redraws).sum(),
        reseeded: reps.iter().filter(|r| r.reseeded).count(),
    })
}

/// Type-I error study under one of the three null configurations.
pub fn run_null_study(hypothesis: Hypothesis, s: &Scenario, master_seed: u64) -> Result<ReplicationResult> {
    let (a, b) = hypothesis.paths();
    let res = run_replications(&s.with_paths(a, b), hypothesis.label(), master_seed)?;
    if hypothesis != Hypothesis::H03 {
        let d = ks_below_uniform(&res.adaptive);
        let crit = (-(0.001_f64).ln() / (2.0 * res.adaptive.len() as f64)).sqrt();
        if d > crit {
            log::warn!(
                "{}: adaptive p-values look smaller than uniform (one-sided KS {d:.4} > {crit:.4})",
                hypothesis.label()
            );
        }
    }
    Ok(res)
}

/// One-sided KS distance `sup_x (F̂(x) − x)`: large when p-values pile up
/// near zero.
pub fn ks_below_uniform(p: &[f64]) -> f64 {
    let mut v = p.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| (i + 1) as f64 / n - x)
        .fold(0.0, f64::max)
}

/// Sorted p-values paired with their expected uniform quantiles
/// `(i − 0.5) / R`, as `(expected, observed)`.
pub fn qq_data(pvalues: &[f64]) -> Result<Vec<(f64, f64)>> {
    if pvalues.is_empty() {
        return Err(Error::InvalidInput("qq_data needs at least one p-value".into()));
    }
    let mut v = pvalues.to_vec();
    v.sort_by(f64::total_cmp);
    let r = v.len() as f64;
    Ok(v.into_iter()
        .enumerate()
        .map(|(i, p)| ((i as f64 + 0.5) / r, p))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSetting {
    /// `α = β` over `[0, 0.1]`.
    EqualSignals,
    /// `αβ = 0.01` with varying ratio `α / β`.
    FixedProduct,
}

impl PowerSetting {
    pub const ALL: [PowerSetting; 2] = [PowerSetting::EqualSignals, PowerSetting::FixedProduct];

    pub fn label(self) -> &'static str {
        match self {
            PowerSetting::EqualSignals => "equal_signals",
            PowerSetting::FixedProduct => "fixed_product",
        }
    }

    /// Grid values: `α` for equal signals, the ratio `α / β` otherwise.
    pub fn grid(self) -> Vec<f64> {
        match self {
            PowerSetting::EqualSignals => (0..6).map(|k| 0.02 * k as f64).collect(),
            PowerSetting::FixedProduct => vec![0.5, 1.0, 2.0, 2.25, 3.0, 4.0],
        }
    }

    pub fn paths(self, grid_value: f64) -> (f64, f64) {
        match self {
            PowerSetting::EqualSignals => (grid_value, grid_value),
            PowerSetting::FixedProduct => ((0.01 * grid_value).sqrt(), (0.01 / grid_value).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerPoint {
    pub grid_value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub classical_rate: f64,
    pub adaptive_rate: f64,
    pub replications: usize,
    pub elapsed_secs: f64,
}

impl PowerPoint {
    /// Binomial Monte Carlo standard error of a rejection rate.
    pub fn mc_se(&self, rate: f64) -> f64 {
        (rate * (1.0 - rate) / self.replications as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub setting: PowerSetting,
    pub points: Vec<PowerPoint>,
}

/// Rejection rates of both tests at each grid point of `setting`.
pub fn run_power_study(setting: PowerSetting, s: &Scenario, master_seed: u64) -> Result<PowerCurve> {
    let points = setting
        .grid()
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            let (a, b) = setting.paths(g);
            let label = format!("{}/{k}", setting.label());
            let res = run_replications(&s.with_paths(a, b), &label, master_seed)?;
            Ok(PowerPoint {
                grid_value: g,
                alpha: a,
                beta: b,
                classical_rate: res.classical_size(s.level),
                adaptive_rate: res.adaptive_size(s.level),
                replications: res.classical.len(),
                elapsed_secs: res.elapsed_secs,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PowerCurve { setting, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qq_single_point() {
        assert_eq!(qq_data(&[0.5]).unwrap(), vec![(0.5, 0.5)]);
        assert!(qq_data(&[]).is_err());
    }

    #[test]
    fn qq_uniform_grid_on_diagonal() {
        let r = 99;
        let p: Vec<f64> = (1..=r).rev().map(|i| i as f64 / (r + 1) as f64).collect();
        for (e, o) in qq_data(&p).unwrap() {
            assert!((e - o).abs() <= 1.0 / (r + 1) as f64);
        }
    }

    #[test]
    fn grids_have_six_points() {
        for s in PowerSetting::ALL {
            assert_eq!(s.grid().len(), 6);
        }
        let (a, b) = PowerSetting::FixedProduct.paths(4.0);
        assert!((a * b - 0.01).abs() < 1e-15 && (a / b - 4.0).abs() < 1e-12);
        assert_eq!(PowerSetting::EqualSignals.paths(0.0), Hypothesis::H03.paths());
    }

    #[test]
    fn replications_are_deterministic() {
        let s = Scenario { n: 60, replications: 4, ab: AbConfig { b: 19, ..AbConfig::default() }, ..Scenario::default() };
        let a = run_null_study(Hypothesis::H01, &s, 3).unwrap();
        let b = run_null_study(Hypothesis::H01, &s, 3).unwrap();
        assert_eq!((a.classical, a.adaptive), (b.classical, b.adaptive));
    }
}
