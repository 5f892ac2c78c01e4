use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dag::{DagPairs, VineEdge};
use super::pair::{fit_pair_copula, PairFamily, PairFit};
use crate::data::VineDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::stream_rng;

/// Rank-based pseudo-observations `rank / (n + 1)`, ties given their
/// average rank.
pub fn pseudo_observations<T: Scalar>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite data"));
    let denom = T::from_usize_lossy(n + 1);
    let mut out = vec![T::zero(); n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their mean
        let rank = T::from_usize_lossy(start + 1 + end) * T::half();
        for &k in &idx[start..end] {
            out[k] = rank / denom;
        }
        start = end;
    }
    out
}

/// Sequentially estimated four-node vine.
#[derive(Debug, Clone, Serialize)]
pub struct DagVineFit<T> {
    pub pairs: DagPairs<T>,
    pub fits: Vec<(VineEdge, PairFit<T>)>,
}

impl<T: Scalar> DagVineFit<T> {
    pub fn edge(&self, edge: VineEdge) -> &PairFit<T> {
        &self
            .fits
            .iter()
            .find(|(e, _)| *e == edge)
            .expect("every edge is fitted")
            .1
    }
}

/// Tree-by-tree fit: tree-1 pairs on rank pseudo-observations, higher trees
/// on h-function transforms of the fitted lower trees.
pub fn fit_dag_vine<T: Scalar>(data: &VineDataset<T>, family: PairFamily) -> Result<DagVineFit<T>> {
    if data.n() < 10 {
        return Err(Error::InsufficientData(format!(
            "vine fit needs at least 10 observations, got {}",
            data.n()
        )));
    }
    let [s, z, m, y] = data.columns().map(pseudo_observations);
    let mut pairs = DagPairs::independence();
    let mut fits = Vec::with_capacity(6);
    let mut fit = |edge: VineEdge, u: &[T], v: &[T], pairs: &mut DagPairs<T>| -> Result<()> {
        let f = fit_pair_copula(u, v, family)?;
        pairs.set(edge, f.copula);
        fits.push((edge, f));
        Ok(())
    };
    fit(VineEdge::SZ, &s, &z, &mut pairs)?;
    fit(VineEdge::ZM, &z, &m, &mut pairs)?;
    fit(VineEdge::MY, &m, &y, &mut pairs)?;
    let h = |c: super::PairCopula<T>, a: &[T], b: &[T]| -> Vec<T> {
        a.iter().zip(b).map(|(&u, &v)| c.h_unchecked(u, v)).collect()
    };
    let s_z = h(pairs.sz, &s, &z);
    let m_z = h(pairs.zm, &m, &z);
    let z_m = h(pairs.zm, &z, &m);
    let y_m = h(pairs.my, &y, &m);
    fit(VineEdge::SMGivenZ, &s_z, &m_z, &mut pairs)?;
    fit(VineEdge::ZYGivenM, &z_m, &y_m, &mut pairs)?;
    let s_zm = h(pairs.sm_given_z, &s_z, &m_z);
    let y_zm = h(pairs.zy_given_m, &y_m, &z_m);
    fit(VineEdge::SYGivenZM, &s_zm, &y_zm, &mut pairs)?;
    Ok(DagVineFit { pairs, fits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pathway {
    /// `S → Y` given `Z, M`.
    DirectSY,
    /// `S → M → Y`.
    MediatedSMY,
    /// `S → Z → Y`.
    CompositeSZY,
}

impl Pathway {
    /// Edges whose independence would remove the pathway; for two-edge
    /// pathways either one suffices.
    pub fn edges(self) -> &'static [VineEdge] {
        match self {
            Pathway::DirectSY => &[VineEdge::SYGivenZM],
            Pathway::MediatedSMY => &[VineEdge::SMGivenZ, VineEdge::MY],
            Pathway::CompositeSZY => &[VineEdge::SZ, VineEdge::ZYGivenM],
        }
    }
}

impl std::str::FromStr for Pathway {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct_SY" | "direct" => Ok(Pathway::DirectSY),
            "mediated_SMY" | "mediated" => Ok(Pathway::MediatedSMY),
            "composite_SZY" | "composite" => Ok(Pathway::CompositeSZY),
            other => Err(Error::InvalidInput(format!("unknown pathway '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeTest {
    pub edge: String,
    pub estimate: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathwayTestReport {
    pub pathway: Pathway,
    pub tests: Vec<EdgeTest>,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    /// How the conditional pseudo-observations were obtained.
    pub pseudo_observations: &'static str,
}

impl PathwayTestReport {
    pub fn p_values(&self) -> Vec<f64> {
        self.tests.iter().map(|t| t.p_value).collect()
    }
}

pub(crate) fn resample_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Nonparametric bootstrap test of each pathway edge's gaussian pair
/// parameter against zero.
///
/// Every resample re-ranks the data and refits the vine. The p-value for an
/// edge is `(1 + #{b : |ρ*_b − ρ̂| ≥ |ρ̂|}) / (B + 1)`. Resample `b` draws
/// from stream `b` of `seed`, so the result does not depend on scheduling.
pub fn pathway_independence_test<T: Scalar>(
    data: &VineDataset<T>,
    pathway: Pathway,
    b: usize,
    seed: u64,
) -> Result<PathwayTestReport> {
    if b == 0 {
        return Err(Error::InvalidInput("B must be at least 1".into()));
    }
    let n = data.n();
    let observed = fit_dag_vine(data, PairFamily::Gaussian)?;
    let edges = pathway.edges();
    let obs: Vec<T> = edges.iter().map(|&e| observed.edge(e).copula.parameter()).collect();
    let draws: Vec<Vec<T>> = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            for _ in 0..10 {
                let idx = resample_indices(&mut rng, n);
                if let Ok(fit) = fit_dag_vine(&data.select_rows(&idx), PairFamily::Gaussian) {
                    return Ok(edges.iter().map(|&e| fit.edge(e).copula.parameter()).collect());
                }
            }
            Err(Error::Estimation("ten consecutive degenerate vine resamples".into()))
        })
        .collect::<Result<_>>()?;
    let tests = edges
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let hat = obs[k];
            let exceed = draws.iter().filter(|d| (d[k] - hat).abs() >= hat.abs()).count();
            EdgeTest {
                edge: e.label().to_string(),
                estimate: hat.to_f64_lossy(),
                p_value: (1 + exceed) as f64 / (b + 1) as f64,
            }
        })
        .collect();
    Ok(PathwayTestReport {
        pathway,
        tests,
        n,
        b,
        seed,
        pseudo_observations: "rank-based, h-function transforms of fitted lower trees",
    })
}
