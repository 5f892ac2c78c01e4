use serde::{Deserialize, Serialize};

use super::dvine::{check_continuous, DVineSpec};
use super::pair::PairCopula;
use crate::data::VineDataset;
use crate::error::{Error, Result};
use crate::gcopula::MarginalSpec;
use crate::scalar::Scalar;
use crate::seed::{stream_rng, uniform_open};

/// Pair copulas of the four-node DAG in the D-vine order `S – Z – M – Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DagPairs<T> {
    pub sz: PairCopula<T>,
    pub zm: PairCopula<T>,
    pub my: PairCopula<T>,
    pub sm_given_z: PairCopula<T>,
    pub zy_given_m: PairCopula<T>,
    pub sy_given_zm: PairCopula<T>,
}

impl<T: Scalar> DagPairs<T> {
    pub fn independence() -> Self {
        Self {
            sz: PairCopula::Independence,
            zm: PairCopula::Independence,
            my: PairCopula::Independence,
            sm_given_z: PairCopula::Independence,
            zy_given_m: PairCopula::Independence,
            sy_given_zm: PairCopula::Independence,
        }
    }

    pub fn get(&self, edge: VineEdge) -> PairCopula<T> {
        match edge {
            VineEdge::SZ => self.sz,
            VineEdge::ZM => self.zm,
            VineEdge::MY => self.my,
            VineEdge::SMGivenZ => self.sm_given_z,
            VineEdge::ZYGivenM => self.zy_given_m,
            VineEdge::SYGivenZM => self.sy_given_zm,
        }
    }

    pub fn set(&mut self, edge: VineEdge, c: PairCopula<T>) {
        let slot = match edge {
            VineEdge::SZ => &mut self.sz,
            VineEdge::ZM => &mut self.zm,
            VineEdge::MY => &mut self.my,
            VineEdge::SMGivenZ => &mut self.sm_given_z,
            VineEdge::ZYGivenM => &mut self.zy_given_m,
            VineEdge::SYGivenZM => &mut self.sy_given_zm,
        };
        *slot = c;
    }

    pub fn to_dvine(&self) -> DVineSpec<T> {
        DVineSpec {
            labels: ["S", "Z", "M", "Y"].iter().map(|s| s.to_string()).collect(),
            pairs: vec![
                vec![self.sz, self.zm, self.my],
                vec![self.sm_given_z, self.zy_given_m],
                vec![self.sy_given_zm],
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VineEdge {
    SZ,
    ZM,
    MY,
    SMGivenZ,
    ZYGivenM,
    SYGivenZM,
}

impl VineEdge {
    pub const ALL: [VineEdge; 6] = [
        VineEdge::SZ,
        VineEdge::ZM,
        VineEdge::MY,
        VineEdge::SMGivenZ,
        VineEdge::ZYGivenM,
        VineEdge::SYGivenZM,
    ];

    pub fn label(self) -> &'static str {
        match self {
            VineEdge::SZ => "S-Z",
            VineEdge::ZM => "Z-M",
            VineEdge::MY => "M-Y",
            VineEdge::SMGivenZ => "S-M|Z",
            VineEdge::ZYGivenM => "Z-Y|M",
            VineEdge::SYGivenZM => "S-Y|Z,M",
        }
    }

    /// Tree level (1-based) of the edge.
    pub fn tree(self) -> usize {
        match self {
            VineEdge::SZ | VineEdge::ZM | VineEdge::MY => 1,
            VineEdge::SMGivenZ | VineEdge::ZYGivenM => 2,
            VineEdge::SYGivenZM => 3,
        }
    }
}

/// Four-node DAG `S, Z, M, Y` with continuous marginals and D-vine
/// dependence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagVineSpec<T> {
    pub pairs: DagPairs<T>,
    pub s: MarginalSpec<T>,
    pub z: MarginalSpec<T>,
    pub m: MarginalSpec<T>,
    pub y: MarginalSpec<T>,
}

impl<T: Scalar> DagVineSpec<T> {
    pub fn new(pairs: DagPairs<T>, marginals: [MarginalSpec<T>; 4]) -> Result<Self> {
        let [s, z, m, y] = marginals;
        let spec = Self { pairs, s, z, m, y };
        spec.validate()?;
        Ok(spec)
    }

    /// Standard normal marginals.
    pub fn standard(pairs: DagPairs<T>) -> Self {
        Self {
            pairs,
            s: MarginalSpec::standard_normal(),
            z: MarginalSpec::standard_normal(),
            m: MarginalSpec::standard_normal(),
            y: MarginalSpec::standard_normal(),
        }
    }

    pub fn marginals(&self) -> [&MarginalSpec<T>; 4] {
        [&self.s, &self.z, &self.m, &self.y]
    }

    pub fn validate(&self) -> Result<()> {
        for e in VineEdge::ALL {
            self.pairs.get(e).validate()?;
        }
        for m in self.marginals() {
            m.validate()?;
            check_continuous(m)?;
            if m.p() != 0 {
                return Err(Error::UnsupportedModel(
                    "vine marginals cannot depend on confounders".into(),
                ));
            }
        }
        Ok(())
    }

    /// `f(s, z, m, y)`: the six pair-copula terms times the four marginal
    /// densities.
    pub fn joint_density(&self, x: [T; 4]) -> Result<T> {
        Ok(self.joint_ln_density(x)?.exp())
    }

    pub fn joint_ln_density(&self, x: [T; 4]) -> Result<T> {
        let mut u = [T::zero(); 4];
        let mut ln_f = T::zero();
        for (k, m) in self.marginals().into_iter().enumerate() {
            u[k] = m.cdf(x[k], &[])?;
            ln_f = ln_f + m.ln_density(x[k], &[])?;
        }
        Ok(ln_f + self.pairs.to_dvine().ln_density(&u)?)
    }

    /// Draws `n` observations by sequential inverse h-functions along the
    /// order `S, Z, M, Y`.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<VineDataset<T>> {
        self.validate()?;
        let vine = self.pairs.to_dvine();
        let mut rng = stream_rng(seed, 0);
        let mut cols: [Vec<T>; 4] = Default::default();
        for _ in 0..n {
            let w: [T; 4] = std::array::from_fn(|_| uniform_open(&mut rng));
            let u = sample_uniform_point(&vine, &w);
            for (k, m) in self.marginals().into_iter().enumerate() {
                let mu = m.mean_unchecked(&[]);
                cols[k].push(m.quantile_at(u[k], mu));
            }
        }
        let [s, z, m, y] = cols;
        VineDataset::new(s, z, m, y)
    }
}

/// Maps independent uniforms `w` to a draw from the vine copula:
/// `x_j = F⁻¹(w_j | x₀, …, x_{j-1})`.
pub(crate) fn sample_uniform_point<T: Scalar>(vine: &DVineSpec<T>, w: &[T]) -> Vec<T> {
    let mut x = Vec::with_capacity(w.len());
    x.push(w[0]);
    for j in 1..w.len() {
        let rec = vine.recursion(&x);
        let mut v = w[j];
        for t in (0..j).rev() {
            let i = j - t - 1;
            v = vine.pairs[t][i].h_inverse_unchecked(v, rec.first[t][i]);
        }
        x.push(v);
    }
    x
}

/// Simulation request for the four-node vine, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagVineConfig {
    pub seed: u64,
    pub n: usize,
    #[serde(flatten)]
    pub spec: DagVineSpec<f64>,
}

impl DagVineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.spec.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
