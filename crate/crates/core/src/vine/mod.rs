//! Pair-copula constructions: bivariate copulas and h-functions, D-vine
//! densities and quantile regression, the four-node `S, Z, M, Y` DAG and
//! bootstrap tests for its pathways.

mod dag;
mod dvine;
mod fit;
mod pair;

pub use dag::{DagPairs, DagVineConfig, DagVineSpec, VineEdge};
pub use dvine::{node_density, DVineSpec};
pub use fit::{
    fit_dag_vine, pathway_independence_test, pseudo_observations, DagVineFit, EdgeTest, Pathway,
    PathwayTestReport,
};
pub use pair::{fit_pair_copula, PairCopula, PairFamily, PairFit};
