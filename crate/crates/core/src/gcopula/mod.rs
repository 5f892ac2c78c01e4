//! Gaussian copula structural equation model for an exposure, a mediator
//! and an outcome with GLM marginals.
//!
//! A latent Gaussian DAG `Z_s → Z_m → Z_y`, `Z_s → Z_y` supplies the
//! dependence; each observed variable is a monotone transform of its
//! standardized latent score through its marginal quantile function.

mod fit;
mod likelihood;
mod marginal;
mod spec;

pub use fit::{fit_full_mle, fit_ifm, FitMethod, FittedSem, SemTemplate};
pub use likelihood::{loglik, loglik_gradient};
pub use marginal::{MarginalKind, MarginalSpec};
pub use spec::{simulate_dataset, simulate_latent, LatentTriple, SemConfig, SemSpec};
