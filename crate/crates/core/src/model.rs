//! Three-node mediation DAG: path coefficients, error scales, and the
//! covariance and correlation matrices they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Mat3<T> = [[T; 3]; 3];

/// Path coefficients of the exposure → mediator → outcome DAG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DagCoefficients<T> {
    /// Exposure → mediator.
    pub alpha: T,
    /// Mediator → outcome.
    pub beta: T,
    /// Exposure → outcome.
    pub gamma: T,
}

impl<T: Scalar> DagCoefficients<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    /// Product `αβ`, proportional to the indirect effect.
    pub fn indirect(&self) -> T {
        self.alpha * self.beta
    }
}

/// Standard deviations of the structural errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorScales<T> {
    pub sigma_s: T,
    pub sigma_m: T,
    pub sigma_y: T,
}

impl<T: Scalar> ErrorScales<T> {
    pub fn new(sigma_s: T, sigma_m: T, sigma_y: T) -> Result<Self> {
        let s = Self {
            sigma_s,
            sigma_m,
            sigma_y,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn unit() -> Self {
        Self {
            sigma_s: T::one(),
            sigma_m: T::one(),
            sigma_y: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_s", self.sigma_s),
            ("sigma_m", self.sigma_m),
            ("sigma_y", self.sigma_y),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be a positive finite scale, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn is_unit(&self) -> bool {
        self.sigma_s == T::one() && self.sigma_m == T::one() && self.sigma_y == T::one()
    }
}

/// Covariance `Γ` of `(S, M, Y)` given confounders, its correlation form `Γ̃`,
/// and the latent scalings `τ_m`, `τ_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DagCovariance<T> {
    pub gamma_cov: Mat3<T>,
    pub gamma_corr: Mat3<T>,
    pub tau_m: T,
    pub tau_y: T,
}

/// Strictly lower-triangular path matrix `Θ`.
pub fn theta_matrix<T: Scalar>(coeffs: &DagCoefficients<T>) -> Mat3<T> {
    let z = T::zero();
    [
        [z, z, z],
        [coeffs.alpha, z, z],
        [coeffs.gamma, coeffs.beta, z],
    ]
}

/// `(I − Θ)⁻¹` by forward substitution on the unit lower-triangular system.
pub fn structural_inverse<T: Scalar>(coeffs: &DagCoefficients<T>) -> Mat3<T> {
    let (a, b, g) = (coeffs.alpha, coeffs.beta, coeffs.gamma);
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [a, o, z], [g + a * b, b, o]]
}

/// `Γ = (I − Θ)⁻¹ Σ (I − Θ)⁻ᵀ` and its correlation rescaling.
pub fn dag_covariance<T: Scalar>(
    coeffs: &DagCoefficients<T>,
    scales: &ErrorScales<T>,
) -> Result<DagCovariance<T>> {
    scales.validate()?;
    if !coeffs.is_finite() {
        return Err(Error::InvalidInput("DAG coefficients must be finite".into()));
    }
    let l = structural_inverse(coeffs);
    let var = [
        scales.sigma_s * scales.sigma_s,
        scales.sigma_m * scales.sigma_m,
        scales.sigma_y * scales.sigma_y,
    ];
    let mut cov = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let v = (0..3).map(|k| l[i][k] * var[k] * l[j][k]).sum::<T>();
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    let sd = [cov[0][0].sqrt(), cov[1][1].sqrt(), cov[2][2].sqrt()];
    let mut corr = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            corr[i][j] = if i == j {
                T::one()
            } else {
                cov[i][j] / (sd[i] * sd[j])
            };
        }
    }
    let (tau_m, tau_y) = if scales.is_unit() {
        let (a, b, g) = (coeffs.alpha, coeffs.beta, coeffs.gamma);
        let c = g + a * b;
        ((a * a + T::one()).sqrt(), (c * c + b * b + T::one()).sqrt())
    } else {
        (sd[1], sd[2])
    };
    Ok(DagCovariance {
        gamma_cov: cov,
        gamma_corr: corr,
        tau_m,
        tau_y,
    })
}

/// Off-diagonal entries `(ρ_sm, ρ_sy, ρ_my)` of `Γ̃`.
pub fn correlation_entries<T: Scalar>(cov: &DagCovariance<T>) -> (T, T, T) {
    let r = &cov.gamma_corr;
    (r[0][1], r[0][2], r[1][2])
}

/// Jacobian of `(ρ_sm, ρ_sy, ρ_my)` with respect to `(α, β, γ)` under unit
/// error scales. Row `k` holds the partials of the `k`-th correlation.
pub fn correlation_jacobian<T: Scalar>(coeffs: &DagCoefficients<T>) -> [[T; 3]; 3] {
    let (a, b, g) = (coeffs.alpha, coeffs.beta, coeffs.gamma);
    let (o, z, two) = (T::one(), T::zero(), T::two());
    let c = g + a * b;
    let g12 = a;
    let g13 = c;
    let g22 = a * a + o;
    let g23 = a * c + b;
    let g33 = c * c + b * b + o;
    let d12 = [o, z, z];
    let d13 = [b, a, o];
    let d22 = [two * a, z, z];
    let d23 = [c + a * b, a * a + o, a];
    let d33 = [two * c * b, two * c * a + two * b, two * c];

    let mut jac = [[T::zero(); 3]; 3];
    for k in 0..3 {
        // d(x / sqrt(y)) = dx / sqrt(y) - x dy / (2 y^{3/2})
        jac[0][k] = d12[k] / g22.sqrt() - g12 * d22[k] / (two * g22 * g22.sqrt());
        jac[1][k] = d13[k] / g33.sqrt() - g13 * d33[k] / (two * g33 * g33.sqrt());
        let p = g22 * g33;
        let dp = d22[k] * g33 + g22 * d33[k];
        jac[2][k] = d23[k] / p.sqrt() - g23 * dp / (two * p * p.sqrt());
    }
    jac
}

/// Inverse map from a valid correlation triple back to `(α, β, γ)`.
///
/// Returns `None` when the triple does not form a positive definite matrix.
pub fn coefficients_from_correlations<T: Scalar>(
    rho_sm: T,
    rho_sy: T,
    rho_my: T,
) -> Option<DagCoefficients<T>> {
    let o = T::one();
    let v_m = o - rho_sm * rho_sm;
    if !(v_m > T::zero()) {
        return None;
    }
    // Regression of Z*_y on (Z_s, Z*_m).
    let det = v_m;
    let b_s = (rho_sy - rho_sm * rho_my) / det;
    let b_m = (rho_my - rho_sm * rho_sy) / det;
    let resid = o - (b_s * rho_sy + b_m * rho_my);
    if !(resid > T::zero()) {
        return None;
    }
    let alpha = rho_sm / v_m.sqrt();
    let tau_m = (alpha * alpha + o).sqrt();
    let tau_y = o / resid.sqrt();
    let gamma = b_s * tau_y;
    let beta = b_m * tau_y / tau_m;
    Some(DagCoefficients::new(alpha, beta, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_cov(a: f64, b: f64, g: f64) -> DagCovariance<f64> {
        dag_covariance(&DagCoefficients::new(a, b, g), &ErrorScales::unit()).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_matrix(&DagCoefficients::<f64>::zero()), [[0.0; 3]; 3]);
        assert_eq!(
            theta_matrix(&DagCoefficients::new(1.0, 1.0, 1.0)),
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]
        );
        assert_eq!(
            theta_matrix(&DagCoefficients::new(0.5, -0.3, 2.0)),
            [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [2.0, -0.3, 0.0]]
        );
    }

    #[test]
    fn covariance_examples() {
        let c = unit_cov(0.0, 0.0, 0.0);
        assert_eq!(c.gamma_cov, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let c = unit_cov(1.0, 0.0, 0.0);
        assert_eq!(c.gamma_cov, [[1.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]);
        let c = unit_cov(1.0, 1.0, 1.0);
        assert_eq!(c.gamma_cov, [[1.0, 1.0, 2.0], [1.0, 2.0, 3.0], [2.0, 3.0, 6.0]]);
        assert!((c.tau_m - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((c.tau_y - 6.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation_entries(&unit_cov(0.0, 0.0, 0.0)), (0.0, 0.0, 0.0));
        let (a, b, c) = correlation_entries(&unit_cov(1.0, 1.0, 1.0));
        assert!((a - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((b - 2.0 / 6.0_f64.sqrt()).abs() < 1e-15);
        assert!((c - 3.0 / 12.0_f64.sqrt()).abs() < 1e-15);
        let (a, b, c) = correlation_entries(&unit_cov(1.0, 0.0, 0.0));
        assert!((a - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!((b, c), (0.0, 0.0));
    }

    #[test]
    fn general_scales_use_diagonal() {
        let scales = ErrorScales::new(2.0_f64, 0.5, 3.0).unwrap();
        let c = dag_covariance(&DagCoefficients::new(1.0, -1.0, 0.5), &scales).unwrap();
        assert!((c.tau_m - c.gamma_cov[1][1].sqrt()).abs() < 1e-15);
        assert!((c.tau_y - c.gamma_cov[2][2].sqrt()).abs() < 1e-15);
        // Var(M) = α²σ_s² + σ_m²
        assert!((c.gamma_cov[1][1] - (4.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_scales() {
        assert!(ErrorScales::new(1.0, 0.0, 1.0).is_err());
        let bad = ErrorScales { sigma_s: 1.0, sigma_m: 1.0, sigma_y: -2.0 };
        assert!(matches!(
            dag_covariance(&DagCoefficients::new(0.0, 0.0, 0.0), &bad),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn single_precision_covariance() {
        let c = dag_covariance(&DagCoefficients::new(1.0_f32, 1.0, 1.0), &ErrorScales::unit()).unwrap();
        assert_eq!(c.gamma_cov[2][2], 6.0_f32);
    }

    proptest! {
        #[test]
        fn covariance_is_spd_with_unit_correlation_diagonal(
            a in -5.0..5.0f64, b in -5.0..5.0f64, g in -5.0..5.0f64,
            ss in 0.1..3.0f64, sm in 0.1..3.0f64, sy in 0.1..3.0f64,
        ) {
            let c = dag_covariance(&DagCoefficients::new(a, b, g), &ErrorScales::new(ss, sm, sy).unwrap()).unwrap();
            let m = crate::linalg::Matrix::from_rows(&c.gamma_cov.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
            prop_assert!(m.is_symmetric(0.0));
            prop_assert!(m.cholesky().is_ok());
            for i in 0..3 {
                prop_assert_eq!(c.gamma_corr[i][i], 1.0);
                for j in 0..3 {
                    if i != j {
                        prop_assert!(c.gamma_corr[i][j].abs() < 1.0);
                    }
                }
            }
        }

        #[test]
        fn correlation_map_inverts(a in -3.0..3.0f64, b in -3.0..3.0f64, g in -3.0..3.0f64) {
            let (r1, r2, r3) = correlation_entries(&unit_cov(a, b, g));
            let back = coefficients_from_correlations(r1, r2, r3).unwrap();
            prop_assert!((back.alpha - a).abs() < 1e-8);
            prop_assert!((back.beta - b).abs() < 1e-8);
            prop_assert!((back.gamma - g).abs() < 1e-8);
        }

        #[test]
        fn jacobian_matches_finite_differences(a in -2.0..2.0f64, b in -2.0..2.0f64, g in -2.0..2.0f64) {
            let jac = correlation_jacobian(&DagCoefficients::new(a, b, g));
            let h = 1e-6;
            for k in 0..3 {
                let mut p = [a, b, g];
                let mut m = [a, b, g];
                p[k] += h;
                m[k] -= h;
                let cp = correlation_entries(&unit_cov(p[0], p[1], p[2]));
                let cm = correlation_entries(&unit_cov(m[0], m[1], m[2]));
                let fd = [(cp.0 - cm.0) / (2.0 * h), (cp.1 - cm.1) / (2.0 * h), (cp.2 - cm.2) / (2.0 * h)];
                for r in 0..3 {
                    prop_assert!((fd[r] - jac[r][k]).abs() < 1e-7, "row {} col {}: {} vs {}", r, k, fd[r], jac[r][k]);
                }
            }
        }
    }

    #[test]
    fn unit_diagonal_closed_forms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a: f64 = rng.random_range(-5.0..5.0);
            let b: f64 = rng.random_range(-5.0..5.0);
            let g: f64 = rng.random_range(-5.0..5.0);
            let c = unit_cov(a, b, g);
            let vm = a * a + 1.0;
            let vy = (g + a * b).powi(2) + b * b + 1.0;
            assert!((c.gamma_cov[1][1] - vm).abs() <= 1e-12 * vm.max(1.0));
            assert!((c.gamma_cov[2][2] - vy).abs() <= 1e-12 * vy.max(1.0));
        }
    }
}
