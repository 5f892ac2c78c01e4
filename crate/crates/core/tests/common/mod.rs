//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w));
    }
    out
}

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF via `erfc` from libm.
pub fn big_phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by bisection on [`big_phi`].
pub fn big_phi_inv(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if big_phi(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `P(X ≤ x, Y ≤ y)` for a standard bivariate normal with correlation `rho`,
/// integrating `φ(t) Φ((x − ρt)/√(1−ρ²))` over `t ≤ y`.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    let lo = (-12.0_f64).min(y - 1.0);
    // split the range so the integrand stays well resolved
    let mut total = 0.0;
    let pieces = 16;
    let h = (y - lo) / pieces as f64;
    for k in 0..pieces {
        let a = lo + k as f64 * h;
        for (t, w) in gauss_legendre(40, a, a + h) {
            total += w * phi(t) * big_phi((x - rho * t) / s);
        }
    }
    total
}

/// Inverse of a small dense matrix by Gauss–Jordan with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Determinant by cofactor expansion.
pub fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * det(&minor)
        })
        .sum()
}

/// `ln N(x; mean, cov)`.
pub fn mvn_ln_density(x: &[f64], mean: &[f64], cov: &[Vec<f64>]) -> f64 {
    let d = x.len();
    let inv = invert(cov);
    let r: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let q: f64 = (0..d).map(|i| (0..d).map(|j| r[i] * inv[i][j] * r[j]).sum::<f64>()).sum();
    -0.5 * (d as f64 * (2.0 * PI).ln() + det(cov).ln() + q)
}

/// Gaussian copula density with correlation matrix `r` at `u`.
pub fn gaussian_copula_density(u: &[f64], r: &[Vec<f64>]) -> f64 {
    let z: Vec<f64> = u.iter().map(|&p| big_phi_inv(p)).collect();
    let zero = vec![0.0; z.len()];
    let id: Vec<Vec<f64>> = (0..z.len())
        .map(|i| (0..z.len()).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    (mvn_ln_density(&z, &zero, r) - mvn_ln_density(&z, &zero, &id)).exp()
}

/// `sup |F̂ − x|` for a sample against the uniform distribution.
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Asymptotic Kolmogorov critical value `√(−ln(α/2) / 2) / √n` for the
/// one-sample test.
pub fn ks_critical(n: usize, level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Correlation matrix of a four-node D-vine with gaussian pairs
/// `(ρ12, ρ23, ρ34, ρ13|2, ρ24|3, ρ14|23)`, by unwinding the partial
/// correlations.
pub fn dvine_correlation(p: [f64; 6]) -> Vec<Vec<f64>> {
    let [r12, r23, r34, r13_2, r24_3, r14_23] = p;
    let up = |partial: f64, a: f64, b: f64| partial * ((1.0 - a * a) * (1.0 - b * b)).sqrt() + a * b;
    let r13 = up(r13_2, r12, r23);
    let r24 = up(r24_3, r23, r34);
    // ρ34|2 and ρ14|2 from the second-order recursion
    let r34_2 = (r34 - r23 * r24) / ((1.0 - r23 * r23) * (1.0 - r24 * r24)).sqrt();
    let r13_2b = (r13 - r12 * r23) / ((1.0 - r12 * r12) * (1.0 - r23 * r23)).sqrt();
    let r14_2 = up(r14_23, r13_2b, r34_2);
    let r14 = up(r14_2, r12, r24);
    vec![
        vec![1.0, r12, r13, r14],
        vec![r12, 1.0, r23, r24],
        vec![r13, r23, 1.0, r34],
        vec![r14, r24, r34, 1.0],
    ]
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}
