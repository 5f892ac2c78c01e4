//! Unconstrained minimisation helpers: BFGS with backtracking line search,
//! golden-section search, and finite-difference derivatives.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Stop when the gradient's infinity norm falls below this.
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Minimises `f` from `x0`. The returned point never has a larger objective
/// than `x0`.
pub fn minimize_bfgs<T, F, G>(f: F, grad: G, x0: &[T], opts: BfgsOptions) -> Result<Minimum<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Vec<T>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::Estimation("objective is not finite at the starting point".into()));
    }
    let mut g = grad(&x);
    let mut h = Matrix::<T>::identity(n);
    let tol = T::lit(opts.grad_tol);
    let c1 = T::lit(1e-4);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if inf_norm(&g) < tol {
            return Ok(Minimum { grad_norm: inf_norm(&g), x, value: fx, iterations, converged: true });
        }
        iterations += 1;
        let mut dir: Vec<T> = h.matvec(&g).into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < T::zero()) {
            // Lost descent: restart from steepest descent.
            h = Matrix::identity(n);
            dir = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &dir);
        }
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<T> = x.iter().zip(&dir).map(|(&xi, &di)| xi + step * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + c1 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step = step * T::half();
        }
        let Some((x_new, f_new)) = accepted else {
            break;
        };
        let g_new = grad(&x_new);
        let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if iterations == 1 {
                // Scale the initial inverse Hessian.
                let scale = sy / dot(&y, &y);
                h = Matrix::identity(n);
                for i in 0..n {
                    h[(i, i)] = scale;
                }
            }
            let rho = T::one() / sy;
            let hy = h.matvec(&y);
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = h[(i, j)] - rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    let grad_norm = inf_norm(&g);
    Ok(Minimum { converged: grad_norm < tol, grad_norm, x, value: fx, iterations })
}

/// Central-difference gradient with a relative step.
pub fn numeric_gradient<T: Scalar, F: Fn(&[T]) -> T>(f: &F, x: &[T]) -> Vec<T> {
    let base = T::lit(6e-6);
    let mut work = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = base * x[i].abs().max(T::one());
            work[i] = x[i] + h;
            let fp = f(&work);
            work[i] = x[i] - h;
            let fm = f(&work);
            work[i] = x[i];
            (fp - fm) / (T::two() * h)
        })
        .collect()
}

/// Central-difference Hessian.
pub fn numeric_hessian<T: Scalar, F: Fn(&[T]) -> T>(f: &F, x: &[T], step: T) -> Matrix<T> {
    let n = x.len();
    let mut hess = Matrix::zeros(n, n);
    let mut w = x.to_vec();
    let f0 = f(x);
    for i in 0..n {
        let hi = step * x[i].abs().max(T::one());
        w[i] = x[i] + hi;
        let fp = f(&w);
        w[i] = x[i] - hi;
        let fm = f(&w);
        w[i] = x[i];
        hess[(i, i)] = (fp - T::two() * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = step * x[j].abs().max(T::one());
            let mut eval = |di: T, dj: T| {
                w[i] = x[i] + di;
                w[j] = x[j] + dj;
                let v = f(&w);
                w[i] = x[i];
                w[j] = x[j];
                v
            };
            let v = (eval(hi, hj) - eval(hi, -hj) - eval(-hi, hj) + eval(-hi, -hj))
                / (T::lit(4.0) * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub fn golden_section<T: Scalar, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * T::half();
    (x, f(x))
}
