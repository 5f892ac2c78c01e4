//! Standard normal distribution and a few discrete-distribution helpers.
//!
//! All evaluations are carried out in `f64` and converted back to the
//! caller's scalar type.

// Rational-approximation coefficients are kept exactly as published.
#![allow(clippy::excessive_precision)]

use libm::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn phi_f64(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf<T: Scalar>(x: T) -> T {
    let x = x.to_f64_lossy();
    if x.is_nan() {
        return T::nan();
    }
    T::lit(phi_f64(x))
}

/// Standard normal density.
pub fn normal_pdf<T: Scalar>(x: T) -> T {
    let x = x.to_f64_lossy();
    T::lit(FRAC_1_SQRT_2PI * (-0.5 * x * x).exp())
}

pub fn ln_normal_pdf<T: Scalar>(x: T) -> T {
    let x = x.to_f64_lossy();
    T::lit(-LN_SQRT_2PI - 0.5 * x * x)
}

/// Standard normal quantile function.
///
/// Returns a domain error unless `0 < p < 1`.
pub fn normal_quantile<T: Scalar>(p: T) -> Result<T> {
    let pf = p.to_f64_lossy();
    if !(pf > 0.0 && pf < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires p in (0, 1), got {pf}"
        )));
    }
    Ok(T::lit(quantile_f64(pf)))
}

/// Extended quantile: `0 -> -inf`, `1 -> +inf`, NaN outside `[0, 1]`.
pub(crate) fn normal_quantile_ext<T: Scalar>(p: T) -> T {
    let pf = p.to_f64_lossy();
    if pf <= 0.0 {
        if pf == 0.0 {
            T::neg_infinity()
        } else {
            T::nan()
        }
    } else if pf >= 1.0 {
        if pf == 1.0 {
            T::infinity()
        } else {
            T::nan()
        }
    } else {
        T::lit(quantile_f64(pf))
    }
}

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_854_561,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn quantile_f64(p: f64) -> f64 {
    let x = as241(p);
    if !x.is_finite() {
        return x;
    }
    // One Newton refinement; the error is taken in whichever tail keeps
    // relative precision.
    let dens = FRAC_1_SQRT_2PI * (-0.5 * x * x).exp();
    if dens <= 0.0 {
        return x;
    }
    let err = if p < 0.5 {
        phi_f64(x) - p
    } else {
        (1.0 - p) - phi_f64(-x)
    };
    x - err / dens
}

/// `P(X <= k)` for `X ~ Poisson(mean)`; `k < 0` gives 0.
pub(crate) fn poisson_cdf(k: f64, mean: f64) -> f64 {
    if k < 0.0 {
        return 0.0;
    }
    let k = k.floor();
    if mean <= 0.0 {
        return 1.0;
    }
    gamma_ur(k + 1.0, mean)
}

pub(crate) fn poisson_ln_pmf(k: f64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k * mean.ln() - mean - ln_gamma(k + 1.0)
}

/// Smallest non-negative integer `k` with `P(X <= k) >= p`.
pub(crate) fn poisson_quantile(p: f64, mean: f64) -> f64 {
    if p <= 0.0 || mean <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let guess = (mean + quantile_f64(p) * mean.sqrt()).floor().max(0.0);
    let mut k = guess;
    if poisson_cdf(k, mean) >= p {
        while k > 0.0 && poisson_cdf(k - 1.0, mean) >= p {
            k -= 1.0;
        }
    } else {
        while poisson_cdf(k, mean) < p {
            k += 1.0;
        }
    }
    k
}
