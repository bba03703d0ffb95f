//! Error function and its complement.
//!
//! `|z| <= 3`: the positive-term series
//! `erf(z) = (2/√π) e^{-z²} Σ 2ⁿ z^{2n+1} / (2n+1)!!`, which has no
//! cancellation. `|z| > 3`: the continued fraction for the scaled
//! complement `erfcx(z) = e^{z²} erfc(z)`, evaluated bottom-up.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 3.0;
const CF_DEPTH: usize = 90;

fn frac_2_sqrt_pi() -> f64 {
    2.0 / PI.sqrt()
}

fn erf_series(x: f64) -> f64 {
    let two_x2 = 2.0 * x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term > 1e-18 * sum {
        term *= two_x2 / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    frac_2_sqrt_pi() * (-x * x).exp() * sum
}

/// `e^{x²} erfc(x)` for `x > 3` by the Laplace continued fraction
/// `1/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`.
fn erfcx_cf(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=CF_DEPTH).rev() {
        t = x + 0.5 * k as f64 / t;
    }
    1.0 / (PI.sqrt() * t)
}

pub fn erf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let x = z.abs();
    let v = if x <= SERIES_LIMIT {
        erf_series(x)
    } else {
        1.0 - erfc_positive(x)
    };
    if z < 0.0 {
        -v
    } else {
        v
    }
}

fn erfc_positive(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        1.0 - erf_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z >= 0.0 {
        erfc_positive(z)
    } else {
        1.0 + erf(-z)
    }
}

/// Scaled complement `e^{z²} erfc(z)` for `z >= 0`.
pub fn erfcx(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z <= SERIES_LIMIT {
        (z * z).exp() * (1.0 - erf_series(z))
    } else {
        erfcx_cf(z)
    }
}
