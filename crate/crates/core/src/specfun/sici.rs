//! Sine and cosine integrals.
//!
//! `si(x) = Si(x) − π/2 = −∫_x^∞ sin t / t dt` and
//! `Ci(x) = −∫_x^∞ cos t / t dt`. Power series below [`SICI_CROSSOVER`], the
//! continued fraction for `E1(ix)` above it.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Switch point between the power series and the continued fraction.
pub const SICI_CROSSOVER: f64 = 4.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;
const MAX_TERMS: usize = 200;

/// Sine integral Si(x).
pub fn sine_integral(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == f64::INFINITY {
        return FRAC_PI_2;
    }
    if x <= SICI_CROSSOVER {
        si_series(x)
    } else {
        FRAC_PI_2 + e1_imag_axis(x).0
    }
}

/// Shifted sine integral si(x) = Si(x) − π/2.
pub fn sine_integral_si(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x > SICI_CROSSOVER {
        e1_imag_axis(x).0
    } else {
        sine_integral(x) - FRAC_PI_2
    }
}

/// Cosine integral Ci(x) for x > 0.
pub fn cosine_integral_ci(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain {
            function: "cosine_integral_ci",
            value: x,
        });
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(if x <= SICI_CROSSOVER {
        ci_series(x)
    } else {
        e1_imag_axis(x).1
    })
}

// Si(x) = Σ (−1)^k x^{2k+1} / ((2k+1)(2k+1)!)
fn si_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // (−1)^k x^{2k+1}/(2k+1)!
    let mut sum = x;
    for k in 1..MAX_TERMS {
        let n = (2 * k) as f64;
        term *= -x2 / (n * (n + 1.0));
        let contrib = term / (n + 1.0);
        sum += contrib;
        if contrib.abs() < f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    sum
}

// Ci(x) = γ + ln x + Σ_{k≥1} (−1)^k x^{2k} / (2k (2k)!)
fn ci_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0; // (−1)^k x^{2k}/(2k)!
    let mut sum = 0.0;
    for k in 1..MAX_TERMS {
        let n = (2 * k) as f64;
        term *= -x2 / ((n - 1.0) * n);
        let contrib = term / n;
        sum += contrib;
        if contrib.abs() < f64::EPSILON * 1e-2 * sum.abs().max(1.0) {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

// Modified Lentz continued fraction for E1(ix) = −Ci(x) + i·si(x);
// returns (si(x), Ci(x)).
fn e1_imag_axis(x: f64) -> (f64, f64) {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..MAX_TERMS {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < f64::EPSILON {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    (h.im, -h.re)
}
