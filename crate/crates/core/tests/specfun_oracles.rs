//! Si/Ci against a composite Gauss–Legendre quadrature written from scratch
//! here, so that neither production branch is checked against itself.

use cellcov::specfun::{cosine_integral_ci, sine_integral, sine_integral_si, SICI_CROSSOVER};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(20);
    let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t.sin() / t
    }
}

fn cos_kernel(t: f64) -> f64 {
    // (cos t − 1)/t without cancellation near zero.
    if t == 0.0 {
        0.0
    } else {
        -2.0 * (0.5 * t).sin().powi(2) / t
    }
}

fn oracle_si(x: f64) -> f64 {
    composite(sinc, 0.0, x)
}

fn oracle_ci(x: f64) -> f64 {
    EULER_GAMMA + x.ln() + composite(cos_kernel, 0.0, x)
}

fn log_spaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[test]
fn sine_integral_matches_gauss_legendre_oracle() {
    for x in log_spaced(20, 1e-3, 50.0) {
        let (got, want) = (sine_integral(x), oracle_si(x));
        assert!((got - want).abs() < 1e-10, "Si({x}) = {got}, oracle {want}");
    }
}

#[test]
fn cosine_integral_matches_gauss_legendre_oracle() {
    for x in log_spaced(20, 1e-3, 50.0) {
        let (got, want) = (cosine_integral_ci(x).unwrap(), oracle_ci(x));
        assert!((got - want).abs() < 1e-10, "Ci({x}) = {got}, oracle {want}");
    }
}

#[test]
fn both_branches_are_exercised() {
    let points = log_spaced(20, 1e-3, 50.0);
    assert!(points.iter().any(|&x| x <= SICI_CROSSOVER));
    assert!(points.iter().any(|&x| x > SICI_CROSSOVER));
}

#[test]
fn shifted_sine_integral_is_consistent() {
    for x in log_spaced(20, 1e-3, 50.0) {
        let shifted = sine_integral_si(x) + std::f64::consts::FRAC_PI_2;
        assert!((shifted - sine_integral(x)).abs() < 1e-12);
    }
}

#[test]
fn oracle_rule_is_exact_for_polynomials() {
    // 20 nodes integrate degree 39 exactly.
    let v = composite(|t| t.powi(9), 0.0, 2.0);
    assert!((v - 102.4).abs() < 1e-11);
}
