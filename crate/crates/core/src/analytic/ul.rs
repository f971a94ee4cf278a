use std::f64::consts::FRAC_PI_2;

use super::params::{check_epsilon, check_kappa, NetworkParams, SirThreshold};
use super::{AnalyticEvaluator, Budget};
use crate::error::Result;
use crate::specfun::{
    cosine_integral_ci, sine_integral_si, try_integrate_finite, try_integrate_semi_infinite_scaled, QuadratureSpec,
};

/// Coarsest ratio the knee search resolves, and how far below the outer
/// absolute tolerance the unintegrated tail has to be.
const KNEE_RATIO: f64 = 2.0;
const TAIL_SHARE: f64 = 1e-2;

/// `∫_{z0}^{z_max} h` for a non-increasing `h` with `h ≤ 1`.
///
/// At large thresholds `h` collapses within `z ~ ξ^{−1/κ}` of the origin
/// and a single adaptive rule over `[0, z_max]` can step over the whole
/// mass and report a confident zero. So: locate the knee where `h` drops
/// to `1/e` by bisection in `ln z`, integrate up to it, then walk doubling
/// panels outwards until `h(left)·(z_max − left)` bounds the rest.
fn integrate_decreasing<F>(mut h: F, z0: f64, z_max: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let knee_level = (-1.0f64).exp();
    let knee = if h(z_max)? >= knee_level {
        z_max
    } else {
        let mut lo = z0.max(z_max * 2f64.powi(-60));
        let mut hi = z_max;
        if h(lo)? <= knee_level {
            hi = lo;
        }
        while hi / lo > KNEE_RATIO {
            let mid = (lo * hi).sqrt();
            if h(mid)? > knee_level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let mut total = 0.0;
    if knee > z0 {
        total += try_integrate_finite(&mut h, z0, knee, spec)?.converged_value()?;
    }
    let mut left = knee.max(z0);
    while left < z_max {
        if h(left)? * (z_max - left) <= TAIL_SHARE * spec.abs_tol {
            break;
        }
        let right = (2.0 * left).min(z_max);
        total += try_integrate_finite(&mut h, left, right, spec)?.converged_value()?;
        left = right;
    }
    Ok(total)
}

/// Inner tolerances are this much tighter than the level above them so the
/// outer error estimate is not swamped by inner noise.
const NESTING_TIGHTENING: f64 = 10.0;

impl AnalyticEvaluator {
    fn nested_specs(&self) -> (QuadratureSpec, QuadratureSpec, QuadratureSpec) {
        let outer = self.quadrature;
        let middle = outer.tightened(NESTING_TIGHTENING);
        let inner = middle;
        (outer, middle, inner)
    }

    /// `J(c) = ∫_0^∞ ∫_0^u e^{−x} x^{εκ} / (c x^{εκ} + u^κ) dx du`.
    ///
    /// The integrand is the λ-free interferer kernel written with `x^{εκ}`
    /// moved to the numerator, so `x → 0` with `ε > 0` gives 0 instead of
    /// `∞/∞`.
    fn interference_kernel(
        &self,
        c: f64,
        kappa: f64,
        epsilon: f64,
        budget: &Budget,
        middle: &QuadratureSpec,
        inner: &QuadratureSpec,
    ) -> Result<f64> {
        let ek = epsilon * kappa;
        // e^{−x}x^{εκ} is below 1e-23 here for every εκ ≤ 3.
        let x_cap = 2.0 * self.z_max();
        let over_u = |u: f64| -> Result<f64> {
            if u <= 0.0 {
                return Ok(0.0);
            }
            let uk = u.powf(kappa);
            // Cutting at x_cap keeps the mass visible to the first rule when u
            // is large. x = top·s² turns the x^{εκ} endpoint behaviour into a
            // smooth power of s.
            let top = u.min(x_cap);
            let over_s = |s: f64| -> Result<f64> {
                budget.tick();
                if s <= 0.0 {
                    return Ok(0.0);
                }
                let x = top * s * s;
                let w = x.powf(ek);
                Ok(2.0 * top * s * (-x).exp() * w / (c * w + uk))
            };
            let r = try_integrate_finite(over_s, 0.0, 1.0, inner)?;
            budget.check()?;
            r.converged_value()
        };
        try_integrate_semi_infinite_scaled(over_u, 0.0, 1.0, middle)?.converged_value()
    }

    /// Uplink coverage probability for any κ > 1 and ε ∈ [0, 1]:
    /// `p_u = ∫_0^∞ exp(−z − c J(c)) dz` with `c = ξ z^{κ(1−ε)}`.
    pub fn ul_coverage(&self, xi: SirThreshold, kappa: f64, epsilon: f64) -> Result<f64> {
        check_kappa(kappa)?;
        check_epsilon(epsilon)?;
        let (outer, middle, inner) = self.nested_specs();
        let budget = self.budget();
        let power = kappa * (1.0 - epsilon);
        let integrand = |z: f64| -> Result<f64> {
            if z <= 0.0 {
                return Ok(1.0);
            }
            let c = xi.linear() * z.powf(power);
            let j = self.interference_kernel(c, kappa, epsilon, &budget, &middle, &inner)?;
            Ok((-z - c * j).exp())
        };
        integrate_decreasing(integrand, self.outer_lower_limit, self.z_max(), &outer)
    }

    /// Uplink coverage without power control (ε = 0), where the x-integral
    /// collapses to `1 − e^{−u}`:
    /// `p_u = ∫_0^∞ exp(−z(1 + ξ z^{κ−1} ∫_0^∞ (1 − e^{−u}) / (ξ z^κ + u^κ) du)) dz`.
    pub fn ul_coverage_eps0(&self, xi: SirThreshold, kappa: f64) -> Result<f64> {
        check_kappa(kappa)?;
        let (outer, middle, _) = self.nested_specs();
        let budget = self.budget();
        let integrand = |z: f64| -> Result<f64> {
            if z <= 0.0 {
                return Ok(1.0);
            }
            let c = xi.linear() * z.powf(kappa);
            let over_u = |u: f64| -> Result<f64> {
                budget.tick();
                if u <= 0.0 {
                    return Ok(0.0);
                }
                Ok(-(-u).exp_m1() / (c + u.powf(kappa)))
            };
            let j = try_integrate_semi_infinite_scaled(over_u, 0.0, 1.0, &middle)?;
            budget.check()?;
            Ok((-z - c * j.converged_value()?).exp())
        };
        integrate_decreasing(integrand, self.outer_lower_limit, self.z_max(), &outer)
    }

    /// Uplink coverage for ε = 0, α = 4 through the sine and cosine
    /// integrals, with `w = √ξ z`:
    /// `p_u = ∫_0^∞ exp(−z(1 + √ξ(π/2 − ci(w) sin w + si(w) cos w))) dz`.
    pub fn ul_coverage_eps0_alpha4(&self, xi: SirThreshold) -> Result<f64> {
        let root = xi.linear().sqrt();
        let integrand = |z: f64| -> Result<f64> {
            let w = root * z;
            if w <= 0.0 {
                // The bracket tends to 1 as w → 0.
                return Ok((-z).exp());
            }
            let bracket = FRAC_PI_2 - cosine_integral_ci(w)? * w.sin() + sine_integral_si(w) * w.cos();
            Ok((-z * (1.0 + root * bracket)).exp())
        };
        integrate_decreasing(integrand, self.outer_lower_limit, self.z_max(), &self.quadrature)
    }

    /// Uplink coverage under full channel inversion (ε = 1), where the
    /// outer integral factors out:
    /// `p_u = exp(−ξ ∫_0^∞ ∫_0^u x^κ e^{−x} / (ξ x^κ + u^κ) dx du)`.
    pub fn ul_coverage_eps1(&self, xi: SirThreshold, kappa: f64) -> Result<f64> {
        check_kappa(kappa)?;
        let (_, middle, inner) = self.nested_specs();
        let budget = self.budget();
        let j = self.interference_kernel(xi.linear(), kappa, 1.0, &budget, &middle, &inner)?;
        Ok((-xi.linear() * j).exp())
    }

    /// Uplink coverage from the λ-carrying triple integral over the tagged
    /// distance `r`, the relocated interferer distance `x` and the squared
    /// interferer-to-serving-BS distance `u`:
    ///
    /// ```text
    /// p_u = 2λ̃ ∫_0^∞ r e^{−λ̃r²} exp(−2λ̃² ξ r^{2κ(1−ε)} K(r)) dr,
    /// K(r) = ∫_0^∞ x ∫_0^{x²} e^{−λ̃u} / (ξ r^{2κ(1−ε)} + u^{−εκ} x^{2κ}) du dx
    /// ```
    ///
    /// Integration runs in physical units (metres, m²); the semi-infinite
    /// maps use the mean-spacing length `1/√λ̃` as their scale.
    pub fn ul_coverage_with_density(&self, xi: SirThreshold, params: &NetworkParams) -> Result<f64> {
        params.validate()?;
        let kappa = params.kappa();
        let epsilon = params.epsilon;
        let lt = params.lambda_tilde();
        let length = 1.0 / lt.sqrt();
        let (outer, middle, inner) = self.nested_specs();
        let budget = self.budget();
        let ek = epsilon * kappa;
        let u_cap = 2.0 * self.z_max() / lt;

        let kernel = |c: f64| -> Result<f64> {
            let over_x = |x: f64| -> Result<f64> {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let x2k = x.powf(2.0 * kappa);
                // Same cap and u = top·s² substitution as the density-free
                // kernel, in units of 1/λ̃.
                let top = (x * x).min(u_cap);
                let over_s = |s: f64| -> Result<f64> {
                    budget.tick();
                    if s <= 0.0 {
                        return Ok(0.0);
                    }
                    let u = top * s * s;
                    let w = u.powf(ek);
                    Ok(2.0 * top * s * (-lt * u).exp() * w / (c * w + x2k))
                };
                let r = try_integrate_finite(over_s, 0.0, 1.0, &inner)?;
                budget.check()?;
                Ok(x * r.converged_value()?)
            };
            try_integrate_semi_infinite_scaled(over_x, 0.0, length, &middle)?.converged_value()
        };

        // Under full inversion the kernel no longer depends on r.
        let fixed_kernel = if epsilon == 1.0 {
            Some(kernel(xi.linear())?)
        } else {
            None
        };
        // The outer integral runs over z = λ̃r² (dz = 2λ̃r dr) so that it is a
        // decreasing function starting at 1; r is recovered for the kernel.
        let integrand = |z: f64| -> Result<f64> {
            if z <= 0.0 {
                return Ok(1.0);
            }
            let r = (z / lt).sqrt();
            let c = xi.linear() * r.powf(2.0 * kappa * (1.0 - epsilon));
            let k = match fixed_kernel {
                Some(k) => k,
                None => kernel(c)?,
            };
            Ok((-z - 2.0 * lt * lt * c * k).exp())
        };
        integrate_decreasing(integrand, self.outer_lower_limit, self.z_max(), &outer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::sine_integral;
    use std::f64::consts::PI;

    fn xi_db(db: f64) -> SirThreshold {
        SirThreshold::from_db(db).unwrap()
    }

    /// Si/Ci by plain power series, summed far past convergence. Only used
    /// for arguments where the series is numerically safe.
    fn series_si_ci(x: f64) -> (f64, f64) {
        let gamma = 0.577_215_664_901_532_9;
        let (mut si, mut ci) = (0.0, gamma + x.ln());
        let mut fact = 1.0;
        for n in 1..=80u32 {
            fact *= n as f64;
            let k = (n - 1) / 2;
            if n % 2 == 1 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                si += sign * x.powi(n as i32) / (n as f64 * fact);
            } else {
                let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
                ci += sign * x.powi(n as i32) / (n as f64 * fact);
            }
        }
        (si - PI / 2.0, ci)
    }

    /// Composite Simpson on [0, 40] with 10⁵ panels over the Si/Ci
    /// integrand, Si/Ci from the oracle series (finite-integral Simpson
    /// beyond the series' safe range).
    fn simpson_ul_alpha4(xi: f64) -> f64 {
        let root = xi.sqrt();
        let oracle = |w: f64| -> (f64, f64) {
            if w <= 8.0 {
                series_si_ci(w)
            } else {
                // si(w) = si(8) + ∫_8^w sin t/t dt, Ci likewise.
                let (si8, ci8) = series_si_ci(8.0);
                let n = 4000;
                let h = (w - 8.0) / n as f64;
                let (mut s, mut c) = (0.0, 0.0);
                for i in 0..=n {
                    let t = 8.0 + i as f64 * h;
                    let wgt = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    s += wgt * t.sin() / t;
                    c += wgt * t.cos() / t;
                }
                (si8 + s * h / 3.0, ci8 + c * h / 3.0)
            }
        };
        let f = |z: f64| {
            let w = root * z;
            if w == 0.0 {
                return (-z).exp();
            }
            let (si, ci) = oracle(w);
            (-z * (1.0 + root * (PI / 2.0 - ci * w.sin() + si * w.cos()))).exp()
        };
        let n = 100_000;
        let h = 40.0 / n as f64;
        // Only the first few z-units matter; the oracle is expensive, so
        // sample it on the full grid but with memoised w-dependence skipped
        // beyond z = 20 where e^{−z} < 3e-9.
        let mut sum = 0.0;
        for i in 0..=n {
            let z = i as f64 * h;
            let wgt = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = if z > 20.0 { 0.0 } else { f(z) };
            sum += wgt * v;
        }
        sum * h / 3.0
    }

    #[test]
    fn oracle_series_matches_production_si() {
        for x in [0.3, 1.0, 3.0, 6.0] {
            let (si, _) = series_si_ci(x);
            assert!((si - sine_integral_si(x)).abs() < 1e-12);
            assert!((si + PI / 2.0 - sine_integral(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha4_eps0_matches_simpson_oracle() {
        let eval = AnalyticEvaluator::default();
        let p = eval.ul_coverage_eps0_alpha4(xi_db(0.0)).unwrap();
        let oracle = simpson_ul_alpha4(1.0);
        assert!((p - oracle).abs() < 1e-6, "{p} vs {oracle}");
    }

    #[test]
    fn eps0_kappa2_equals_sici_route() {
        let eval = AnalyticEvaluator::default();
        for db in [-15.0, 0.0, 15.0] {
            let a = eval.ul_coverage_eps0(xi_db(db), 2.0).unwrap();
            let b = eval.ul_coverage_eps0_alpha4(xi_db(db)).unwrap();
            assert!((a - b).abs() < 1e-6, "{db} dB: {a} vs {b}");
        }
    }

    #[test]
    fn general_collapses_to_eps0() {
        let eval = AnalyticEvaluator::default();
        for kappa in [2.0, 3.0] {
            let a = eval.ul_coverage(xi_db(0.0), kappa, 0.0).unwrap();
            let b = eval.ul_coverage_eps0(xi_db(0.0), kappa).unwrap();
            assert!((a - b).abs() < 1e-6, "kappa {kappa}: {a} vs {b}");
        }
    }

    /// Trapezoid grid oracle for `ξ ∫_0^L ∫_0^u x^κ e^{−x}/(ξx^κ + u^κ) dx du`,
    /// plus the `u > L` tail. Past `L` the x-integral is `Γ(κ+1)/u^κ` to
    /// O(u^{−2κ}), which leaves `ξ Γ(κ+1) L^{1−κ}/(κ−1)`; cutting the tail
    /// off entirely would shift the exponent by 0.05 at κ = 2, L = 40.
    fn grid_eps1_exponent(xi: f64, kappa: f64, extent: f64, nodes: usize) -> f64 {
        let h = extent / (nodes - 1) as f64;
        let mut total = 0.0;
        for i in 1..nodes {
            let u = i as f64 * h;
            let uk = u.powf(kappa);
            let mut row = 0.0;
            for j in 0..=i {
                let x = j as f64 * h;
                let xk = x.powf(kappa);
                let g = xk * (-x).exp() / (xi * xk + uk);
                row += if j == 0 || j == i { 0.5 * g } else { g };
            }
            let wu = if i == nodes - 1 { 0.5 } else { 1.0 };
            total += wu * row * h;
        }
        let gamma_kappa_plus_one = 2.0; // κ = 2 only
        assert_eq!(kappa, 2.0);
        xi * (total * h + gamma_kappa_plus_one * extent.powf(1.0 - kappa) / (kappa - 1.0))
    }

    #[test]
    fn eps1_matches_grid_oracle() {
        let eval = AnalyticEvaluator::default();
        let p = eval.ul_coverage_eps1(xi_db(0.0), 2.0).unwrap();
        let oracle = (-grid_eps1_exponent(1.0, 2.0, 40.0, 2000)).exp();
        assert!((p - oracle).abs() < 1e-3, "{p} vs {oracle}");
    }

    #[test]
    fn general_eps1_matches_special_case() {
        let eval = AnalyticEvaluator::default();
        let a = eval.ul_coverage(xi_db(0.0), 2.0, 1.0).unwrap();
        let b = eval.ul_coverage_eps1(xi_db(0.0), 2.0).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }

    #[test]
    fn outer_truncation_is_stable_under_doubling() {
        let eval = AnalyticEvaluator::default();
        let xi = xi_db(0.0);
        let root = xi.linear().sqrt();
        let f = |z: f64| -> Result<f64> {
            let w = root * z;
            if w <= 0.0 {
                return Ok(1.0);
            }
            let b = FRAC_PI_2 - cosine_integral_ci(w)? * w.sin() + sine_integral_si(w) * w.cos();
            Ok((-z * (1.0 + root * b)).exp())
        };
        let doubled = try_integrate_finite(f, 0.0, 2.0 * eval.z_max(), &eval.quadrature)
            .unwrap()
            .value;
        let base = eval.ul_coverage_eps0_alpha4(xi).unwrap();
        assert!((doubled - base).abs() < 1e-11);
    }

    #[test]
    fn small_threshold_limit() {
        let eval = AnalyticEvaluator::default();
        assert!(eval.ul_coverage_eps0_alpha4(xi_db(-60.0)).unwrap() > 0.99);
        assert!(eval.ul_coverage_eps1(xi_db(-60.0), 2.0).unwrap() > 0.99);
        assert!(eval.ul_coverage_eps0(xi_db(60.0), 3.0).unwrap() < 0.02);
    }

    #[test]
    fn large_threshold_tail_is_algebraic() {
        // Without power control the exponent grows like z(1 + ξ^{1/κ}) near
        // the origin, so p_u falls off as ξ^{−1/κ} rather than collapsing.
        let eval = AnalyticEvaluator::default();
        for kappa in [2.0, 3.0] {
            let p60 = eval.ul_coverage_eps0(xi_db(60.0), kappa).unwrap();
            let p80 = eval.ul_coverage_eps0(xi_db(80.0), kappa).unwrap();
            let expected = 10f64.powf(2.0 / kappa);
            assert!((p60 / p80 / expected - 1.0).abs() < 0.05, "κ={kappa}: {p60} / {p80}");
        }
        let a = eval.ul_coverage_eps0(xi_db(60.0), 2.0).unwrap();
        let b = eval.ul_coverage_eps0_alpha4(xi_db(60.0)).unwrap();
        assert!((a / b - 1.0).abs() < 1e-8);
        let params = NetworkParams::new(1e-5, 4.0, 0.0, 1.0).unwrap();
        let c = eval.ul_coverage_with_density(xi_db(60.0), &params).unwrap();
        assert!((a / c - 1.0).abs() < 1e-6);
    }

    #[test]
    fn budget_ceiling_is_enforced() {
        let eval = AnalyticEvaluator {
            evaluation_ceiling: 1000,
            ..Default::default()
        };
        let err = eval.ul_coverage(xi_db(0.0), 3.0, 0.5).unwrap_err();
        assert!(matches!(err, crate::Error::PerformanceBudgetExceeded { .. }));
    }

    #[test]
    fn with_density_matches_density_free() {
        let eval = AnalyticEvaluator::default();
        let xi = xi_db(0.0);
        let free = eval.ul_coverage_eps0(xi, 3.0).unwrap();
        for lambda in [1e-5, 1e-4] {
            let params = NetworkParams::new(lambda, 6.0, 0.0, 1.0).unwrap();
            let p = eval.ul_coverage_with_density(xi, &params).unwrap();
            assert!((p - free).abs() < 1e-6, "lambda {lambda}: {p} vs {free}");
        }
    }

    /// Swapping the order of integration in the ε = 1 exponent leaves
    /// `ξ ∫_0^∞ x e^{−x} dx · x^{−1}∫_x^∞ du/(ξ + (u/x)^κ)`, which is the
    /// downlink bracket `ξ^{1/κ} ∫_{ξ^{−1/κ}}^∞ dv/(1+v^κ)`. Hence
    /// `p_u(ε = 1) = exp(1 − 1/p_d)`, checkable through the closed forms.
    #[test]
    fn eps1_matches_downlink_identity() {
        use crate::analytic::{dl_coverage_alpha4, dl_coverage_alpha6};
        let eval = AnalyticEvaluator::default();
        for db in [-15.0, -5.0, 0.0, 7.0, 15.0] {
            let xi = xi_db(db);
            let k2 = (1.0 - 1.0 / dl_coverage_alpha4(xi)).exp();
            let k3 = (1.0 - 1.0 / dl_coverage_alpha6(xi)).exp();
            assert!((eval.ul_coverage_eps1(xi, 2.0).unwrap() - k2).abs() < 1e-9, "{db} dB");
            assert!((eval.ul_coverage_eps1(xi, 3.0).unwrap() - k3).abs() < 1e-9, "{db} dB");
        }
        let p = eval.ul_coverage_eps1(xi_db(0.0), 2.0).unwrap();
        assert!((p - (-PI / 4.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn with_density_eps1_matches_identity() {
        let eval = AnalyticEvaluator::default();
        let params = NetworkParams::new(1e-6, 4.0, 1.0, 1.0).unwrap();
        let p = eval.ul_coverage_with_density(xi_db(0.0), &params).unwrap();
        assert!((p - (-PI / 4.0).exp()).abs() < 1e-10);
    }

    #[test]
    fn fractional_eps_with_density_matches_density_free() {
        let eval = AnalyticEvaluator::default();
        let xi = xi_db(3.0);
        let free = eval.ul_coverage(xi, 3.0, 0.5).unwrap();
        let params = NetworkParams::new(1e-5, 6.0, 0.5, 1.0).unwrap();
        let p = eval.ul_coverage_with_density(xi, &params).unwrap();
        assert!((p - free).abs() < 1e-8, "{p} vs {free}");
    }

    #[test]
    fn evaluation_counts_stay_under_default_ceiling() {
        let eval = AnalyticEvaluator::default();
        let budget = eval.budget();
        let (_, middle, inner) = eval.nested_specs();
        eval.interference_kernel(0.3, 3.0, 0.5, &budget, &middle, &inner)
            .unwrap();
        assert!(budget.used() < eval.evaluation_ceiling / 10);
    }
}
