//! Globally adaptive Gauss-Kronrod (10/21-point) quadrature on finite and
//! semi-infinite intervals.
//!
//! Every integrand entry point has a fallible twin (`try_*`) whose integrand
//! returns `Result<f64>`; nested integrals use those so an inner failure
//! aborts the outer integral instead of being smeared into a NaN.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerances and limits for a single integral evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of live segments in the adaptive partition.
    pub max_subdivisions: usize,
    /// Semi-infinite panel extension stops once a panel contributes less
    /// than `tail_cutoff` relative to the running total.
    pub tail_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_cutoff: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize, tail_cutoff: f64) -> Result<Self> {
        let spec = QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
            tail_cutoff,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("rel_tol", "must be positive and finite"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid("abs_tol", "must be positive and finite"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions", "must be at least 1"));
        }
        if !(self.tail_cutoff > 0.0 && self.tail_cutoff <= self.rel_tol) {
            return Err(Error::invalid("tail_cutoff", "must lie in (0, rel_tol]"));
        }
        Ok(())
    }

    /// Acceptable absolute error for an integral of size `value`.
    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Same limits with all tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSpec {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            max_subdivisions: self.max_subdivisions,
            tail_cutoff: self.tail_cutoff / factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// The value, or [`Error::NonConvergence`] if the tolerance was not met.
    pub fn converged_value(&self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                value: self.value,
                error_estimate: self.error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

// Kronrod abscissae on [-1, 1] (positive half, descending); odd indices are
// the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const GK_POINTS: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let y = f(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFiniteEvaluation { at: x })
    }
}

fn gauss_kronrod_21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = checked(f, center)?;

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();

    for j in 0..10 {
        let dx = half * XGK[j];
        let lo = checked(f, center - dx)?;
        let hi = checked(f, center + dx)?;
        fv1[j] = lo;
        fv2[j] = hi;
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }

    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let width = half.abs();
    let value = kronrod * half;
    let abs_sum = abs_sum * width;
    let asc = asc * width;
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }

    Ok(Segment { a, b, value, error })
}

fn adaptive<F>(f: &mut F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(IntegralResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }

    // Nodes can round onto an endpoint of a tiny segment; an integrable
    // endpoint singularity there contributes nothing.
    let mut f = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if !y.is_finite() && (x <= a || x >= b) {
            Ok(0.0)
        } else {
            Ok(y)
        }
    };
    let f = &mut f;
    let first = gauss_kronrod_21(f, a, b)?;
    let mut evaluations = GK_POINTS;
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions.min(4096));
    heap.push(first);
    let mut value = first.value;
    let mut error = first.error;

    loop {
        if !value.is_finite() || error <= spec.tolerance_for(value) {
            break;
        }
        if heap.len() >= spec.max_subdivisions {
            break;
        }
        let worst = match heap.pop() {
            Some(seg) => seg,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment at floating-point resolution; cannot refine further.
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_21(f, worst.a, mid)?;
        let right = gauss_kronrod_21(f, mid, worst.b)?;
        evaluations += 2 * GK_POINTS;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running totals.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(IntegralResult {
        value,
        error_estimate: error,
        evaluations,
        converged: value.is_finite() && error <= spec.tolerance_for(value),
    })
}

/// Adaptive estimate of the integral of `f` over `[a, b]`.
///
/// Non-convergence is not an error here: the result comes back with
/// `converged == false` and the best available estimate.
pub fn integrate_finite<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_finite(|x| Ok(f(x)), a, b, spec)
}

pub fn try_integrate_finite<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("bounds", "finite integration bounds required"));
    }
    if a > b {
        return Err(Error::invalid(
            "bounds",
            format!("lower bound {a} exceeds upper bound {b}"),
        ));
    }
    adaptive(&mut f, a, b, spec)
}

/// Integral of `f` over `[a, ∞)`.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite_scaled(|x| Ok(f(x)), a, 1.0, spec)
}

pub fn try_integrate_semi_infinite<F>(f: F, a: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_semi_infinite_scaled(f, a, 1.0, spec)
}

/// Integral of `f` over `[a, ∞)` where `scale` is the length over which `f`
/// varies appreciably.
///
/// The primary route maps `[a, ∞)` onto `(0, 1]` through
/// `u = a + scale·(1 − w)/w`. If that fails to converge (typically a sharp
/// boundary layer at `t → 1`), the integral is rebuilt from doubling panels
/// `[a, a + scale], [a + scale, a + 3·scale], …` until a panel's share of the
/// running total drops below `spec.tail_cutoff`.
pub fn try_integrate_semi_infinite_scaled<F>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !a.is_finite() {
        return Err(Error::invalid("a", "finite lower bound required"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid("scale", "must be positive and finite"));
    }

    // u = a + scale·t/(1 − t) written in the reflected variable
    // w = 1 − t, so the far tail sits near w = 0 where doubles are dense
    // enough to follow algebraic decay down to denormals instead of
    // stalling at 1 − t ≈ 1e-16.
    let mut overflowed = false;
    let mapped = {
        let mut g = |w: f64| -> Result<f64> {
            if w <= 0.0 {
                return Ok(0.0);
            }
            let u = a + scale * (1.0 - w) / w;
            if !u.is_finite() {
                return Ok(0.0);
            }
            let y = f(u)?;
            if y == 0.0 {
                return Ok(0.0);
            }
            let v = y * scale / w / w;
            if v.is_finite() || !y.is_finite() {
                Ok(v)
            } else {
                // The Jacobian outgrew f: the tail is not decaying fast
                // enough for this route.
                overflowed = true;
                Ok(0.0)
            }
        };
        adaptive(&mut g, 0.0, 1.0, spec)?
    };
    if mapped.converged && !overflowed {
        return Ok(mapped);
    }

    let mut panels = doubling_panels(&mut f, a, scale, spec)?;
    panels.evaluations += mapped.evaluations;
    Ok(panels)
}

const MAX_PANELS: usize = 256;
const STALL_RATIO: f64 = 0.999;
const STALL_LIMIT: usize = 5;
const STALL_GRACE: usize = 10;

fn doubling_panels<F>(f: &mut F, a: f64, scale: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut lo = a;
    let mut width = scale;
    let mut previous: Option<f64> = None;
    let mut stalled = 0;

    for k in 0..MAX_PANELS {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let panel = adaptive(f, lo, hi, spec)?;
        evaluations += panel.evaluations;
        total += panel.value;
        error += panel.error_estimate;
        if !panel.converged {
            return Ok(IntegralResult {
                value: total,
                error_estimate: error,
                evaluations,
                converged: false,
            });
        }

        let contribution = panel.value.abs();
        if k > 0 && contribution <= spec.tail_cutoff * total.abs() {
            let error_estimate = error + contribution;
            return Ok(IntegralResult {
                value: total,
                error_estimate,
                evaluations,
                converged: error_estimate <= spec.tolerance_for(total),
            });
        }
        if let Some(prev) = previous {
            if k >= STALL_GRACE && contribution >= STALL_RATIO * prev {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    return Err(Error::SlowDecay);
                }
            } else {
                stalled = 0;
            }
        }
        previous = Some(contribution);
        lo = hi;
        width *= 2.0;
    }

    Ok(IntegralResult {
        value: total,
        error_estimate: error + previous.unwrap_or(f64::INFINITY),
        evaluations,
        converged: false,
    })
}
