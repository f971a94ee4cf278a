//! Monte Carlo estimation of coverage: one network realization at a time,
//! SIR at the typical receiver, counted against every threshold.
//!
//! Fading is Rayleigh, i.e. every power gain is Exp(1). In the uplink the
//! simulator uses the exact UE positions from the association table rather
//! than relocating interferers onto their base stations.

mod sweep;

pub use sweep::{
    density_invariance_experiment, run_sweep, DiscardCounts, EstimatorResult, InvarianceConfig, InvarianceCurve,
    InvarianceReport, RunMetadata, SweepAccumulator, SweepConfig, SweepResult, SweepSeries, DEFAULT_LAMBDA,
    DEFAULT_REALIZATIONS, DEFAULT_SEED, DEFAULT_WINDOW_SIDE, INVARIANCE_EXPECTED_BS,
};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::analytic::{check_epsilon, NetworkParams};
use crate::error::{Error, Result};
use crate::spatial::{
    build_association_table, nearest_bs, sample_bs_field, sample_bs_field_with_typical, AssociationTable, BsField,
    RngStream, SimWindow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    /// No base station fell in the window.
    EmptyField,
    /// The association table could not be filled within the attempt cap.
    AttemptBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationOutcome {
    /// Linear SIR, one entry per power-control factor (a single entry in the
    /// downlink). Infinite when there is no interferer.
    pub sir: Vec<f64>,
    pub n_bs: usize,
    pub discarded: Option<DiscardReason>,
}

impl RealizationOutcome {
    fn discarded(n_bs: usize, reason: DiscardReason, series: usize) -> Self {
        RealizationOutcome {
            sir: vec![0.0; series],
            n_bs,
            discarded: Some(reason),
        }
    }
}

fn fade<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Downlink SIR `p G R^{−α} / Σ p G_z D_z^{−α}` for a tagged link
/// `(distance, gain)` and its interferers.
pub fn dl_sir(power: f64, alpha: f64, tagged: (f64, f64), interferers: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let signal = power * tagged.1 * tagged.0.powf(-alpha);
    let interference: f64 = interferers.into_iter().map(|(d, g)| power * g * d.powf(-alpha)).sum();
    ratio(signal, interference)
}

/// `signal / interference`, infinite with no interference at all (an empty
/// float sum is −0).
fn ratio(signal: f64, interference: f64) -> f64 {
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

/// One interfering UE as seen from the typical base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UlInterferer {
    /// Distance from the UE to its own serving base station.
    pub link_distance: f64,
    /// Distance from the UE to the typical base station.
    pub distance_to_typical: f64,
    pub gain: f64,
}

/// Uplink SIR under fractional power control,
/// `p G R^{−α(1−ε)} / Σ p G_z R_z^{αε} U_z^{−α}`.
pub fn ul_sir(power: f64, alpha: f64, epsilon: f64, tagged: (f64, f64), interferers: &[UlInterferer]) -> f64 {
    let signal = power * tagged.1 * tagged.0.powf(-alpha * (1.0 - epsilon));
    let interference: f64 = interferers
        .iter()
        .map(|z| power * z.gain * z.link_distance.powf(alpha * epsilon) * z.distance_to_typical.powf(-alpha))
        .sum();
    ratio(signal, interference)
}

/// Everything a downlink realization drew, for replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DlTrace {
    pub field: BsField,
    pub tagged: usize,
    /// Fading gain of every base station's link to the origin, by index.
    pub gains: Vec<f64>,
}

/// Everything an uplink realization drew, for replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlTrace {
    pub table: AssociationTable,
    /// Fading gain of every row's UE towards the typical base station.
    pub gains: Vec<f64>,
}

/// Downlink realization: typical UE at the origin, served by the nearest
/// base station, interfered by all others.
pub fn dl_realization(params: &NetworkParams, window: SimWindow, stream: RngStream) -> Result<RealizationOutcome> {
    dl_realization_traced(params, window, stream).map(|(outcome, _)| outcome)
}

pub fn dl_realization_traced(
    params: &NetworkParams,
    window: SimWindow,
    stream: RngStream,
) -> Result<(RealizationOutcome, Option<DlTrace>)> {
    params.validate()?;
    let mut rng = stream.generator();
    let field = sample_bs_field(window, params.lambda, &mut rng)?;
    let n_bs = field.len();
    let (tagged, r) = match nearest_bs(&crate::spatial::Point2D::ORIGIN, &field) {
        Ok(hit) => hit,
        Err(Error::EmptyField) => return Ok((RealizationOutcome::discarded(0, DiscardReason::EmptyField, 1), None)),
        Err(e) => return Err(e),
    };
    let gains: Vec<f64> = (0..n_bs).map(|_| fade(&mut rng)).collect();
    let sir = if n_bs == 1 {
        f64::INFINITY
    } else {
        let others = field
            .points
            .iter()
            .zip(&gains)
            .enumerate()
            .filter(|(i, _)| *i != tagged)
            .map(|(_, (p, &g))| (p.norm(), g));
        dl_sir(params.power, params.alpha, (r, gains[tagged]), others)
    };
    let outcome = RealizationOutcome {
        sir: vec![sir],
        n_bs,
        discarded: None,
    };
    Ok((outcome, Some(DlTrace { field, tagged, gains })))
}

/// Uplink realization: typical base station at the origin, one UE per
/// base station by the association rule, SIR evaluated for every entry of
/// `epsilons` on the same geometry and fading.
pub fn ul_realization(
    params: &NetworkParams,
    epsilons: &[f64],
    window: SimWindow,
    stream: RngStream,
    max_attempts: u64,
) -> Result<RealizationOutcome> {
    ul_realization_traced(params, epsilons, window, stream, max_attempts).map(|(outcome, _)| outcome)
}

pub fn ul_realization_traced(
    params: &NetworkParams,
    epsilons: &[f64],
    window: SimWindow,
    stream: RngStream,
    max_attempts: u64,
) -> Result<(RealizationOutcome, Option<UlTrace>)> {
    params.validate()?;
    for &e in epsilons {
        check_epsilon(e)?;
    }
    let series = epsilons.len();
    let mut rng = stream.generator();
    let field = sample_bs_field_with_typical(window, params.lambda, &mut rng)?;
    let n_bs = field.len();
    let table = match build_association_table(&field, &mut rng, max_attempts) {
        Ok(t) => t,
        Err(Error::EmptyField) => {
            return Ok((
                RealizationOutcome::discarded(0, DiscardReason::EmptyField, series),
                None,
            ));
        }
        Err(Error::AttemptBudgetExhausted { .. }) => {
            let outcome = RealizationOutcome::discarded(n_bs, DiscardReason::AttemptBudgetExhausted, series);
            return Ok((outcome, None));
        }
        Err(e) => return Err(e),
    };
    let gains: Vec<f64> = (0..n_bs).map(|_| fade(&mut rng)).collect();
    let typical = table
        .typical_index
        .ok_or_else(|| Error::invalid("field", "typical base station missing"))?;
    let sir = ul_sir_from_table(params, epsilons, &table, typical, &gains);
    let outcome = RealizationOutcome {
        sir,
        n_bs,
        discarded: None,
    };
    Ok((outcome, Some(UlTrace { table, gains })))
}

fn ul_sir_from_table(
    params: &NetworkParams,
    epsilons: &[f64],
    table: &AssociationTable,
    typical: usize,
    gains: &[f64],
) -> Vec<f64> {
    let complete = |i: usize| table.rows[i].ue.expect("complete table");
    let r = complete(typical).norm();
    if table.rows.len() == 1 {
        return vec![f64::INFINITY; epsilons.len()];
    }
    let interferers: Vec<UlInterferer> = table
        .rows
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != typical)
        .map(|(i, row)| {
            let ue = complete(i);
            UlInterferer {
                link_distance: ue.distance(&row.bs),
                distance_to_typical: ue.norm(),
                gain: gains[i],
            }
        })
        .collect();
    epsilons
        .iter()
        .map(|&e| ul_sir(params.power, params.alpha, e, (r, gains[typical]), &interferers))
        .collect()
}
