//! Window geometry, Poisson sampling of base stations, nearest-BS queries
//! and the uplink BS–UE association table.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::Execution;

/// Below this many expected base stations per window the finite-window
/// bias becomes noticeable; runs under it carry a warning.
pub const SPARSE_WINDOW_EXPECTED_BS: f64 = 50.0;

/// Default cap on candidate UEs drawn while filling one association table.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &Point2D) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Square of side `side` metres centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimWindow {
    side: f64,
}

impl SimWindow {
    pub fn new(side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::invalid(
                "side",
                format!("window side must be positive, got {side}"),
            ));
        }
        Ok(SimWindow { side })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        let h = 0.5 * self.side;
        (-h..=h).contains(&p.x) && (-h..=h).contains(&p.y)
    }

    pub fn expected_count(&self, lambda: f64) -> f64 {
        lambda * self.area()
    }

    /// A warning when the window holds too few base stations on average.
    pub fn sparsity_warning(&self, lambda: f64) -> Option<String> {
        let expected = self.expected_count(lambda);
        (expected < SPARSE_WINDOW_EXPECTED_BS).then(|| {
            format!(
                "window holds {expected:.1} base stations on average (< {SPARSE_WINDOW_EXPECTED_BS}); \
                 edge effects bias coverage upward"
            )
        })
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2D {
        let h = 0.5 * self.side;
        Point2D::new(rng.random_range(-h..h), rng.random_range(-h..h))
    }
}

/// Reproducible random stream: one per realization, keyed by its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    /// A generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Base-station positions from one Poisson draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsField {
    pub points: Vec<Point2D>,
    pub window: SimWindow,
    pub density: f64,
}

impl BsField {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::invalid("lambda", format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "density must be positive and finite"));
    }
    Ok(())
}

/// `N ~ Poisson(λ·area)` points, i.i.d. uniform over the window.
pub fn sample_bs_field<R: Rng + ?Sized>(window: SimWindow, lambda: f64, rng: &mut R) -> Result<BsField> {
    check_lambda(lambda)?;
    let n = poisson_count(window.expected_count(lambda), rng)?;
    let points = (0..n).map(|_| window.sample_uniform(rng)).collect();
    Ok(BsField {
        points,
        window,
        density: lambda,
    })
}

/// Same Poisson count, but the first point is the typical base station at
/// the origin and only the remaining `N − 1` are scattered. `N = 0` yields
/// an empty field.
pub fn sample_bs_field_with_typical<R: Rng + ?Sized>(window: SimWindow, lambda: f64, rng: &mut R) -> Result<BsField> {
    check_lambda(lambda)?;
    let n = poisson_count(window.expected_count(lambda), rng)?;
    let mut points = Vec::with_capacity(n);
    if n > 0 {
        points.push(Point2D::ORIGIN);
        points.extend((1..n).map(|_| window.sample_uniform(rng)));
    }
    Ok(BsField {
        points,
        window,
        density: lambda,
    })
}

/// Index of and distance to the base station nearest `p`; ties go to the
/// lowest index.
pub fn nearest_bs(p: &Point2D, field: &BsField) -> Result<(usize, f64)> {
    nearest_in(p, &field.points).ok_or(Error::EmptyField)
}

fn nearest_in(p: &Point2D, points: &[Point2D]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, q) in points.iter().enumerate() {
        let d2 = p.distance_squared(q);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, d2)| (i, d2.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssociationRow {
    pub bs: Point2D,
    pub ue: Option<Point2D>,
}

/// One UE per base station, each UE attached to its nearest base station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationTable {
    pub rows: Vec<AssociationRow>,
    /// Row of the base station pinned at the origin, if any.
    pub typical_index: Option<usize>,
    /// Candidate UEs drawn, accepted or not.
    pub attempts: u64,
}

impl AssociationTable {
    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.ue.is_some())
    }

    /// Rows whose UE is strictly closer to some other base station in the
    /// table. Empty for a valid table.
    pub fn association_violations(&self) -> Vec<usize> {
        let bs: Vec<Point2D> = self.rows.iter().map(|r| r.bs).collect();
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, row)| match row.ue {
                None => true,
                Some(ue) => {
                    let own = ue.distance_squared(&bs[*i]);
                    bs.iter()
                        .enumerate()
                        .any(|(j, b)| j != *i && ue.distance_squared(b) < own)
                }
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Writes one `bs_x,bs_y,ue_x,ue_y` line per row, in metres with six
    /// decimals. Unfilled UEs are written as empty fields.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for row in &self.rows {
            match row.ue {
                Some(ue) => writeln!(out, "{:.6},{:.6},{:.6},{:.6}", row.bs.x, row.bs.y, ue.x, ue.y)?,
                None => writeln!(out, "{:.6},{:.6},,", row.bs.x, row.bs.y)?,
            }
        }
        Ok(())
    }
}

/// Fills the table by drawing candidate UEs uniformly over the window. A
/// candidate whose nearest base station is still free is attached to it;
/// otherwise it is dropped and never reused.
pub fn build_association_table<R: Rng + ?Sized>(
    field: &BsField,
    rng: &mut R,
    max_attempts: u64,
) -> Result<AssociationTable> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    let typical_index = field.points.iter().position(|p| *p == Point2D::ORIGIN);
    let mut rows: Vec<AssociationRow> = field.points.iter().map(|&bs| AssociationRow { bs, ue: None }).collect();
    let mut open = rows.len();
    let mut attempts = 0;
    while open > 0 {
        if attempts >= max_attempts {
            return Err(Error::AttemptBudgetExhausted { attempts });
        }
        attempts += 1;
        let candidate = field.window.sample_uniform(rng);
        let (idx, _) = nearest_in(&candidate, &field.points).ok_or(Error::EmptyField)?;
        if rows[idx].ue.is_none() {
            rows[idx].ue = Some(candidate);
            open -= 1;
        }
    }
    Ok(AssociationTable {
        rows,
        typical_index,
        attempts,
    })
}

/// Empirical nearest-BS distances from the origin against the Rayleigh law
/// `P(R ≤ r) = 1 − e^{−λπr²}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayleighCheck {
    pub samples: usize,
    pub ks_statistic: f64,
    /// Asymptotic 95% critical value `1.36/√n`.
    pub ks_critical_95: f64,
    pub mean: f64,
    pub expected_mean: f64,
    pub mean_stderr: f64,
    pub median: f64,
    pub expected_median: f64,
}

impl RayleighCheck {
    pub fn passes(&self) -> bool {
        self.ks_statistic < self.ks_critical_95 && (self.mean - self.expected_mean).abs() <= 3.0 * self.mean_stderr
    }
}

/// Draws `samples` independent fields of the given window and records the
/// nearest-BS distance from the origin in each.
pub fn nearest_distance_distribution_check(
    lambda: f64,
    samples: usize,
    window: SimWindow,
    master_seed: u64,
    execution: Execution,
) -> Result<RayleighCheck> {
    check_lambda(lambda)?;
    if samples < 1000 {
        return Err(Error::invalid("samples", "need at least 1000 samples"));
    }
    let required = 10.0 / lambda.sqrt();
    if window.side() < required {
        return Err(Error::WindowTooSmall {
            side: window.side(),
            required,
        });
    }
    let ids: Vec<u64> = (0..samples as u64).collect();
    let draws = execution.map_ordered(&ids, |&id| -> Result<Option<f64>> {
        let mut rng = RngStream::new(master_seed, id).generator();
        let field = sample_bs_field(window, lambda, &mut rng)?;
        Ok(nearest_in(&Point2D::ORIGIN, &field.points).map(|(_, d)| d))
    });
    let mut distances = Vec::with_capacity(samples);
    for d in draws {
        if let Some(d) = d? {
            distances.push(d);
        }
    }
    distances.sort_by(f64::total_cmp);

    let n = distances.len();
    let nf = n as f64;
    let lt = std::f64::consts::PI * lambda;
    let cdf = |r: f64| -(-lt * r * r).exp_m1();
    let ks_statistic = distances
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = cdf(r);
            (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max);
    let mean = distances.iter().sum::<f64>() / nf;
    let var = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let median = if n % 2 == 1 {
        distances[n / 2]
    } else {
        0.5 * (distances[n / 2 - 1] + distances[n / 2])
    };
    Ok(RayleighCheck {
        samples: n,
        ks_statistic,
        ks_critical_95: 1.36 / nf.sqrt(),
        mean,
        expected_mean: 0.5 / lambda.sqrt(),
        mean_stderr: (var / nf).sqrt(),
        median,
        expected_median: (std::f64::consts::LN_2 / lt).sqrt(),
    })
}
