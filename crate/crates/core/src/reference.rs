//! Published coverage curves shipped with the crate, for regression checks
//! against the evaluators and the simulator.

use serde::{Deserialize, Serialize};

use crate::analytic::LinkMode;
use crate::error::{Error, Result};

const REFERENCE_CSV: &str = include_str!("../data/reference_curves.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PublishedAnalytic,
    PublishedSimulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub link: LinkMode,
    pub alpha: f64,
    pub epsilon: f64,
    pub provenance: Provenance,
    pub xi_db: f64,
    pub probability: f64,
}

/// Every point of the bundled dataset, in file order.
pub fn reference_points() -> Result<Vec<ReferencePoint>> {
    parse_reference(REFERENCE_CSV)
}

/// The points of one published curve, sorted by threshold.
pub fn reference_curve(link: LinkMode, alpha: f64, provenance: Provenance) -> Result<Vec<ReferencePoint>> {
    let mut points: Vec<_> = reference_points()?
        .into_iter()
        .filter(|p| p.link == link && p.alpha == alpha && p.provenance == provenance)
        .collect();
    points.sort_by(|a, b| a.xi_db.total_cmp(&b.xi_db));
    Ok(points)
}

fn parse_reference(text: &str) -> Result<Vec<ReferencePoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::invalid("reference data", e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_shape() {
        let all = reference_points().unwrap();
        assert_eq!(all.len(), 4 * 31 + 4 * 7);
        for link in [LinkMode::Dl, LinkMode::Ul] {
            for alpha in [4.0, 6.0] {
                let analytic = reference_curve(link, alpha, Provenance::PublishedAnalytic).unwrap();
                assert_eq!(analytic.len(), 31);
                assert_eq!(analytic[0].xi_db, -15.0);
                assert_eq!(analytic[30].xi_db, 15.0);
                let sim = reference_curve(link, alpha, Provenance::PublishedSimulated).unwrap();
                assert_eq!(sim.len(), 7);
            }
        }
    }

    #[test]
    fn spot_values() {
        let dl4 = reference_curve(LinkMode::Dl, 4.0, Provenance::PublishedAnalytic).unwrap();
        assert_eq!(dl4[15].probability, 0.5601);
        let ul6 = reference_curve(LinkMode::Ul, 6.0, Provenance::PublishedAnalytic).unwrap();
        assert_eq!(ul6[0].probability, 0.89563);
        assert_eq!(ul6[25].probability, 0.41792);
    }

    #[test]
    fn published_curves_are_decreasing() {
        for link in [LinkMode::Dl, LinkMode::Ul] {
            for alpha in [4.0, 6.0] {
                let c = reference_curve(link, alpha, Provenance::PublishedAnalytic).unwrap();
                assert!(c.windows(2).all(|w| w[1].probability < w[0].probability));
            }
        }
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(
            parse_reference("link,alpha,epsilon,provenance,xi_db,probability\nxx,4,0,published_analytic,0,0.5\n")
                .is_err()
        );
    }
}
