//! Curve records and their CSV/JSON encodings.
//!
//! Values are rounded when a record is built (6 significant digits for
//! probabilities, 3 for standard errors) and written in shortest
//! round-trip form, so parsing an emitted file gives back the same records.

use std::io::{Read, Write};

use cellcov::analytic::CoverageMethod;
use cellcov::montecarlo::EstimatorResult;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CSV_HEADER: &str = "xi_db,epsilon,p_analytic,p_sim,stderr,method";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub xi_db: f64,
    pub epsilon: f64,
    pub p_analytic: Option<f64>,
    pub p_sim: Option<f64>,
    pub stderr: Option<f64>,
    /// `;`-separated tags naming where the values came from.
    pub method: String,
}

pub fn round_significant(value: f64, digits: usize) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    format!("{:.*e}", digits.saturating_sub(1), value)
        .parse()
        .unwrap_or(value)
}

pub fn method_tag(method: CoverageMethod) -> &'static str {
    match method {
        CoverageMethod::AnalyticGeneral => "analytic_general",
        CoverageMethod::AnalyticClosedForm => "analytic_closed_form",
        CoverageMethod::Simulated => "simulated",
    }
}

impl CurveRecord {
    /// At least one of `analytic` and `simulated` must be present.
    pub fn new(
        xi_db: f64,
        epsilon: f64,
        analytic: Option<(f64, CoverageMethod)>,
        simulated: Option<&EstimatorResult>,
        extra_tags: &[String],
    ) -> Self {
        debug_assert!(analytic.is_some() || simulated.is_some());
        let mut tags: Vec<String> = extra_tags.to_vec();
        if let Some((_, m)) = analytic {
            tags.push(method_tag(m).to_string());
        }
        if simulated.is_some() {
            tags.push(method_tag(CoverageMethod::Simulated).to_string());
        }
        CurveRecord {
            xi_db,
            epsilon,
            p_analytic: analytic.map(|(p, _)| round_significant(p, 6)),
            p_sim: simulated.map(|e| round_significant(e.p_hat, 6)),
            stderr: simulated.map(|e| round_significant(e.stderr, 3)),
            method: tags.join(";"),
        }
    }
}

pub fn write_csv<W: Write>(records: &[CurveRecord], out: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    if records.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| CliError::io("csv output", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CurveRecord>, CliError> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(CliError::Serialization(format!(
            "unexpected CSV header: {}",
            header.join(",")
        )));
    }
    reader.deserialize().map(|r| r.map_err(CliError::from)).collect()
}

#[derive(Debug, Serialize)]
struct JsonDocument<'a, M: Serialize> {
    metadata: &'a M,
    records: &'a [CurveRecord],
}

pub fn write_json<W: Write, M: Serialize>(records: &[CurveRecord], metadata: &M, mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, &JsonDocument { metadata, records })?;
    writeln!(out).map_err(|e| CliError::io("json output", e))?;
    Ok(())
}
