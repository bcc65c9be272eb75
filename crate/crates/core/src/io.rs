//! File formats: p-value CSV, supports JSON, contingency-table CSV and the
//! report CSVs. Floats are written with 17 significant digits.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::Deserialize;

use crate::distribution::DiscreteNullDistribution;
use crate::error::{Error, Result};
use crate::fisher::ContingencyTable;
use crate::pvalues::PValueVector;
use crate::simulation::ReportRow;
use crate::verification::VerifyRow;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Deserialize)]
struct PRow {
    p: f64,
    #[serde(default)]
    support_index: Option<usize>,
    #[serde(default)]
    is_null: Option<String>,
}

/// Contents of a p-value CSV: column `p`, optional `support_index` and
/// `is_null` (`true`/`false` or `1`/`0`).
#[derive(Debug, Clone, PartialEq)]
pub struct PValueFile {
    pub values: Vec<f64>,
    pub support_index: Option<Vec<usize>>,
    pub is_null: Option<Vec<bool>>,
}

fn parse_bool(s: &str, line: usize) -> Result<bool> {
    match s.trim() {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" => Ok(false),
        other => Err(Error::InvalidPValues(format!(
            "row {line}: cannot read is_null value '{other}'"
        ))),
    }
}

/// Fills an optional column that must be present on all rows or none.
fn all_or_none<T>(column: Vec<Option<T>>, name: &str) -> Result<Option<Vec<T>>> {
    let present = column.iter().filter(|v| v.is_some()).count();
    if present == 0 {
        Ok(None)
    } else if present == column.len() {
        Ok(Some(column.into_iter().flatten().collect()))
    } else {
        Err(Error::InvalidPValues(format!(
            "column {name} is filled on some rows only"
        )))
    }
}

pub fn read_pvalues<R: Read>(reader: R) -> Result<PValueFile> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    let mut index = Vec::new();
    let mut labels = Vec::new();
    for (line, row) in rdr.deserialize::<PRow>().enumerate() {
        let row = row?;
        values.push(row.p);
        index.push(row.support_index);
        labels.push(match row.is_null.as_deref() {
            None | Some("") => None,
            Some(s) => Some(parse_bool(s, line + 1)?),
        });
    }
    if values.is_empty() {
        return Err(Error::InvalidPValues("no hypotheses".into()));
    }
    Ok(PValueFile {
        values,
        support_index: all_or_none(index, "support_index")?,
        is_null: all_or_none(labels, "is_null")?,
    })
}

/// JSON array of `{"atoms": [...], "cdf": [...]}` objects.
pub fn read_supports<R: Read>(reader: R) -> Result<Vec<DiscreteNullDistribution>> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_supports<W: Write>(writer: W, supports: &[Arc<DiscreteNullDistribution>]) -> Result<()> {
    let plain: Vec<&DiscreteNullDistribution> = supports.iter().map(|s| s.as_ref()).collect();
    serde_json::to_writer(writer, &plain)?;
    Ok(())
}

/// Builds the p-value vector, attaching supports either through the
/// `support_index` column or index-aligned with the rows.
pub fn assemble(file: PValueFile, supports: Option<Vec<DiscreteNullDistribution>>) -> Result<PValueVector> {
    let n = file.values.len();
    let mut pv = PValueVector::new(file.values)?;
    if let Some(supports) = supports {
        let shared: Vec<Arc<DiscreteNullDistribution>> = supports.into_iter().map(Arc::new).collect();
        let attached = match file.support_index {
            Some(idx) => idx
                .iter()
                .enumerate()
                .map(|(row, &j)| {
                    shared.get(j).cloned().ok_or_else(|| {
                        Error::InvalidPValues(format!(
                            "row {}: support_index {j} out of range ({} supports)",
                            row + 1,
                            shared.len()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            None if shared.len() == n => shared,
            None => {
                return Err(Error::InvalidPValues(format!(
                    "{} supports for {n} p-values and no support_index column",
                    shared.len()
                )))
            }
        };
        pv = pv.with_supports(attached)?;
    }
    if let Some(labels) = file.is_null {
        pv = pv.with_labels(labels)?;
    }
    Ok(pv)
}

#[derive(Debug, Deserialize)]
struct TableRow {
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

/// CSV with columns `a,b,c,d`.
pub fn read_tables<R: Read>(reader: R) -> Result<Vec<ContingencyTable>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let tables = rdr
        .deserialize::<TableRow>()
        .map(|r| {
            let r = r?;
            ContingencyTable::new(r.a, r.b, r.c, r.d)
        })
        .collect::<Result<Vec<_>>>()?;
    if tables.is_empty() {
        return Err(Error::InvalidConfig("no tables".into()));
    }
    Ok(tables)
}

/// Simulation report: one row per estimator and grid point.
pub fn write_report<W: Write>(writer: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "config",
        "estimator",
        "mean_pi0_hat",
        "bias",
        "mse",
        "fdr_hat",
        "fdr_se",
        "power",
        "power_se",
    ])?;
    for r in rows {
        w.write_record([
            r.config.clone(),
            r.estimator.clone(),
            fmt_f64(r.mean_pi0_hat),
            fmt_f64(r.bias),
            fmt_f64(r.mse),
            fmt_f64(r.fdr_hat),
            fmt_f64(r.fdr_se),
            fmt_f64(r.power),
            fmt_f64(r.power_se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_verify<W: Write>(writer: W, rows: &[VerifyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["check", "parameters", "value", "reference", "tolerance", "pass"])?;
    for r in rows {
        w.write_record([
            r.check.clone(),
            r.parameters.clone(),
            fmt_f64(r.value),
            fmt_f64(r.reference),
            fmt_f64(r.tolerance),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
