//! Multi-site CSV input and the tabular outputs of `qest`.

use std::io::{Read, Write};

use distnull_core::variance_ratio::{CellTable, HistogramBin, MultiSiteRecord, Summary};
use serde::Serialize;

use crate::error::CliError;

pub const REQUIRED_COLUMNS: [&str; 3] = ["site", "measure", "value"];

/// A data row that could not be used, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRecords {
    pub records: Vec<MultiSiteRecord>,
    pub rejected: Vec<RejectedRow>,
}

/// Reads `site,measure,value` rows. Lines starting with `#` are comments.
///
/// Bad rows are collected in `rejected` and skipped; a missing column or an
/// unreadable header fails the whole read.
pub fn read_records<R: Read>(input: R) -> Result<ParsedRecords, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| CliError::Data(format!("unreadable header: {e}")))?.clone();
    let mut index = [0usize; 3];
    for (slot, name) in index.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("missing required column `{name}`")))?;
    }

    let mut parsed = ParsedRecords::default();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                parsed.rejected.push(RejectedRow { line, reason: e.to_string() });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != headers.len() {
            parsed.rejected.push(RejectedRow {
                line,
                reason: format!("expected {} fields, found {}", headers.len(), row.len()),
            });
            continue;
        }
        let [site, measure, value] = index.map(|i| &row[i]);
        let reason = if site.is_empty() {
            Some("empty site".to_string())
        } else if measure.is_empty() {
            Some("empty measure".to_string())
        } else {
            match value.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    parsed.records.push(MultiSiteRecord::new(site, measure, v));
                    None
                }
                Ok(_) => Some(format!("non-finite value `{value}`")),
                Err(_) => Some(format!("non-numeric value `{value}`")),
            }
        };
        if let Some(reason) = reason {
            parsed.rejected.push(RejectedRow { line, reason });
        }
    }
    Ok(parsed)
}

fn headerless<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

#[derive(Serialize)]
struct GroupRow<'a> {
    group: &'a str,
    datapoints: usize,
    mean_q: f64,
    q025: f64,
    q975: f64,
}

pub fn write_group_csv<W: Write>(out: W, summary: &Summary) -> Result<(), CliError> {
    let mut w = headerless(out);
    w.write_record(["group", "datapoints", "mean_q", "q025", "q975"])?;
    for r in &summary.rows {
        w.serialize(GroupRow {
            group: &r.group,
            datapoints: r.datapoints,
            mean_q: r.mean_q,
            q025: r.q_lo,
            q975: r.q_hi,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CellRow<'a> {
    measure: &'a str,
    site: &'a str,
    within_var: f64,
    between_var: f64,
    q: f64,
}

pub fn write_cell_csv<W: Write>(out: W, table: &CellTable) -> Result<(), CliError> {
    let mut w = headerless(out);
    w.write_record(["measure", "site", "within_var", "between_var", "q"])?;
    for c in &table.cells {
        w.serialize(CellRow {
            measure: &c.measure,
            site: &c.site,
            within_var: c.within_var,
            between_var: c.between_var,
            q: c.q,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(out: W, bins: &[HistogramBin]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_lower", "bin_upper", "count"])?;
    for b in bins {
        w.write_record([b.lower.to_string(), b.upper.to_string(), b.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
