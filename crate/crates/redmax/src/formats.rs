//! CSV file formats.
//!
//! * logits: one vector per line, `k` comma-separated decimal reals, no header;
//! * LUT dumps: header `address,raw,real`, one row per entry;
//! * monotonicity curves: header `x,exp_x,softmax_x`.

use std::io::{Read, Write};

use redmax_core::exp::ExpLut;
use redmax_core::harness::CurveRow;
use redmax_core::softmax::LogitVector;
use redmax_core::{Fixed, QFormat};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(line: u64, message: impl Into<String>) -> FormatError {
    FormatError::Malformed { line, message: message.into() }
}

/// Reads logit vectors; every line must carry the same number of values.
pub fn read_logits_csv<R: Read>(reader: R) -> Result<Vec<LogitVector>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out: Vec<LogitVector> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let values = record
            .iter()
            .enumerate()
            .map(|(i, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| malformed(line, format!("field {} is not a number: {field:?}", i + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = out.first() {
            if values.len() != first.len() {
                return Err(malformed(
                    line,
                    format!("expected {} values, found {}", first.len(), values.len()),
                ));
            }
        }
        let vector = LogitVector::new(values).map_err(|e| malformed(line, e.to_string()))?;
        out.push(vector);
    }
    Ok(out)
}

pub fn write_logits_csv<W: Write>(writer: W, vectors: &[LogitVector]) -> Result<(), FormatError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for v in vectors {
        wtr.serialize(v.as_slice())?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_curves_csv<W: Write>(writer: W, rows: &[CurveRow]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LutRow {
    address: usize,
    raw: String,
    real: f64,
}

pub fn write_lut_csv<W: Write>(writer: W, lut: &ExpLut) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (address, entry) in lut.entries().iter().enumerate() {
        wtr.serialize(LutRow { address, raw: entry.raw().to_string(), real: entry.to_real() })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Loads a LUT dump. The value format is not stored in the file and must be
/// supplied; the `real` column is checked against `raw`.
pub fn read_lut_csv<R: Read>(reader: R, value_format: QFormat) -> Result<ExpLut, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["address", "raw", "real"] {
        return Err(malformed(1, "header must be address,raw,real"));
    }
    let mut entries = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(malformed(line, "expected 3 fields"));
        }
        let address: usize = record[0].parse().map_err(|_| malformed(line, "bad address"))?;
        if address != entries.len() {
            return Err(malformed(line, format!("expected address {}", entries.len())));
        }
        let raw: i128 = record[1].parse().map_err(|_| malformed(line, "bad raw value"))?;
        let entry = Fixed::from_raw(raw, value_format)
            .ok_or_else(|| malformed(line, format!("raw value out of range for {value_format}")))?;
        let real: f64 = record[2].parse().map_err(|_| malformed(line, "bad real value"))?;
        if real != entry.to_real() {
            return Err(malformed(line, "real column does not match raw"));
        }
        entries.push(entry);
    }
    let n = entries.len();
    if !n.is_power_of_two() || n < 2 {
        return Err(FormatError::Invalid(format!("{n} entries is not a power of two >= 2")));
    }
    ExpLut::from_entries(n.trailing_zeros(), value_format, entries)
        .map_err(|e| FormatError::Invalid(e.to_string()))
}
