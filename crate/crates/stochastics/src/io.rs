//! Sample matrices as CSV: a header of bus ids, then one row per draw.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Result, StochasticsError};

pub fn write_samples<W: Write>(out: W, bus_ids: &[i64], samples: &DMatrix<f64>) -> Result<()> {
    if bus_ids.len() != samples.ncols() {
        return Err(StochasticsError::DimensionMismatch(format!(
            "{} bus ids for {} columns",
            bus_ids.len(),
            samples.ncols()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(bus_ids.iter().map(|b| format!("bus_{b}")))?;
    for row in samples.row_iter() {
        // `{:?}` prints the shortest string that round-trips.
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Returns the bus ids and the sample matrix.
pub fn read_samples<R: Read>(input: R) -> Result<(Vec<i64>, DMatrix<f64>)> {
    let mut r = csv::Reader::from_reader(input);
    let ids = r
        .headers()?
        .iter()
        .map(|h| {
            h.strip_prefix("bus_")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| StochasticsError::Malformed(format!("bad header field {h:?}")))
        })
        .collect::<Result<Vec<i64>>>()?;
    let mut values = Vec::new();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        for f in rec.iter() {
            values.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| StochasticsError::Malformed(format!("bad number {f:?}")))?,
            );
        }
        rows += 1;
    }
    Ok((ids.clone(), DMatrix::from_row_slice(rows, ids.len(), &values)))
}
