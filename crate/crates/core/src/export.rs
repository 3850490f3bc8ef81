//! CSV emission with round-trip-exact numbers.

use std::io::Write;

use crate::error::{GeomError, Result};

/// Seventeen significant digits in scientific notation: parses back to the
/// same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a header and rows of numbers; `None` cells are left empty.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.map(fmt_f64).unwrap_or_default()))
            .map_err(io_err)?;
    }
    w.flush().map_err(|e| GeomError::InvalidArgument(format!("csv output: {e}")))?;
    Ok(())
}

fn io_err(e: csv::Error) -> GeomError {
    GeomError::InvalidArgument(format!("csv output: {e}"))
}
