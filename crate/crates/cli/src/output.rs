//! Shared output plumbing: lossless numeric formatting, stdout-or-file
//! writers, and the oracle report table.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use oscimin_core::OracleReport;

/// 17 significant digits, enough to round-trip an f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Missing values render as an empty cell.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).with_context(
            || format!("cannot create {}", path.display()),
        )?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_oracle_table(w: &mut dyn Write, reports: &[OracleReport]) -> Result<()> {
    writeln!(w, "name,check,observed,passed")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{}",
            r.name,
            r.check.describe(),
            num(r.observed),
            r.passed
        )?;
    }
    Ok(())
}
