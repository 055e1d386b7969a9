use std::path::Path;

use crate::error::Result;
use crate::precoding::{ConvergenceTrace, TraceRecord};

/// Writes `iteration,objective,step_size,descent_gap`, one row per record.
pub fn export_trace(trace: &ConvergenceTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    if trace.records.is_empty() {
        wtr.write_record(["iteration", "objective", "step_size", "descent_gap"])?;
    }
    for rec in &trace.records {
        wtr.serialize(rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a file written by [`export_trace`].
pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let records = rdr.deserialize().collect::<Result<Vec<TraceRecord>, _>>()?;
    Ok(records)
}
