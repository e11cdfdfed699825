//! CSV tables (RFC 4180, '.' decimal separator).

use anyhow::Result;
use gibbs_geom_core::counterexample::DivergenceRow;
use gibbs_geom_core::mcmc::TraceRow;

pub fn divergence_csv(rows: &[DivergenceRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "log_lower_bound", "cross_pair_count", "energy"])?;
    for r in rows {
        w.write_record([r.k.to_string(), r.log_lower_bound.to_string(), r.cross_pair_count.to_string(), r.energy.to_string()])?;
    }
    Ok(w.into_inner()?)
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "moveType", "accepted", "nPoints", "energy"])?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            r.kind.name().to_string(),
            r.accepted.to_string(),
            r.n_points.to_string(),
            r.energy.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}
