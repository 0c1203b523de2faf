//! CSV and JSON output. Every float is written with 17 significant digits so
//! that output files round-trip and diff exactly.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::ReducedNonlinearity;
use crate::profile::{energy, PhaseState, ProfileSolution, Trajectory};
use crate::shooting::ClassificationResult;
use crate::strip::{min_gradient_diag, monotonicity_diag, one_dimensionality_diag, Field2D, Grid2D};

/// `v` with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const PHASE_HEADER: &str = "x,u,du,Y,E";

fn phase_row(out: &mut impl Write, reduced: &ReducedNonlinearity, s: &PhaseState) -> Result<()> {
    let e = energy(reduced, s)?;
    writeln!(
        out,
        "{},{},{},{},{}",
        num(s.x),
        num(s.u),
        num(s.slope(reduced.alpha())),
        num(s.flux),
        num(e)
    )?;
    Ok(())
}

/// Accepted steps and event points, sorted by `x`.
pub fn write_trajectory_csv(out: &mut impl Write, traj: &Trajectory, reduced: &ReducedNonlinearity) -> Result<()> {
    writeln!(out, "{PHASE_HEADER}")?;
    for s in &traj.samples {
        phase_row(out, reduced, s)?;
    }
    Ok(())
}

pub fn write_profile_csv(out: &mut impl Write, profile: &ProfileSolution, reduced: &ReducedNonlinearity) -> Result<()> {
    writeln!(out, "{PHASE_HEADER}")?;
    for ((&x, &u), flux) in profile.x.iter().zip(&profile.u).zip(profile.flux()) {
        phase_row(out, reduced, &PhaseState { x, u, flux })?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// One row of a classification sweep; failures are kept in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ClassificationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn new(delta: f64, result: Result<ClassificationResult>) -> Self {
        match result {
            Ok(r) => Self {
                delta,
                result: Some(r),
                error: None,
            },
            Err(e) => Self {
                delta,
                result: None,
                error: Some(e.to_string()),
            },
        }
    }
}

pub const CLASSIFY_HEADER: &str = "delta,regime,theta_minus,theta_plus,limit";

/// The envelope columns hold the measured turning values when there are any
/// and the predicted ones otherwise; `limit` is the settled value at the right
/// end of the trajectory.
pub fn write_classification_csv(out: &mut impl Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(out, "{CLASSIFY_HEADER}")?;
    for row in rows {
        match &row.result {
            None => writeln!(out, "{},error,,,", num(row.delta))?,
            Some(r) => {
                let ev = &r.evidence;
                let envelope = ev
                    .envelope
                    .as_ref()
                    .map(|e| (e.theta_minus, e.theta_plus))
                    .or(ev.predicted_envelope);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    num(row.delta),
                    r.regime.as_str(),
                    opt_num(envelope.map(|e| e.0)),
                    opt_num(envelope.map(|e| e.1)),
                    opt_num(ev.limit_right.and_then(|l| l.limit)),
                )?
            }
        }
    }
    Ok(())
}

pub const FIELD_HEADER: &str = "i,j,x1,x2,u";

pub fn write_field_csv(out: &mut impl Write, field: &Field2D) -> Result<()> {
    writeln!(out, "{FIELD_HEADER}")?;
    let g = field.grid;
    for i in 0..g.n1 {
        for j in 0..g.n2 {
            writeln!(out, "{i},{j},{},{},{}", num(g.x1(i)), num(g.x2(j)), num(field.get(i, j)))?;
        }
    }
    Ok(())
}

/// Reads the `u` column of a field CSV written by [`write_field_csv`],
/// checking that every node of `grid` appears exactly once.
pub fn read_field_csv(input: impl BufRead, grid: &Grid2D) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == FIELD_HEADER => {}
        other => return Err(Error::Config(format!("expected header {FIELD_HEADER:?}, found {other:?}"))),
    }
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Config(format!("malformed field row {}: {line:?}", k + 2));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(bad());
        }
        let i: usize = cols[0].trim().parse().map_err(|_| bad())?;
        let j: usize = cols[1].trim().parse().map_err(|_| bad())?;
        let u: f64 = cols[4].trim().parse().map_err(|_| bad())?;
        if i >= grid.n1 || j >= grid.n2 {
            return Err(Error::Shape(format!("node ({i}, {j}) outside a {} × {} grid", grid.n1, grid.n2)));
        }
        let idx = grid.index(i, j);
        if seen[idx] {
            return Err(Error::Shape(format!("node ({i}, {j}) listed twice")));
        }
        seen[idx] = true;
        values[idx] = u;
    }
    if let Some(idx) = seen.iter().position(|s| !s) {
        return Err(Error::Shape(format!(
            "node ({}, {}) missing from field file",
            idx / grid.n2,
            idx % grid.n2
        )));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub spread: f64,
    pub monotonicity: f64,
    pub min_gradient: f64,
}

impl FieldDiagnostics {
    pub fn of(field: &Field2D) -> Self {
        Self {
            spread: one_dimensionality_diag(field),
            monotonicity: monotonicity_diag(field),
            min_gradient: min_gradient_diag(field),
        }
    }
}

/// Grid, solver metadata and diagnostics written next to a field CSV.
pub fn field_sidecar(field: &Field2D) -> serde_json::Value {
    serde_json::json!({
        "grid": field.grid,
        "solver": field.meta,
        "diagnostics": FieldDiagnostics::of(field),
    })
}
