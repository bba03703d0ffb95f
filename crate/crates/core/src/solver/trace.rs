use std::io::{BufRead, Write};

use super::LayerState;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t,dt,w_inf,s_max,a_min,energy,G";

/// Per-step scalars. `dt` is the step that produced the row (0 for the
/// initial row) and `g` the Lyapunov functional of the lifted field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub dt: f64,
    pub w_inf: f64,
    pub s_max: f64,
    pub a_min: f64,
    pub energy: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub w: Vec<f64>,
    pub s: Vec<f64>,
}

impl Snapshot {
    pub fn of(state: &LayerState) -> Self {
        Self {
            t: state.t,
            w: state.w.values().to_vec(),
            s: state.s.values().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// Time of the step at which `‖w‖_∞` reached the cap.
    BlowupDetected(f64),
    /// Last accepted time before the step size fell below `dt_min`.
    StepUnderflow(f64),
}

impl Outcome {
    /// Reconstructs the outcome from recorded rows. A blowup step is always
    /// recorded as the last row, so the rows alone determine the outcome.
    pub fn infer(rows: &[TraceRow], horizon: f64, cap: f64) -> Self {
        match rows.last() {
            None => Outcome::Completed,
            Some(r) if r.w_inf >= cap => Outcome::BlowupDetected(r.t),
            Some(r) if r.t < horizon * (1.0 - 1e-14) => Outcome::StepUnderflow(r.t),
            Some(_) => Outcome::Completed,
        }
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match *self {
            Outcome::Completed => None,
            Outcome::BlowupDetected(t) | Outcome::StepUnderflow(t) => Some(t),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Outcome::Completed => "completed".into(),
            Outcome::BlowupDetected(t) => format!("blowup_detected({t:.16e})"),
            Outcome::StepUnderflow(t) => format!("step_underflow({t:.16e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn g_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.g).collect()
    }
}

pub fn write_trace_csv(rows: &[TraceRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.dt, r.w_inf, r.s_max, r.a_min, r.energy, r.g
        )?;
    }
    Ok(())
}

pub fn read_trace_csv(input: impl BufRead) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim() != TRACE_HEADER {
                return Err(Error::TraceFormat {
                    line: 1,
                    message: format!("expected header `{TRACE_HEADER}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::TraceFormat {
                line: line_no,
                message: e.to_string(),
            })?;
        if cells.len() != 7 {
            return Err(Error::TraceFormat {
                line: line_no,
                message: format!("expected 7 columns, got {}", cells.len()),
            });
        }
        if let Some(prev) = rows.last().map(|r: &TraceRow| r.t) {
            if cells[0] <= prev {
                return Err(Error::TraceFormat {
                    line: line_no,
                    message: "times must be strictly increasing".into(),
                });
            }
        }
        rows.push(TraceRow {
            t: cells[0],
            dt: cells[1],
            w_inf: cells[2],
            s_max: cells[3],
            a_min: cells[4],
            energy: cells[5],
            g: cells[6],
        });
    }
    Ok(rows)
}
