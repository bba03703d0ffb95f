//! Scenario orchestration: config in, trace/audit/summary files out.

mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use config::{parse_config, parse_config_str, parse_field, parse_time_fn, FieldSpec, FieldTerm, ScenarioFile, WeightChoice};

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lift::{verify_lift_properties, LiftParams, PropertyReport};
use crate::lyapunov::{
    blowup_timing_audit, compare_trajectory, forcing_audit, inequality_audit, predict_blowup_time, threshold_g0, write_audit_csv,
    LyapunovConstants,
};
use crate::solver::{read_trace_csv, run, sign_audits, write_trace_csv, Outcome, Trace, TraceRow};
use crate::weight::{build_weight, search_parameters, validate_constraints, ConstraintReport, WeightSpec};

/// Samples per piece used to validate scenario weights.
pub const VALIDATION_SAMPLES: usize = 256;

pub const EXIT_COMPLETED: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub name: String,
    /// SHA-256 of the canonical config text.
    pub digest: String,
    pub outputs: Vec<PathBuf>,
    pub outcome: String,
    pub exit_code: i32,
}

/// Everything computed for one scenario before files are written.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub file: ScenarioFile,
    pub weight: WeightSpec,
    pub weight_report: ConstraintReport,
    pub lift: LiftParams,
    pub lift_report: PropertyReport,
    pub constants: LyapunovConstants,
    pub trace: Trace,
    pub g0: f64,
    pub threshold: f64,
    pub predicted: Option<f64>,
    /// Audits that depend only on the stored trace and the config.
    pub trace_audits: Vec<AuditReport>,
    /// Audits that need full snapshots.
    pub snapshot_audits: Vec<AuditReport>,
}

impl ScenarioRun {
    pub fn all_passed(&self) -> bool {
        self.weight_report.overall
            && self.lift_report.overall
            && self.trace_audits.iter().chain(&self.snapshot_audits).all(|a| a.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if !self.all_passed() {
            EXIT_FAILURE
        } else if self.trace.outcome == Outcome::Completed {
            EXIT_COMPLETED
        } else {
            EXIT_BLOWUP
        }
    }

    pub fn outcome_summary(&self) -> String {
        let verdict = if self.all_passed() { "all audits pass" } else { "audit failure" };
        format!("{}; {verdict}", self.trace.outcome.label())
    }

    /// Line-oriented `key: value` summary.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let w = &self.weight;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "scenario: {}", self.file.name);
        let _ = writeln!(s, "config_digest: {}", self.file.digest());
        let _ = writeln!(s, "weight: n={} M={} C_Y={:.12e} sigma={:.12e} mu={:.12e} lambda={:.12e}", w.n, w.m, w.c_y, w.sigma, w.mu, w.lambda);
        let _ = writeln!(s, "weight_constraints: {}", verdict(self.weight_report.overall));
        let _ = writeln!(s, "lift: C_E={:.12e} C_P={:.12e}", self.lift.c_e(), self.lift.c_p());
        let _ = writeln!(s, "lift_properties: {}", verdict(self.lift_report.overall));
        let _ = writeln!(s, "eta: {:.12e}", self.constants.eta);
        let _ = writeln!(s, "outcome: {}", self.trace.outcome.label());
        let _ = writeln!(s, "steps: {}", self.trace.rows.len().saturating_sub(1));
        let _ = writeln!(s, "G0: {:.12e}", self.g0);
        let _ = writeln!(s, "threshold_g0: {:.12e}", self.threshold);
        let _ = writeln!(s, "predicted_blowup_time: {}", opt(self.predicted));
        let _ = writeln!(s, "detected_blowup_time: {}", opt(self.trace.outcome.blowup_time()));
        s.push_str(&verdict_lines(&self.trace_audits));
        s.push_str(&verdict_lines(&self.snapshot_audits));
        let _ = writeln!(s, "exit_code: {}", self.exit_code());
        s
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// `audit.<name>: <summary>` for each report.
pub fn verdict_lines(reports: &[AuditReport]) -> String {
    reports.iter().map(|r| format!("audit.{}: {}\n", r.name, r.summary())).collect()
}

/// Builds or searches the weight named by the config and validates it.
pub fn resolve_weight(file: &ScenarioFile) -> Result<(WeightSpec, ConstraintReport)> {
    match file.weight_m {
        WeightChoice::Fixed(m) => {
            let w = build_weight(file.weight_n, m)?;
            let report = validate_constraints(&w, VALIDATION_SAMPLES)?;
            Ok((w, report))
        }
        WeightChoice::Auto => match search_parameters(&[file.weight_n], 1.0, 2.0, 1024.0, VALIDATION_SAMPLES) {
            Ok(hit) => Ok((hit.weight, hit.report)),
            Err(e) => Err(Error::Domain(format!("weight search for n = {}: {e}", file.weight_n))),
        },
    }
}

/// Audits whose verdicts follow from the trace rows and the config alone.
pub fn trace_audits(
    rows: &[TraceRow],
    file: &ScenarioFile,
    grid: &Arc<Grid>,
    weight: &WeightSpec,
    constants: &LyapunovConstants,
) -> Result<(Outcome, Option<f64>, Vec<AuditReport>)> {
    let outcome = Outcome::infer(rows, file.horizon, file.blowup_cap);
    let g0 = rows.first().map(|r| r.g).ok_or_else(|| Error::Domain("empty trace".into()))?;
    // G(0) = 0 only for identically zero lifted data, which predicts nothing.
    let predicted = if g0 > 0.0 { predict_blowup_time(g0, constants, file.horizon)? } else { None };
    let (s_sign, a_sign) = sign_audits(rows, &constants.lift());
    let inequality = inequality_audit(rows, &outcome, &[], grid, weight, constants, file.c_audit)?;
    let trajectory = compare_trajectory(rows, &outcome, grid.h(), constants, file.c_audit)?;
    let timing = blowup_timing_audit(&outcome, predicted);
    Ok((outcome, predicted, vec![s_sign, a_sign, inequality.report(), trajectory, timing]))
}

/// Runs every stage of a scenario in memory.
pub fn execute(file: &ScenarioFile) -> Result<ScenarioRun> {
    let (weight, weight_report) = resolve_weight(file)?;
    let cfg = file.solver_config()?;
    let lift = cfg.lift_params();
    let h = file.horizon;
    let lift_report = verify_lift_properties(&lift, &cfg.grid, &[0.1 * h, 0.5 * h, h])?;
    let constants = LyapunovConstants::new(&weight, &lift)?;
    let trace = run(&cfg, &lift, &weight)?;
    let g0 = trace.rows[0].g;
    let threshold = threshold_g0(h, &constants)?;
    let (_, predicted, trace_audits) = trace_audits(&trace.rows, file, &cfg.grid, &weight, &constants)?;
    let full = inequality_audit(&trace.rows, &trace.outcome, &trace.snapshots, &cfg.grid, &weight, &constants, file.c_audit)?;
    let mut snapshot_audits = Vec::new();
    if let Some(terms) = full.terms_report() {
        snapshot_audits.push(terms);
    }
    snapshot_audits.push(forcing_audit(&trace.snapshots, &cfg.grid, &lift, &cfg.p_bar, file.c_audit));
    Ok(ScenarioRun {
        file: file.clone(),
        weight,
        weight_report,
        lift,
        lift_report,
        constants,
        trace,
        g0,
        threshold,
        predicted,
        trace_audits,
        snapshot_audits,
    })
}

/// Executes a scenario and writes its trace CSV, audit CSV and summary.
pub fn run_scenario(file: &ScenarioFile) -> Result<RunManifest> {
    let run = execute(file)?;
    let grid = file.grid()?;
    let trace_path = file.output_path(&file.trace);
    let audit_path = file.output_path(&file.audit);
    let summary_path = file.output_path(&file.summary);
    for p in [&trace_path, &audit_path, &summary_path] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut out = BufWriter::new(File::create(&trace_path)?);
    write_trace_csv(&run.trace.rows, &mut out)?;
    out.flush()?;

    let audit = inequality_audit(
        &run.trace.rows,
        &run.trace.outcome,
        &run.trace.snapshots,
        &grid,
        &run.weight,
        &run.constants,
        file.c_audit,
    )?;
    let mut out = BufWriter::new(File::create(&audit_path)?);
    write_audit_csv(&audit, &mut out)?;
    out.flush()?;

    std::fs::write(&summary_path, run.summary_text())?;
    Ok(RunManifest {
        name: file.name.clone(),
        digest: file.digest(),
        outputs: vec![trace_path, audit_path, summary_path],
        outcome: run.outcome_summary(),
        exit_code: run.exit_code(),
    })
}

/// Runs every `*.cfg` file in `dir` in filename order.
pub fn run_directory(dir: impl AsRef<Path>) -> Result<Vec<RunManifest>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    paths.iter().map(|p| run_scenario(&parse_config(p)?)).collect()
}

/// Result of re-auditing a stored trace.
#[derive(Debug, Clone)]
pub struct StoredAudit {
    pub outcome: Outcome,
    pub predicted: Option<f64>,
    pub reports: Vec<AuditReport>,
}

impl StoredAudit {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

/// Re-runs the trace-level audits on a CSV written by [`run_scenario`].
pub fn audit_stored_trace(trace: impl AsRef<Path>, file: &ScenarioFile) -> Result<StoredAudit> {
    let rows = read_trace_csv(BufReader::new(File::open(trace.as_ref())?))?;
    let (weight, _) = resolve_weight(file)?;
    let cfg = file.solver_config()?;
    let constants = LyapunovConstants::new(&weight, &cfg.lift_params())?;
    let (outcome, predicted, reports) = trace_audits(&rows, file, &cfg.grid, &weight, &constants)?;
    Ok(StoredAudit {
        outcome,
        predicted,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scenario_completes() {
        let text = "name = zero\ngrid.y_max = 10\ngrid.n_cells = 100\nsolver.horizon = 0.5\nsolver.dt_init = 1e-2\nweight.m = 16\n";
        let file = parse_config_str(text, ".").unwrap();
        let run = execute(&file).unwrap();
        assert_eq!(run.trace.outcome, Outcome::Completed);
        assert_eq!(run.g0, 0.0);
        assert_eq!(run.predicted, None);
        assert_eq!(run.exit_code(), EXIT_COMPLETED, "{}", run.summary_text());
    }
}
