//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use blowup_lab::grid::{Field, Grid};
use blowup_lab::lift::numerical::closed_form_discrepancy;
use blowup_lab::lift::{verify_lift_properties, LiftParams};
use blowup_lab::lyapunov::{predict_blowup_time, LyapunovConstants};
use blowup_lab::scenario::{execute, parse_config, parse_config_str, run_scenario, ScenarioFile, ScenarioRun};
use blowup_lab::solver::{
    axis_restriction_run, energy_audit, mms_error, observed_orders, AxisCoefficients, ManufacturedSolution, Outcome,
};
use blowup_lab::weight::{search_parameters, validate_constraints};

type Check = Result<String, String>;

const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs");

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn config(name: &str) -> Result<ScenarioFile, String> {
    parse_config(Path::new(CONFIGS).join(format!("{name}.cfg"))).map_err(err)
}

fn audit_passed(run: &ScenarioRun, name: &str) -> Result<(), String> {
    let r = run
        .trace_audits
        .iter()
        .chain(&run.snapshot_audits)
        .find(|r| r.name == name)
        .ok_or_else(|| format!("{}: no {name} audit", run.file.name))?;
    ensure(r.passed, format!("{}: {name} {}", run.file.name, r.summary()))
}

fn weight_certification() -> Check {
    let mut found = Vec::new();
    for n in [1.5, 2.0, 3.0] {
        let hit = search_parameters(&[n], 1.0, 2.0, 1024.0, 256).map_err(|e| format!("n = {n}: {e}"))?;
        let w = hit.weight;
        let fine = validate_constraints(&w, 1024).map_err(err)?;
        ensure(fine.overall, format!("n = {n}, M = {}: fails at 1024 samples/piece", w.m))?;
        ensure(w.sigma == n / (n + 1.0), format!("sigma = {} for n = {n}", w.sigma))?;
        for c in &fine.continuity {
            ensure(
                c.value_gap <= 1e-10 && c.slope_gap <= 1e-10,
                format!("n = {n}: C1 gap at y = {}: {:e} / {:e}", c.at, c.value_gap, c.slope_gap),
            )?;
        }
        let slope = w.eval_left(2.0).1;
        let expected = -n / w.m;
        ensure(
            (slope - expected).abs() <= 1e-12 * expected.abs(),
            format!("n = {n}: Y'(2-) = {slope}, expected {expected}"),
        )?;
        found.push(format!("n={n}: M={}", w.m));
    }
    Ok(found.join(", "))
}

fn lift_certification() -> Check {
    let grid = Grid::new(40.0, 4000).map_err(err)?;
    let times = [0.1, 1.0, 10.0];
    let mut worst = 0.0_f64;
    for (c_e, c_p) in [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)] {
        let p = LiftParams::new(c_e, c_p).map_err(err)?;
        let report = verify_lift_properties(&p, &grid, &times).map_err(err)?;
        ensure(report.overall, format!("(C_E, C_P) = ({c_e}, {c_p}):\n{report}"))?;
        let gaps = closed_form_discrepancy(&p, &grid, 5e-4, &times).map_err(err)?;
        for (t, g) in times.iter().zip(&gaps) {
            ensure(*g <= 1e-6, format!("(C_E, C_P) = ({c_e}, {c_p}), t = {t}: closed form off by {g:e}"))?;
            worst = worst.max(*g);
        }
    }
    Ok(format!("max closed-form gap {worst:.2e}"))
}

fn trivial_solution() -> Check {
    let grid = Arc::new(Grid::new(20.0, 2000).map_err(err)?);
    let c_t = 1.0;
    let coeffs = AxisCoefficients::new(
        |t, y| (-y).exp() / (1.0 + t),
        |_, y| -(1.0 - (-y).exp()),
        |t, y| (0.5 * y).sin() * (-t).exp(),
    );
    let zero = Field::zeros(grid.clone());
    let trivial = axis_restriction_run(&coeffs, &zero, &zero, &grid, 5.0, 1e-3).map_err(err)?;
    let peak = trivial.energy.iter().copied().fold(0.0, f64::max);
    ensure(!trivial.diverged && peak <= 1e-12, format!("zero data reached energy {peak:e}"))?;

    let w0 = Field::from_fn(grid.clone(), |y| 1e-2 * y * (-y).exp());
    let s0 = Field::from_fn(grid.clone(), |y| -1e-2 * y * y * (-y).exp());
    let small = axis_restriction_run(&coeffs, &w0, &s0, &grid, 5.0, 1e-3).map_err(err)?;
    let audit = energy_audit(&small, c_t);
    ensure(audit.passed, format!("energy bound: {}", audit.summary()))?;
    Ok(format!("zero-data peak {peak:e}; energy bound {}", audit.summary()))
}

fn scheme_consistency() -> Check {
    let m = ManufacturedSolution::new(0.5, 10.0);
    let horizon = 0.5;
    let mut space = Vec::new();
    for h in [0.04, 0.02, 0.01] {
        let n = (10.0_f64 / h).round() as usize;
        space.push(mms_error(&m, n, horizon, 0.25 * h * h).map_err(err)?.l2);
    }
    let mut time = Vec::new();
    for dt in [0.02, 0.01, 0.005, 0.0025] {
        time.push(mms_error(&m, 4000, horizon, dt).map_err(err)?.l2);
    }
    let ps = observed_orders(&space);
    let pt = observed_orders(&time);
    ensure(ps.iter().all(|&p| p >= 1.9), format!("spatial orders {ps:?}"))?;
    ensure(pt.iter().all(|&p| p >= 0.9), format!("temporal orders {pt:?}"))?;
    Ok(format!("spatial orders {ps:.4?}, temporal orders {pt:.4?}"))
}

/// Runs each scenario once; later criteria reuse the results.
struct Scenarios {
    runs: Vec<ScenarioRun>,
}

impl Scenarios {
    fn get(&self, name: &str) -> &ScenarioRun {
        self.runs.iter().find(|r| r.file.name == name).expect("scenario ran")
    }
}

fn refined(base: &ScenarioFile, name: &str, y_max: f64, n_cells: usize, dt: f64) -> ScenarioFile {
    let mut f = base.clone();
    f.name = name.into();
    f.y_max = y_max;
    f.n_cells = n_cells;
    f.dt_init = dt;
    f
}

fn run_scenarios() -> Result<Scenarios, String> {
    let blowup = config("blowup")?;
    let mut files = vec![blowup.clone(), config("lifted")?, config("zero")?];
    files.push(refined(&blowup, "blowup_fine", 20.0, 2000, 5e-4));
    files.push(refined(&blowup, "blowup_wide", 40.0, 2000, 1e-3));
    let runs = files.iter().map(execute).collect::<Result<Vec<_>, _>>().map_err(err)?;
    Ok(Scenarios { runs })
}

fn maximum_principle(s: &Scenarios) -> Check {
    for run in &s.runs {
        audit_passed(run, "s_nonpositive")?;
        audit_passed(run, "a_nonnegative")?;
    }
    Ok(format!("{} scenarios", s.runs.len()))
}

fn comparison_law(s: &Scenarios) -> Check {
    let run = s.get("blowup");
    ensure(run.weight_report.overall, "weight not certified")?;
    ensure(run.file.horizon == 2.0, "horizon must be 2")?;
    let ratio = run.g0 / run.threshold;
    ensure(ratio >= 1.5, format!("G(0)/threshold = {ratio}"))?;
    let t_b = match run.trace.outcome {
        Outcome::BlowupDetected(t) | Outcome::StepUnderflow(t) => t,
        Outcome::Completed => return Err("no blowup detected".into()),
    };
    ensure(t_b < run.file.horizon, format!("t_b = {t_b}"))?;
    audit_passed(run, "comparison_trajectory")?;
    audit_passed(run, "comparison_inequality")?;
    audit_passed(run, "term_bounds")?;
    let fine = s.get("blowup_fine").trace.outcome.blowup_time().ok_or("refined run did not blow up")?;
    let wide = s.get("blowup_wide").trace.outcome.blowup_time().ok_or("wide-domain run did not blow up")?;
    let d_fine = (fine - t_b).abs() / fine;
    let d_wide = (wide - t_b).abs() / wide;
    ensure(d_fine < 0.1, format!("t_b = {t_b} vs refined {fine}"))?;
    ensure(d_wide < 0.1, format!("t_b = {t_b} vs y_max doubled {wide}"))?;
    Ok(format!(
        "G(0)/threshold = {ratio:.3}, t_b = {t_b:.6}, refined {fine:.6} ({:.2}%), y_max doubled {wide:.6} ({:.2}%)",
        100.0 * d_fine,
        100.0 * d_wide
    ))
}

fn predictor_exactness() -> Check {
    let w = search_parameters(&[2.0], 1.0, 2.0, 1024.0, 256).map_err(err)?.weight;
    let k = LyapunovConstants::new(&w, &LiftParams::zero()).map_err(err)?;
    let kappa_inv = w.c_y / (2.0 - 2.0 / k.eta);
    let g_min = k.lambda * kappa_inv;
    let mut worst_log = 0.0_f64;
    for i in 0..10 {
        let g0 = g_min * 1.1 * 10f64.powf(f64::from(i) / 3.0);
        let closed = -(1.0 - k.lambda * kappa_inv / g0).ln() / k.lambda;
        let t = predict_blowup_time(g0, &k, closed + 1.0).map_err(err)?.ok_or("no prediction")?;
        worst_log = worst_log.max((t - closed).abs() / closed);
    }
    ensure(worst_log <= 1e-9, format!("log-law relative error {worst_log:e}"))?;

    let k0 = LyapunovConstants::from_parts(k.eta, w.c_y, 0.0, w.mu, 0.0, 0.0).map_err(err)?;
    let mut worst_riccati = 0.0_f64;
    for g0 in [1.0, 10.0, 100.0, 1e3, 1e4] {
        let closed = kappa_inv / g0;
        let t = predict_blowup_time(g0, &k0, closed * 2.0).map_err(err)?.ok_or("no prediction")?;
        worst_riccati = worst_riccati.max((t - closed).abs() / closed);
    }
    ensure(worst_riccati <= 1e-12, format!("Riccati relative error {worst_riccati:e}"))?;
    Ok(format!("log law {worst_log:.1e}, Riccati {worst_riccati:.1e}"))
}

fn determinism() -> Check {
    let text = std::fs::read_to_string(Path::new(CONFIGS).join("lifted.cfg")).map_err(err)?;
    let mut digests = Vec::new();
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(err)?;
        let file = parse_config_str(&text, dir.path()).map_err(err)?;
        let manifest = run_scenario(&file).map_err(err)?;
        let outputs = manifest.outputs.iter().map(std::fs::read).collect::<Result<Vec<_>, _>>().map_err(err)?;
        digests.push(manifest.digest);
        bytes.push(outputs);
    }
    ensure(digests[0] == digests[1], "manifest digests differ")?;
    ensure(bytes[0] == bytes[1], "output bytes differ")?;
    let file = parse_config_str(&text, ".").map_err(err)?;
    let again = parse_config_str(&file.canonical_text(), ".").map_err(err)?;
    ensure(again.digest() == file.digest(), "canonical text does not reproduce the digest")?;
    Ok(format!("digest {}", &digests[0][..16]))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: u32, title: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let mut result = f();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, limit) {
            if took > limit {
                result = Err(format!("took {took:.1?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(detail) => println!("PASS AC{id} {title} [{took:.2?}]: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL AC{id} {title} [{took:.2?}]: {detail}");
            }
        }
    };
    let secs = |s| Some(Duration::from_secs(s));
    report(1, "weight certification", secs(5), &mut weight_certification);
    report(2, "lift certification", secs(30), &mut lift_certification);
    report(3, "trivial solution and energy bound", None, &mut trivial_solution);
    report(4, "scheme consistency", secs(120), &mut scheme_consistency);

    let start = Instant::now();
    let scenarios = run_scenarios();
    let scenario_time = start.elapsed();
    match scenarios {
        Ok(s) => {
            report(5, "maximum-principle audits", None, &mut || maximum_principle(&s));
            report(6, "comparison law", None, &mut || {
                let detail = comparison_law(&s)?;
                ensure(scenario_time <= Duration::from_secs(300), format!("scenario runs took {scenario_time:.1?}"))?;
                Ok(format!("{detail}; scenario runs {scenario_time:.2?}"))
            });
        }
        Err(e) => {
            report(5, "maximum-principle audits", None, &mut || Err(e.clone()));
            report(6, "comparison law", None, &mut || Err(e.clone()));
        }
    }
    report(7, "predictor exactness", None, &mut predictor_exactness);
    report(8, "determinism", None, &mut determinism);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
