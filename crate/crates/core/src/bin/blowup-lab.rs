use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use blowup_lab::grid::Grid;
use blowup_lab::lift::numerical::closed_form_discrepancy;
use blowup_lab::lift::{verify_lift_properties, LiftParams};
use blowup_lab::lyapunov::{predict_blowup_time, threshold_g0, LyapunovConstants};
use blowup_lab::scenario::{
    audit_stored_trace, parse_config, resolve_weight, run_directory, run_scenario, verdict_lines, RunManifest, EXIT_BLOWUP,
    EXIT_COMPLETED, EXIT_FAILURE, EXIT_USAGE,
};
use blowup_lab::solver::Outcome;
use blowup_lab::weight::{build_weight, search_parameters, validate_constraints};

/// Closed-form vs Crank–Nicolson agreement required by `phi-check`.
const LIFT_AGREEMENT: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "blowup-lab", version, about = "Boundary-layer blowup laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a weight for (n, M) and validate its constraints.
    Weight {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Sweep M geometrically for each n until the constraints pass.
    WeightSearch {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        m_start: f64,
        #[arg(long, default_value_t = 2.0)]
        m_factor: f64,
        #[arg(long, default_value_t = 1024.0)]
        m_max: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Check the lift properties and the closed form against a numerical solve.
    PhiCheck {
        #[arg(long)]
        ce: f64,
        #[arg(long)]
        cp: f64,
        #[arg(long, default_value_t = 40.0)]
        ymax: f64,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 4000)]
        n_cells: usize,
        #[arg(long, default_value_t = 5e-4)]
        dt: f64,
    },
    /// Run a scenario file, or every `*.cfg` in a directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Blowup threshold and predicted time for a given G(0).
    Predict {
        #[arg(long)]
        g0: f64,
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run the trace-level audits on a stored trace.
    Audit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => code(EXIT_USAGE),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(c) => code(c),
        Err(e) => {
            eprintln!("error: {e}");
            code(EXIT_FAILURE)
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn dispatch(cmd: Command) -> Result<i32, Box<dyn std::error::Error>> {
    match cmd {
        Command::Weight { n, m, samples } => {
            let w = build_weight(n, m)?;
            let report = validate_constraints(&w, samples)?;
            print!("{w}{report}");
            Ok(if report.overall { EXIT_COMPLETED } else { EXIT_FAILURE })
        }
        Command::WeightSearch {
            n_list,
            m_start,
            m_factor,
            m_max,
            samples,
        } => {
            let mut all = true;
            for n in n_list {
                match search_parameters(&[n], m_start, m_factor, m_max, samples) {
                    Ok(hit) => print!("{}{}\n", hit.weight, hit.report),
                    Err(e) => {
                        println!("n: {n}\nresult: {e}\n");
                        all = false;
                    }
                }
            }
            Ok(if all { EXIT_COMPLETED } else { EXIT_FAILURE })
        }
        Command::PhiCheck {
            ce,
            cp,
            ymax,
            tmax,
            n_cells,
            dt,
        } => {
            let p = LiftParams::new(ce, cp)?;
            let grid = Grid::new(ymax, n_cells)?;
            let times = [tmax / 100.0, tmax / 10.0, tmax];
            let report = verify_lift_properties(&p, &grid, &times)?;
            print!("{report}");
            let gaps = closed_form_discrepancy(&p, &grid, dt, &times)?;
            let mut agree = true;
            for (t, g) in times.iter().zip(&gaps) {
                let ok = *g <= LIFT_AGREEMENT;
                agree &= ok;
                println!("closed form vs numerical at t = {t}: {g:.3e} ({})", if ok { "pass" } else { "FAIL" });
            }
            Ok(if report.overall && agree { EXIT_COMPLETED } else { EXIT_FAILURE })
        }
        Command::Simulate { config } => {
            let manifests = if config.is_dir() {
                run_directory(&config)?
            } else {
                vec![run_scenario(&parse_config(&config)?)?]
            };
            for m in &manifests {
                print_manifest(m);
            }
            // A directory fails if any scenario fails, and reports blowup if any blew up.
            let codes: Vec<i32> = manifests.iter().map(|m| m.exit_code).collect();
            Ok(if codes.contains(&EXIT_FAILURE) {
                EXIT_FAILURE
            } else if codes.contains(&EXIT_BLOWUP) {
                EXIT_BLOWUP
            } else {
                EXIT_COMPLETED
            })
        }
        Command::Predict { g0, config } => {
            let file = parse_config(&config)?;
            let (w, _) = resolve_weight(&file)?;
            let k = LyapunovConstants::new(&w, &file.solver_config()?.lift_params())?;
            println!("horizon: {}", file.horizon);
            println!("threshold_g0: {:.12e}", threshold_g0(file.horizon, &k)?);
            match predict_blowup_time(g0, &k, file.horizon)? {
                Some(t) => println!("predicted_blowup_time: {t:.12e}"),
                None => println!("no blowup guaranteed within horizon"),
            }
            Ok(EXIT_COMPLETED)
        }
        Command::Audit { trace, config } => {
            let file = parse_config(&config)?;
            let audit = audit_stored_trace(&trace, &file)?;
            println!("outcome: {}", audit.outcome.label());
            print!("{}", verdict_lines(&audit.reports));
            Ok(if !audit.passed() {
                EXIT_FAILURE
            } else if audit.outcome == Outcome::Completed {
                EXIT_COMPLETED
            } else {
                EXIT_BLOWUP
            })
        }
    }
}

fn print_manifest(m: &RunManifest) {
    println!("scenario: {}", m.name);
    println!("config_digest: {}", m.digest);
    for p in &m.outputs {
        println!("output: {}", p.display());
    }
    println!("outcome: {}", m.outcome);
    println!("exit_code: {}", m.exit_code);
}
