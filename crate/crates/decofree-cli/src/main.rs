//! Batch runner for the engineered-reservoir protection study: scenario
//! runs, parameter scans, the self-check suite, and steady-state reports.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::RunConfig;
use decofree::analysis::{run_scenario, scan_axis, steady_value, ModelKind};
use decofree::ion_cavity::{analytic_steady, derive_dressed, rwa_validity, IonCavityParams};
use decofree::lindblad::steady_state;
use decofree::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_INTEGRATION: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

#[derive(Parser)]
#[command(name = "decofree", about = "Reservoir-engineered protection of driven two-level superpositions", version)]
struct Cli {
    /// Suppress progress output on stdout
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario; write a CSV trajectory and a JSON summary
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the configured Fock dimension
        #[arg(long)]
        fock_dim: Option<usize>,
    },
    /// Sweep one parameter (scan_axis/scan_values in the config)
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        fock_dim: Option<usize>,
    },
    /// Run the oracle/invariant self-check suite
    Validate {
        /// Optional config supplying the reference parameters
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the analytic and null-space steady states side by side
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        fock_dim: Option<usize>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::Domain(_)
            | Error::DimensionMismatch(_)
            | Error::TrajectoryTooShort { .. }
            | Error::ResourceCap { .. } => EXIT_CONFIG,
            Error::Stiffness { .. }
            | Error::TraceDrift { .. }
            | Error::TimeDependent
            | Error::NonUniqueSteadyState(_) => EXIT_INTEGRATION,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out, fock_dim } => cmd_run(config, out, *fock_dim, cli.quiet),
        Command::Scan { config, out, fock_dim } => cmd_scan(config, out, *fock_dim, cli.quiet),
        Command::Validate { config } => cmd_validate(config.as_deref(), cli.quiet),
        Command::Steady { config, fock_dim } => cmd_steady(config, *fock_dim),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path, fock_dim: Option<usize>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path).map_err(|e| Failure::config(e.to_string()))?;
    if let Some(n) = fock_dim {
        cfg.fock_dim = n;
    }
    cfg.params().validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok(cfg)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn dressed_json(p: &IonCavityParams) -> serde_json::Value {
    match derive_dressed(p) {
        Ok(b) => json!({
            "xi": b.xi, "chi": b.chi, "g_eff": b.g_eff, "gamma_eng": b.gamma_eng,
            "lambda": b.lambda, "lambda_pm": b.lambda_pm, "lambda_mp": b.lambda_mp,
        }),
        Err(_) => serde_json::Value::Null,
    }
}

fn rwa_json(p: &IonCavityParams) -> serde_json::Value {
    let basis = match derive_dressed(p) {
        Ok(b) => b,
        Err(_) => return serde_json::Value::Null,
    };
    match rwa_validity(p, &basis) {
        Ok(r) => json!({
            "delta_a_over_g": r.delta_a_over_g,
            "cooperativity": r.cooperativity,
            "gamma_eng_over_gamma": r.gamma_eng_over_gamma,
            "kappa_over_g_eff": r.kappa_over_g_eff,
            "rwa_ok": r.rwa_ok,
            "cooperativity_ok": r.cooperativity_ok,
            "elimination_ok": r.elimination_ok,
        }),
        Err(_) => serde_json::Value::Null,
    }
}

fn analytic_json(p: &IonCavityParams) -> serde_json::Value {
    let basis = match derive_dressed(p) {
        Ok(b) => b,
        Err(_) => return serde_json::Value::Null,
    };
    match analytic_steady(p, &basis) {
        Ok(s) => json!({
            "fidelity": s.fidelity,
            "epsilon_pp": s.epsilon_pp,
            "epsilon_pm": s.epsilon_pm,
            "cooperativity": s.cooperativity,
            "low_cooperativity": s.low_cooperativity,
        }),
        Err(_) => serde_json::Value::Null,
    }
}

fn cmd_run(path: &Path, out: &Path, fock_dim: Option<usize>, quiet: bool) -> Result<(), Failure> {
    let cfg = load(path, fock_dim)?;
    let p = cfg.params();
    if !quiet {
        println!("run: {} (model {:?}, N = {})", stem(path), cfg.model, p.fock_dim);
    }
    let traj = run_scenario(&p, cfg.model, cfg.initial_atom, cfg.t_max, cfg.dt_out, cfg.tolerances())?;
    let (steady, deviation) = steady_value(&traj, &p)?;

    let mut max_trace_error: f64 = 0.0;
    let mut max_herm: f64 = 0.0;
    let mut min_eig: f64 = f64::INFINITY;
    for d in &traj.diagnostics {
        max_trace_error = max_trace_error.max(d.trace_error);
        max_herm = max_herm.max(d.herm_residual);
        min_eig = min_eig.min(d.min_eigenvalue);
    }

    let fock_report = if cfg.fock_check && cfg.model == ModelKind::Full {
        let mut wide = p;
        wide.fock_dim = p.fock_dim + 5;
        let check =
            run_scenario(&wide, cfg.model, cfg.initial_atom, cfg.t_max, cfg.dt_out, cfg.tolerances())?;
        let (steady_wide, _) = steady_value(&check, &wide)?;
        let delta = (steady_wide - steady).abs();
        if delta >= 1e-4 {
            return Err(Failure {
                code: EXIT_CONVERGENCE,
                message: format!(
                    "Fock truncation not converged: steady fidelity moved by {delta:.3e} \
                     between N = {} and N = {}",
                    p.fock_dim, wide.fock_dim
                ),
            });
        }
        json!({ "base_dim": p.fock_dim, "recheck_dim": wide.fock_dim, "delta_fidelity": delta })
    } else {
        serde_json::Value::Null
    };

    let summary = json!({
        "config": cfg.echo(),
        "config_text": cfg.echo_text(),
        "steady_fidelity": steady,
        "steady_deviation": deviation,
        "dressed": dressed_json(&p),
        "rwa": rwa_json(&p),
        "analytic_steady": analytic_json(&p),
        "invariants": {
            "max_trace_error": max_trace_error,
            "max_herm_residual": max_herm,
            "min_eigenvalue": min_eig,
        },
        "fock_check": fock_report,
    });

    let base = stem(path);
    let csv_path = out.join(format!("{base}.csv"));
    let json_path = out.join(format!("{base}.json"));
    output::write_atomic(&csv_path, &output::trajectory_csv(&traj))
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", csv_path.display())))?;
    output::write_atomic(&json_path, &format!("{:#}\n", summary))
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", json_path.display())))?;
    if !quiet {
        println!("steady fidelity {steady:.6} (deviation {deviation:.2e})");
        println!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(())
}

fn cmd_scan(path: &Path, out: &Path, fock_dim: Option<usize>, quiet: bool) -> Result<(), Failure> {
    let cfg = load(path, fock_dim)?;
    let axis = cfg
        .scan_axis
        .ok_or_else(|| Failure::config("scan requires the 'scan_axis' key"))?;
    if cfg.scan_values.is_empty() {
        return Err(Failure::config("scan requires a non-empty 'scan_values' list"));
    }
    let p = cfg.params();
    if !quiet {
        println!("scan: {} over {:?} ({} points)", stem(path), axis, cfg.scan_values.len());
    }
    let scan = scan_axis(&p, axis, &cfg.scan_values, cfg.t_max, cfg.dt_out, cfg.tolerances())?;

    let summary = json!({
        "config": cfg.echo(),
        "config_text": cfg.echo_text(),
        "axis": scan.axis,
        "steady_fidelities": scan.steady_fidelities,
        "steady_deviations": scan.steady_deviations,
        "strictly_decreasing": scan.strictly_decreasing,
        "non_decreasing": scan.non_decreasing,
    });
    let base = stem(path);
    let csv_path = out.join(format!("{base}.csv"));
    let json_path = out.join(format!("{base}.json"));
    output::write_atomic(&csv_path, &output::scan_csv(&scan))
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", csv_path.display())))?;
    output::write_atomic(&json_path, &format!("{:#}\n", summary))
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", json_path.display())))?;
    if !quiet {
        for (v, f) in scan.axis.iter().zip(&scan.steady_fidelities) {
            println!("  value {v}: steady fidelity {f:.6}");
        }
        println!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(())
}

fn cmd_validate(config: Option<&Path>, quiet: bool) -> Result<(), Failure> {
    let p = match config {
        Some(path) => load(path, None)?.params(),
        None => IonCavityParams::reference_point(),
    };
    let checks = decofree::validate::standard_suite(&p)?;
    let mut all_ok = true;
    for c in &checks {
        all_ok &= c.passed;
        if !quiet || !c.passed {
            println!("{c}");
        }
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VALIDATION, message: "one or more checks failed".into() })
    }
}

fn cmd_steady(path: &Path, fock_dim: Option<usize>) -> Result<(), Failure> {
    let cfg = load(path, fock_dim)?;
    let p = cfg.params();
    let basis = derive_dressed(&p)?;
    let s = analytic_steady(&p, &basis)?;
    let model = decofree::ion_cavity::build_effective_model(&p, &basis)?;
    let rho = steady_state(&model)?;
    let f_numeric = rho.trace_product(&basis.plus.projector()).re;
    let rho_pm = (basis.plus.amplitudes().adjoint() * rho.matrix() * basis.minus.amplitudes())[(0, 0)];
    println!("quantity            analytic (leading order)    null space");
    println!("rho_++              {:<27.12} {:.12}", s.rho_pp, f_numeric);
    println!(
        "rho_+-              {:<27} {:.6e}{:+.6e}i",
        format!("{:.6e}{:+.6e}i", s.rho_pm.re, s.rho_pm.im),
        rho_pm.re,
        rho_pm.im
    );
    println!("fidelity            {:<27.12} {:.12}", s.fidelity, f_numeric);
    println!("cooperativity       {:.6}", s.cooperativity);
    if s.low_cooperativity {
        println!("note: cooperativity < 10, the leading-order expansion is unreliable");
    }
    Ok(())
}
