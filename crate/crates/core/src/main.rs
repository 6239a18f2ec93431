//! Command-line front end: parameter scans to CSV, single-point reports,
//! and the validation suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or configuration
//! error, 3 numerical failure.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noisy_cavities::config::{GridSpec, Settings};
use noisy_cavities::dynamics::{residual_norm, steady_state, DynamicsError, STEADY_STATE_TOL};
use noisy_cavities::entanglement::{
    atom_measured_negativity_base, cavity_negativity_base, DEFAULT_LOG_BASE,
};
use noisy_cavities::model::{
    effective_to_physical, HilbertLayout, ModelError, ModelParams,
};
use noisy_cavities::scan::{
    jump_diagnostic, scan_steady, scan_time, time_series, write_csv, Axis, AxisParam, ScanError,
    ScanResult, ScanSpec,
};
use noisy_cavities::validate::{check_names, run_checks, ValidateOptions};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "noisy-cavities",
    version,
    about = "Two leaky cavities sharing an atom driven by thermal white noise: \
             entanglement scans and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Atom-cavity coupling g_a
    #[arg(long = "g-a")]
    g_a: Option<f64>,
    /// Atom-cavity coupling g_b
    #[arg(long = "g-b")]
    g_b: Option<f64>,
    /// Cavity decay rate kappa (applied to both cavities)
    #[arg(long)]
    kappa: Option<f64>,
    /// Atom-environment coupling Gamma
    #[arg(long)]
    gamma: Option<f64>,
    /// Effective thermal photon number n_T
    #[arg(long = "n-t")]
    n_t: Option<f64>,
    /// Fock cutoff N (default 3; scan-steady defaults to 12 to converge
    /// its weak-decay corner)
    #[arg(long)]
    cutoff: Option<usize>,
    /// Final time for `evolve` (ignored when --grid-t is given)
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Integrator step (default 0.01 / fastest rate)
    #[arg(long)]
    dt: Option<f64>,
    /// n_T axis: min,max,count[,lin|log]
    #[arg(long = "grid-nt")]
    grid_nt: Option<GridSpec>,
    /// kappa axis: min,max,count[,lin|log]
    #[arg(long = "grid-kappa")]
    grid_kappa: Option<GridSpec>,
    /// time axis: min,max,count[,lin|log]
    #[arg(long = "grid-t")]
    grid_t: Option<GridSpec>,
    /// Base of the negativity logarithm
    #[arg(long = "log-base")]
    log_base: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value config file; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep noise intensity against time, CSV output
    ScanTime(CommonOpts),
    /// Sweep noise intensity against cavity decay at steady state, CSV output
    ScanSteady(CommonOpts),
    /// Steady state at fixed parameters, key = value report
    Steady(CommonOpts),
    /// Time evolution at fixed parameters, CSV output over the time grid
    Evolve(CommonOpts),
    /// Conditional-evolution (photon detection) diagnostics
    JumpDiag(CommonOpts),
    /// Run the named validation checks
    Validate {
        #[command(flatten)]
        common: CommonOpts,
        /// Run only the named checks (repeatable)
        #[arg(long)]
        only: Vec<String>,
        /// Corrupt the Bell calibration input to exercise the failure path
        #[arg(long = "inject-fault")]
        inject_fault: bool,
    },
}

/// Everything a subcommand needs after merging defaults, config file, and
/// flags.
struct Resolved {
    params: ModelParams,
    /// Cutoff exactly as requested, when it was; subcommands choose their
    /// own default otherwise (scan-steady needs a larger one).
    cutoff: Option<usize>,
    dt: Option<f64>,
    t_max: Option<f64>,
    grid_nt: Option<GridSpec>,
    grid_kappa: Option<GridSpec>,
    grid_t: Option<GridSpec>,
    log_base: f64,
    out: Option<PathBuf>,
}

fn resolve(opts: &CommonOpts) -> Result<Resolved, String> {
    let from_file = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|err| format!("cannot read config {}: {err}", path.display()))?;
            Settings::parse(&text).map_err(|err| format!("{}: {err}", path.display()))?
        }
        None => Settings::default(),
    };
    let flags = Settings {
        g_a: opts.g_a,
        g_b: opts.g_b,
        kappa: opts.kappa,
        gamma: opts.gamma,
        n_t: opts.n_t,
        cutoff: opts.cutoff,
        t_max: opts.t_max,
        dt: opts.dt,
        grid_nt: opts.grid_nt,
        grid_kappa: opts.grid_kappa,
        grid_t: opts.grid_t,
        log_base: opts.log_base,
        out: opts.out.clone(),
    };
    let merged = flags.or(from_file);

    let defaults = ModelParams::default();
    let mut params = ModelParams {
        g_a: merged.g_a.unwrap_or(defaults.g_a),
        g_b: merged.g_b.unwrap_or(defaults.g_b),
        kappa_a: defaults.kappa_a,
        kappa_b: defaults.kappa_b,
        gamma: merged.gamma.unwrap_or(defaults.gamma),
        n_t: merged.n_t.unwrap_or(defaults.n_t),
        cutoff: merged.cutoff.unwrap_or(defaults.cutoff),
    };
    if let Some(kappa) = merged.kappa {
        params = params.with_kappa(kappa);
    }
    params.validate().map_err(|err| err.to_string())?;
    let log_base = merged.log_base.unwrap_or(DEFAULT_LOG_BASE);
    if !(log_base > 0.0) || log_base == 1.0 {
        return Err(format!("log base must be positive and not 1, got {log_base}"));
    }
    Ok(Resolved {
        params,
        cutoff: merged.cutoff,
        dt: merged.dt,
        t_max: merged.t_max,
        grid_nt: merged.grid_nt,
        grid_kappa: merged.grid_kappa,
        grid_t: merged.grid_t,
        log_base,
        out: merged.out,
    })
}

fn write_output(out: &Option<PathBuf>, body: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => io::stdout().write_all(body.as_bytes()),
    }
}

fn emit_csv(result: &ScanResult, out: &Option<PathBuf>) -> io::Result<()> {
    let mut buffer = Vec::new();
    write_csv(result, &mut buffer)?;
    write_output(out, std::str::from_utf8(&buffer).expect("CSV is UTF-8"))
}

fn scan_exit(err: &ScanError) -> u8 {
    match err {
        ScanError::InvalidSpec(_) | ScanError::Model(ModelError::InvalidParams(_)) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn time_axis(resolved: &Resolved) -> Axis {
    match resolved.grid_t {
        Some(grid) => grid.axis(AxisParam::Time),
        None => Axis::linear(AxisParam::Time, 0.0, resolved.t_max.unwrap_or(20.0), 81),
    }
}

fn run_scan_time(resolved: &Resolved) -> Result<(), (u8, String)> {
    let mut spec = ScanSpec::default_time_scan();
    spec.params = resolved.params;
    spec.dt = resolved.dt;
    spec.log_base = resolved.log_base;
    if let Some(grid) = resolved.grid_nt {
        spec.axes[0] = grid.axis(AxisParam::NoisePhotonNumber);
    }
    spec.axes[1] = time_axis(resolved);
    let result = scan_time(&spec).map_err(|err| (scan_exit(&err), err.to_string()))?;
    emit_csv(&result, &resolved.out).map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    Ok(())
}

fn run_scan_steady(resolved: &Resolved) -> Result<(), (u8, String)> {
    let mut spec = ScanSpec::default_steady_scan();
    let default_cutoff = spec.params.cutoff; // 12: converges the low-κ corner
    spec.params = resolved.params;
    spec.params.cutoff = resolved.cutoff.unwrap_or(default_cutoff);
    spec.log_base = resolved.log_base;
    if let Some(grid) = resolved.grid_nt {
        spec.axes[0] = grid.axis(AxisParam::NoisePhotonNumber);
    }
    if let Some(grid) = resolved.grid_kappa {
        spec.axes[1] = grid.axis(AxisParam::Kappa);
    }
    let result = scan_steady(&spec).map_err(|err| (scan_exit(&err), err.to_string()))?;
    emit_csv(&result, &resolved.out).map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    Ok(())
}

fn run_evolve(resolved: &Resolved) -> Result<(), (u8, String)> {
    let times = time_axis(resolved);
    times.validate().map_err(|err| (EXIT_USAGE, err.to_string()))?;
    let rows = time_series(&resolved.params, &times.values(), resolved.dt, resolved.log_base)
        .map_err(|err| (scan_exit(&err), err.to_string()))?;
    let result = ScanResult { cutoff: resolved.params.cutoff, rows };
    emit_csv(&result, &resolved.out).map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    Ok(())
}

fn run_steady(resolved: &Resolved) -> Result<(), (u8, String)> {
    let params = resolved.params;
    params
        .effective_kappa()
        .map_err(|err| (EXIT_USAGE, err.to_string()))?;
    let layout = HilbertLayout::effective(params.cutoff);
    let rho = steady_state(&params, &layout, STEADY_STATE_TOL)
        .map_err(|err| (steady_exit(&err), err.to_string()))?;
    let residual = residual_norm(&params, &layout, &rho)
        .map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    let phys = effective_to_physical(&rho, &params)
        .map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    let traced = cavity_negativity_base(&phys, resolved.log_base)
        .map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    let measured = atom_measured_negativity_base(&phys, resolved.log_base)
        .map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;

    let mut body = String::new();
    body.push_str(&format!("n_t = {}\n", params.n_t));
    body.push_str(&format!("kappa = {}\n", params.kappa_a));
    body.push_str(&format!("gamma = {}\n", params.gamma));
    body.push_str(&format!("g_a = {}\n", params.g_a));
    body.push_str(&format!("g_b = {}\n", params.g_b));
    body.push_str(&format!("cutoff = {}\n", params.cutoff));
    body.push_str(&format!("neg_traced = {:.12e}\n", traced.value));
    body.push_str(&format!("neg_measured = {:.12e}\n", measured.expected_negativity));
    body.push_str(&format!("min_pt_eigenvalue = {:.12e}\n", traced.min_pt_eigenvalue));
    body.push_str(&format!("trace_norm = {:.12e}\n", traced.trace_norm));
    for (r, p) in rho.mode_populations(1).iter().enumerate() {
        body.push_str(&format!("p{r} = {p:.12e}\n"));
    }
    body.push_str(&format!("residual = {residual:.12e}\n"));
    write_output(&resolved.out, &body).map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    Ok(())
}

fn steady_exit(err: &DynamicsError) -> u8 {
    match err {
        DynamicsError::Model(ModelError::InvalidParams(_)) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn run_jump_diag(resolved: &Resolved) -> Result<(), (u8, String)> {
    let diag = jump_diagnostic(&resolved.params, resolved.log_base)
        .map_err(|err| (scan_exit(&err), err.to_string()))?;
    let params = diag.params;
    let body = format!(
        "n_t = {}\nkappa = {}\ngamma = {}\ng_a = {}\ng_b = {}\ncutoff = {}\n\
         neg_steady = {:.12e}\nneg_after_jump = {:.12e}\nneg_no_jump = {:.12e}\n",
        params.n_t,
        params.kappa_a,
        params.gamma,
        params.g_a,
        params.g_b,
        params.cutoff,
        diag.neg_steady,
        diag.neg_after_jump,
        diag.neg_no_jump
    );
    write_output(&resolved.out, &body).map_err(|err| (EXIT_NUMERICAL, err.to_string()))?;
    Ok(())
}

fn run_validate(only: Vec<String>, inject_fault: bool) -> Result<(), (u8, String)> {
    let known = check_names();
    for name in &only {
        if !known.contains(&name.as_str()) {
            return Err((
                EXIT_USAGE,
                format!("unknown check `{name}`; available: {}", known.join(", ")),
            ));
        }
    }
    let results = run_checks(&ValidateOptions { inject_bell_fault: inject_fault, only });
    let mut failures = 0;
    for result in &results {
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {} ({:.2} s): {}", result.name, result.seconds, result.detail);
        if !result.passed {
            failures += 1;
        }
    }
    println!("{}/{} checks passed", results.len() - failures, results.len());
    if failures > 0 {
        return Err((EXIT_VALIDATION, format!("{failures} check(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::ScanTime(opts) => resolve(opts).map_err(|e| (EXIT_USAGE, e)).and_then(|r| run_scan_time(&r)),
        Command::ScanSteady(opts) => resolve(opts).map_err(|e| (EXIT_USAGE, e)).and_then(|r| run_scan_steady(&r)),
        Command::Steady(opts) => resolve(opts).map_err(|e| (EXIT_USAGE, e)).and_then(|r| run_steady(&r)),
        Command::Evolve(opts) => resolve(opts).map_err(|e| (EXIT_USAGE, e)).and_then(|r| run_evolve(&r)),
        Command::JumpDiag(opts) => resolve(opts).map_err(|e| (EXIT_USAGE, e)).and_then(|r| run_jump_diag(&r)),
        Command::Validate { common, only, inject_fault } => resolve(common)
            .map_err(|e| (EXIT_USAGE, e))
            .and_then(|_| run_validate(only.clone(), *inject_fault)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => fail(code, message),
    }
}
