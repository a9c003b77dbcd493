//! Scenario runner for the backstepping control library.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 the simulated state
//! diverged (a reportable outcome for unstable open-loop scenarios; partial
//! norm data is still written).

mod config;
mod output;

use backstep2d::{
    boundary_identity_residuals, build_grid, build_kernel_table, closed_loop_target_residuals,
    kernel_pde_residual, principal_eigenvalue, run, solve_kernel_goursat, table_difference,
    RunOutcome,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use config::Resolved;
use output::{Manifest, RunSummaryJson};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const OUT_DIR_ENV: &str = "BACKSTEP2D_OUT_DIR";

#[derive(Parser)]
#[command(name = "backstep2d", version, about = "Backstepping boundary control of the 2D reaction-diffusion equation on hypograph domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config (TOML). Required for simulate and compare.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides BACKSTEP2D_OUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reaction coefficient override.
    #[arg(long)]
    lambda: Option<f64>,
    /// Grid size override.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write snapshots, norm series, and a manifest.
    Simulate(CommonArgs),
    /// Run the same scenario with control off and on; write both norm series.
    Compare(CommonArgs),
    /// Build the kernel table, dump it as CSV, and print residual metrics.
    KernelCheck(CommonArgs),
    /// Estimate the principal Dirichlet eigenvalue of the domain.
    Eigen(CommonArgs),
    /// Measure target-system residuals at two refinement levels.
    TransformCheck(CommonArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let usage = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if usage { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let result = match cli.cmd {
        Cmd::Simulate(args) => simulate(&args),
        Cmd::Compare(args) => compare(&args),
        Cmd::KernelCheck(args) => kernel_check(&args),
        Cmd::Eigen(args) => eigen(&args),
        Cmd::TransformCheck(args) => transform_check(&args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

type CmdResult = Result<ExitCode, String>;

fn load_resolved(args: &CommonArgs) -> Result<Resolved, String> {
    let path = args
        .config
        .as_deref()
        .ok_or("this subcommand needs --config PATH")?;
    config::load(path)?.resolve(args.lambda, args.n)
}

/// Flag beats environment beats config beats "./out".
fn out_dir(args: &CommonArgs, cfg: Option<&config::FileConfig>) -> Result<PathBuf, String> {
    let dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| format!("cannot create output dir {}: {e}", dir.display()))?;
    Ok(dir)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializes"));
}

fn exit_code(outcomes: &[RunOutcome]) -> ExitCode {
    if outcomes.iter().any(|o| matches!(o, RunOutcome::Diverged { .. })) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate(args: &CommonArgs) -> CmdResult {
    let started = Instant::now();
    let resolved = load_resolved(args)?;
    let dir = out_dir(args, Some(&resolved.file))?;
    let out = run(&resolved.graph, &resolved.sim).map_err(|e| e.to_string())?;

    let mut outputs = Vec::new();
    for (index, snap) in out.snapshots.iter().enumerate() {
        let path = dir.join(format!("snapshot_{index:05}.csv"));
        output::write_snapshot(&path, &out.grid, snap).map_err(|e| e.to_string())?;
        outputs.push(path);
    }
    let norms_path = dir.join("norms.csv");
    output::write_norms(&norms_path, &out.norms).map_err(|e| e.to_string())?;
    outputs.push(norms_path);

    let summary = RunSummaryJson::from_run(&out);
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
        config: resolved.file,
        outputs,
        summary,
    };
    let manifest_path = dir.join("manifest.json");
    output::write_manifest(&manifest_path, &manifest).map_err(|e| e.to_string())?;
    print_json(&manifest);
    Ok(exit_code(&[out.outcome]))
}

#[derive(Serialize)]
struct CompareSummary {
    lambda: f64,
    lambda_hat_1: f64,
    open: RunSummaryJson,
    /// Open-loop final/initial norm; > 1 means the uncontrolled plant grew.
    open_growth_factor: f64,
    closed: RunSummaryJson,
    /// Closed-loop initial/final norm; > 1 means the feedback shrank it.
    closed_decay_factor: f64,
}

fn compare(args: &CommonArgs) -> CmdResult {
    let started = Instant::now();
    let resolved = load_resolved(args)?;
    let dir = out_dir(args, Some(&resolved.file))?;

    let mut open_cfg = resolved.sim.clone();
    open_cfg.control_enabled = false;
    let mut closed_cfg = resolved.sim.clone();
    closed_cfg.control_enabled = true;
    let open = run(&resolved.graph, &open_cfg).map_err(|e| e.to_string())?;
    let closed = run(&resolved.graph, &closed_cfg).map_err(|e| e.to_string())?;
    let eigen = principal_eigenvalue(&open.grid).map_err(|e| e.to_string())?;

    let open_path = dir.join("norms_open.csv");
    output::write_norms(&open_path, &open.norms).map_err(|e| e.to_string())?;
    let closed_path = dir.join("norms_closed.csv");
    output::write_norms(&closed_path, &closed.norms).map_err(|e| e.to_string())?;

    let summary = CompareSummary {
        lambda: resolved.sim.lambda,
        lambda_hat_1: eigen.value,
        open_growth_factor: open.summary.final_norm / open.summary.initial_norm,
        open: RunSummaryJson::from_run(&open),
        closed_decay_factor: closed.summary.initial_norm / closed.summary.final_norm,
        closed: RunSummaryJson::from_run(&closed),
    };
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
        config: resolved.file,
        outputs: vec![open_path, closed_path],
        summary,
    };
    let manifest_path = dir.join("manifest.json");
    output::write_manifest(&manifest_path, &manifest).map_err(|e| e.to_string())?;
    print_json(&manifest);
    Ok(exit_code(&[open.outcome, closed.outcome]))
}

/// λ and n from flags, falling back to the config when one is given.
fn lambda_and_n(args: &CommonArgs) -> Result<(f64, usize), String> {
    let file = match &args.config {
        Some(path) => Some(config::load(path)?),
        None => None,
    };
    let lambda = args
        .lambda
        .or(file.as_ref().map(|f| f.pde.lambda))
        .ok_or("missing lambda: pass --lambda X or --config with [pde] lambda")?;
    let n = args
        .n
        .or(file.as_ref().map(|f| f.numerics.n))
        .ok_or("missing n: pass --n N or --config with [numerics] n")?;
    Ok((lambda, n))
}

#[derive(Serialize)]
struct KernelCheckReport {
    lambda: f64,
    n: usize,
    table_csv: PathBuf,
    /// max over the diagonal K_jj + λy_j/2 and the edge K_j0 identities.
    boundary_identity_residual: f64,
    /// max |K_yy − K_ξξ − λK| under centered second differences.
    pde_residual: f64,
    /// max |closed form − Goursat successive-approximation solution|.
    goursat_max_diff: f64,
}

fn kernel_check(args: &CommonArgs) -> CmdResult {
    let (lambda, n) = lambda_and_n(args)?;
    let dir = out_dir(args, None)?;
    let table = build_kernel_table(lambda, n).map_err(|e| e.to_string())?;
    let (diag, edge) = boundary_identity_residuals(&table);
    // the Goursat solver rejects grids too coarse for any of the probes
    let oracle = solve_kernel_goursat(lambda, n).map_err(|e| e.to_string())?;
    let diff = table_difference(&table, &oracle).map_err(|e| e.to_string())?;
    let pde = kernel_pde_residual(&table);

    let table_csv = dir.join("kernel_table.csv");
    output::write_kernel_table(&table_csv, &table).map_err(|e| e.to_string())?;
    print_json(&KernelCheckReport {
        lambda,
        n,
        table_csv,
        boundary_identity_residual: diag.max(edge),
        pde_residual: pde,
        goursat_max_diff: diff,
    });
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EigenReport {
    n: usize,
    h: f64,
    lambda_hat_1: f64,
    iterations: usize,
}

fn eigen(args: &CommonArgs) -> CmdResult {
    let file = match &args.config {
        Some(path) => config::load(path)?,
        None => return Err("eigen needs --config PATH (domain and n)".into()),
    };
    let n = args.n.unwrap_or(file.numerics.n);
    let graph = file.boundary_graph()?;
    let grid = build_grid(&graph, n).map_err(|e| e.to_string())?;
    let estimate = principal_eigenvalue(&grid).map_err(|e| e.to_string())?;
    print_json(&EigenReport {
        n,
        h: grid.h(),
        lambda_hat_1: estimate.value,
        iterations: estimate.iterations,
    });
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct LevelReport {
    n: usize,
    interior_residual: f64,
    boundary_residual: f64,
}

#[derive(Serialize)]
struct TransformCheckReport {
    lambda: f64,
    levels: [LevelReport; 2],
    /// coarse/fine; > 1 means refinement helped.
    interior_ratio: f64,
    boundary_ratio: f64,
}

fn transform_check(args: &CommonArgs) -> CmdResult {
    let (lambda, n) = lambda_and_n(args)?;
    let graph = match &args.config {
        Some(path) => config::load(path)?.boundary_graph()?,
        None => backstep2d::piano_default(),
    };
    let fine_n = 2 * n - 1;
    let coarse = closed_loop_target_residuals(&graph, lambda, n).map_err(|e| e.to_string())?;
    let fine = closed_loop_target_residuals(&graph, lambda, fine_n).map_err(|e| e.to_string())?;
    print_json(&TransformCheckReport {
        lambda,
        levels: [
            LevelReport {
                n,
                interior_residual: coarse.interior,
                boundary_residual: coarse.boundary,
            },
            LevelReport {
                n: fine_n,
                interior_residual: fine.interior,
                boundary_residual: fine.boundary,
            },
        ],
        interior_ratio: coarse.interior / fine.interior,
        boundary_ratio: coarse.boundary / fine.boundary,
    });
    Ok(ExitCode::SUCCESS)
}
