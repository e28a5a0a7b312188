use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use driftflux::acceptance::{self, Outcome};
use driftflux::config::{parse_config_with, RunConfig};
use driftflux::output::{emit_snapshot, emit_timeseries, write_file};
use driftflux::sweep::{run_sweep, write_summary};

/// Lagrangian gas-liquid drift-flux simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its time series and snapshots.
    Run {
        config: PathBuf,
        #[arg(long)]
        force_out_of_regime: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the parameter sweep described by the configuration.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        force_out_of_regime: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the acceptance checks and write a report.
    Verify {
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

const RUN_ERROR: u8 = 1;
const CHECK_FAILED: u8 = 2;

fn load(path: &Path, force: bool, output_dir: Option<PathBuf>) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg =
        parse_config_with(&text, force).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn run(cfg: &RunConfig) -> Result<ExitCode, String> {
    let traj = cfg.scenario().run().map_err(|e| e.to_string())?;
    let dir = &cfg.output_dir;
    emit_timeseries(&dir.join("timeseries.csv"), &traj.records).map_err(|e| e.to_string())?;
    emit_snapshot(
        &dir.join("snapshot_initial.csv"),
        &traj.initial,
        &traj.grid,
        &traj.stationary,
    )
    .map_err(|e| e.to_string())?;
    emit_snapshot(
        &dir.join("snapshot_final.csv"),
        &traj.final_state,
        &traj.grid,
        &traj.stationary,
    )
    .map_err(|e| e.to_string())?;
    write_file(&dir.join("config.txt"), |w| {
        use std::io::Write;
        w.write_all(cfg.to_text().as_bytes())
    })
    .map_err(|e| e.to_string())?;

    println!(
        "{} steps to t = {}, {} samples",
        traj.steps,
        traj.final_state.t,
        traj.records.len()
    );
    let fits = traj.decay_fits(cfg.fit_window());
    for (name, fit) in [
        ("sup|u|", &fits.velocity),
        ("sup density gap", &fits.density),
        ("weighted L2 + |u|_2^2", &fits.weighted),
    ] {
        match fit {
            Ok(f) => println!("{name}: exponent {:.4}, r2 {:.4}", f.exponent, f.r2),
            Err(e) => println!("{name}: no fit ({e})"),
        }
    }
    println!("output written to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn sweep(cfg: &RunConfig) -> Result<ExitCode, String> {
    let rows = run_sweep(cfg).map_err(|e| e.to_string())?;
    let path = cfg.output_dir.join("sweep_summary.csv");
    write_file(&path, |w| write_summary(w, &rows)).map_err(|e| e.to_string())?;
    for r in &rows {
        let p = &r.params;
        println!(
            "gamma={} theta={} alpha={} f={}: {}",
            p.gamma,
            p.theta,
            p.alpha,
            p.friction,
            if r.failed() {
                r.status.clone()
            } else {
                format!(
                    "u {:.3}, density {:.3} (rate {:.3}) -> {}",
                    r.velocity.map_or(f64::NAN, |f| f.exponent),
                    r.density.map_or(f64::NAN, |f| f.exponent),
                    r.theoretical_rate,
                    if r.passed() { "pass" } else { "fail" }
                )
            }
        );
    }
    println!("summary written to {}", path.display());
    Ok(if rows.iter().any(|r| r.failed()) {
        ExitCode::from(RUN_ERROR)
    } else if rows.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(CHECK_FAILED)
    })
}

fn verify(output_dir: Option<PathBuf>) -> Result<ExitCode, String> {
    let mut results: Vec<Outcome> = Vec::new();
    for check in acceptance::CHECKS {
        let o = check();
        println!("{o}");
        results.push(o);
    }
    let dir = output_dir.unwrap_or_else(|| PathBuf::from("out"));
    let path = dir.join("acceptance_report.txt");
    write_file(&path, |w| {
        use std::io::Write;
        results.iter().try_for_each(|o| writeln!(w, "{o}"))
    })
    .map_err(|e| e.to_string())?;
    let failed = results.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} checks passed; report at {}",
        results.len() - failed,
        results.len(),
        path.display()
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(CHECK_FAILED)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            force_out_of_regime,
            output_dir,
        } => load(&config, force_out_of_regime, output_dir).and_then(|c| run(&c)),
        Command::Sweep {
            config,
            force_out_of_regime,
            output_dir,
        } => load(&config, force_out_of_regime, output_dir).and_then(|c| sweep(&c)),
        Command::Verify { output_dir } => verify(output_dir),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(RUN_ERROR)
    })
}
