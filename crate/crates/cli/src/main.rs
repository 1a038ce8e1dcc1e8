use clap::{Args, Parser, Subcommand};
use fracblow_cli::{
    combine_exit_codes, load_scenario, run, run_audit_only, CliError, Mode, Outcome, RunOptions,
};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracblow", version, about = "Blow-up certificates and simulations for time-fractional equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build capacity certificates (exit 0 certified, 10 hypotheses fail, 11 F(0) <= 0).
    Certify(Common),
    /// Run the PDE simulator with blow-up monitors (exit 0, or 20 on solver divergence).
    Simulate(Common),
    /// Solve the comparison ODE (exit 0 inside the window, 21 outside).
    Ode(Common),
    /// Recompute the reference worked examples and write the discrepancy ledger.
    Audit(AuditArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON); repeat for several.
    #[arg(long = "scenario", required = true)]
    scenarios: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads used across scenarios.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn report(label: &str, r: &Result<Outcome, CliError>) -> i32 {
    match r {
        Ok(o) => {
            println!("{label}: {} (exit {})", o.summary, o.exit_code);
            for a in &o.artifacts {
                println!("  wrote {}", a.display());
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("{label}: {e}");
            e.exit_code()
        }
    }
}

fn run_many(mode: Mode, c: Common) -> i32 {
    let opts = RunOptions { out: c.out, tol: c.tol };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(c.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start {} workers: {e}", c.jobs);
            return fracblow_cli::EXIT_IO;
        }
    };
    let results: Vec<_> = pool.install(|| {
        c.scenarios
            .par_iter()
            .map(|p| load_scenario(p).and_then(|s| run(&s, mode, &opts)))
            .collect()
    });
    let codes: Vec<i32> = c
        .scenarios
        .iter()
        .zip(&results)
        .map(|(p, r)| report(&p.display().to_string(), r))
        .collect();
    combine_exit_codes(codes)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Certify(c) => run_many(Mode::Certify, c),
        Command::Simulate(c) => run_many(Mode::Simulate, c),
        Command::Ode(c) => run_many(Mode::Ode, c),
        Command::Audit(a) => {
            let opts = RunOptions { out: a.out, ..RunOptions::default() };
            report("audit", &run_audit_only(&opts))
        }
    };
    ExitCode::from(code as u8)
}
