mod config;
mod report;
mod run;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, Problem, RunConfig};
use run::RunError;

/// Exit codes.
mod code {
    pub const IO: u8 = 1;
    pub const CONFIG: u8 = 3;
    pub const ASSEMBLY: u8 = 4;
    pub const NOT_CONVERGED: u8 = 5;
    pub const ORACLE_MISMATCH: u8 = 6;
    pub const SELF_TEST: u8 = 7;
}

#[derive(Parser)]
#[command(name = "inclusion", version, about = "Planar elastic inclusion solver (matrix formulation)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the density coefficients and write the solution files.
    Solve(RunArgs),
    /// Solve, then sample the displacement on a grid.
    Field(RunArgs),
    /// Solve and cross-check against the Nyström oracle.
    OracleCheck(RunArgs),
    /// Run invariant checks on built-in disk and ellipse fixtures.
    SelfTest,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Truncation order n.
    #[arg(long)]
    truncation: Option<usize>,
    /// Grid "x0,x1,y0,y1,nx,ny" in the physical plane.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Also run the Nyström oracle comparison.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Relative residual threshold for convergence.
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            truncation: self.truncation,
            tolerance: self.tolerance,
            grid: self.grid.clone(),
            oracle: self.oracle,
            out_dir: self.out_dir.clone(),
        }
    }
}

fn load(args: &RunArgs, need_grid: bool, force_oracle: bool) -> Result<Problem, RunError> {
    let mut o = args.overrides();
    o.oracle |= force_oracle;
    let p = RunConfig::load(&args.config)
        .and_then(|c| c.apply(&o).validate())
        .map_err(|e| RunError::Config(e.to_string()))?;
    if need_grid && p.grid.is_none() {
        return Err(RunError::Config("field needs a grid (--grid or field.grid)".into()));
    }
    Ok(p)
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("inclusion: {e}");
    ExitCode::from(match e {
        RunError::Config(_) => code::CONFIG,
        RunError::Assembly(_) => code::ASSEMBLY,
        RunError::Io(_) => code::IO,
    })
}

fn run_command(name: &str, args: &RunArgs, need_grid: bool, force_oracle: bool) -> ExitCode {
    let problem = match load(args, need_grid, force_oracle) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let results = match run::execute(&problem) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let written = match report::emit(name, &problem, &results, &timestamp) {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    print!("{}", report::summary(&problem, &results));
    for path in written {
        println!("wrote {}", path.display());
    }
    if !results.solution.converged {
        eprintln!("inclusion: solve did not reach the residual tolerance");
        return ExitCode::from(code::NOT_CONVERGED);
    }
    if let Some(o) = &results.oracle {
        if !o.agrees() {
            eprintln!(
                "inclusion: oracle discrepancy {:.3e} exceeds {:.1e}",
                o.comparison.offset_max, o.tolerance
            );
            return ExitCode::from(code::ORACLE_MISMATCH);
        }
    }
    ExitCode::SUCCESS
}

fn self_test() -> ExitCode {
    let checks = selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.pass);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        ExitCode::from(code::SELF_TEST)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(a) => run_command("solve", a, false, false),
        Command::Field(a) => run_command("field", a, true, false),
        Command::OracleCheck(a) => run_command("oracle-check", a, false, true),
        Command::SelfTest => self_test(),
    }
}
