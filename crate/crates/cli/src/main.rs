use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use entsim::{parse_with_overrides, run, Overrides, RunError};

/// Entanglement dynamics of two atoms near a reflecting plane.
///
/// Flags override values from the config file, which override defaults.
#[derive(Debug, Parser)]
#[command(name = "entsim", version, allow_negative_numbers = true)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// trajectory | sweep | coefficients | oracle-check
    #[arg(long)]
    mode: Option<String>,
    /// Atom–plate distance, ω·y.
    #[arg(long)]
    omega_y: Option<f64>,
    /// Interatomic separation, ω·L.
    #[arg(long = "omega-l")]
    omega_l: Option<f64>,
    /// product10 | antisymmetric | symmetric | excited | ground
    #[arg(long)]
    initial_state: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shorthand for `--mode oracle-check`.
    #[arg(long)]
    oracle: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entsim: {e}");
            if let RunError::Sweep(failures) = &e {
                for f in failures {
                    eprintln!("  {f}");
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(args: Args) -> Result<(), RunError> {
    let source = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let overrides = Overrides {
        mode: args.mode,
        omega_y: args.omega_y,
        omega_l: args.omega_l,
        initial_state: args.initial_state,
        t_max: args.t_max,
        dt: args.dt,
        out: args.out,
        oracle: args.oracle,
    };
    let cfg = parse_with_overrides(&source, &overrides)?;
    let output = run(&cfg)?;
    if let Some(report) = output.report {
        print!("{report}");
    }
    for f in output.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
