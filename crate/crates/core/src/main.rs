use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ellsurf::cli::{parse_family, run, CliError, Command, FamilySpec, Flags};

/// Elliptic surfaces over the projective line.
#[derive(Parser, Debug)]
#[command(name = "ellsurf", version)]
struct Args {
    /// analyze | picard-fuchs | monodromy | idr | manin | compare
    command: String,
    /// Family file(s); `compare` takes two.
    #[arg(required = true, num_args = 1..=2)]
    families: Vec<PathBuf>,
    /// Error tolerance for numerical continuation.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Margin for comparing numerical results with exact predictions.
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    /// Largest total pole degree explored by the divisor search.
    #[arg(long, default_value_t = 24)]
    search_bound: i64,
    /// Write the machine-readable report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

fn load(path: &PathBuf) -> Result<FamilySpec, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_family(&text)?)
}

fn main_inner(args: &Args) -> Result<(), CliError> {
    let command: Command = args.command.parse()?;
    let specs = args.families.iter().map(load).collect::<Result<Vec<_>, _>>()?;
    let flags = Flags { tol: args.tol, margin: args.margin, search_bound: args.search_bound };
    let report = run(command, &specs, &flags)?;
    print!("{report}");
    if let Some(path) = &args.json {
        std::fs::write(path, report.to_json())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
