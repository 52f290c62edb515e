use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mscheme::cli::config::{apply_override, load_document, resolve};
use mscheme::cli::presets::describe_presets;
use mscheme::cli::{execute, Command, EXIT_CODES};
use mscheme::Error;

/// Five-level M-scheme atom: steady states, dynamics, ramps, sweeps and
/// dressed-state analysis.
#[derive(Parser, Debug)]
#[command(name = "mscheme", version, after_help = EXIT_CODES)]
struct Args {
    /// Command to run; overrides `command` in the configuration, which may
    /// supply it instead.
    #[arg(value_enum, required_unless_present_any = ["list_presets", "config", "set"])]
    command: Option<Command>,

    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output CSV path; overrides `output` in the configuration.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set gamma25=0.05` or
    /// `--set axis.points=21`. May be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the shipped presets and exit.
    #[arg(long)]
    list_presets: bool,
}

fn run(args: Args) -> Result<String, Error> {
    if args.list_presets {
        return Ok(describe_presets());
    }
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            load_document(&text)?
        }
        None => load_document("{}")?,
    };
    for assignment in &args.set {
        apply_override(&mut doc, assignment)?;
    }
    let mut spec = resolve(doc)?;
    if args.command.is_some() {
        spec.command = args.command;
    }
    if args.output.is_some() {
        spec.output = args.output;
    }
    Ok(execute(&spec)?.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(message) => {
            // A closed stdout (e.g. piped into `head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{}", message.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
