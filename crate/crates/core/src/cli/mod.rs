//! Command-line front end: configuration, presets, execution and CSV output.

pub mod config;
pub mod output;
pub mod presets;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use crate::dressed::{decay_expansion, diagonalize, dominant_terms};
use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::model::build_hamiltonian;
use crate::solver::{adiabatic_ramp, evolve, steady_state_for};
use crate::sweep::{run_sweep, DOMINANT_THRESHOLD};

pub use config::{parse_config, RunSpec};
pub use output::Table;

pub const EXIT_CODES: &str = "\
Exit codes:
  0   success
  2   usage error (bad command-line arguments)
  3   ParseError: configuration is not valid JSON
  4   UnknownKey: unrecognised configuration key
  5   validation error (bad value, level, topology, state or decay channel)
  6   CyclicTopology
  7   DegenerateSteadyState
  8   SingularSolve
  9   StepFailure
  10  AmbiguousTracking
  11  IoError";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Steady-state density matrix.
    Steady,
    /// Time evolution from a pure level.
    Evolve,
    /// Detuning ramp with tracking error against the instantaneous steady state.
    Ramp,
    /// One-dimensional parameter sweep.
    Sweep,
    /// Dressed-state decomposition of the Hamiltonian.
    Dressed,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Evolve => "evolve",
            Command::Ramp => "ramp",
            Command::Sweep => "sweep",
            Command::Dressed => "dressed",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steady" => Ok(Command::Steady),
            "evolve" => Ok(Command::Evolve),
            "ramp" => Ok(Command::Ramp),
            "sweep" => Ok(Command::Sweep),
            "dressed" => Ok(Command::Dressed),
            other => Err(Error::validation("command", format!("unknown command `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Summary {
    pub command: Command,
    pub rows: usize,
    pub output: PathBuf,
    /// Steady-state residual, halving error or tracking error, by command.
    pub metric: (&'static str, f64),
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} rows -> {} ({} {:.3e}{}{}, {:.3}s)",
            self.command,
            self.rows,
            self.output.display(),
            self.metric.0,
            self.metric.1,
            if self.detail.is_empty() { "" } else { "; " },
            self.detail,
            self.seconds
        )
    }
}

fn default_output(spec: &RunSpec, command: Command) -> PathBuf {
    let stem = spec.preset.as_deref().unwrap_or("mscheme");
    PathBuf::from(format!("{stem}_{command}.csv"))
}

/// Runs the command in `spec`, writes its CSV table and returns a summary.
pub fn execute(spec: &RunSpec) -> Result<Summary> {
    let command = spec
        .command
        .ok_or_else(|| Error::validation("command", "no command given"))?;
    let started = Instant::now();
    let (table, metric, detail) = compute(spec, command)?;
    let output = spec.output.clone().unwrap_or_else(|| default_output(spec, command));
    table.write(&output)?;
    Ok(Summary {
        command,
        rows: table.rows.len(),
        output,
        metric,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs the command and returns its table without touching the filesystem.
pub fn compute(spec: &RunSpec, command: Command) -> Result<(Table, (&'static str, f64), String)> {
    let params = &spec.params;
    match command {
        Command::Steady => {
            let ss = steady_state_for(params)?;
            let pops = ss.state.populations().map(|p| format!("{p:.6}")).join(", ");
            Ok((
                Table::from_density(&ss.state),
                ("residual", ss.residual),
                format!("populations [{pops}]"),
            ))
        }
        Command::Evolve => {
            let t = &spec.time;
            let traj = evolve(&DensityMatrix::pure(t.initial), params, t.t_end, t.samples)?;
            let detail = format!("trace drift {:.3e}", traj.report.trace_drift);
            Ok((
                Table::from_trajectory(&traj),
                ("halving error", traj.report.halving_error),
                detail,
            ))
        }
        Command::Ramp => {
            let ramp = spec
                .ramp
                .as_ref()
                .ok_or_else(|| Error::validation("ramp", "ramp block required for the ramp command"))?;
            let rho0 = match ramp.initial {
                config::InitialState::Steady => steady_state_for(&ramp.spec.params_at(params, 0.0))?.state,
                config::InitialState::Pure(level) => DensityMatrix::pure(level),
            };
            let traj = adiabatic_ramp(&rho0, params, &ramp.spec, ramp.samples)?;
            let final_error = traj
                .tracking_error
                .as_ref()
                .and_then(|e| e.last().copied())
                .unwrap_or(f64::NAN);
            let detail = format!("halving error {:.3e}", traj.report.halving_error);
            Ok((
                Table::from_trajectory(&traj),
                ("final tracking error", final_error),
                detail,
            ))
        }
        Command::Sweep => {
            let axis = spec
                .axis
                .as_ref()
                .ok_or_else(|| Error::validation("axis", "axis block required for the sweep command"))?;
            let table = run_sweep(params, axis, spec.channel)?;
            let max_residual = table
                .rows
                .iter()
                .map(|r| r.residual)
                .filter(|r| r.is_finite())
                .fold(0.0, f64::max);
            let degenerate = table.rows.iter().filter(|r| !r.residual.is_finite()).count();
            let detail = if degenerate > 0 {
                format!("{degenerate} degenerate points")
            } else {
                String::new()
            };
            Ok((Table::from_sweep(&table), ("max residual", max_residual), detail))
        }
        Command::Dressed => {
            let h = build_hamiltonian(params)?;
            let basis = diagonalize(&h);
            let (src, tgt) = spec.channel;
            let expansion = decay_expansion(&basis, src, tgt)?;
            let terms = dominant_terms(&expansion, DOMINANT_THRESHOLD)?;
            let labels: Vec<String> = terms.iter().map(|t| t.label()).collect();
            let unitarity = (basis.vectors * basis.vectors.adjoint() - crate::model::Matrix5c::identity())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let detail = format!(
                "channel {} dominant terms: {}",
                expansion.channel_label(),
                labels.join(" ")
            );
            Ok((Table::from_dressed(&basis), ("unitarity error", unitarity), detail))
        }
    }
}
