//! Command-line front end: `charge`, `discharge`, `sweep` and `validate`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 integration failure,
//! 3 failed validation.

pub mod config_file;
pub mod output;
pub mod validate;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::{evolve_pure, QuantumState};
use crate::error::Error;
use crate::metrics::trajectory_maxima;
use crate::pulses::{Direction, Protocol, ProtocolConfig};
use crate::sweep::{run_sweep, SweepSpec};
use config_file::ConfigFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Success = 0,
    Config = 1,
    Integration = 2,
    Validation = 3,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> ExitCode {
        ExitCode::from(e as u8)
    }
}

impl From<&Error> for Exit {
    fn from(e: &Error) -> Exit {
        if e.is_integration_failure() {
            Exit::Integration
        } else {
            Exit::Config
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qbattery", version, about = "Three-level quantum battery charged by STIRAP / counterdiabatic STIRAP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Charge from |1⟩ and write the trajectory CSV.
    Charge(RunArgs),
    /// Discharge from |3⟩ and write the trajectory CSV.
    Discharge(RunArgs),
    /// Sweep τ or Ω₀ for both protocols and write C_max / P_max.
    Sweep(SweepArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// Peak Rabi amplitude Ω₀.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Pulse width T.
    #[arg(long)]
    pub width: Option<f64>,
    /// Pulse delay τ [default: 0.7·width].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Energies ε₁,ε₂,ε₃.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub eps: Option<Vec<f64>>,
    /// Integrator step [default: width/2000].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Start of the window [default: −(τ + 4T)].
    #[arg(long, allow_negative_numbers = true)]
    pub t_start: Option<f64>,
    /// End of the window [default: τ + 4T].
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Flat TOML file with run parameters; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    pub plot: bool,
}

impl CommonArgs {
    fn as_config_file(&self) -> ConfigFile {
        ConfigFile {
            protocol: self.protocol.map(|p| p.name().to_string()),
            omega0: self.omega0,
            width: self.width,
            tau: self.tau,
            eps: self.eps.clone(),
            dt: self.dt,
            t_start: self.t_start,
            t_end: self.t_end,
            ..ConfigFile::default()
        }
    }

    fn merged(&self, extra: ConfigFile) -> Result<ConfigFile, Error> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(extra.overlay(self.as_config_file()).overlay(file))
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = ["tau", "omega0"])]
    pub param: Option<String>,
    /// Comma-separated parameter values [default: built-in grid].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    CdSign,
    CoarseDt,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ValidateArgs {
    /// Inject a fault to exercise the failure path.
    #[arg(long, hide = true)]
    pub inject_fault: Vec<Fault>,
}

/// What to emit for one subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmitFlags {
    pub trajectory_csv: bool,
    pub sweep_csv: bool,
    pub plot_script: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Run(ProtocolConfig),
    Sweep(SweepSpec),
}

/// Fully resolved work order for one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub payload: Payload,
    pub out_dir: PathBuf,
    pub emit: EmitFlags,
}

impl RunManifest {
    pub fn for_run(args: &RunArgs, direction: Direction) -> Result<Self, Error> {
        let cfg = args.common.merged(ConfigFile::default())?.resolve(direction)?;
        Ok(RunManifest {
            payload: Payload::Run(cfg),
            out_dir: args.common.out.clone(),
            emit: EmitFlags { trajectory_csv: true, sweep_csv: false, plot_script: args.common.plot },
        })
    }

    pub fn for_sweep(args: &SweepArgs) -> Result<Self, Error> {
        let extra = ConfigFile { param: args.param.clone(), values: args.values.clone(), ..ConfigFile::default() };
        let spec = args.common.merged(extra)?.resolve_sweep()?;
        Ok(RunManifest {
            payload: Payload::Sweep(spec),
            out_dir: args.common.out.clone(),
            emit: EmitFlags { trajectory_csv: false, sweep_csv: true, plot_script: args.common.plot },
        })
    }

    fn prepare_out_dir(&self) -> Result<(), Error> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", self.out_dir.display())))
    }
}

fn fail(e: &Error) -> Exit {
    eprintln!("error: {e}");
    Exit::from(e)
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Exit {
    eprintln!("error: writing {}: {e}", path.display());
    Exit::Config
}

fn trajectory_file_name(cfg: &ProtocolConfig) -> String {
    format!("{}_{}.csv", cfg.direction.name(), cfg.protocol.name())
}

fn cmd_run(manifest: &RunManifest, direction: Direction) -> Exit {
    let Payload::Run(cfg) = &manifest.payload else {
        eprintln!("error: {direction} needs a run configuration");
        return Exit::Config;
    };
    if cfg.direction != direction {
        eprintln!("error: manifest direction is {}, expected {direction}", cfg.direction);
        return Exit::Config;
    }
    if let Err(e) = manifest.prepare_out_dir() {
        return fail(&e);
    }
    let traj = match evolve_pure(&QuantumState::level(cfg.initial_level), cfg) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let name = trajectory_file_name(cfg);
    let path = manifest.out_dir.join(&name);
    if manifest.emit.trajectory_csv {
        let written = File::create(&path)
            .map_err(|e| e.to_string())
            .and_then(|f| output::write_trajectory_csv(&traj, BufWriter::new(f)).map_err(|e| e.to_string()));
        if let Err(e) = written {
            return io_fail(&path, e);
        }
    }
    if manifest.emit.plot_script {
        let script = manifest.out_dir.join(name.replace(".csv", ".gp"));
        if let Err(e) = output::write_text(&script, &output::trajectory_plot_script(&name, direction)) {
            return io_fail(&script, e);
        }
    }

    let last = traj.last().expect("trajectory has at least the initial row");
    let (c_max, p_max) = trajectory_maxima(&traj).expect("nonempty");
    println!("{direction} {} -> {}", cfg.protocol, path.display());
    println!("  final populations  {:.6} {:.6} {:.6}", last.populations[0], last.populations[1], last.populations[2]);
    println!("  final energy       {:.6}", last.energy);
    println!("  final ergotropy    {:.6}", last.ergotropy);
    println!("  max ergotropy      {c_max:.6}");
    println!("  max charging power {p_max:.6}");
    if direction == Direction::Discharge {
        let pd = traj.samples.iter().map(|s| s.discharge_power).fold(f64::NEG_INFINITY, f64::max);
        println!("  max discharge power {pd:.6}");
    }
    println!("  min dark fidelity  {:.6}", traj.min_dark_fidelity());
    println!("  max norm error     {:.3e}", traj.max_norm_error());
    Exit::Success
}

pub fn cmd_charge(manifest: &RunManifest) -> Exit {
    cmd_run(manifest, Direction::Charge)
}

pub fn cmd_discharge(manifest: &RunManifest) -> Exit {
    cmd_run(manifest, Direction::Discharge)
}

pub fn cmd_sweep(manifest: &RunManifest) -> Exit {
    let Payload::Sweep(spec) = &manifest.payload else {
        eprintln!("error: sweep needs a sweep specification");
        return Exit::Config;
    };
    if let Err(e) = manifest.prepare_out_dir() {
        return fail(&e);
    }
    let result = match run_sweep(spec) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let name = format!("sweep_{}.csv", spec.parameter.name());
    let path = manifest.out_dir.join(&name);
    if manifest.emit.sweep_csv {
        let written = File::create(&path)
            .map_err(|e| e.to_string())
            .and_then(|f| output::write_sweep_csv(&result, BufWriter::new(f)).map_err(|e| e.to_string()));
        if let Err(e) = written {
            return io_fail(&path, e);
        }
    }
    if manifest.emit.plot_script {
        let script = manifest.out_dir.join(name.replace(".csv", ".gp"));
        if let Err(e) = output::write_text(&script, &output::sweep_plot_script(&name, spec.parameter.name())) {
            return io_fail(&script, e);
        }
    }

    println!("sweep {} ({} rows) -> {}", spec.parameter, result.rows.len(), path.display());
    for row in &result.rows {
        match &row.outcome {
            Ok(m) => println!(
                "  {:>8.4} {:<9} C_max {:.6}  P_max {:.6}  C_final {:.6}",
                row.value, row.protocol, m.c_max, m.p_max, m.c_final
            ),
            Err(e) => eprintln!("  {:>8.4} {:<9} failed: {e}", row.value, row.protocol),
        }
    }
    if result.succeeded() == 0 {
        eprintln!("error: every sweep row failed");
        return Exit::Integration;
    }
    Exit::Success
}

pub fn cmd_validate(faults: &validate::Faults) -> Exit {
    let checks = validate::run_checks(faults);
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        println!("all {} invariants hold", checks.len());
        Exit::Success
    } else {
        eprintln!("failed invariants: {}", failed.join(", "));
        Exit::Validation
    }
}

pub fn run(cli: Cli) -> Exit {
    match cli.command {
        Command::Charge(args) => match RunManifest::for_run(&args, Direction::Charge) {
            Ok(m) => cmd_charge(&m),
            Err(e) => fail(&e),
        },
        Command::Discharge(args) => match RunManifest::for_run(&args, Direction::Discharge) {
            Ok(m) => cmd_discharge(&m),
            Err(e) => fail(&e),
        },
        Command::Sweep(args) => match RunManifest::for_sweep(&args) {
            Ok(m) => cmd_sweep(&m),
            Err(e) => fail(&e),
        },
        Command::Validate(args) => {
            let faults = validate::Faults {
                flip_cd_sign: args.inject_fault.contains(&Fault::CdSign),
                coarse_dt: args.inject_fault.contains(&Fault::CoarseDt),
            };
            cmd_validate(&faults)
        }
    }
}

/// Parse `std::env::args` and dispatch. Usage errors exit with 1.
pub fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli).into(),
        Err(e) => {
            let code = if e.use_stderr() { Exit::Config } else { Exit::Success };
            let _ = e.print();
            code.into()
        }
    }
}
