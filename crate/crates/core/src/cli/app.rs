//! Command-line front end of the `mechnet` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{schema_listing, Config, ConfigError};
use super::figs::{run_fig, FigId, DEFAULT_GRID_1D};
use super::output::{emit_csv, emit_heatmap, OutputError};
use super::sweep::{run_sweep, Axis, Field, Scheme, SweepSpec};
use crate::cascaded::{entanglement_report, solve_steady_state};
use crate::fock::{adaptive_dim, pulse_pipeline};
use crate::pulse::{e12, subsystem_cm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Largest truncation picked automatically by `oracle`.
pub const MAX_AUTO_TRUNCATION: usize = 60;

#[derive(Debug, Parser)]
#[command(
    name = "mechnet",
    version,
    about = "Remote entanglement between megahertz and gigahertz mechanical resonators",
    after_help = schema_listing()
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Configuration file (`key = value` lines); defaults are used when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-point steady-state report of the cascaded model
    Steady {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Grid sweep described by the sweep_* keys of the configuration
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// CSV output path
        #[arg(long)]
        out: PathBuf,
        /// Override the point count of every axis
        #[arg(long)]
        grid: Option<usize>,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Also write a PPM heatmap of the first output column
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Pulsed protocol at one point; with --out, the E_12 curve over R
    Pulse {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reflectivity points of the curve
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Fock-space cross-check of the pulsed protocol (uses pulse_r, pulse_w, pulse_reflectivity)
    Oracle {
        #[command(flatten)]
        config: ConfigArg,
        /// Levels per mode; chosen from r when omitted
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Reproduce a figure with the reference parameters
    Fig {
        /// 2a, 2b, 2c, 2d, 3a-3f or 6
        #[arg(long, visible_alias = "fig")]
        id: FigId,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Also write a PPM heatmap of the figure's field
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// List every configuration key with its default
    Keys,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Io { .. } => Failure::Io(e.to_string()),
            OutputError::Shape(m) => Failure::Config(m),
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

fn load(arg: &ConfigArg) -> Result<Config, Failure> {
    Ok(match &arg.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn hz(x: f64) -> f64 {
    x / (2.0 * std::f64::consts::PI)
}

fn steady(config: &Config, out: &mut dyn Write) -> Result<(), Failure> {
    let p = config.cascaded_params();
    let ss = solve_steady_state(&p)?;
    let rep = entanglement_report(&p)?;
    let opt = |x: Option<f64>| x.map_or("NaN".to_string(), |v| format!("{v:.10e}"));
    let lines = [
        ("stable", rep.stable.to_string()),
        ("E_cb", opt(rep.e_cb)),
        ("E_a1b", opt(rep.e_a1b)),
        ("E_mb", opt(rep.e_mb)),
        ("dn_b", opt(rep.dn_b)),
        ("dn_a1", opt(rep.dn_a1)),
        ("dn_m", opt(rep.dn_m)),
        ("G_c_hz", format!("{:.10e}", hz(ss.coupling_c.norm()))),
        ("G_1_hz", format!("{:.10e}", hz(ss.coupling_1.norm()))),
        ("G_2_hz", format!("{:.10e}", hz(ss.coupling_2.norm()))),
        ("G_m_hz", format!("{:.10e}", hz(ss.coupling_m.norm()))),
        ("steady_iterations", ss.iterations.to_string()),
        ("steady_residual", format!("{:.3e}", rep.steady_residual)),
        ("lyapunov_residual", opt(rep.lyapunov_residual)),
        ("physical", rep.physical.map_or("NaN".into(), |b| b.to_string())),
    ];
    for (k, v) in lines {
        writeln!(out, "{k} = {v}").map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(())
}

fn write_outputs(
    table: &super::sweep::Table,
    out: &Path,
    heatmap: Option<&Path>,
    field: Option<Field>,
) -> Result<(), Failure> {
    emit_csv(table, out)?;
    if let Some(path) = heatmap {
        let field = field.ok_or_else(|| Failure::Config("this output has no heatmap field".into()))?;
        emit_heatmap(table, field, path)?;
    }
    Ok(())
}

fn pulse(config: &Config, out_path: Option<&Path>, grid: Option<usize>, out: &mut dyn Write) -> Result<(), Failure> {
    let p = config.pulse_params()?;
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    if let Ok(d) = config.pulse_lab_params().derive() {
        writeln!(out, "G_blue_hz = {:.10e}", hz(d.g_blue)).map_err(io)?;
        writeln!(out, "G_red_hz = {:.10e}", hz(d.g_red)).map_err(io)?;
    }
    writeln!(out, "r = {:.10e}", p.r()).map_err(io)?;
    writeln!(out, "W = {:.10e}", p.w()).map_err(io)?;
    writeln!(out, "R = {:.10e}", p.reflectivity()).map_err(io)?;
    writeln!(out, "E_12 = {:.10e}", e12(&p)?).map_err(io)?;
    if let Some(path) = out_path {
        let mut fixed = config.clone();
        fixed.set_number("pulse_r", p.r())?;
        fixed.set_number("pulse_w", p.w())?;
        let spec = SweepSpec::new(
            Scheme::Pulse,
            Axis {
                key: "pulse_reflectivity".into(),
                min: 0.0,
                max: 1.0,
                steps: grid.unwrap_or(DEFAULT_GRID_1D),
            },
            None,
            fixed,
            vec![Field::E12],
        )?;
        let table = run_sweep(&spec, 1).map_err(|e| Failure::Solver(e.to_string()))?;
        emit_csv(&table, path)?;
    }
    Ok(())
}

fn oracle(config: &Config, truncation: Option<usize>, out: &mut dyn Write) -> Result<(), Failure> {
    let p = config.pulse_params()?;
    let dim = match truncation {
        Some(d) => d,
        None => {
            let d = adaptive_dim(p.r());
            if d > MAX_AUTO_TRUNCATION {
                return Err(Failure::Solver(format!(
                    "r = {:.4} needs {d} levels per mode; pass --truncation to force a size",
                    p.r()
                )));
            }
            d
        }
    };
    let rho = pulse_pipeline(p.r(), p.w(), p.reflectivity(), dim)?;
    let numeric = rho.numeric_cm()?;
    let gaussian = subsystem_cm(&p);
    let cm_diff = (numeric.matrix() - gaussian.matrix()).abs().max();
    let io = |e: std::io::Error| Failure::Io(e.to_string());
    writeln!(out, "truncation = {dim}").map_err(io)?;
    writeln!(out, "trace = {:.15}", rho.trace().re).map_err(io)?;
    writeln!(out, "min_eigenvalue = {:.3e}", rho.min_eigenvalue()?).map_err(io)?;
    writeln!(out, "cm_max_abs_diff = {cm_diff:.3e}").map_err(io)?;
    writeln!(out, "E_N_fock = {:.10e}", rho.numeric_log_negativity(1)?).map_err(io)?;
    writeln!(out, "E_12_gaussian = {:.10e}", e12(&p)?).map_err(io)?;
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Steady { config } => steady(&load(&config)?, out),
        Command::Sweep {
            config,
            out: path,
            grid,
            threads,
            heatmap,
        } => {
            let mut spec = SweepSpec::from_config(&load(&config)?)?;
            if let Some(g) = grid {
                spec = spec.with_steps(g)?;
            }
            let table = run_sweep(&spec, threads).map_err(|e| Failure::Config(e.to_string()))?;
            write_outputs(&table, &path, heatmap.as_deref(), spec.outputs.first().copied())
        }
        Command::Pulse {
            config,
            out: path,
            grid,
        } => pulse(&load(&config)?, path.as_deref(), grid, out),
        Command::Oracle { config, truncation } => oracle(&load(&config)?, truncation, out),
        Command::Fig {
            id,
            out: path,
            grid,
            threads,
            heatmap,
        } => {
            let table = run_fig(id, grid, threads).map_err(Failure::Config)?;
            write_outputs(&table, &path, heatmap.as_deref(), id.field())
        }
        Command::Keys => write!(out, "{}", schema_listing()).map_err(|e| Failure::Io(e.to_string())),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Config(m) => (EXIT_CONFIG, "configuration error", m),
                Failure::Solver(m) => (EXIT_SOLVER, "solver error", m),
                Failure::Io(m) => (EXIT_IO, "i/o error", m),
            };
            eprintln!("mechnet: {kind}: {msg}");
            code
        }
    }
}
