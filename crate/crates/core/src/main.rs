use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use combcpt::config::{load_config, RunConfig, RunMode};
use combcpt::error::{Error, Result};
use combcpt::output::{write_sweep, write_trajectory};
use combcpt::presets::preset;
use combcpt::propagator::{brute_force_run, Trajectory};
use combcpt::state::StateTolerance;
use combcpt::sweep::{radial_sweep, rep_rate_scenarios, velocity_sweep, SweepResult};

/// Frequency-comb coherent population trapping simulator.
#[derive(Parser, Debug)]
#[command(name = "combcpt", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; defaults to the config's output.path, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, env = "COMBCPT_WORKERS")]
    workers: Option<usize>,
    /// Override integration.steps_per_cycle.
    #[arg(long, global = true)]
    steps_per_cycle: Option<usize>,
    /// Override integration.window (half-width in units of tau0).
    #[arg(long, global = true)]
    window: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate a single trajectory and write per-pulse snapshots.
    Run,
    /// Run the config's velocity, radial or repetition-frequency sweep.
    Sweep,
    /// Run a built-in preset, or print its config with --emit-config.
    Preset {
        name: String,
        #[arg(long)]
        emit_config: bool,
    },
    /// Uniform-step reference integration; reports the deviation from the
    /// hybrid propagator on stderr.
    Oracle {
        /// Step size in fs (overrides oracle.step_fs).
        #[arg(long)]
        step_fs: Option<f64>,
        /// Allow spans beyond the default guard.
        #[arg(long)]
        allow_long_span: bool,
    },
}

enum Output {
    Trajectory(Trajectory),
    Sweep(SweepResult),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.command {
        Command::Preset { name, .. } => preset(name)?,
        _ => match &cli.config {
            Some(path) => load_config(path)?,
            None => return Err(Error::Parse("--config is required for this command".into())),
        },
    };
    apply_overrides(cli, &mut cfg)?;

    let result = match &cli.command {
        Command::Preset { emit_config: true, .. } => {
            return emit(cli, &cfg, |w| w.write_all(cfg.to_toml().as_bytes()).map_err(Into::into));
        }
        Command::Preset { .. } => match cfg.mode {
            RunMode::Single => Output::Trajectory(single(&cfg)?),
            RunMode::Oracle => Output::Trajectory(oracle(&cfg)?),
            _ => Output::Sweep(sweep(&cfg)?),
        },
        Command::Run => Output::Trajectory(single(&cfg)?),
        Command::Sweep => Output::Sweep(sweep(&cfg)?),
        Command::Oracle { step_fs, allow_long_span } => {
            let mut o = cfg.oracle.unwrap_or_default();
            if let Some(h) = step_fs {
                o.step_fs = *h;
            }
            o.allow_long_span |= allow_long_span;
            cfg.oracle = Some(o);
            cfg.validate()?;
            Output::Trajectory(oracle(&cfg)?)
        }
    };
    emit(cli, &cfg, |w| match &result {
        Output::Trajectory(t) => write_trajectory(t, w),
        Output::Sweep(s) => write_sweep(s, w),
    })
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) -> Result<()> {
    if let Some(w) = cli.workers {
        cfg.output.workers = w;
    }
    if let Some(s) = cli.steps_per_cycle {
        cfg.integration.steps_per_cycle = s;
    }
    if let Some(w) = cli.window {
        cfg.integration.window = w;
    }
    cfg.validate()
}

fn single(cfg: &RunConfig) -> Result<Trajectory> {
    let t = cfg.scenario()?.run()?;
    t.check_invariants(&StateTolerance::default())?;
    Ok(t)
}

fn sweep(cfg: &RunConfig) -> Result<SweepResult> {
    let base = cfg.scenario()?;
    let grid = cfg.grid_si()?;
    let workers = cfg.output.workers;
    match cfg.mode {
        RunMode::VelocitySweep => velocity_sweep(&grid, &base, workers),
        RunMode::RadialSweep => radial_sweep(&grid, &base, workers),
        RunMode::RepRate => {
            let mode = cfg.amplitude_mode();
            let jobs: Vec<_> = grid.iter().map(|&nu| (nu, mode)).collect();
            rep_rate_scenarios(&jobs, &base, workers)
        }
        RunMode::Single | RunMode::Oracle => Err(Error::invalid(
            "mode",
            "sweep needs mode velocity-sweep, radial-sweep or rep-rate",
        )),
    }
}

fn oracle(cfg: &RunConfig) -> Result<Trajectory> {
    let s = cfg.scenario()?;
    let levels = s.shifted_levels()?;
    let opts = cfg.brute_force_options();
    let brute = brute_force_run(&s.initial, &s.spec, &s.policy, &levels, &s.decays, s.radius, &opts)?;
    brute.check_invariants(&StateTolerance::default())?;
    let hybrid = s.run()?;
    let diff = hybrid
        .snapshots
        .iter()
        .zip(&brute.snapshots)
        .map(|(a, b)| a.rho.max_abs_diff(&b.rho))
        .fold(0.0, f64::max);
    eprintln!("max per-element deviation from hybrid propagator: {diff:e}");
    Ok(brute)
}

/// Writes to the configured path, or stdout when none is set.
fn emit<F>(cli: &Cli, cfg: &RunConfig, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::result::Result<(), csv::Error>,
{
    let path = cli.out.as_ref().or(cfg.output.path.as_ref());
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            write(&mut buf).map_err(|source| csv_error(p, source))?;
            fs::write(p, buf).map_err(|source| Error::Io {
                path: p.clone(),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|source| csv_error(Path::new("<stdout>"), source))
        }
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}
