//! Configuration, scenario dispatch, run orchestration and file output.

pub mod config;
pub mod snapshot;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{parse_config, print_config, ConfigError, RunConfig, Scenario, ValidationKind};
pub use snapshot::{read_any, read_snapshot, write_eulerian, write_snapshot, Snapshot, SnapshotError};

use crate::error::Error;
use crate::frame_state::GridState;
use crate::initial_data::{self, Direction};
use crate::integrator::{evolve, Event, RunStatus};
use crate::monitor::{residual_report, ResidualReport, RESIDUAL_NAMES};
use crate::system::{char_speeds, fosh_check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// Hyperbolicity violations map to 2, everything else to 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Validation { kind: ValidationKind::Hyperbolicity, .. }) => EXIT_REFUSED,
            _ => EXIT_CONFIG,
        }
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, CliError> {
    Ok(parse_config(&fs::read_to_string(path)?)?)
}

/// Builds the initial state of the configured scenario.
pub fn build_state(cfg: &RunConfig) -> Result<GridState, CliError> {
    let (n, l) = (cfg.n, cfg.domain_length);
    let state = match &cfg.scenario {
        Scenario::Flat => initial_data::flat_data(n, l),
        Scenario::Tilted { b } => initial_data::tilted_flat_data(n, l, *b),
        Scenario::Kasner { p, t0 } => initial_data::kasner_data(n, l, *p, *t0)?,
        Scenario::Flrw { mu0, collapse } => {
            let dir = if *collapse { Direction::Collapsing } else { Direction::Expanding };
            initial_data::flrw_data_dir(n, l, *mu0, cfg.eos(), dir)?
        }
        Scenario::PerturbedFlrw { mu0, epsilon } => {
            initial_data::perturbed_flrw_data(n, l, *mu0, cfg.eos(), *epsilon, cfg.fd_order)?
        }
        Scenario::Snapshot { path } => match read_any(path)? {
            Snapshot::State(s) => s,
            Snapshot::Eulerian(d) => initial_data::from_rest_eulerian(&d, cfg.fd_order)?,
        },
    };
    Ok(state)
}

/// Final report of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub exit_code: i32,
    pub status: String,
    pub steps: usize,
    pub t: f64,
    /// Mean energy density, for fluid runs.
    pub mu: Option<f64>,
    /// Mean diagonal coframe coefficients.
    pub a_diag: [f64; 3],
}

impl RunSummary {
    pub fn line(&self) -> String {
        let mut s = format!(
            "status={} steps={} t={:.17e} a11={:.17e} a22={:.17e} a33={:.17e}",
            self.status, self.steps, self.t, self.a_diag[0], self.a_diag[1], self.a_diag[2]
        );
        if let Some(mu) = self.mu {
            s.push_str(&format!(" mu={mu:.17e}"));
        }
        s
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn summarize(state: &GridState, exit_code: i32, status: String, steps: usize) -> RunSummary {
    RunSummary {
        exit_code,
        status,
        steps,
        t: state.t,
        mu: state.fluid.as_ref().map(|f| mean(&f.mu)),
        a_diag: [0, 4, 8].map(|d| mean(&state.frame.a[d])),
    }
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("state_{step}.bin"))
}

/// Evolves the configured scenario, writing `residuals.csv` and periodic
/// snapshots to the output directory. Progress and the summary line go to `log`.
pub fn run(cfg: &RunConfig, log: &mut impl Write) -> Result<RunSummary, CliError> {
    let state = build_state(cfg)?;
    let fosh = fosh_check(&state);
    writeln!(log, "{}", fosh.summary())?;
    if !fosh.pass {
        let summary = summarize(&state, EXIT_REFUSED, "refused".into(), 0);
        writeln!(log, "{}", summary.line())?;
        return Ok(summary);
    }
    let dir = PathBuf::from(&cfg.directory);
    fs::create_dir_all(&dir)?;
    let mut csv = io::BufWriter::new(fs::File::create(dir.join("residuals.csv"))?);
    writeln!(csv, "{}", ResidualReport::csv_header())?;

    let every = cfg.every_steps;
    let mut io_err: Option<CliError> = None;
    let mut last_written = None;
    let outcome = evolve(state, cfg.t_end, &cfg.evolve_config(), |ev| {
        let Event::Step { state, step, report, .. } = ev;
        if io_err.is_some() {
            return Ok(());
        }
        let res = (|| -> Result<(), CliError> {
            if let Some(r) = report {
                writeln!(csv, "{}", r.csv_row())?;
            }
            let last = state.t >= cfg.t_end;
            if step % every == 0 || last {
                write_snapshot(state, snapshot_path(&dir, step))?;
                last_written = Some(step);
            }
            Ok(())
        })();
        if let Err(e) = res {
            io_err = Some(e);
        }
        Ok(())
    })?;
    if let Some(e) = io_err {
        return Err(e);
    }
    csv.flush()?;
    let (code, status) = match &outcome.status {
        RunStatus::Completed => (EXIT_OK, "completed".to_string()),
        RunStatus::Refused(why) => (EXIT_REFUSED, format!("refused ({why})")),
        RunStatus::Breakdown(b) => {
            if last_written != Some(outcome.steps) {
                write_snapshot(&outcome.state, snapshot_path(&dir, outcome.steps))?;
            }
            (EXIT_BREAKDOWN, format!("breakdown ({b})"))
        }
    };
    let summary = summarize(&outcome.state, code, status, outcome.steps);
    writeln!(log, "{}", summary.line())?;
    Ok(summary)
}

/// Hyperbolicity, characteristic speeds and the initial residual table. No
/// evolution. Returns the exit code: 0 when the state is admissible, 2 otherwise.
pub fn check(cfg: &RunConfig, out: &mut impl Write) -> Result<i32, CliError> {
    let state = build_state(cfg)?;
    let fosh = fosh_check(&state);
    writeln!(out, "{}", fosh.summary())?;
    writeln!(out, "min_eigenvalue = {:.12e}", fosh.min_eigenvalue)?;
    writeln!(out, "max_eigenvalue = {:.12e}", fosh.max_eigenvalue)?;
    match char_speeds(&state) {
        Ok((light, sound)) => {
            writeln!(out, "light_speed = {light:.12e}")?;
            writeln!(out, "sound_speed = {sound:.12e}")?;
        }
        Err(e) => writeln!(out, "characteristic speeds unavailable: {e}")?,
    }
    let report = residual_report(&state, cfg.fd_order)?;
    writeln!(out, "{:<16} {:>22} {:>22}", "residual", "l2", "linf")?;
    for (name, n) in RESIDUAL_NAMES.iter().zip(&report.norms) {
        writeln!(out, "{name:<16} {:>22.12e} {:>22.12e}", n.l2, n.linf)?;
    }
    Ok(if fosh.pass { EXIT_OK } else { EXIT_REFUSED })
}

/// Builds the initial state and writes it as a snapshot.
pub fn idata(cfg: &RunConfig, path: impl AsRef<Path>) -> Result<GridState, CliError> {
    let state = build_state(cfg)?;
    write_snapshot(&state, path)?;
    Ok(state)
}
