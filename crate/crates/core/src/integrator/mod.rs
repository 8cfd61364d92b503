//! Method-of-lines time evolution: periodic stencils, classical RK4, CFL step
//! control and Kreiss-Oliger dissipation.

pub mod stencil;

pub use stencil::{add_dissipation, coordinate_derivative, derivative_symbol, SpatialDerivs, StencilConfig};

use crate::error::{Error, Result};
use crate::frame_state::{validate_state, GridState};
use crate::monitor::{residual_report, ResidualReport};
use crate::system::{self, char_speeds, fosh_check, TimeDerivative};

/// Which reduced system a step integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Vacuum,
    Fluid,
}

impl Mode {
    pub fn of(state: &GridState) -> Self {
        if state.is_fluid() {
            Mode::Fluid
        } else {
            Mode::Vacuum
        }
    }
}

/// `cfl * dx / max(v_light, v_sound)`.
pub fn cfl_dt(state: &GridState, config: &StencilConfig) -> Result<f64> {
    let (light, sound) = char_speeds(state)?;
    Ok(config.cfl * state.dx() / light.max(sound))
}

/// Largest local growth rate, `max(|X|, |Y|)` over the grid (Frobenius norms).
/// Its inverse is the shortest dynamical time of the solution.
pub fn dynamical_rate(state: &GridState) -> f64 {
    (0..state.npoints())
        .map(|p| {
            let x: f64 = state.conn.x.iter().map(|c| c[p] * c[p]).sum();
            let y: f64 = state.conn.y.iter().map(|c| c[p] * c[p]).sum();
            x.max(y).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Right-hand side including dissipation.
pub fn evaluate(state: &GridState, config: &StencilConfig) -> Result<TimeDerivative> {
    let derivs = SpatialDerivs::compute(state, config.fd_order)?;
    let mut td = system::rhs(state, &derivs)?;
    if config.dissipation_eps > 0.0 {
        let (n, dx) = (state.n, state.dx());
        let comps = state.components();
        let mut outs = td.components_mut();
        use rayon::prelude::*;
        outs.par_iter_mut().zip(comps.par_iter()).for_each(|(o, c)| add_dissipation(c, n, dx, config, o));
    }
    Ok(td)
}

/// `out = base + h * k`, componentwise.
fn axpy_into(out: &mut GridState, base: &GridState, h: f64, k: &TimeDerivative) {
    use rayon::prelude::*;
    let b = base.components();
    let kc = k.components();
    out.components_mut().into_par_iter().zip(b.par_iter().zip(kc.par_iter())).for_each(|(o, (b, k))| {
        for ((o, b), k) in o.iter_mut().zip(b.iter()).zip(k.iter()) {
            *o = b + h * k;
        }
    });
}

fn accumulate(acc: &mut GridState, h: f64, k: &TimeDerivative) {
    use rayon::prelude::*;
    let kc = k.components();
    acc.components_mut().into_par_iter().zip(kc.par_iter()).for_each(|(o, k)| {
        for (o, k) in o.iter_mut().zip(k.iter()) {
            *o += h * k;
        }
    });
}

/// One classical RK4 step. The returned state is validated; failures are
/// reported as [`Error::StepRejected`] and the input state is left untouched.
pub fn rk4_step(state: &GridState, dt: f64, config: &StencilConfig, mode: Mode) -> Result<GridState> {
    if Mode::of(state) != mode {
        return Err(Error::InvalidArgument(format!("state is not in {mode:?} mode")));
    }
    let k1 = evaluate(state, config)?;
    let mut acc = state.clone();
    accumulate(&mut acc, dt / 6.0, &k1);
    let mut stage = state.clone();
    axpy_into(&mut stage, state, 0.5 * dt, &k1);
    drop(k1);
    let k2 = evaluate(&stage, config)?;
    accumulate(&mut acc, dt / 3.0, &k2);
    axpy_into(&mut stage, state, 0.5 * dt, &k2);
    drop(k2);
    let k3 = evaluate(&stage, config)?;
    accumulate(&mut acc, dt / 3.0, &k3);
    axpy_into(&mut stage, state, dt, &k3);
    drop(k3);
    let k4 = evaluate(&stage, config)?;
    accumulate(&mut acc, dt / 6.0, &k4);
    acc.t = state.t + dt;

    let report = validate_state(&acc);
    if !report.ok() {
        return Err(Error::StepRejected { reason: report.violations.join("; ") });
    }
    Ok(acc)
}

/// Evolution controls beyond the stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub stencil: StencilConfig,
    /// Run `fosh_check` every this many steps (and always before the first).
    pub fosh_every: usize,
    /// Compute a residual report every this many steps (0 disables).
    pub monitor_every: usize,
    /// Halt when any residual norm exceeds this.
    pub max_residual: f64,
    /// Halt when the CFL step falls below this.
    pub min_dt: f64,
    /// Use this step instead of the CFL step (the last step is still clipped to `t_end`).
    pub fixed_dt: Option<f64>,
    /// Cap on `dt * dynamical_rate`. Without it a CFL step can jump over a
    /// curvature singularity whose remaining time is shorter than `dx`.
    /// Ignored with `fixed_dt`.
    pub rate_limit: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            stencil: StencilConfig::default(),
            fosh_every: 10,
            monitor_every: 10,
            max_residual: 1e3,
            min_dt: 1e-8,
            fixed_dt: None,
            rate_limit: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Breakdown {
    SingularPrincipal(String),
    NonFinite(String),
    StepRejected(String),
    ResidualBlowup { name: &'static str, value: f64 },
    DtUnderflow { dt: f64 },
    LostHyperbolicity(String),
}

impl std::fmt::Display for Breakdown {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Breakdown::SingularPrincipal(s) => write!(f, "singular principal matrix: {s}"),
            Breakdown::NonFinite(s) => write!(f, "non-finite values: {s}"),
            Breakdown::StepRejected(s) => write!(f, "step rejected: {s}"),
            Breakdown::ResidualBlowup { name, value } => write!(f, "residual {name} = {value:e} above threshold"),
            Breakdown::DtUnderflow { dt } => write!(f, "time step {dt:e} below minimum"),
            Breakdown::LostHyperbolicity(s) => write!(f, "hyperbolicity lost: {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The initial state failed the hyperbolicity check; no step was taken.
    Refused(String),
    Breakdown(Breakdown),
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    /// Last accepted state.
    pub state: GridState,
    pub status: RunStatus,
    pub steps: usize,
}

/// Callback events during [`evolve`].
pub enum Event<'a> {
    /// After `step` accepted steps; `report` is present on monitor steps.
    Step { state: &'a GridState, step: usize, dt: f64, report: Option<&'a ResidualReport> },
}

fn classify(e: Error) -> Breakdown {
    match e {
        Error::SingularPrincipal { .. } => Breakdown::SingularPrincipal(e.to_string()),
        Error::StepRejected { reason } if reason.contains("non-finite") => Breakdown::NonFinite(reason),
        Error::StepRejected { reason } => Breakdown::StepRejected(reason),
        other => Breakdown::StepRejected(other.to_string()),
    }
}

/// Repeated RK4 steps up to `t_end`. Breakdown is reported in the status, never clamped.
pub fn evolve(
    state: GridState,
    t_end: f64,
    config: &EvolveConfig,
    mut callback: impl FnMut(Event<'_>) -> Result<()>,
) -> Result<EvolveOutcome> {
    config.stencil.validate()?;
    if !(t_end > state.t) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} is not after t = {}", state.t)));
    }
    let fosh = fosh_check(&state);
    if !fosh.pass {
        return Ok(EvolveOutcome { state, status: RunStatus::Refused(fosh.summary()), steps: 0 });
    }
    let mode = Mode::of(&state);
    let mut state = state;
    let mut steps = 0usize;
    let monitor = |s: &GridState, step: usize| -> Result<Option<ResidualReport>> {
        if config.monitor_every > 0 && step % config.monitor_every == 0 {
            Ok(Some(residual_report(s, config.stencil.fd_order)?))
        } else {
            Ok(None)
        }
    };
    let halt = |status: Breakdown, state: GridState, steps: usize| {
        Ok(EvolveOutcome { state, status: RunStatus::Breakdown(status), steps })
    };

    let first = match monitor(&state, 0) {
        Ok(r) => r,
        Err(e) => return halt(classify(e), state, 0),
    };
    callback(Event::Step { state: &state, step: 0, dt: 0.0, report: first.as_ref() })?;

    let eps_t = 1e-12 * t_end.abs().max(1.0);
    while state.t < t_end - eps_t {
        if steps > 0 && config.fosh_every > 0 && steps % config.fosh_every == 0 {
            let f = fosh_check(&state);
            if !f.pass {
                return halt(Breakdown::LostHyperbolicity(f.summary()), state, steps);
            }
        }
        let dt_cfl = match config.fixed_dt {
            Some(dt) => dt,
            None => match cfl_dt(&state, &config.stencil) {
                Ok(dt) => dt.min(config.rate_limit / dynamical_rate(&state)),
                Err(e) => return halt(classify(e), state, steps),
            },
        };
        if !(dt_cfl >= config.min_dt) {
            return halt(Breakdown::DtUnderflow { dt: dt_cfl }, state, steps);
        }
        let dt = dt_cfl.min(t_end - state.t);
        let next = match rk4_step(&state, dt, &config.stencil, mode) {
            Ok(s) => s,
            Err(e) => return halt(classify(e), state, steps),
        };
        state = next;
        steps += 1;
        if state.t >= t_end - eps_t {
            state.t = t_end;
        }
        let done = state.t >= t_end;
        let report = if done && config.monitor_every > 0 {
            residual_report(&state, config.stencil.fd_order).map(Some)
        } else {
            monitor(&state, steps)
        };
        let report = match report {
            Ok(r) => r,
            Err(e) => return halt(classify(e), state, steps),
        };
        if let Some(r) = &report {
            if let Some((name, value)) = r.worst() {
                if !(value <= config.max_residual) {
                    callback(Event::Step { state: &state, step: steps, dt, report: Some(r) })?;
                    return halt(Breakdown::ResidualBlowup { name, value }, state, steps);
                }
            }
        }
        callback(Event::Step { state: &state, step: steps, dt, report: report.as_ref() })?;
    }
    Ok(EvolveOutcome { state, status: RunStatus::Completed, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_state::Eos;

    #[test]
    fn cfl_examples() {
        let cfg = StencilConfig::default();
        let flat = GridState::minkowski(10, 1.0);
        assert!((cfl_dt(&flat, &cfg).unwrap() - 0.025).abs() < 1e-15);
        let rad = GridState::minkowski(10, 1.0).with_fluid(Eos::radiation(), vec![3.0; 1000]);
        assert!((cfl_dt(&rad, &cfg).unwrap() - 0.025).abs() < 1e-15);
        let mut s = GridState::minkowski(10, 1.0);
        for p in 0..1000 {
            for d in [0, 4, 8] {
                s.frame.a[d][p] = 0.5;
            }
            s.frame.b[0][p] = -0.25;
        }
        assert!((cfl_dt(&s, &cfg).unwrap() - 0.00625).abs() < 1e-15);
    }

    #[test]
    fn mode_mismatch_rejected() {
        let flat = GridState::minkowski(8, 1.0);
        assert!(rk4_step(&flat, 0.01, &StencilConfig::default(), Mode::Fluid).is_err());
    }
}
