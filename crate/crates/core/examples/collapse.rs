//! A collapsing radiation universe runs into its curvature singularity. The
//! step size shrinks with the growing expansion rate until it underflows, and
//! the run stops with a breakdown status instead of stepping across.

use cby::initial_data::{flrw_data_dir, Direction};
use cby::integrator::{evolve, EvolveConfig, Event, RunStatus};
use cby::Eos;

fn main() -> cby::Result<()> {
    let state = flrw_data_dir(6, 1.0, 3.0, Eos::radiation(), Direction::Collapsing)?;
    let cfg = EvolveConfig { monitor_every: 0, ..EvolveConfig::default() };
    let mut last_print = 0.0;
    let out = evolve(state, 1.0, &cfg, |ev| {
        let Event::Step { state, step, dt, .. } = ev;
        if state.t - last_print >= 0.05 || dt < 1e-6 && step % 20 == 0 {
            last_print = state.t;
            println!("step {step:4}  t = {:.8}  dt = {dt:.2e}  mu = {:.4e}", state.t, state.fluid.as_ref().unwrap().mu[0]);
        }
        Ok(())
    })?;
    // From H0 = -1: a = sqrt(1 - 2t), singular at t = 1/2.
    match out.status {
        RunStatus::Breakdown(b) => println!("halted at t = {:.6} after {} steps: {b}", out.state.t, out.steps),
        other => println!("unexpected status {other:?}"),
    }
    Ok(())
}
