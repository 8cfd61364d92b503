//! Minkowski space is an exact fixed point of the scheme: evolve it and watch
//! the residuals stay at zero.

use cby::initial_data::flat_data;
use cby::integrator::{evolve, EvolveConfig, Event};

fn main() -> cby::Result<()> {
    let state = flat_data(8, 1.0);
    let cfg = EvolveConfig { monitor_every: 20, ..EvolveConfig::default() };
    let out = evolve(state.clone(), 1.0, &cfg, |ev| {
        let Event::Step { step, state, report, .. } = ev;
        if let Some(r) = report {
            println!("step {step:4}  t = {:.4}  worst residual {:.3e}", state.t, r.max_linf());
        }
        Ok(())
    })?;
    let change = out
        .state
        .components()
        .iter()
        .zip(state.components())
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    println!("{:?} after {} steps, max field change {change:.3e}", out.status, out.steps);
    Ok(())
}
