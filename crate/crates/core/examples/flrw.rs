//! Radiation-filled FLRW: the density decays as the frame expands.

use cby::initial_data::flrw_data;
use cby::integrator::{evolve, EvolveConfig, Event};
use cby::Eos;

fn main() -> cby::Result<()> {
    let mu0 = 3.0;
    let state = flrw_data(6, 1.0, mu0, Eos::radiation())?;
    let cfg = EvolveConfig { fixed_dt: Some(1e-3), monitor_every: 100, ..EvolveConfig::default() };
    // For radiation from H0 = 1: a(t) = sqrt(1 + 2t), mu = mu0 / a^4.
    let out = evolve(state, 0.5, &cfg, |ev| {
        let Event::Step { state, report, .. } = ev;
        if let Some(r) = report {
            let t = state.t;
            let mu = state.fluid.as_ref().unwrap().mu[0];
            let exact = mu0 / (1.0 + 2.0 * t).powi(2);
            println!("t = {t:.2}  mu = {mu:.12}  rel err {:.2e}  worst residual {:.2e}", (mu - exact).abs() / exact, r.max_linf());
        }
        Ok(())
    })?;
    println!("{:?}", out.status);
    Ok(())
}
