//! Homogeneous Kasner vacuum: the coframe follows `t^p_i` and the curvature
//! stays consistent with the constraints.

use cby::initial_data::kasner_data;
use cby::integrator::{evolve, EvolveConfig, Event};

fn main() -> cby::Result<()> {
    let p = [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0];
    let state = kasner_data(6, 1.0, p, 1.0)?;
    let cfg = EvolveConfig { fixed_dt: Some(1e-3), monitor_every: 250, ..EvolveConfig::default() };
    let out = evolve(state, 2.0, &cfg, |ev| {
        let Event::Step { state, report, .. } = ev;
        if let Some(r) = report {
            let t = state.t;
            let err = (0..3).map(|i| (state.frame.a[4 * i][0] - t.powf(p[i])).abs()).fold(0.0, f64::max);
            println!("t = {t:.3}  |a - t^p| = {err:.3e}  worst residual {:.3e}", r.max_linf());
        }
        Ok(())
    })?;
    println!("{:?} in {} steps", out.status, out.steps);
    Ok(())
}
