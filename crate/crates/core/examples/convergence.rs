//! Self-convergence of an inhomogeneous fluid run: the difference between
//! successive resolutions drops by about 2^4 per doubling.

use cby::initial_data::perturbed_flrw_data;
use cby::integrator::{evolve, EvolveConfig, StencilConfig};
use cby::{Eos, GridState};

fn run(n: usize, t_end: f64) -> cby::Result<GridState> {
    let dx = 1.0 / n as f64;
    let state = perturbed_flrw_data(n, 1.0, 3.0, Eos::radiation(), 1e-3, 4)?;
    let cfg = EvolveConfig {
        stencil: StencilConfig { fd_order: 4, dissipation_eps: 0.1, cfl: 0.25 },
        fixed_dt: Some(0.25 * dx),
        monitor_every: 0,
        ..EvolveConfig::default()
    };
    Ok(evolve(state, t_end, &cfg, |_| Ok(()))?.state)
}

/// L2 difference of the density between a grid and one twice as fine, on the coarse points.
fn density_gap(coarse: &GridState, fine: &GridState) -> f64 {
    let (mc, mf) = (&coarse.fluid.as_ref().unwrap().mu, &fine.fluid.as_ref().unwrap().mu);
    let n = coarse.n;
    let mut sum = 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let d = mc[coarse.index(i, j, k)] - mf[fine.index(2 * i, 2 * j, 2 * k)];
                sum += d * d;
            }
        }
    }
    (sum * coarse.dx().powi(3)).sqrt()
}

fn main() -> cby::Result<()> {
    let t_end = 0.125;
    let (s8, s16, s32) = (run(8, t_end)?, run(16, t_end)?, run(32, t_end)?);
    let (g1, g2) = (density_gap(&s8, &s16), density_gap(&s16, &s32));
    println!("|mu_8 - mu_16| = {g1:.3e}");
    println!("|mu_16 - mu_32| = {g2:.3e}");
    println!("ratio {:.2} (fourth order: 16)", g1 / g2);
    Ok(())
}
