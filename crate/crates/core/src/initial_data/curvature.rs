//! Curvature from the Gauss and Codazzi relations plus the Einstein equations.

use crate::error::Result;
use crate::frame_state::algebra::*;
use crate::frame_state::{CurvatureField, GridState};
use crate::integrator::SpatialDerivs;
use crate::monitor::{codazzi_value, full_frame_derivs, omega_frame_derivs};
use crate::system::{point_context, PointContext};
use crate::tiles;

pub type Spatial4 = [[[[f64; 3]; 3]; 3]; 3];

/// `R~_{hkij}` of the spatial connection:
/// `e_i w^h_jk - e_j w^h_ik + w^h_im w^m_jk - w^h_jm w^m_ik - (w^m_ij - w^m_ji) w^h_mk`,
/// with `ew[i][h][j][k] = e_i(omega^h_{jk})`.
pub fn spatial_riemann_at(w: &[[[f64; 3]; 3]; 3], ew: &[[[[f64; 3]; 3]; 3]; 3]) -> Spatial4 {
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for h in 0..3 {
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = ew[i][h][j][k] - ew[j][h][i][k];
                    for m in 0..3 {
                        s += w[h][i][m] * w[m][j][k] - w[h][j][m] * w[m][i][k] - (w[m][i][j] - w[m][j][i]) * w[h][m][k];
                    }
                    out[h][k][i][j] = s;
                }
            }
        }
    }
    out
}

/// Curvature at one point from the current connection, with `dt` the time
/// derivatives used inside frame derivatives.
fn constrained_point(ctx: &PointContext, dt: &[f64]) -> [f64; 36] {
    let e = full_frame_derivs(ctx, dt);
    let ew = omega_frame_derivs(&e);
    let rt = spatial_riemann_at(&ctx.w, &ew);
    let x = &ctx.ps.x;
    let gauss = |h: usize, k: usize, i: usize, j: usize| rt[h][k][i][j] + x[(i, h)] * x[(j, k)] - x[(j, h)] * x[(i, k)];
    let rho = match &ctx.fluid {
        Some((_, pt)) => fluid_source(ctx.ps.mu, pt.p),
        None => [[0.0; 4]; 4],
    };
    let mut out = [0.0; 36];
    for (p, &(h, k)) in SPATIAL_PAIRS.iter().enumerate() {
        for (s, &(i, j)) in SPATIAL_PAIRS.iter().enumerate() {
            out[ss_slot(p, 3 + s)] = gauss(h, k, i, j);
        }
        for j in 0..3 {
            let v = codazzi_value(ctx, &e, h, k, j);
            out[ss_slot(p, j)] = v;
            out[os_slot(j, 3 + p)] = v;
        }
    }
    // Ricc_{hj} = -R_{0h0j} + sum_m R_{mhmj} = rho_{hj}
    for h in 0..3 {
        for j in 0..3 {
            let mut s = -rho[h + 1][j + 1];
            for m in 0..3 {
                if m != h && m != j {
                    s += gauss(m, h, m, j);
                }
            }
            out[os_slot(h, j)] = s;
        }
    }
    out
}

fn set_riemann(ctx: &mut PointContext, r: &[f64; 36]) {
    ctx.ps.r = *r;
}

/// Maximum fixed-point sweeps when the frame is tilted.
const MAX_SWEEPS: usize = 200;

fn point_curvature(mut ctx: PointContext) -> Result<[f64; 36]> {
    let zero = [0.0; NCOMP_FLUID];
    let mut r = constrained_point(&ctx, &zero);
    if ctx.geo.tilt.norm_squared() == 0.0 {
        return Ok(r);
    }
    // Frame derivatives carry B_i d_t, and d_t of the connection depends on R.
    let mut dt = [0.0; NCOMP_FLUID];
    for _ in 0..MAX_SWEEPS {
        set_riemann(&mut ctx, &r);
        ctx.rhs(&mut dt[..ctx.ncomp])?;
        let next = constrained_point(&ctx, &dt);
        let change = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        r = next;
        if change <= 1e-15 * scale {
            break;
        }
    }
    Ok(r)
}

/// Fills the curvature from the Gauss relation, the Codazzi relation (used
/// for both `R_{kh0j}` and `R_{0jkh}`) and `Ricc_{hj} = rho_{hj}` for `R_{0h0j}`.
/// The existing curvature of `state` is ignored.
pub fn curvature_with_derivs(state: &GridState, derivs: &SpatialDerivs) -> Result<CurvatureField> {
    let np = state.npoints();
    let buf = tiles::map_points(np, 36, |idx, row| {
        let r = point_curvature(point_context(state, derivs, idx)?)?;
        row.copy_from_slice(&r);
        Ok(())
    })?;
    let mut curv = CurvatureField {
        r_ss: std::array::from_fn(|_| vec![0.0; np]),
        r_0s: std::array::from_fn(|_| vec![0.0; np]),
    };
    for idx in 0..np {
        for s in 0..18 {
            curv.r_ss[s][idx] = buf[idx * 36 + s];
            curv.r_0s[s][idx] = buf[idx * 36 + 18 + s];
        }
    }
    Ok(curv)
}

/// [`curvature_with_derivs`] with derivatives from the stencil of order `fd_order`.
pub fn curvature_from_constraints(state: &GridState, fd_order: usize) -> Result<CurvatureField> {
    let derivs = SpatialDerivs::compute(state, fd_order)?;
    curvature_with_derivs(state, &derivs)
}

/// `R~_{hkij}` at every point.
pub fn spatial_riemann(state: &GridState, fd_order: usize) -> Result<Vec<Spatial4>> {
    let derivs = SpatialDerivs::compute(state, fd_order)?;
    let mut out = Vec::with_capacity(state.npoints());
    for idx in 0..state.npoints() {
        let ctx = point_context(state, &derivs, idx)?;
        let mut dt = [0.0; NCOMP_FLUID];
        if ctx.geo.tilt.norm_squared() > 0.0 {
            ctx.rhs(&mut dt[..ctx.ncomp])?;
        }
        let e = full_frame_derivs(&ctx, &dt);
        out.push(spatial_riemann_at(&ctx.w, &omega_frame_derivs(&e)));
    }
    Ok(out)
}
