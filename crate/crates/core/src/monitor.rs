//! Pointwise residuals of every identity the continuum system propagates, and
//! their grid norms.
//!
//! Frame derivatives inside the residuals are full frame derivatives
//! `e_i = D_i + B_i d_t`, with `d_t` taken from the evolution equations.

use crate::error::{Error, Result};
use crate::frame_state::algebra::*;
use crate::frame_state::GridState;
use crate::initial_data::curvature::spatial_riemann_at;
use crate::integrator::SpatialDerivs;
use crate::system::{point_context, PointContext};
use crate::tiles;

/// Residual names in report and CSV order.
pub const RESIDUAL_NAMES: [&str; 11] = [
    "gauss",
    "codazzi",
    "bianchi_cyclic",
    "div_curvature",
    "einstein_S",
    "symmetry_R",
    "symmetry_omega",
    "gauge_f",
    "gauge_v",
    "euler_P",
    "fgauge_F",
];

/// Every residual at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResiduals {
    /// `[p][s]`: first spatial pair `p`, second spatial pair `s`.
    pub gauss: [[f64; 3]; 3],
    /// `[p][j]`: `R_{kh0j}` minus its Codazzi value, `(k, h) = SPATIAL_PAIRS[p]`.
    pub codazzi: [[f64; 3]; 3],
    pub bianchi_cyclic: [f64; 6],
    pub div_curvature: [f64; 6],
    pub einstein: [[f64; 4]; 4],
    pub scal: f64,
    /// 15 pair-exchange differences followed by 16 cyclic sums.
    pub symmetry_r: [f64; 31],
    pub gauge_f: [f64; 3],
    /// `[p][ij]`.
    pub gauge_v: [[f64; 3]; 3],
    pub euler_p: [f64; 3],
    pub fgauge: [f64; 3],
}

fn norm<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl PointResiduals {
    /// Euclidean magnitude of each residual, in [`RESIDUAL_NAMES`] order.
    pub fn magnitudes(&self) -> [f64; 11] {
        [
            norm(self.gauss.iter().flatten()),
            norm(self.codazzi.iter().flatten()),
            norm(&self.bianchi_cyclic),
            norm(&self.div_curvature),
            norm(self.einstein.iter().flatten()),
            norm(&self.symmetry_r),
            0.0,
            norm(&self.gauge_f),
            norm(self.gauge_v.iter().flatten()),
            norm(&self.euler_p),
            norm(&self.fgauge),
        ]
    }
}

/// Frame derivative of every component, `e_i = D_i + B_i d_t`.
pub fn full_frame_derivs(ctx: &PointContext, dt: &[f64]) -> [[f64; NCOMP_FLUID]; 3] {
    let mut e = ctx.dframe;
    for (i, row) in e.iter_mut().enumerate() {
        for c in 0..ctx.ncomp {
            row[c] += ctx.geo.tilt[i] * dt[c];
        }
    }
    e
}

/// `ew[i][k][a][b] = e_i(omega^k_{ab})`.
pub fn omega_frame_derivs(e: &[[f64; NCOMP_FLUID]; 3]) -> [[[[f64; 3]; 3]; 3]; 3] {
    std::array::from_fn(|i| omega_full(&e[i][W_OFF..W_OFF + 9]))
}

/// `nabla~_k X_{hj} = e_k X_{hj} - omega^m_{kh} X_{mj} - omega^m_{kj} X_{hm}`.
pub fn spatial_cov_x(ctx: &PointContext, e: &[[f64; NCOMP_FLUID]; 3], k: usize, h: usize, j: usize) -> f64 {
    let (w, x) = (&ctx.w, &ctx.ps.x);
    let mut s = e[k][X_OFF + 3 * h + j];
    for m in 0..3 {
        s -= w[m][k][h] * x[(m, j)] + w[m][k][j] * x[(h, m)];
    }
    s
}

/// Codazzi value of `R_{kh0j} = R_{0jkh}`.
pub fn codazzi_value(ctx: &PointContext, e: &[[f64; NCOMP_FLUID]; 3], k: usize, h: usize, j: usize) -> f64 {
    let (x, y) = (&ctx.ps.x, &ctx.ps.y);
    -spatial_cov_x(ctx, e, k, h, j) + spatial_cov_x(ctx, e, h, k, j) + y[j] * (x[(k, h)] - x[(h, k)])
}

/// Residuals at one point.
pub fn point_residuals(ctx: &PointContext) -> Result<PointResiduals> {
    let mut dt = [0.0; NCOMP_FLUID];
    ctx.rhs(&mut dt[..ctx.ncomp])?;
    let e = full_frame_derivs(ctx, &dt);
    let ew = omega_frame_derivs(&e);
    let (x, y) = (&ctx.ps.x, &ctx.ps.y);
    let r = &ctx.riemann();
    let c = &ctx.conn;

    let rt = spatial_riemann_at(&ctx.w, &ew);
    let gauss = std::array::from_fn(|p| {
        let (h, k) = SPATIAL_PAIRS[p];
        std::array::from_fn(|s| {
            let (i, j) = SPATIAL_PAIRS[s];
            let want = rt[h][k][i][j] + x[(i, h)] * x[(j, k)] - x[(j, h)] * x[(i, k)];
            r[h + 1][k + 1][i + 1][j + 1] - want
        })
    });
    let codazzi = std::array::from_fn(|p| {
        let (k, h) = SPATIAL_PAIRS[p];
        std::array::from_fn(|j| r[k + 1][h + 1][0][j + 1] - codazzi_value(ctx, &e, k, h, j))
    });

    let er: [&[f64]; 3] = std::array::from_fn(|i| &e[i][R_OFF..R_OFF + 36]);
    let bianchi_cyclic = std::array::from_fn(|q| {
        let (l, m) = FRAME_PAIRS[q];
        cov_riemann(er[0], r, &c[1], 2, 3, l, m)
            + cov_riemann(er[1], r, &c[2], 3, 1, l, m)
            + cov_riemann(er[2], r, &c[3], 1, 2, l, m)
    });

    let (rho, w_eos, dmu) = match &ctx.fluid {
        Some((eos, pt)) => (fluid_source(ctx.ps.mu, pt.p), eos.w, dt[MU_OFF]),
        None => ([[0.0; 4]; 4], 0.0, 0.0),
    };
    let e_mu = ctx.e_mu(dmu);
    let div_curvature = std::array::from_fn(|q| {
        let (l, m) = FRAME_PAIRS[q];
        let mut s = 0.0;
        for h in 0..3 {
            s += cov_riemann(er[h], r, &c[h + 1], h + 1, 0, l, m);
        }
        if ctx.is_fluid() {
            s += -cov_source(&rho, e_mu[l], w_eos, &c[l], m, 0) + cov_source(&rho, e_mu[m], w_eos, &c[m], l, 0);
        }
        s
    });

    let ric = ricci(r);
    let einstein: [[f64; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|b| ric[a][b] - rho[a][b]));
    let scal = (0..4).map(|a| eta(a) * ric[a][a]).sum();

    let mut symmetry_r = [0.0; 31];
    let mut n = 0;
    for p in 0..6 {
        for q in p + 1..6 {
            let (a, b) = FRAME_PAIRS[p];
            let (cc, d) = FRAME_PAIRS[q];
            symmetry_r[n] = r[a][b][cc][d] - r[cc][d][a][b];
            n += 1;
        }
    }
    for a in 0..4 {
        for &(b, cc, d) in &[(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
            symmetry_r[n] = r[a][b][cc][d] + r[a][cc][d][b] + r[a][d][b][cc];
            n += 1;
        }
    }

    let (gauge_f, gauge_v) = gauge_defects(ctx, &e);

    let (euler_p, fgauge) = match &ctx.fluid {
        Some((_, pt)) => {
            let scale = pt.mu_prime * (ctx.ps.mu + pt.p);
            let p: [f64; 3] = std::array::from_fn(|i| y[i] + e_mu[i + 1] / scale);
            let dt_f = -x.trace() / pt.mu_prime;
            let cov_y = |i: usize, j: usize| {
                let mut s = e[i][Y_OFF + j];
                for m in 0..3 {
                    s -= ctx.w[m][i][j] * y[m];
                }
                s
            };
            let f = std::array::from_fn(|s| {
                let (i, j) = SPATIAL_PAIRS[s];
                cov_y(i, j) - cov_y(j, i) + (x[(i, j)] - x[(j, i)]) * dt_f
            });
            (p, f)
        }
        None => ([0.0; 3], [0.0; 3]),
    };

    Ok(PointResiduals {
        gauss,
        codazzi,
        bianchi_cyclic,
        div_curvature,
        einstein,
        scal,
        symmetry_r,
        gauge_f,
        gauge_v,
        euler_p,
        fgauge,
    })
}

/// Structure coefficients of the actual frame compared with the ones implied
/// by the connection: returns `(f_ij, v^p_ij)` over ordered pairs `i < j`.
pub fn gauge_defects(ctx: &PointContext, e: &[[f64; NCOMP_FLUID]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    use nalgebra::{Matrix3, Vector3};
    let a = &ctx.ps.a;
    let b = &ctx.ps.b;
    let inv = &ctx.geo.inv_a;
    let fa = &ctx.geo.frame;
    // e_i(A) with A = (a^{-1})^T, and e_i(B_j).
    let e_a: [Matrix3<f64>; 3] = std::array::from_fn(|i| {
        let ea = Matrix3::from_fn(|p, q| e[i][A_OFF + 3 * p + q]);
        -(inv * ea * inv).transpose()
    });
    let e_bt: [Vector3<f64>; 3] = std::array::from_fn(|i| {
        let eb = Vector3::from_fn(|k, _| e[i][B_OFF + k]);
        -(e_a[i] * b + fa * eb)
    });
    let mut f = [0.0; 3];
    let mut v = [[0.0; 3]; 3];
    for (s, &(i, j)) in SPATIAL_PAIRS.iter().enumerate() {
        let delta = Vector3::from_fn(|k, _| e_a[i][(j, k)] - e_a[j][(i, k)]);
        let delta0 = e_bt[i][j] - e_bt[j][i];
        let cvec = a * delta;
        let d = delta0 + delta.dot(b);
        f[s] = 0.5 * (d - (ctx.ps.x[(i, j)] - ctx.ps.x[(j, i)]));
        for p in 0..3 {
            v[p][s] = cvec[p] - (ctx.w[p][i][j] - ctx.w[p][j][i]);
        }
    }
    (f, v)
}

/// `(L2, Linf)` of a pointwise magnitude field: `L2 = sqrt(sum f^2 * cell volume)`.
pub fn norms(field: &[f64], cell_volume: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut m: f64 = 0.0;
    for &v in field {
        s += v * v;
        m = if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v.abs()) };
    }
    ((s * cell_volume).sqrt(), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

/// Grid norms of every residual at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub t: f64,
    /// In [`RESIDUAL_NAMES`] order.
    pub norms: [Norms; 11],
}

impl ResidualReport {
    pub fn get(&self, name: &str) -> Option<Norms> {
        RESIDUAL_NAMES.iter().position(|n| *n == name).map(|i| self.norms[i])
    }

    pub fn max_linf(&self) -> f64 {
        self.norms.iter().fold(0.0, |m, n| if n.linf.is_nan() { f64::NAN } else { m.max(n.linf) })
    }

    /// Largest `Linf` and its name; NaN wins.
    pub fn worst(&self) -> Option<(&'static str, f64)> {
        let mut best: Option<(&'static str, f64)> = None;
        for (name, n) in RESIDUAL_NAMES.iter().zip(&self.norms) {
            match best {
                _ if n.linf.is_nan() => return Some((name, f64::NAN)),
                Some((_, v)) if v >= n.linf => {}
                _ => best = Some((name, n.linf)),
            }
        }
        best
    }

    pub fn csv_header() -> String {
        let mut s = String::from("t");
        for n in RESIDUAL_NAMES {
            s.push_str(&format!(",{n}_l2,{n}_linf"));
        }
        s
    }

    pub fn csv_row(&self) -> String {
        let mut s = format!("{:e}", self.t);
        for n in &self.norms {
            s.push_str(&format!(",{:e},{:e}", n.l2, n.linf));
        }
        s
    }
}

/// Residuals at every point, computed with the given stencil order.
pub fn residual_fields(state: &GridState, derivs: &SpatialDerivs) -> Result<Vec<PointResiduals>> {
    let np = state.npoints();
    let mut out = Vec::with_capacity(np);
    // Parallel evaluation of magnitudes is in `residual_report`; this is the full-detail path.
    for idx in 0..np {
        out.push(point_residuals(&point_context(state, derivs, idx)?)?);
    }
    Ok(out)
}

/// Norms of all residuals.
pub fn residual_report(state: &GridState, fd_order: usize) -> Result<ResidualReport> {
    let derivs = SpatialDerivs::compute(state, fd_order)?;
    report_with(state, &derivs)
}

pub fn report_with(state: &GridState, derivs: &SpatialDerivs) -> Result<ResidualReport> {
    let np = state.npoints();
    let mags = tiles::map_points(np, 11, |idx, row| {
        let r = point_residuals(&point_context(state, derivs, idx)?)?;
        row.copy_from_slice(&r.magnitudes());
        Ok(())
    })?;
    let vol = state.dx().powi(3);
    let mut out = [Norms::default(); 11];
    for (k, o) in out.iter_mut().enumerate() {
        let col: Vec<f64> = (0..np).map(|p| mags[p * 11 + k]).collect();
        let (l2, linf) = norms(&col, vol);
        *o = Norms { l2, linf };
    }
    Ok(ResidualReport { t: state.t, norms: out })
}

/// Gauss and Codazzi residual fields.
pub fn gauss_codazzi_residuals(
    state: &GridState,
    derivs: &SpatialDerivs,
) -> Result<(Vec<[[f64; 3]; 3]>, Vec<[[f64; 3]; 3]>)> {
    let f = residual_fields(state, derivs)?;
    Ok((f.iter().map(|r| r.gauss).collect(), f.iter().map(|r| r.codazzi).collect()))
}

pub fn bianchi_cyclic_residual(state: &GridState, derivs: &SpatialDerivs) -> Result<Vec<[f64; 6]>> {
    Ok(residual_fields(state, derivs)?.iter().map(|r| r.bianchi_cyclic).collect())
}

pub fn div_curvature_residual(state: &GridState, derivs: &SpatialDerivs) -> Result<Vec<[f64; 6]>> {
    Ok(residual_fields(state, derivs)?.iter().map(|r| r.div_curvature).collect())
}

/// `S = Ricc - rho` and `scal` at every point. Purely algebraic.
pub fn einstein_residual(state: &GridState) -> (Vec<[[f64; 4]; 4]>, Vec<f64>) {
    let np = state.npoints();
    let mut s = Vec::with_capacity(np);
    let mut scal = Vec::with_capacity(np);
    for idx in 0..np {
        let p = state.point(idx);
        let r = expand_riemann(&p.r);
        let ric = ricci(&r);
        let rho = match state.eos() {
            Some(e) => fluid_source(p.mu, e.pressure(p.mu)),
            None => [[0.0; 4]; 4],
        };
        s.push(std::array::from_fn(|a| std::array::from_fn(|b| ric[a][b] - rho[a][b])));
        scal.push((0..4).map(|a| eta(a) * ric[a][a]).sum());
    }
    (s, scal)
}

/// Largest violation of each symmetry not enforced by storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub pair_exchange: f64,
    pub cyclic: f64,
    /// First-pair antisymmetry across stored blocks; zero because `R_{h0..}` is
    /// never stored independently of `R_{0h..}`.
    pub first_pair: f64,
    /// Zero because only the independent `omega` pairs are stored.
    pub omega: f64,
}

pub fn symmetry_residuals(state: &GridState) -> SymmetryReport {
    let mut rep = SymmetryReport { pair_exchange: 0.0, cyclic: 0.0, first_pair: 0.0, omega: 0.0 };
    for idx in 0..state.npoints() {
        let r = expand_riemann(&state.point(idx).r);
        for p in 0..6 {
            for q in p + 1..6 {
                let (a, b) = FRAME_PAIRS[p];
                let (c, d) = FRAME_PAIRS[q];
                rep.pair_exchange = rep.pair_exchange.max((r[a][b][c][d] - r[c][d][a][b]).abs());
            }
        }
        for a in 0..4 {
            for &(b, c, d) in &[(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
                rep.cyclic = rep.cyclic.max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
            }
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        rep.first_pair = rep.first_pair.max((r[a][b][c][d] + r[b][a][c][d]).abs());
                    }
                }
            }
        }
    }
    rep
}

/// Gauge defect fields `f_ij` and `v^p_ij`.
pub fn gauge_commutator_residuals(
    state: &GridState,
    derivs: &SpatialDerivs,
) -> Result<(Vec<[f64; 3]>, Vec<[[f64; 3]; 3]>)> {
    let f = residual_fields(state, derivs)?;
    Ok((f.iter().map(|r| r.gauge_f).collect(), f.iter().map(|r| r.gauge_v).collect()))
}

/// Euler residual `P_i` and gauge residual `F_ij`; fluid mode only.
pub fn euler_residuals(state: &GridState, derivs: &SpatialDerivs) -> Result<(Vec<[f64; 3]>, Vec<[f64; 3]>)> {
    if !state.is_fluid() {
        return Err(Error::VacuumMode);
    }
    let f = residual_fields(state, derivs)?;
    Ok((f.iter().map(|r| r.euler_p).collect(), f.iter().map(|r| r.fgauge).collect()))
}
