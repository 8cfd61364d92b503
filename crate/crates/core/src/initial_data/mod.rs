//! Initial states in the Lagrangian frame gauge: exact scenarios, conversion
//! of Eulerian rest data, and curvature from the constraints.
//!
//! Convention (asserted in `tests/conventions.rs`): `X_{ij} = g(nabla_{e_i} e_0, e_j)`
//! is positive for expansion, so an expanding FLRW slice has `X = +H I` and
//! Eulerian data with `K_{ij} = -(1/2) d_t h_{ij}` maps to `X = -A K A^T`.

pub mod curvature;

use nalgebra::{Matrix3, Vector3};

pub use curvature::{curvature_from_constraints, curvature_with_derivs, spatial_riemann};

use crate::error::{Error, Result};
use crate::frame_state::algebra::{MU_OFF, NCOMP_FLUID, SPATIAL_PAIRS};
use crate::frame_state::{Eos, GridState};
use crate::integrator::SpatialDerivs;
use crate::monitor::{full_frame_derivs, gauge_defects};
use crate::system::point_context;

/// Symmetric 3x3 storage order: `11, 12, 13, 22, 23, 33`.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub fn sym_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    SYM_PAIRS.iter().position(|&p| p == (i, j)).unwrap()
}

/// Minkowski space, vacuum.
pub fn flat_data(n: usize, domain_length: f64) -> GridState {
    GridState::minkowski(n, domain_length)
}

/// Minkowski space seen from a uniformly tilted frame: `a = I`, constant `b`.
pub fn tilted_flat_data(n: usize, domain_length: f64, b: [f64; 3]) -> GridState {
    let mut s = GridState::minkowski(n, domain_length);
    for (c, v) in s.frame.b.iter_mut().zip(b) {
        c.fill(v);
    }
    s
}

fn homogeneous_curvature(state: &mut GridState) -> Result<()> {
    let derivs = SpatialDerivs::zeros(state);
    state.curv = curvature_with_derivs(state, &derivs)?;
    Ok(())
}

/// Kasner vacuum at time `t0`: `a = diag(t0^p_i)`, `X = diag(p_i / t0)`.
pub fn kasner_data(n: usize, domain_length: f64, p: [f64; 3], t0: f64) -> Result<GridState> {
    let s1: f64 = p.iter().sum();
    let s2: f64 = p.iter().map(|v| v * v).sum();
    if !((s1 - 1.0).abs() <= 1e-12 && (s2 - 1.0).abs() <= 1e-12) {
        return Err(Error::BadExponents { p });
    }
    if !(t0 > 0.0) {
        return Err(Error::InvalidArgument(format!("Kasner t0 must be positive, got {t0}")));
    }
    let mut s = GridState::minkowski(n, domain_length);
    s.t = t0;
    for i in 0..3 {
        s.frame.a[4 * i].fill(t0.powf(p[i]));
        s.conn.x[4 * i].fill(p[i] / t0);
    }
    homogeneous_curvature(&mut s)?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Expanding,
    Collapsing,
}

/// Hubble rate solving the Hamiltonian constraint `3 H^2 = mu0` on flat slices.
pub fn flrw_hubble(mu0: f64, dir: Direction) -> f64 {
    let h = (mu0 / 3.0).sqrt();
    match dir {
        Direction::Expanding => h,
        Direction::Collapsing => -h,
    }
}

/// Expanding flat FLRW with uniform density `mu0`.
pub fn flrw_data(n: usize, domain_length: f64, mu0: f64, eos: Eos) -> Result<GridState> {
    flrw_data_dir(n, domain_length, mu0, eos, Direction::Expanding)
}

pub fn flrw_data_dir(n: usize, domain_length: f64, mu0: f64, eos: Eos, dir: Direction) -> Result<GridState> {
    if !(mu0 > 0.0) {
        return Err(Error::NonPositiveDensity { index: 0, mu: mu0 });
    }
    let np = n * n * n;
    let mut s = GridState::minkowski(n, domain_length).with_fluid(eos, vec![mu0; np]);
    let h = flrw_hubble(mu0, dir);
    for d in [0, 4, 8] {
        s.conn.x[d].fill(h);
    }
    homogeneous_curvature(&mut s)?;
    Ok(s)
}

/// Eulerian data for matter initially at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianData {
    pub n: usize,
    pub domain_length: f64,
    /// Spatial metric in [`SYM_PAIRS`] order.
    pub h0: [Vec<f64>; 6],
    /// Second fundamental form, `K_{ij} = -(1/2) d_t h_{ij}`, in [`SYM_PAIRS`] order.
    pub k: [Vec<f64>; 6],
    /// Pressure; ignored in vacuum.
    pub p0: Vec<f64>,
    /// `None` for vacuum.
    pub eos: Option<Eos>,
}

impl EulerianData {
    pub fn metric_at(&self, idx: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.h0[sym_index(i, j)][idx])
    }

    pub fn k_at(&self, idx: usize) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.k[sym_index(i, j)][idx])
    }
}

/// Converts rest-frame Eulerian data to a frame-gauge state.
///
/// The coframe is the upper-triangular Cholesky factor `a` with `h0 = a^T a`,
/// `b = 0`; `omega` comes from the structure coefficients of the frame through
/// the Koszul formula; `Y_i = -e_i F`.
pub fn from_rest_eulerian(data: &EulerianData, fd_order: usize) -> Result<GridState> {
    let n = data.n;
    let np = n * n * n;
    let mut s = GridState::minkowski(n, data.domain_length);
    if let Some(eos) = data.eos {
        let mut mu = Vec::with_capacity(np);
        for (idx, &p) in data.p0.iter().enumerate() {
            if !(p > 0.0) {
                return Err(Error::NonPositiveDensity { index: idx, mu: p * eos.mu_prime() });
            }
            mu.push(p / eos.w);
        }
        if mu.len() != np {
            return Err(Error::InvalidArgument("p0 has the wrong length".into()));
        }
        s = s.with_fluid(eos, mu);
    }
    for idx in 0..np {
        let h = data.metric_at(idx);
        let chol = h.cholesky().ok_or(Error::NotPositiveDefinite { index: idx })?;
        let a = chol.l().transpose();
        let inv = a.try_inverse().ok_or(Error::NotPositiveDefinite { index: idx })?;
        let frame = inv.transpose();
        let x = -(frame * data.k_at(idx) * frame.transpose());
        for i in 0..3 {
            for j in 0..3 {
                s.frame.a[3 * i + j][idx] = a[(i, j)];
                s.conn.x[3 * i + j][idx] = x[(i, j)];
            }
        }
    }

    let derivs = SpatialDerivs::compute(&s, fd_order)?;
    let mut omega = vec![[0.0; 9]; np];
    let mut y = vec![Vector3::zeros(); np];
    for idx in 0..np {
        let ctx = point_context(&s, &derivs, idx)?;
        let e = full_frame_derivs(&ctx, &[0.0; NCOMP_FLUID]);
        let (_, c) = gauge_defects(&ctx, &e);
        // c[p][s] = c^p_{ij} for (i, j) = SPATIAL_PAIRS[s]
        let cc = |p: usize, i: usize, j: usize| -> f64 {
            if i == j {
                return 0.0;
            }
            let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
            let sidx = SPATIAL_PAIRS.iter().position(|&q| q == (lo, hi)).unwrap();
            sign * c[p][sidx]
        };
        for i in 0..3 {
            for (q, &(j, k)) in SPATIAL_PAIRS.iter().enumerate() {
                omega[idx][3 * i + q] = 0.5 * (cc(k, i, j) - cc(i, j, k) + cc(j, k, i));
            }
        }
        if let Some((_, pt)) = &ctx.fluid {
            let scale = pt.mu_prime * (ctx.ps.mu + pt.p);
            for i in 0..3 {
                y[idx][i] = 0.0 - ctx.dframe[i][MU_OFF] / scale;
            }
        }
    }
    for idx in 0..np {
        for c in 0..9 {
            s.conn.omega[c][idx] = omega[idx][c];
        }
        if s.is_fluid() {
            for i in 0..3 {
                s.conn.y[i][idx] = y[idx][i];
            }
        }
    }
    s.curv = curvature_from_constraints(&s, fd_order)?;
    Ok(s)
}

/// Scalar curvature of `psi(x) delta_ij` for `psi` depending on one coordinate:
/// `R = -(1/psi) (2 psi''/psi - (3/2) psi'^2/psi^2)`.
pub fn conformal_scalar_curvature(psi: f64, dpsi: f64, ddpsi: f64) -> f64 {
    -(2.0 * ddpsi / psi - 1.5 * dpsi * dpsi / (psi * psi)) / psi
}

/// FLRW with a conformally flat metric bump `psi = 1 + eps sin(2 pi x / L)`,
/// `K = -H h0`, density from the Hamiltonian constraint and fluid at rest.
pub fn perturbed_flrw_eulerian(n: usize, domain_length: f64, mu0: f64, eos: Eos, eps: f64) -> Result<EulerianData> {
    if !(mu0 > 0.0) {
        return Err(Error::NonPositiveDensity { index: 0, mu: mu0 });
    }
    let np = n * n * n;
    let h = flrw_hubble(mu0, Direction::Expanding);
    let kw = 2.0 * std::f64::consts::PI / domain_length;
    let dx = domain_length / n as f64;
    let mut h0: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; np]);
    let mut k: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; np]);
    let mut p0 = vec![0.0; np];
    for idx in 0..np {
        let x = (idx % n) as f64 * dx;
        let psi = 1.0 + eps * (kw * x).sin();
        let dpsi = eps * kw * (kw * x).cos();
        let ddpsi = -eps * kw * kw * (kw * x).sin();
        for d in [0, 3, 5] {
            h0[d][idx] = psi;
            k[d][idx] = -h * psi;
        }
        let mu = 3.0 * h * h + 0.5 * conformal_scalar_curvature(psi, dpsi, ddpsi);
        p0[idx] = eos.pressure(mu);
    }
    Ok(EulerianData { n, domain_length, h0, k, p0, eos: Some(eos) })
}

pub fn perturbed_flrw_data(n: usize, domain_length: f64, mu0: f64, eos: Eos, eps: f64, fd_order: usize) -> Result<GridState> {
    from_rest_eulerian(&perturbed_flrw_eulerian(n, domain_length, mu0, eos, eps)?, fd_order)
}

/// Vacuum, time-symmetric data with the same conformal bump (`K = 0`).
pub fn bump_vacuum_eulerian(n: usize, domain_length: f64, eps: f64) -> EulerianData {
    let np = n * n * n;
    let kw = 2.0 * std::f64::consts::PI / domain_length;
    let dx = domain_length / n as f64;
    let mut h0: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; np]);
    for idx in 0..np {
        let psi = 1.0 + eps * (kw * (idx % n) as f64 * dx).sin();
        for d in [0, 3, 5] {
            h0[d][idx] = psi;
        }
    }
    EulerianData {
        n,
        domain_length,
        h0,
        k: std::array::from_fn(|_| vec![0.0; np]),
        p0: Vec::new(),
        eos: None,
    }
}
