//! Pointwise right-hand side of the reduced systems.
//!
//! Frame derivatives split as `e_i = D_i + B_i d_t` with `D_i = A_i^k d_k`.
//! The `d_t` pieces are collected on the left and removed by the block solves.

use nalgebra::{Matrix3, Vector3};

use super::blocks::{solve_bordered, solve_pair, PIVOT_TOL};
use crate::error::{Error, Result};
use crate::frame_state::algebra::*;
use crate::frame_state::{Eos, EosPoint};

/// Everything derived from the values and coordinate derivatives at one point.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub index: usize,
    pub ps: PointState,
    pub geo: FrameGeometry,
    /// `w[k][i][j] = omega^k_{ij}`.
    pub w: [[[f64; 3]; 3]; 3],
    pub conn: Connection,
    /// Spatial frame derivative `D_i` of every component.
    pub dframe: [[f64; NCOMP_FLUID]; 3],
    pub fluid: Option<(Eos, EosPoint)>,
    pub ncomp: usize,
}

impl PointContext {
    /// `v` holds the component values, `d[axis]` their coordinate derivatives.
    /// In vacuum mode the stored `Y` is ignored and the geodesic gauge `Y = 0` used.
    #[inline]
    pub fn new(
        index: usize,
        v: &[f64],
        d: &[[f64; NCOMP_FLUID]; 3],
        eos: Option<&Eos>,
    ) -> Result<Self> {
        let ncomp = v.len();
        let mut ps = PointState::from_values(v);
        if eos.is_none() {
            ps.y = Vector3::zeros();
        }
        let geo = FrameGeometry::new(&ps.a, &ps.b).map_err(|e| match e {
            Error::SingularFrame { det, .. } => Error::SingularFrame { index, det },
            other => other,
        })?;
        let fluid = match eos {
            Some(e) => Some((
                *e,
                e.eval(ps.mu).map_err(|_| Error::NonPositiveDensity { index, mu: ps.mu })?,
            )),
            None => None,
        };
        let w = ps.omega_full();
        let conn = connection(&w, &ps.x, &ps.y);
        let mut dframe = [[0.0; NCOMP_FLUID]; 3];
        for (i, row) in dframe.iter_mut().enumerate() {
            let f = [geo.frame[(i, 0)], geo.frame[(i, 1)], geo.frame[(i, 2)]];
            let cols = d[0][..ncomp].iter().zip(&d[1][..ncomp]).zip(&d[2][..ncomp]);
            for (o, ((d0, d1), d2)) in row[..ncomp].iter_mut().zip(cols) {
                *o = f[0] * d0 + f[1] * d1 + f[2] * d2;
            }
        }
        Ok(Self { index, ps, geo, w, conn, dframe, fluid, ncomp })
    }

    /// Full curvature tensor `R_{abcd}`.
    pub fn riemann(&self) -> Tensor4 {
        expand_riemann(&self.ps.r)
    }

    pub fn is_fluid(&self) -> bool {
        self.fluid.is_some()
    }

    /// `D_i X_{hm}`.
    #[inline]
    pub fn dx_of(&self, i: usize, h: usize, m: usize) -> f64 {
        self.dframe[i][X_OFF + 3 * h + m]
    }

    /// Stored components of `D_i R`.
    pub fn d_riemann(&self, i: usize) -> &[f64] {
        &self.dframe[i][R_OFF..R_OFF + 36]
    }

    fn annotate(&self, e: Error) -> Error {
        match e {
            Error::SingularPrincipal { detail, .. } => Error::SingularPrincipal { index: self.index, detail },
            other => other,
        }
    }

    /// Frame derivatives `e_eps(mu)`, given `d_t mu`.
    pub fn e_mu(&self, dmu: f64) -> [f64; 4] {
        let mut e = [dmu, 0.0, 0.0, 0.0];
        if self.is_fluid() {
            for m in 0..3 {
                e[m + 1] = self.dframe[m][MU_OFF] + self.geo.tilt[m] * dmu;
            }
        }
        e
    }

    /// Coordinate-time derivative of every component, written to `out`.
    pub fn rhs(&self, out: &mut [f64]) -> Result<()> {
        let ps = &self.ps;
        let (a, x, y) = (&ps.a, &ps.x, &ps.y);
        let tilt = &self.geo.tilt;
        let w = &self.w;
        let r = |a, b, c, d| riemann_entry(&ps.r, a, b, c, d);
        let nb2 = tilt.norm_squared();
        if !(1.0 - nb2 > PIVOT_TOL) {
            return Err(Error::SingularPrincipal {
                index: self.index,
                detail: format!("|B|^2 = {nb2}"),
            });
        }
        out[..self.ncomp].fill(0.0);

        let da: Matrix3<f64> = x.transpose() * a;
        let db: Vector3<f64> = -(a.transpose() * y);
        for i in 0..3 {
            for j in 0..3 {
                out[A_OFF + 3 * i + j] = da[(i, j)];
            }
            out[B_OFF + i] = db[i];
        }

        let tr = x.trace();
        let dmu = match &self.fluid {
            Some((_, e)) => -(ps.mu + e.p) * tr,
            None => 0.0,
        };
        if self.is_fluid() {
            out[MU_OFF] = dmu;
        }

        // d_t omega^k_{ij} = R_{kj0i} - X_{im} omega^k_{mj} - Y_k X_{ij} + X_{ik} Y_j
        for i in 0..3 {
            for (p, &(j, k)) in SPATIAL_PAIRS.iter().enumerate() {
                let mut s = r(k + 1, j + 1, 0, i + 1) - y[k] * x[(i, j)] + x[(i, k)] * y[j];
                for m in 0..3 {
                    s -= x[(i, m)] * w[k][m][j];
                }
                out[W_OFF + omega_slot(i, p)] = s;
            }
        }

        match &self.fluid {
            None => {
                for h in 0..3 {
                    for i in 0..3 {
                        let mut s = -r(0, i + 1, 0, h + 1);
                        for m in 0..3 {
                            s -= x[(h, m)] * x[(m, i)];
                        }
                        out[X_OFF + 3 * h + i] = s;
                    }
                }
            }
            Some((_, e)) => {
                let mp = e.mu_prime;
                let dt_f = -tr / mp;
                let e_mu = self.e_mu(dmu);
                let e_f: [f64; 3] = std::array::from_fn(|m| e_mu[m + 1] / (mp * (ps.mu + e.p)));
                for h in 0..3 {
                    let mut r0 = -mp * y[h] * dt_f;
                    for m in 0..3 {
                        r0 += self.dx_of(m, h, m) - y[m] * (x[(m, h)] - x[(h, m)]) + mp * x[(h, m)] * e_f[m];
                        for n in 0..3 {
                            r0 -= w[n][m][h] * x[(n, m)] + w[n][m][m] * x[(h, n)];
                        }
                    }
                    let rx: [f64; 3] = std::array::from_fn(|i| {
                        let mut s = -r(0, i + 1, 0, h + 1) + y[h] * y[i] + self.dframe[i][Y_OFF + h]
                            + tr / mp * (x[(h, i)] - x[(i, h)]);
                        for m in 0..3 {
                            s -= x[(h, m)] * x[(m, i)] + w[m][i][h] * y[m];
                        }
                        s
                    });
                    let sol = solve_bordered(tilt, mp, r0, rx).map_err(|e| self.annotate(e))?;
                    out[Y_OFF + h] = sol[0];
                    for i in 0..3 {
                        out[X_OFF + 3 * h + i] = sol[i + 1];
                    }
                }
            }
        }

        let dr = [self.d_riemann(0), self.d_riemann(1), self.d_riemann(2)];
        let c = &self.conn;
        let rs = &ps.r;
        let rot: [[[f64; 6]; 6]; 4] = std::array::from_fn(|eps| pair_rotation(&c[eps]));
        // Rows over the second pair of the covariant derivatives that enter:
        // g_0[h][k] = nabla_h R_{0k..}, g_s[i][h] = nabla_i R_{ih..},
        // z_s[p] = nabla^(0)_0 R_{hk..}, z_0[h] = nabla^(0)_0 R_{0h..}.
        let mut g_0 = [[[0.0; 6]; 3]; 3];
        let mut g_s = [[[0.0; 6]; 3]; 3];
        for i in 0..3 {
            for h in 0..3 {
                if i != h {
                    g_0[i][h] = cov_riemann_row(Some(dr[i]), rs, &c[i + 1], &rot[i + 1], 0, h + 1);
                    g_s[i][h] = cov_riemann_row(Some(dr[i]), rs, &c[i + 1], &rot[i + 1], i + 1, h + 1);
                }
            }
        }
        let z_s: [[f64; 6]; 3] = std::array::from_fn(|p| {
            let (h, k) = SPATIAL_PAIRS[p];
            cov_riemann_row(None, rs, &c[0], &rot[0], h + 1, k + 1)
        });
        let z_0: [[f64; 6]; 3] = std::array::from_fn(|h| cov_riemann_row(None, rs, &c[0], &rot[0], 0, h + 1));

        let (rho, w_eos) = match &self.fluid {
            Some((eos, e)) => (fluid_source(ps.mu, e.p), eos.w),
            None => ([[0.0; 4]; 4], 0.0),
        };
        let e_mu = self.e_mu(dmu);
        for (q, &(l, m)) in FRAME_PAIRS.iter().enumerate() {
            let r1: [f64; 3] = std::array::from_fn(|p| {
                let (h, k) = SPATIAL_PAIRS[p];
                g_0[h][k][q] - g_0[k][h][q] - z_s[p][q]
            });
            let r2: [f64; 3] = std::array::from_fn(|h| {
                let hh = h + 1;
                let mut s = -z_0[h][q];
                for li in 0..3 {
                    if li != h {
                        s += g_s[li][h][q];
                    }
                }
                if self.is_fluid() {
                    s += cov_source(&rho, e_mu[m], w_eos, &c[m], l, hh)
                        - cov_source(&rho, e_mu[l], w_eos, &c[l], m, hh);
                }
                s
            });
            let (v, u) = solve_pair(tilt, r1, r2).map_err(|e| self.annotate(e))?;
            for p in 0..3 {
                out[R_OFF + ss_slot(p, q)] = v[p];
                out[R_OFF + os_slot(p, q)] = u[p];
            }
        }
        Ok(())
    }
}
