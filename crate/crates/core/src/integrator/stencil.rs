//! Periodic centred finite differences and Kreiss-Oliger dissipation.

use crate::error::{Error, Result};
use crate::frame_state::GridState;

/// Method-of-lines discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilConfig {
    pub fd_order: usize,
    pub dissipation_eps: f64,
    pub cfl: f64,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { fd_order: 4, dissipation_eps: 0.0, cfl: 0.25 }
    }
}

impl StencilConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fd_order != 2 && self.fd_order != 4 {
            return Err(Error::InvalidArgument(format!("fd_order must be 2 or 4, got {}", self.fd_order)));
        }
        if !(self.dissipation_eps >= 0.0 && self.dissipation_eps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dissipation_eps must be >= 0, got {}",
                self.dissipation_eps
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        Ok(())
    }

    /// Half-width `r` of the dissipation operator `(D+ D-)^r`, with `2r = fd_order + 2`.
    pub fn dissipation_half_order(&self) -> usize {
        (self.fd_order + 2) / 2
    }
}

pub fn check_grid(n: usize, fd_order: usize) -> Result<()> {
    if n < fd_order + 1 {
        return Err(Error::GridTooSmall { n, fd_order });
    }
    Ok(())
}

/// Antisymmetric weights: `D f_i = sum_s c_s (f_{i+s} - f_{i-s})`.
fn weights(fd_order: usize) -> &'static [(isize, f64)] {
    const W2: [(isize, f64); 1] = [(1, 0.5)];
    const W4: [(isize, f64); 2] = [(1, 8.0 / 12.0), (2, -1.0 / 12.0)];
    if fd_order == 2 {
        &W2
    } else {
        &W4
    }
}

/// Applies `scale * sum_s c_s (f[i + s] - f[i - s])` along `axis` with periodic wraparound.
fn apply_stencil(field: &[f64], n: usize, axis: usize, taps: &[(isize, f64)], scale: f64, out: &mut [f64]) {
    if axis == 0 {
        let mut line = vec![0.0; n + 2 * PAD];
        for (f, o) in field.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            pad_line(f, &mut line);
            for (p, o) in o.iter_mut().enumerate() {
                let i = p + PAD;
                let mut acc = 0.0;
                for &(s, c) in taps {
                    acc += c * (line[i + s as usize] - line[i - s as usize]);
                }
                *o = acc * scale;
            }
        }
        return;
    }
    // Along y and z whole rows or planes shift together, which vectorizes.
    let stride = if axis == 1 { n } else { n * n };
    let block = n * stride;
    for (f, o) in field.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        for (j, o) in o.chunks_exact_mut(stride).enumerate() {
            o.fill(0.0);
            for &(s, c) in taps {
                let s = s as usize;
                let fp = &f[(j + s) % n * stride..][..stride];
                let fm = &f[(j + n - s) % n * stride..][..stride];
                for ((o, p), m) in o.iter_mut().zip(fp).zip(fm) {
                    *o += c * (p - m);
                }
            }
            for o in o.iter_mut() {
                *o *= scale;
            }
        }
    }
}

/// `f[i + 1] - 2 f[i] + f[i - 1]` along `axis`; exactly zero on constants.
fn second_difference(field: &[f64], n: usize, axis: usize, out: &mut [f64]) {
    if axis == 0 {
        let mut line = vec![0.0; n + 2 * PAD];
        for (f, o) in field.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            pad_line(f, &mut line);
            for (p, o) in o.iter_mut().enumerate() {
                let i = p + PAD;
                *o = (line[i + 1] - line[i]) - (line[i] - line[i - 1]);
            }
        }
        return;
    }
    let stride = if axis == 1 { n } else { n * n };
    let block = n * stride;
    for (f, o) in field.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        for (j, o) in o.chunks_exact_mut(stride).enumerate() {
            let fc = &f[j * stride..][..stride];
            let fp = &f[(j + 1) % n * stride..][..stride];
            let fm = &f[(j + n - 1) % n * stride..][..stride];
            for (((o, c), p), m) in o.iter_mut().zip(fc).zip(fp).zip(fm) {
                *o = (p - c) - (c - m);
            }
        }
    }
}

const PAD: usize = 2;

/// Copies one x line into `line` with `PAD` periodic ghost cells on each side.
fn pad_line(f: &[f64], line: &mut [f64]) {
    let n = f.len();
    line[PAD..PAD + n].copy_from_slice(f);
    for p in 0..PAD {
        line[p] = line[n + p];
        line[n + PAD + p] = line[PAD + p];
    }
}

/// Centred derivative of order `fd_order` along `axis` with periodic wraparound.
pub fn coordinate_derivative(field: &[f64], n: usize, axis: usize, dx: f64, fd_order: usize) -> Result<Vec<f64>> {
    if fd_order != 2 && fd_order != 4 {
        return Err(Error::InvalidArgument(format!("fd_order must be 2 or 4, got {fd_order}")));
    }
    check_grid(n, fd_order)?;
    if field.len() != n * n * n || axis > 2 {
        return Err(Error::InvalidArgument("field size or axis out of range".into()));
    }
    let mut out = vec![0.0; field.len()];
    apply_stencil(field, n, axis, weights(fd_order), 1.0 / dx, &mut out);
    Ok(out)
}

/// Fourier symbol of the derivative stencil: `D e^{i k x} = i s(k) e^{i k x}`.
pub fn derivative_symbol(kdx: f64, fd_order: usize) -> f64 {
    if fd_order == 2 {
        kdx.sin()
    } else {
        (8.0 * kdx.sin() - (2.0 * kdx).sin()) / 6.0
    }
}

/// Coordinate derivatives of every evolved component.
///
/// Holds a point-major copy of the state and evaluates the stencil on demand,
/// so a full derivative array is never materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDerivs {
    /// `u[idx * ncomp + component]`; empty for the all-zero set.
    u: Vec<f64>,
    n: usize,
    ncomp: usize,
    scale: f64,
    taps: &'static [(isize, f64)],
}

impl SpatialDerivs {
    pub fn compute(state: &GridState, fd_order: usize) -> Result<Self> {
        check_grid(state.n, fd_order)?;
        let nc = state.ncomp();
        let np = state.npoints();
        let mut u = vec![0.0; np * nc];
        let comps = state.components();
        for start in (0..np).step_by(64) {
            let end = (start + 64).min(np);
            for (c, comp) in comps.iter().enumerate() {
                for idx in start..end {
                    u[idx * nc + c] = comp[idx];
                }
            }
        }
        Ok(Self { u, n: state.n, ncomp: nc, scale: 1.0 / state.dx(), taps: weights(fd_order) })
    }

    /// Zero derivatives, as seen by a spatially homogeneous state.
    pub fn zeros(state: &GridState) -> Self {
        Self { u: Vec::new(), n: state.n, ncomp: state.ncomp(), scale: 0.0, taps: &[] }
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    /// Point-major value row of the point `shift` cells along `axis` from the
    /// point at lattice position `pos`.
    #[inline]
    fn row(&self, pos: [usize; 3], axis: usize, shift: usize) -> &[f64] {
        let n = self.n;
        let mut p = pos;
        p[axis] = (p[axis] + shift) % n;
        let j = p[0] + n * (p[1] + n * p[2]);
        &self.u[j * self.ncomp..][..self.ncomp]
    }

    fn position(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Derivative of `component` along `axis` at `idx`.
    pub fn get(&self, idx: usize, axis: usize, component: usize) -> f64 {
        if self.u.is_empty() {
            return 0.0;
        }
        let pos = self.position(idx);
        let mut acc = 0.0;
        for &(s, c) in self.taps {
            let s = s as usize;
            acc += c * (self.row(pos, axis, s)[component] - self.row(pos, axis, self.n - s)[component]);
        }
        acc * self.scale
    }

    /// Values of every component at `idx`, when the buffer holds them.
    pub fn values(&self, idx: usize) -> Option<&[f64]> {
        if self.u.is_empty() {
            None
        } else {
            Some(&self.u[idx * self.ncomp..][..self.ncomp])
        }
    }

    pub fn gather(&self, idx: usize, out: &mut [[f64; crate::frame_state::algebra::NCOMP_FLUID]; 3]) {
        let nc = self.ncomp;
        if self.u.is_empty() {
            for o in out.iter_mut() {
                o[..nc].fill(0.0);
            }
            return;
        }
        let pos = self.position(idx);
        let n = self.n;
        for (axis, o) in out.iter_mut().enumerate() {
            let o = &mut o[..nc];
            // Same operation order as the single-field stencil, so both agree bitwise.
            match *self.taps {
                [(1, c1)] => {
                    let (p1, m1) = (self.row(pos, axis, 1), self.row(pos, axis, n - 1));
                    for (o, (p1, m1)) in o.iter_mut().zip(p1.iter().zip(m1)) {
                        *o = c1 * (p1 - m1) * self.scale;
                    }
                }
                [(1, c1), (2, c2)] => {
                    let (p1, m1) = (self.row(pos, axis, 1), self.row(pos, axis, n - 1));
                    let (p2, m2) = (self.row(pos, axis, 2), self.row(pos, axis, n - 2));
                    let near = p1.iter().zip(m1);
                    let far = p2.iter().zip(m2);
                    for (o, ((p1, m1), (p2, m2))) in o.iter_mut().zip(near.zip(far)) {
                        *o = (c1 * (p1 - m1) + c2 * (p2 - m2)) * self.scale;
                    }
                }
                _ => {
                    for (c, o) in o.iter_mut().enumerate() {
                        *o = self.get(idx, axis, c);
                    }
                }
            }
        }
    }
}

/// Adds `-eps (-1)^r dx^(2r-1) / 2^(2r) (D+ D-)^r u`, summed over axes, to `rhs`.
pub fn add_dissipation(field: &[f64], n: usize, dx: f64, cfg: &StencilConfig, rhs: &mut [f64]) {
    if cfg.dissipation_eps == 0.0 {
        return;
    }
    let r = cfg.dissipation_half_order();
    let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
    let scale = sign * cfg.dissipation_eps / (4f64.powi(r as i32) * dx);
    let mut cur = vec![0.0; field.len()];
    let mut next = vec![0.0; field.len()];
    for axis in 0..3 {
        // (D+ D-)^r dx^(2r) as r nested second differences.
        cur.copy_from_slice(field);
        for _ in 0..r {
            second_difference(&cur, n, axis, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        for (o, t) in rhs.iter_mut().zip(&cur) {
            *o += scale * t;
        }
    }
}
