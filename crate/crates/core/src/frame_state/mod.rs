//! Field containers, equation of state, index conventions and pointwise frame algebra.
//!
//! Every field is stored structure-of-arrays on an `n^3` periodic lattice,
//! x-fastest: point `(i, j, k)` lives at `i + n * (j + n * k)`.

pub mod algebra;
pub mod eos;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

pub use algebra::PointState;
pub use eos::{eos_eval, Eos, EosPoint};

use crate::error::{Error, Result};
use algebra::{DET_TOL, NCOMP_FLUID, NCOMP_VACUUM};

fn zeros<const N: usize>(np: usize) -> [Vec<f64>; N] {
    std::array::from_fn(|_| vec![0.0; np])
}

/// Coframe coefficients `a^i_j` (row-major, `a[3 * i + j]`) and tilt covector `b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub a: [Vec<f64>; 9],
    pub b: [Vec<f64>; 3],
}

/// Rotation coefficients in the Lagrangian gauge.
///
/// `omega[3 * i + p]` holds `omega^k_{ij}` for `(j, k) = SPATIAL_PAIRS[p]`;
/// `x[3 * i + j] = X_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionField {
    pub omega: [Vec<f64>; 9],
    pub x: [Vec<f64>; 9],
    pub y: [Vec<f64>; 3],
}

/// `r_ss[p * 6 + q] = R_{hk lambda mu}` with `(h, k) = SPATIAL_PAIRS[p]`,
/// `(lambda, mu) = FRAME_PAIRS[q]`; `r_0s[h * 6 + q] = R_{0h lambda mu}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub r_ss: [Vec<f64>; 18],
    pub r_0s: [Vec<f64>; 18],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidField {
    pub eos: Eos,
    pub mu: Vec<f64>,
}

/// All evolved fields on the lattice plus coordinate time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub n: usize,
    pub domain_length: f64,
    pub t: f64,
    pub frame: FrameField,
    pub conn: ConnectionField,
    pub curv: CurvatureField,
    pub fluid: Option<FluidField>,
}

impl GridState {
    /// Minkowski data in vacuum mode: `a = I`, everything else zero.
    pub fn minkowski(n: usize, domain_length: f64) -> Self {
        let np = n * n * n;
        let mut a: [Vec<f64>; 9] = zeros(np);
        for d in [0, 4, 8] {
            a[d].fill(1.0);
        }
        Self {
            n,
            domain_length,
            t: 0.0,
            frame: FrameField { a, b: zeros(np) },
            conn: ConnectionField { omega: zeros(np), x: zeros(np), y: zeros(np) },
            curv: CurvatureField { r_ss: zeros(np), r_0s: zeros(np) },
            fluid: None,
        }
    }

    pub fn npoints(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.n as f64
    }

    pub fn is_fluid(&self) -> bool {
        self.fluid.is_some()
    }

    pub fn ncomp(&self) -> usize {
        if self.is_fluid() {
            NCOMP_FLUID
        } else {
            NCOMP_VACUUM
        }
    }

    pub fn eos(&self) -> Option<&Eos> {
        self.fluid.as_ref().map(|f| &f.eos)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Coordinates of a lattice point.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let dx = self.dx();
        [(idx % n) as f64 * dx, ((idx / n) % n) as f64 * dx, (idx / (n * n)) as f64 * dx]
    }

    /// Component arrays in canonical storage order.
    pub fn components(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::with_capacity(NCOMP_FLUID);
        v.extend(self.frame.a.iter().map(|c| c.as_slice()));
        v.extend(self.frame.b.iter().map(|c| c.as_slice()));
        v.extend(self.conn.omega.iter().map(|c| c.as_slice()));
        v.extend(self.conn.x.iter().map(|c| c.as_slice()));
        v.extend(self.conn.y.iter().map(|c| c.as_slice()));
        v.extend(self.curv.r_ss.iter().map(|c| c.as_slice()));
        v.extend(self.curv.r_0s.iter().map(|c| c.as_slice()));
        if let Some(f) = &self.fluid {
            v.push(f.mu.as_slice());
        }
        v
    }

    pub fn components_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::with_capacity(NCOMP_FLUID);
        v.extend(self.frame.a.iter_mut().map(|c| c.as_mut_slice()));
        v.extend(self.frame.b.iter_mut().map(|c| c.as_mut_slice()));
        v.extend(self.conn.omega.iter_mut().map(|c| c.as_mut_slice()));
        v.extend(self.conn.x.iter_mut().map(|c| c.as_mut_slice()));
        v.extend(self.conn.y.iter_mut().map(|c| c.as_mut_slice()));
        v.extend(self.curv.r_ss.iter_mut().map(|c| c.as_mut_slice()));
        v.extend(self.curv.r_0s.iter_mut().map(|c| c.as_mut_slice()));
        if let Some(f) = &mut self.fluid {
            v.push(f.mu.as_mut_slice());
        }
        v
    }

    pub fn component_names(&self) -> Vec<String> {
        algebra::component_names(self.is_fluid())
    }

    /// Gather the values at one point into canonical order.
    pub fn gather(&self, idx: usize, out: &mut [f64]) {
        let groups: [&[Vec<f64>]; 7] = [
            &self.frame.a,
            &self.frame.b,
            &self.conn.omega,
            &self.conn.x,
            &self.conn.y,
            &self.curv.r_ss,
            &self.curv.r_0s,
        ];
        let mut k = 0;
        for g in groups {
            for c in g {
                out[k] = c[idx];
                k += 1;
            }
        }
        if let Some(f) = &self.fluid {
            out[k] = f.mu[idx];
        }
    }

    pub fn point(&self, idx: usize) -> PointState {
        let mut v = [0.0; NCOMP_FLUID];
        self.gather(idx, &mut v[..self.ncomp()]);
        PointState::from_values(&v[..self.ncomp()])
    }

    pub fn set_point(&mut self, idx: usize, p: &PointState) {
        let nc = self.ncomp();
        let mut v = [0.0; NCOMP_FLUID];
        p.write_values(&mut v[..nc]);
        for (c, val) in self.components_mut().into_iter().zip(v.iter()) {
            c[idx] = *val;
        }
    }

    /// Write every point from a point-major buffer of width `ncomp()`.
    pub fn scatter(&mut self, buf: &[f64]) {
        let nc = self.ncomp();
        for (c, comp) in self.components_mut().into_iter().enumerate() {
            for (idx, v) in comp.iter_mut().enumerate() {
                *v = buf[idx * nc + c];
            }
        }
    }

    /// Switch to fluid mode with the given density field.
    pub fn with_fluid(mut self, eos: Eos, mu: Vec<f64>) -> Self {
        assert_eq!(mu.len(), self.npoints());
        self.fluid = Some(FluidField { eos, mu });
        self
    }
}

fn frame_at(frame: &FrameField, idx: usize) -> (Matrix3<f64>, Vector3<f64>) {
    let a = Matrix3::from_fn(|i, j| frame.a[3 * i + j][idx]);
    let b = Vector3::from_fn(|i, _| frame.b[i][idx]);
    (a, b)
}

/// Induced metric on the coordinate slice, `h_{jk} = a^i_j a^i_k - b_j b_k`.
pub fn spatial_metric(frame: &FrameField, idx: usize) -> Matrix3<f64> {
    let (a, b) = frame_at(frame, idx);
    metric_from(&a, &b)
}

pub fn metric_from(a: &Matrix3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    a.transpose() * a - b * b.transpose()
}

/// Frame matrix `A` and time components `B` of the spatial legs at one point.
///
/// `A[(i, k)] = A_i^k` is the coefficient of `d/dx^k` in `e_i`, so `A` is the
/// inverse of the coframe matrix up to transposition: `A = (a^{-1})^T`.
pub fn frame_matrix(frame: &FrameField, idx: usize) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    let (a, b) = frame_at(frame, idx);
    let g = algebra::FrameGeometry::new(&a, &b).map_err(|e| match e {
        Error::SingularFrame { det, .. } => Error::SingularFrame { index: idx, det },
        other => other,
    })?;
    Ok((g.frame, g.tilt))
}

/// Outcome of [`validate_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub min_abs_det: f64,
    pub min_metric_eigenvalue: f64,
    /// `None` in vacuum mode.
    pub min_mu: Option<f64>,
    pub max_tilt: f64,
    pub max_abs_y_vacuum: f64,
    pub non_finite: usize,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every type invariant of a state.
pub fn validate_state(state: &GridState) -> ValidationReport {
    let np = state.npoints();
    let mut min_det = f64::INFINITY;
    let mut min_eig = f64::INFINITY;
    let mut max_tilt: f64 = 0.0;
    let mut first_bad: Option<usize> = None;
    for idx in 0..np {
        let (a, b) = frame_at(&state.frame, idx);
        let det = a.determinant().abs();
        min_det = min_det.min(det);
        let h = metric_from(&a, &b);
        let eig = SymmetricEigen::new(h).eigenvalues.min();
        if !(eig > 0.0) {
            first_bad.get_or_insert(idx);
        }
        if !eig.is_nan() {
            min_eig = min_eig.min(eig);
        }
        if det > DET_TOL {
            if let Some(inv) = a.try_inverse() {
                let tilt = (inv.transpose() * b).norm();
                max_tilt = max_tilt.max(tilt);
            }
        }
    }
    let non_finite = state
        .components()
        .iter()
        .map(|c| c.iter().filter(|v| !v.is_finite()).count())
        .sum();
    let min_mu = state
        .fluid
        .as_ref()
        .map(|f| f.mu.iter().copied().fold(f64::INFINITY, f64::min));
    let max_abs_y_vacuum = if state.is_fluid() {
        0.0
    } else {
        state
            .conn
            .y
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    };

    let mut violations = Vec::new();
    if non_finite > 0 {
        violations.push(format!("{non_finite} non-finite values"));
    }
    if !(min_det > DET_TOL) {
        violations.push(format!("coframe singular: min |det a| = {min_det:e}"));
    }
    if let Some(idx) = first_bad {
        violations.push(format!(
            "spatial metric not positive definite (min eigenvalue {min_eig:e}, first at point {idx})"
        ));
    }
    if let Some(m) = min_mu {
        if !(m > 0.0) {
            violations.push(format!("non-positive density: min mu = {m:e}"));
        }
    }
    if max_abs_y_vacuum != 0.0 {
        violations.push(format!("vacuum state with nonzero Y (max |Y| = {max_abs_y_vacuum:e})"));
    }
    if !(max_tilt < 1.0) {
        violations.push(format!("frame tilt |B| = {max_tilt} reaches the light cone"));
    }
    ValidationReport {
        min_abs_det: min_det,
        min_metric_eigenvalue: min_eig,
        min_mu,
        max_tilt,
        max_abs_y_vacuum,
        non_finite,
        violations,
    }
}
