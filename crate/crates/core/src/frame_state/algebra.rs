//! Pointwise frame algebra: component layout, index pairs, the full connection
//! and Riemann arrays reconstructed from storage, and covariant derivatives.
//!
//! Frame indices run `0..4` with `0` the timelike leg; spatial indices run
//! `0..3` and correspond to frame index `s + 1`. The frame metric is
//! `eta = diag(-1, 1, 1, 1)`, so raising or lowering flips the sign of the
//! `0` slot only.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Ordered spatial index pairs `(j, k)` with `j < k`.
pub const SPATIAL_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Ordered frame index pairs `(lambda, mu)` with `lambda < mu`.
pub const FRAME_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub const A_OFF: usize = 0;
pub const B_OFF: usize = 9;
pub const W_OFF: usize = 12;
pub const X_OFF: usize = 21;
pub const Y_OFF: usize = 30;
pub const R_OFF: usize = 33;
pub const MU_OFF: usize = 69;
pub const NCOMP_VACUUM: usize = 69;
pub const NCOMP_FLUID: usize = 70;

/// Threshold below which the coframe matrix is treated as singular.
pub const DET_TOL: f64 = 1e-12;

pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];
pub type Connection = [[[f64; 4]; 4]; 4];

#[inline]
pub fn eta(alpha: usize) -> f64 {
    if alpha == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Index of the frame pair `(l, m)` in [`FRAME_PAIRS`] and the sign of the
/// reordering, or `None` for `l == m`.
#[inline]
pub fn frame_pair(l: usize, m: usize) -> Option<(usize, f64)> {
    if l == m {
        return None;
    }
    let (lo, hi, s) = if l < m { (l, m, 1.0) } else { (m, l, -1.0) };
    let q = match (lo, hi) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    };
    Some((q, s))
}

/// Index of the spatial pair `(j, k)` in [`SPATIAL_PAIRS`] and the sign.
#[inline]
pub fn spatial_pair(j: usize, k: usize) -> Option<(usize, f64)> {
    if j == k {
        return None;
    }
    let (lo, hi, s) = if j < k { (j, k, 1.0) } else { (k, j, -1.0) };
    let p = match (lo, hi) {
        (0, 1) => 0,
        (0, 2) => 1,
        _ => 2,
    };
    Some((p, s))
}

/// Storage slot of `R_{hk lambda mu}` for spatial pair index `p` and frame pair `q`.
#[inline]
pub const fn ss_slot(p: usize, q: usize) -> usize {
    p * 6 + q
}

/// Storage slot of `R_{0h lambda mu}` for spatial `h` and frame pair `q`.
#[inline]
pub const fn os_slot(h: usize, q: usize) -> usize {
    18 + h * 6 + q
}

/// Storage slot of `omega^k_{ij}`, with `(j, k)` ordered as in [`SPATIAL_PAIRS`].
#[inline]
pub const fn omega_slot(i: usize, p: usize) -> usize {
    3 * i + p
}

/// Field values at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointState {
    /// Coframe coefficients, `a[(i, j)] = a^i_j`.
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub omega: [f64; 9],
    pub x: Matrix3<f64>,
    pub y: Vector3<f64>,
    pub r: [f64; 36],
    /// Energy density; zero in vacuum mode.
    pub mu: f64,
}

impl PointState {
    pub fn from_values(v: &[f64]) -> Self {
        let mut omega = [0.0; 9];
        omega.copy_from_slice(&v[W_OFF..W_OFF + 9]);
        let mut r = [0.0; 36];
        r.copy_from_slice(&v[R_OFF..R_OFF + 36]);
        Self {
            a: Matrix3::from_row_slice(&v[A_OFF..A_OFF + 9]),
            b: Vector3::from_row_slice(&v[B_OFF..B_OFF + 3]),
            omega,
            x: Matrix3::from_row_slice(&v[X_OFF..X_OFF + 9]),
            y: Vector3::from_row_slice(&v[Y_OFF..Y_OFF + 3]),
            r,
            mu: if v.len() > MU_OFF { v[MU_OFF] } else { 0.0 },
        }
    }

    pub fn write_values(&self, v: &mut [f64]) {
        for i in 0..3 {
            for j in 0..3 {
                v[A_OFF + 3 * i + j] = self.a[(i, j)];
                v[X_OFF + 3 * i + j] = self.x[(i, j)];
            }
            v[B_OFF + i] = self.b[i];
            v[Y_OFF + i] = self.y[i];
        }
        v[W_OFF..W_OFF + 9].copy_from_slice(&self.omega);
        v[R_OFF..R_OFF + 36].copy_from_slice(&self.r);
        if v.len() > MU_OFF {
            v[MU_OFF] = self.mu;
        }
    }

    pub fn omega_full(&self) -> [[[f64; 3]; 3]; 3] {
        omega_full(&self.omega)
    }
}

/// `w[k][i][j] = omega^k_{ij}` from the stored independent pairs.
pub fn omega_full(stored: &[f64]) -> [[[f64; 3]; 3]; 3] {
    let mut w = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for (p, &(j, k)) in SPATIAL_PAIRS.iter().enumerate() {
            let v = stored[omega_slot(i, p)];
            w[k][i][j] = v;
            w[j][i][k] = -v;
        }
    }
    w
}

/// Derived frame quantities at a point.
#[derive(Debug, Clone, Copy)]
pub struct FrameGeometry {
    pub inv_a: Matrix3<f64>,
    /// Frame matrix with `frame[(i, k)] = A_i^k`, so that
    /// `e_i = A_i^k (d_k - b_k d_0)`.
    pub frame: Matrix3<f64>,
    /// `B_i = -A_i^k b_k`, the time component of `e_i`.
    pub tilt: Vector3<f64>,
}

impl FrameGeometry {
    pub fn new(a: &Matrix3<f64>, b: &Vector3<f64>) -> Result<Self> {
        let det = a.determinant();
        if !(det.abs() > DET_TOL) {
            return Err(Error::SingularFrame { index: 0, det });
        }
        let inv_a = a.try_inverse().ok_or(Error::SingularFrame { index: 0, det })?;
        let frame = inv_a.transpose();
        let tilt = -(frame * b);
        Ok(Self { inv_a, frame, tilt })
    }

    pub fn tilt_norm_sq(&self) -> f64 {
        self.tilt.norm_squared()
    }
}

/// `conn[eps][alpha][nu] = omega^nu_{eps alpha}`, i.e.
/// `nabla_{e_eps} e_alpha = conn[eps][alpha][nu] e_nu`, in the Lagrangian
/// gauge: `omega^a_{0b} = 0`, `omega^0_{0a} = omega^a_{00} = Y_a`,
/// `omega^0_{ab} = omega^b_{a0} = X_{ab}`.
pub fn connection(
    omega: &[[[f64; 3]; 3]; 3],
    x: &Matrix3<f64>,
    y: &Vector3<f64>,
) -> Connection {
    let mut c = [[[0.0; 4]; 4]; 4];
    for m in 0..3 {
        c[0][0][m + 1] = y[m];
        c[0][m + 1][0] = y[m];
    }
    for i in 0..3 {
        for j in 0..3 {
            c[i + 1][0][j + 1] = x[(i, j)];
            c[i + 1][j + 1][0] = x[(i, j)];
            for k in 0..3 {
                c[i + 1][j + 1][k + 1] = omega[k][i][j];
            }
        }
    }
    c
}

/// For each flattened `(a, b, c, d)`, the stored slot holding `R_{abcd}` up to
/// sign, and the sign (0 for entries that vanish by antisymmetry).
const RIEMANN_TABLE: [(u8, i8); 256] = riemann_table();

const fn pair_index(a: usize, b: usize) -> (usize, i8) {
    // FRAME_PAIRS position of the ordered pair {a, b}, and the orientation sign.
    let (lo, hi, sign) = if a < b { (a, b, 1) } else { (b, a, -1) };
    let q = match (lo, hi) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    };
    (q, sign)
}

const fn riemann_table() -> [(u8, i8); 256] {
    let mut t = [(0u8, 0i8); 256];
    let mut i = 0;
    while i < 256 {
        let (a, b, c, d) = (i >> 6, (i >> 4) & 3, (i >> 2) & 3, i & 3);
        if a != b && c != d {
            let (p, s1) = pair_index(a, b);
            let (q, s2) = pair_index(c, d);
            // First pair (0, h) lives in the os block, spatial pairs in the ss block.
            let slot = if p < 3 { 18 + p * 6 + q } else { (p - 3) * 6 + q };
            t[i] = (slot as u8, s1 * s2);
        }
        i += 1;
    }
    t
}

/// `R_{abcd}` read directly from the 36 stored components.
#[inline(always)]
pub fn riemann_entry(s: &[f64], a: usize, b: usize, c: usize, d: usize) -> f64 {
    let (slot, sign) = RIEMANN_TABLE[(a << 6) | (b << 4) | (c << 2) | d];
    match sign {
        1 => s[slot as usize],
        -1 => -s[slot as usize],
        _ => 0.0,
    }
}

/// Full `R_{alpha beta gamma delta}` from the 36 stored components, using
/// antisymmetry in each pair. `R_{00..}` vanishes.
pub fn expand_riemann(s: &[f64]) -> Tensor4 {
    let mut t = [[[[0.0; 4]; 4]; 4]; 4];
    for (q, &(l, m)) in FRAME_PAIRS.iter().enumerate() {
        for (p, &(h, k)) in SPATIAL_PAIRS.iter().enumerate() {
            let v = s[ss_slot(p, q)];
            let (h, k) = (h + 1, k + 1);
            t[h][k][l][m] = v;
            t[k][h][l][m] = -v;
            t[h][k][m][l] = -v;
            t[k][h][m][l] = v;
        }
        for h in 0..3 {
            let v = s[os_slot(h, q)];
            t[0][h + 1][l][m] = v;
            t[h + 1][0][l][m] = -v;
            t[0][h + 1][m][l] = -v;
            t[h + 1][0][m][l] = v;
        }
    }
    t
}

/// `nabla_eps R_{abcd}` given the stored frame derivatives `d = e_eps(R)`
/// (36 components) and `conn_eps = conn[eps]`.
#[inline]
pub fn cov_riemann(
    d: &[f64],
    r: &Tensor4,
    conn_eps: &[[f64; 4]; 4],
    a: usize,
    b: usize,
    c: usize,
    dd: usize,
) -> f64 {
    let mut v = riemann_entry(d, a, b, c, dd);
    for nu in 0..4 {
        v -= conn_eps[a][nu] * r[nu][b][c][dd]
            + conn_eps[b][nu] * r[a][nu][c][dd]
            + conn_eps[c][nu] * r[a][b][nu][dd]
            + conn_eps[dd][nu] * r[a][b][c][nu];
    }
    v
}

/// Same as [`cov_riemann`] with a vanishing frame derivative.
#[inline]
pub fn cov_riemann_conn_only(
    r: &Tensor4,
    conn_eps: &[[f64; 4]; 4],
    a: usize,
    b: usize,
    c: usize,
    dd: usize,
) -> f64 {
    let mut v = 0.0;
    for nu in 0..4 {
        v -= conn_eps[a][nu] * r[nu][b][c][dd]
            + conn_eps[b][nu] * r[a][nu][c][dd]
            + conn_eps[c][nu] * r[a][b][nu][dd]
            + conn_eps[dd][nu] * r[a][b][c][nu];
    }
    v
}

/// Row of the 36 stored components for the first pair `(a, b)`, indexed by
/// [`FRAME_PAIRS`] position of the second pair: `row[q] = R_{ab lm}`.
#[inline]
pub fn riemann_row(s: &[f64], a: usize, b: usize) -> [f64; 6] {
    if a == b {
        return [0.0; 6];
    }
    // The table entry for (a, b, 0, 1) points at q = 0 of the wanted row.
    let (slot, sign) = RIEMANN_TABLE[(a << 6) | (b << 4) | 1];
    let base = slot as usize;
    let mut row = [0.0; 6];
    row.copy_from_slice(&s[base..base + 6]);
    if sign < 0 {
        for v in &mut row {
            *v = -*v;
        }
    }
    row
}

/// Action of the connection on the second index pair, as a 6x6 matrix on rows:
/// `(M row)_{lm} = sum_nu conn_eps[l][nu] R_{ab nu m} + conn_eps[m][nu] R_{ab l nu}`.
pub fn pair_rotation(conn_eps: &[[f64; 4]; 4]) -> [[f64; 6]; 6] {
    let mut m = [[0.0; 6]; 6];
    for (q, &(l, mm)) in FRAME_PAIRS.iter().enumerate() {
        for (qq, &(l2, m2)) in FRAME_PAIRS.iter().enumerate() {
            let mut v = 0.0;
            if mm == m2 {
                v += conn_eps[l][l2];
            }
            if mm == l2 {
                v -= conn_eps[l][m2];
            }
            if l == l2 {
                v += conn_eps[mm][m2];
            }
            if l == m2 {
                v -= conn_eps[mm][l2];
            }
            m[q][qq] = v;
        }
    }
    m
}

/// `nabla_eps R_{ab lm}` for all six second pairs at once. `d` holds the stored
/// frame derivatives `e_eps(R)` (or `None` for the connection terms alone) and
/// `rot = pair_rotation(conn_eps)`.
#[inline]
pub fn cov_riemann_row(
    d: Option<&[f64]>,
    r: &[f64],
    conn_eps: &[[f64; 4]; 4],
    rot: &[[f64; 6]; 6],
    a: usize,
    b: usize,
) -> [f64; 6] {
    let mut v = match d {
        Some(d) => riemann_row(d, a, b),
        None => [0.0; 6],
    };
    for nu in 0..4 {
        let (ca, cb) = (conn_eps[a][nu], conn_eps[b][nu]);
        if ca != 0.0 {
            let row = riemann_row(r, nu, b);
            for q in 0..6 {
                v[q] -= ca * row[q];
            }
        }
        if cb != 0.0 {
            let row = riemann_row(r, a, nu);
            for q in 0..6 {
                v[q] -= cb * row[q];
            }
        }
    }
    let own = riemann_row(r, a, b);
    for q in 0..6 {
        let mut s = 0.0;
        for qq in 0..6 {
            s += rot[q][qq] * own[qq];
        }
        v[q] -= s;
    }
    v
}

/// Trace-reversed perfect-fluid source in the comoving frame:
/// `rho_00 = (3p + mu)/2`, `rho_0i = 0`, `rho_ij = delta_ij (mu - p)/2`.
pub fn fluid_source(mu: f64, p: f64) -> [[f64; 4]; 4] {
    let mut r = [[0.0; 4]; 4];
    r[0][0] = 0.5 * (3.0 * p + mu);
    for i in 1..4 {
        r[i][i] = 0.5 * (mu - p);
    }
    r
}

/// `nabla_eps rho_{ab}` for the diagonal source, given `e_eps(mu)` and `w = dp/dmu`.
#[inline]
pub fn cov_source(
    rho: &[[f64; 4]; 4],
    e_mu: f64,
    w: f64,
    conn_eps: &[[f64; 4]; 4],
    a: usize,
    b: usize,
) -> f64 {
    let mut v = 0.0;
    if a == b {
        v += if a == 0 { 0.5 * (3.0 * w + 1.0) } else { 0.5 * (1.0 - w) } * e_mu;
    }
    for nu in 0..4 {
        v -= conn_eps[a][nu] * rho[nu][b] + conn_eps[b][nu] * rho[a][nu];
    }
    v
}

/// `Ricc_{bd} = eta^{ac} R_{abcd}`.
pub fn ricci(r: &Tensor4) -> [[f64; 4]; 4] {
    let mut ric = [[0.0; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += eta(a) * r[a][b][a][d];
            }
            ric[b][d] = s;
        }
    }
    ric
}

/// Canonical component names, in storage order. Frame indices are 0..3.
pub fn component_names(fluid: bool) -> Vec<String> {
    let mut names = Vec::with_capacity(NCOMP_FLUID);
    for i in 0..3 {
        for j in 0..3 {
            names.push(format!("a{}{}", i + 1, j + 1));
        }
    }
    for i in 0..3 {
        names.push(format!("b{}", i + 1));
    }
    for i in 0..3 {
        for &(j, k) in &SPATIAL_PAIRS {
            names.push(format!("w{}_{}{}", i + 1, j + 1, k + 1));
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            names.push(format!("x{}{}", i + 1, j + 1));
        }
    }
    for i in 0..3 {
        names.push(format!("y{}", i + 1));
    }
    for &(h, k) in &SPATIAL_PAIRS {
        for &(l, m) in &FRAME_PAIRS {
            names.push(format!("r{}{}{}{}", h + 1, k + 1, l, m));
        }
    }
    for h in 0..3 {
        for &(l, m) in &FRAME_PAIRS {
            names.push(format!("r0{}{}{}", h + 1, l, m));
        }
    }
    if fluid {
        names.push("mu".to_string());
    }
    names
}
