//! Principal matrices multiplying coordinate-time derivatives, their solves,
//! and the symmetric-hyperbolicity checker.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::frame_state::algebra::{FrameGeometry, SPATIAL_PAIRS};
use crate::frame_state::{frame_matrix, FrameField, GridState};

/// Pivot below which `1 - |B|^2` (or `mu' - |B|^2`) counts as singular.
pub const PIVOT_TOL: f64 = 1e-10;
/// Tilt above which solves switch from the closed form to a dense factorization.
pub const DENSE_TILT: f64 = 0.9;
/// Smallest admissible eigenvalue of a time block.
pub const EIGEN_THRESHOLD: f64 = 1e-8;
/// Eigenvalues below this pass but are reported as near-degenerate.
pub const WARN_EIGENVALUE: f64 = 0.05;

/// Which unknowns a block couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockId {
    /// Four unknowns: one time-type row coupled to three spatial rows.
    Ricci,
    /// `(R_{12}, R_{13}, R_{23}, R_{01}, R_{02}, R_{03})` for one fixed second pair.
    RiemannPair,
    /// `(Y_h, X_{h1}, X_{h2}, X_{h3})` for one fixed `h`, weighted by `mu'`.
    Fluid,
}

impl BlockId {
    pub fn dim(self) -> usize {
        match self {
            BlockId::Ricci | BlockId::Fluid => 4,
            BlockId::RiemannPair => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalBlock {
    pub block_id: BlockId,
    /// Coefficient of the coordinate time derivative.
    pub m0: DMatrix<f64>,
    /// Coefficients of the coordinate space derivatives.
    pub mk: [DMatrix<f64>; 3],
    pub tilt: Vector3<f64>,
    /// Diagonal weight of the time row (`mu'` for the fluid block, else 1).
    pub weight: f64,
}

/// Matrix with the given diagonal and off-diagonal coupling vector `c`, in the
/// layout of `id`. Time derivative blocks use `c = B`; space blocks `c = -A_.^k`.
fn assemble(id: BlockId, c: &Vector3<f64>, diag0: f64, diag: f64) -> DMatrix<f64> {
    let dim = id.dim();
    let mut m = DMatrix::zeros(dim, dim);
    match id {
        BlockId::Ricci | BlockId::Fluid => {
            m[(0, 0)] = diag0;
            for i in 0..3 {
                m[(i + 1, i + 1)] = diag;
                m[(0, i + 1)] = -c[i];
                m[(i + 1, 0)] = -c[i];
            }
        }
        BlockId::RiemannPair => {
            for i in 0..6 {
                m[(i, i)] = diag;
            }
            for (p, &(h, k)) in SPATIAL_PAIRS.iter().enumerate() {
                m[(p, 3 + k)] = -c[h];
                m[(3 + k, p)] = -c[h];
                m[(p, 3 + h)] = c[k];
                m[(3 + h, p)] = c[k];
            }
        }
    }
    m
}

pub fn block_from_geometry(geo: &FrameGeometry, mu_prime: f64, id: BlockId) -> PrincipalBlock {
    let weight = if id == BlockId::Fluid { mu_prime } else { 1.0 };
    let m0 = assemble(id, &geo.tilt, weight, 1.0);
    let mk = std::array::from_fn(|k| {
        let col = -geo.frame.column(k).into_owned();
        assemble(id, &col, 0.0, 0.0)
    });
    PrincipalBlock { block_id: id, m0, mk, tilt: geo.tilt, weight }
}

/// Principal block at one lattice point. `eos_mu_prime` only enters the fluid block.
pub fn principal_time_block(
    frame: &FrameField,
    eos_mu_prime: f64,
    block_id: BlockId,
    point: usize,
) -> Result<PrincipalBlock> {
    let (a, b) = coframe_at(frame, point);
    let geo = FrameGeometry::new(&a, &b).map_err(|_| Error::SingularFrame {
        index: point,
        det: a.determinant(),
    })?;
    Ok(block_from_geometry(&geo, eos_mu_prime, block_id))
}

fn coframe_at(frame: &FrameField, idx: usize) -> (Matrix3<f64>, Vector3<f64>) {
    (
        Matrix3::from_fn(|i, j| frame.a[3 * i + j][idx]),
        Vector3::from_fn(|i, _| frame.b[i][idx]),
    )
}

fn singular(detail: String) -> Error {
    Error::SingularPrincipal { index: 0, detail }
}

fn dense_solve(m: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let chol = m
        .cholesky()
        .ok_or_else(|| singular("time block not positive definite".into()))?;
    Ok(chol.solve(&DVector::from_row_slice(rhs)).iter().copied().collect())
}

/// Solves `[[w, -B^T], [-B, I]] (x0, x) = (r0, r)`.
pub fn solve_bordered(tilt: &Vector3<f64>, weight: f64, r0: f64, r: [f64; 3]) -> Result<[f64; 4]> {
    let nb2 = tilt.norm_squared();
    let pivot = weight - nb2;
    if !(pivot > PIVOT_TOL) {
        return Err(singular(format!("pivot {pivot:e} with |B|^2 = {nb2}")));
    }
    if nb2.sqrt() > DENSE_TILT {
        let id = if weight == 1.0 { BlockId::Ricci } else { BlockId::Fluid };
        let x = dense_solve(assemble(id, tilt, weight, 1.0), &[r0, r[0], r[1], r[2]])?;
        return Ok([x[0], x[1], x[2], x[3]]);
    }
    let x0 = (r0 + tilt[0] * r[0] + tilt[1] * r[1] + tilt[2] * r[2]) / pivot;
    Ok([x0, r[0] + tilt[0] * x0, r[1] + tilt[1] * x0, r[2] + tilt[2] * x0])
}

/// Solves the curvature pair block. `r1` holds the rows of the spatial pairs
/// in [`SPATIAL_PAIRS`] order, `r2` the three time-type rows.
pub fn solve_pair(tilt: &Vector3<f64>, r1: [f64; 3], r2: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let nb2 = tilt.norm_squared();
    let pivot = 1.0 - nb2;
    if !(pivot > PIVOT_TOL) {
        return Err(singular(format!("pivot {pivot:e} with |B|^2 = {nb2}")));
    }
    if nb2.sqrt() > DENSE_TILT {
        let rhs = [r1[0], r1[1], r1[2], r2[0], r2[1], r2[2]];
        let x = dense_solve(assemble(BlockId::RiemannPair, tilt, 1.0, 1.0), &rhs)?;
        return Ok(([x[0], x[1], x[2]], [x[3], x[4], x[5]]));
    }
    // Eliminate the spatial-pair unknowns: v_hk = r1_hk + B_h u_k - B_k u_h.
    let mut s = r2;
    for (p, &(h, k)) in SPATIAL_PAIRS.iter().enumerate() {
        s[k] += tilt[h] * r1[p];
        s[h] -= tilt[k] * r1[p];
    }
    let bs = tilt[0] * s[0] + tilt[1] * s[1] + tilt[2] * s[2];
    let u: [f64; 3] = std::array::from_fn(|h| (s[h] - tilt[h] * bs) / pivot);
    let v: [f64; 3] = std::array::from_fn(|p| {
        let (h, k) = SPATIAL_PAIRS[p];
        r1[p] + tilt[h] * u[k] - tilt[k] * u[h]
    });
    Ok((v, u))
}

/// `m0^{-1} rhs` for any principal block.
pub fn solve_time_block(block: &PrincipalBlock, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != block.block_id.dim() {
        return Err(Error::InvalidArgument(format!(
            "rhs of length {} for a block of dimension {}",
            rhs.len(),
            block.block_id.dim()
        )));
    }
    match block.block_id {
        BlockId::Ricci | BlockId::Fluid => {
            Ok(solve_bordered(&block.tilt, block.weight, rhs[0], [rhs[1], rhs[2], rhs[3]])?.to_vec())
        }
        BlockId::RiemannPair => {
            let (v, u) = solve_pair(&block.tilt, [rhs[0], rhs[1], rhs[2]], [rhs[3], rhs[4], rhs[5]])?;
            Ok(vec![v[0], v[1], v[2], u[0], u[1], u[2]])
        }
    }
}

/// Result of [`fosh_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FoshReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Lattice point and block attaining the minimum.
    pub location: (usize, BlockId),
    pub symmetric: bool,
    /// `mu' >= 1`; always true in vacuum.
    pub causal_sound: bool,
    pub mu_prime: Option<f64>,
    pub singular_frames: usize,
    pub pass: bool,
    pub warning: bool,
}

impl FoshReport {
    pub fn summary(&self) -> String {
        let verdict = if !self.pass {
            "FAIL"
        } else if self.warning {
            "PASS (near-degenerate)"
        } else {
            "PASS"
        };
        let mut s = format!(
            "hyperbolicity: {verdict}; min eigenvalue {:.6e} at point {} ({:?} block); max eigenvalue {:.6e}",
            self.min_eigenvalue, self.location.0, self.location.1, self.max_eigenvalue
        );
        if let Some(mp) = self.mu_prime {
            s.push_str(&format!("; mu' = {mp}"));
            if !self.causal_sound {
                s.push_str(" < 1, sound speed exceeds light speed");
            }
        }
        if self.singular_frames > 0 {
            s.push_str(&format!("; {} singular frames", self.singular_frames));
        }
        s
    }
}

/// Checks symmetry and positivity of every principal block at every point.
pub fn fosh_check(state: &GridState) -> FoshReport {
    let mu_prime = state.eos().map(|e| e.mu_prime());
    let mut ids = vec![BlockId::Ricci, BlockId::RiemannPair];
    if mu_prime.is_some() {
        ids.push(BlockId::Fluid);
    }
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    let mut location = (0, BlockId::RiemannPair);
    let mut symmetric = true;
    let mut singular_frames = 0;
    for idx in 0..state.npoints() {
        let Ok((frame, tilt)) = frame_matrix(&state.frame, idx) else {
            singular_frames += 1;
            continue;
        };
        let geo = FrameGeometry { inv_a: frame.transpose(), frame, tilt };
        for &id in &ids {
            let blk = block_from_geometry(&geo, mu_prime.unwrap_or(1.0), id);
            symmetric &= blk.m0 == blk.m0.transpose();
            for m in &blk.mk {
                symmetric &= *m == m.transpose();
            }
            let eig = SymmetricEigen::new(blk.m0).eigenvalues;
            let lo = eig.min();
            if !(lo >= min_eig) {
                min_eig = lo;
                location = (idx, id);
            }
            max_eig = max_eig.max(eig.max());
        }
    }
    let causal_sound = mu_prime.map_or(true, |m| m >= 1.0);
    let pass = symmetric && causal_sound && singular_frames == 0 && min_eig > EIGEN_THRESHOLD;
    FoshReport {
        min_eigenvalue: min_eig,
        max_eigenvalue: max_eig,
        location,
        symmetric,
        causal_sound,
        mu_prime,
        singular_frames,
        pass,
        warning: pass && min_eig < WARN_EIGENVALUE,
    }
}

/// Maximal coordinate speeds of light and sound:
/// `max over points of ||A||_op * c / (1 - |B|)`.
pub fn char_speeds(state: &GridState) -> Result<(f64, f64)> {
    let mut v: f64 = 0.0;
    for idx in 0..state.npoints() {
        let (frame, tilt) = frame_matrix(&state.frame, idx)?;
        let nb = tilt.norm();
        if !(nb < 1.0) {
            return Err(Error::SingularPrincipal {
                index: idx,
                detail: format!("|B| = {nb} >= 1"),
            });
        }
        let op = frame.singular_values().max();
        v = v.max(op / (1.0 - nb));
    }
    let cs = state.eos().map_or(0.0, |e| e.sound_speed_sq().sqrt());
    Ok((v, v * cs))
}
