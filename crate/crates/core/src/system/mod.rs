//! Right-hand sides of the reduced vacuum and fluid systems, principal blocks
//! and the hyperbolicity checker.

pub mod blocks;
pub mod kernel;

pub use blocks::{
    char_speeds, fosh_check, principal_time_block, solve_time_block, BlockId, FoshReport, PrincipalBlock,
};
pub use kernel::PointContext;

use crate::error::{Error, Result};
use crate::frame_state::algebra::NCOMP_FLUID;
use crate::frame_state::GridState;
use crate::integrator::SpatialDerivs;
use crate::tiles;

/// Coordinate-time derivatives of every evolved field, same layout as [`GridState`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDerivative {
    pub da: [Vec<f64>; 9],
    pub db: [Vec<f64>; 3],
    pub domega: [Vec<f64>; 9],
    pub dx: [Vec<f64>; 9],
    pub dy: [Vec<f64>; 3],
    pub dr_ss: [Vec<f64>; 18],
    pub dr_0s: [Vec<f64>; 18],
    pub dmu: Option<Vec<f64>>,
}

impl TimeDerivative {
    pub fn zeros(np: usize, fluid: bool) -> Self {
        fn z<const N: usize>(np: usize) -> [Vec<f64>; N] {
            std::array::from_fn(|_| vec![0.0; np])
        }
        Self {
            da: z(np),
            db: z(np),
            domega: z(np),
            dx: z(np),
            dy: z(np),
            dr_ss: z(np),
            dr_0s: z(np),
            dmu: fluid.then(|| vec![0.0; np]),
        }
    }

    pub fn components(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::with_capacity(NCOMP_FLUID);
        for group in [&self.da[..], &self.db, &self.domega, &self.dx, &self.dy, &self.dr_ss, &self.dr_0s] {
            v.extend(group.iter().map(|c| c.as_slice()));
        }
        if let Some(m) = &self.dmu {
            v.push(m.as_slice());
        }
        v
    }

    pub fn components_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::with_capacity(NCOMP_FLUID);
        for group in [
            &mut self.da[..],
            &mut self.db,
            &mut self.domega,
            &mut self.dx,
            &mut self.dy,
            &mut self.dr_ss,
            &mut self.dr_0s,
        ] {
            v.extend(group.iter_mut().map(|c| c.as_mut_slice()));
        }
        if let Some(m) = &mut self.dmu {
            v.push(m.as_mut_slice());
        }
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m: f64, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }
}

/// Builds the [`PointContext`] of one lattice point. `derivs` must come from
/// `state`; its value rows are used in place of a strided gather.
#[inline]
pub fn point_context(state: &GridState, derivs: &SpatialDerivs, idx: usize) -> Result<PointContext> {
    let nc = state.ncomp();
    let mut v = [0.0; NCOMP_FLUID];
    match derivs.values(idx) {
        Some(u) if u.len() == nc => v[..nc].copy_from_slice(u),
        _ => state.gather(idx, &mut v[..nc]),
    }
    let mut d = [[0.0; NCOMP_FLUID]; 3];
    derivs.gather(idx, &mut d);
    PointContext::new(idx, &v[..nc], &d, state.eos())
}

fn assemble(state: &GridState, derivs: &SpatialDerivs) -> Result<TimeDerivative> {
    let nc = state.ncomp();
    if derivs.ncomp() != nc {
        return Err(Error::InvalidArgument(format!(
            "derivative set has {} components, state has {nc}",
            derivs.ncomp()
        )));
    }
    let np = state.npoints();
    let mut td = TimeDerivative::zeros(np, state.is_fluid());
    tiles::map_points_into(np, td.components_mut(), |idx, row| point_context(state, derivs, idx)?.rhs(row))?;
    Ok(td)
}

/// Reduced vacuum system in the geodesic Lagrangian gauge.
pub fn rhs_vacuum(state: &GridState, derivs: &SpatialDerivs) -> Result<TimeDerivative> {
    if state.is_fluid() {
        return Err(Error::InvalidArgument("rhs_vacuum called on a fluid state".into()));
    }
    assemble(state, derivs)
}

/// Reduced Einstein-Euler system.
pub fn rhs_fluid(state: &GridState, derivs: &SpatialDerivs) -> Result<TimeDerivative> {
    if !state.is_fluid() {
        return Err(Error::VacuumMode);
    }
    assemble(state, derivs)
}

/// Dispatches on the state's mode.
pub fn rhs(state: &GridState, derivs: &SpatialDerivs) -> Result<TimeDerivative> {
    assemble(state, derivs)
}
