//! Invariants of the evolution system checked over random homogeneous states.

use cby::frame_state::algebra::{NCOMP_VACUUM, R_OFF};
use cby::initial_data::curvature_with_derivs;
use cby::integrator::{rk4_step, Mode, SpatialDerivs, StencilConfig};
use cby::monitor::{einstein_residual, residual_fields, symmetry_residuals};
use cby::system::{rhs_fluid, rhs_vacuum};
use cby::{Eos, GridState};
use proptest::prelude::*;

/// Spatially constant vacuum fields.
#[derive(Debug, Clone)]
struct Homogeneous {
    a: [f64; 9],
    b: [f64; 3],
    omega: [f64; 9],
    x: [f64; 9],
}

fn homogeneous() -> impl Strategy<Value = Homogeneous> {
    (
        prop::array::uniform9(-0.2..0.2f64),
        prop::array::uniform3(-0.3..0.3f64),
        prop::array::uniform9(-0.3..0.3f64),
        prop::array::uniform9(-0.5..0.5f64),
    )
        .prop_map(|(da, b, omega, x)| {
            let mut a = da;
            for d in [0, 4, 8] {
                a[d] += 1.0;
            }
            Homogeneous { a, b, omega, x }
        })
}

impl Homogeneous {
    /// Vacuum state on an `n^3` grid, curvature from the constraints.
    fn state(&self, n: usize) -> GridState {
        let mut s = GridState::minkowski(n, 1.0);
        for c in 0..9 {
            s.frame.a[c].fill(self.a[c]);
            s.conn.omega[c].fill(self.omega[c]);
            s.conn.x[c].fill(self.x[c]);
        }
        for c in 0..3 {
            s.frame.b[c].fill(self.b[c]);
        }
        s.curv = curvature_with_derivs(&s, &SpatialDerivs::zeros(&s)).unwrap();
        s
    }
}

fn stencil() -> StencilConfig {
    StencilConfig { fd_order: 4, dissipation_eps: 0.0, cfl: 0.25 }
}

fn max_diff(a: &GridState, b: &GridState) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fluid_system_reduces_to_vacuum(
        a in prop::array::uniform9(-0.2..0.2f64),
        sym in prop::array::uniform6(-0.5..0.5f64),
        omega in prop::array::uniform9(-0.3..0.3f64),
        r in prop::array::uniform32(-1.0..1.0f64),
        r_tail in prop::array::uniform4(-1.0..1.0f64),
        w in 0.05..1.0f64,
    ) {
        // The restriction under which the limit holds: no tilt, symmetric X, Y = 0.
        let mut h = Homogeneous { a, b: [0.0; 3], omega, x: [0.0; 9] };
        for d in [0, 4, 8] {
            h.a[d] += 1.0;
        }
        let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for (v, (i, j)) in sym.iter().zip(pairs) {
            h.x[3 * i + j] = *v;
            h.x[3 * j + i] = *v;
        }
        let mut vac = h.state(5);
        let mut vals = vec![0.0; NCOMP_VACUUM];
        vac.gather(0, &mut vals);
        for (c, v) in r.iter().chain(&r_tail).enumerate() {
            vals[R_OFF + c] = *v;
        }
        let buf: Vec<f64> = (0..vac.npoints()).flat_map(|_| vals.iter().copied()).collect();
        vac.scatter(&buf);
        let fluid = vac.clone().with_fluid(Eos::new(w, 1.0).unwrap(), vec![1e-10; vac.npoints()]);

        let tv = rhs_vacuum(&vac, &SpatialDerivs::zeros(&vac)).unwrap();
        let tf = rhs_fluid(&fluid, &SpatialDerivs::zeros(&fluid)).unwrap();
        let shared = NCOMP_VACUUM;
        for (c, (u, v)) in tv.components().iter().zip(tf.components()).take(shared).enumerate() {
            if (30..33).contains(&c) {
                continue; // Y is not evolved in vacuum
            }
            prop_assert!((u[0] - v[0]).abs() <= 1e-8, "component {c}: {} vs {}", u[0], v[0]);
        }
    }

    #[test]
    fn vacuum_step_preserves_stored_symmetries_and_gauge(h in homogeneous()) {
        let s = h.state(5);
        let next = rk4_step(&s, 1e-3, &stencil(), Mode::Vacuum).unwrap();
        prop_assert!(next.conn.y.iter().flatten().all(|&v| v == 0.0));
        let sym = symmetry_residuals(&next);
        prop_assert_eq!(sym.first_pair, 0.0);
        prop_assert_eq!(sym.omega, 0.0);
    }

    #[test]
    fn forward_backward_step_returns_to_start(h in homogeneous()) {
        let s = h.state(5);
        let dt = 1e-2;
        let fwd = rk4_step(&s, dt, &stencil(), Mode::Vacuum).unwrap();
        let back = rk4_step(&fwd, -dt, &stencil(), Mode::Vacuum).unwrap();
        let scale = s.components().iter().flat_map(|c| c.iter()).fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_diff(&s, &back) <= 1e-8 * scale, "{:e}", max_diff(&s, &back));
    }

    #[test]
    fn homogeneous_evolution_ignores_resolution(h in homogeneous()) {
        let (mut a, mut b) = (h.state(5), h.state(7));
        for _ in 0..3 {
            a = rk4_step(&a, 1e-2, &stencil(), Mode::Vacuum).unwrap();
            b = rk4_step(&b, 1e-2, &stencil(), Mode::Vacuum).unwrap();
        }
        for (ca, cb) in a.components().iter().zip(b.components()) {
            prop_assert!(ca.iter().all(|&v| v == ca[0]));
            prop_assert!(cb.iter().all(|&v| v == ca[0]));
        }
    }

    #[test]
    fn constructed_curvature_satisfies_gauss_and_codazzi(h in homogeneous()) {
        let s = h.state(5);
        let f = residual_fields(&s, &SpatialDerivs::compute(&s, 4).unwrap()).unwrap();
        for r in &f {
            prop_assert!(r.gauss.iter().flatten().all(|v| v.abs() <= 1e-12));
            prop_assert!(r.codazzi.iter().flatten().all(|v| v.abs() <= 1e-12));
        }
        // Random omega is not the connection of the frame, so only the stored
        // antisymmetries hold, and they hold exactly.
        let sym = symmetry_residuals(&s);
        prop_assert_eq!(sym.first_pair, 0.0);
        prop_assert_eq!(sym.omega, 0.0);
    }

    #[test]
    fn residuals_are_linear_in_curvature(h in homogeneous(), slot in 0usize..36, delta in -1.0..1.0f64) {
        let base = h.state(5);
        let perturbed = |k: f64| {
            let mut s = base.clone();
            let block = if slot < 18 { &mut s.curv.r_ss[slot] } else { &mut s.curv.r_0s[slot - 18] };
            block.iter_mut().for_each(|v| *v += k * delta);
            s
        };
        let (s0, s1, s2) = (perturbed(0.0), perturbed(1.0), perturbed(2.0));
        let e = |s: &GridState| einstein_residual(s).0[0];
        let g = |s: &GridState| residual_fields(s, &SpatialDerivs::compute(s, 4).unwrap()).unwrap()[0].gauss;
        let (e0, e1, e2) = (e(&s0), e(&s1), e(&s2));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!(((e2[i][j] - e0[i][j]) - 2.0 * (e1[i][j] - e0[i][j])).abs() <= 1e-12);
            }
        }
        let (g0, g1, g2) = (g(&s0), g(&s1), g(&s2));
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!(((g2[i][j] - g0[i][j]) - 2.0 * (g1[i][j] - g0[i][j])).abs() <= 1e-12);
            }
        }
    }
}
