//! Independent reference solutions shared by the integration tests.
#![allow(dead_code)]

use cby::frame_state::algebra::{expand_riemann, Tensor4};
use cby::GridState;

/// Orthonormal-frame Riemann tensor of `-dt^2 + sum_i s_i(t)^2 dx_i^2`, written
/// from the textbook formulas `R_{0i0i} = -s_i''/s_i` and
/// `R_{ijij} = (s_i'/s_i)(s_j'/s_j)`, with pair antisymmetry filled in by hand.
pub fn diagonal_bianchi_i_riemann(hubble: [f64; 3], accel: [f64; 3]) -> Tensor4 {
    let sectional = std::array::from_fn(|i| std::array::from_fn(|j| hubble[i] * hubble[j]));
    diagonal_riemann(accel.map(|v| -v), sectional)
}

/// Curvature with only `R_{0i0i} = tidal[i]` and `R_{ijij} = sectional[i][j]`
/// (`i != j`) nonzero, up to the antisymmetries.
pub fn diagonal_riemann(tidal: [f64; 3], sectional: [[f64; 3]; 3]) -> Tensor4 {
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    let mut set = |a: usize, b: usize, c: usize, d: usize, v: f64| {
        r[a][b][c][d] = v;
        r[b][a][c][d] = -v;
        r[a][b][d][c] = -v;
        r[b][a][d][c] = v;
    };
    for i in 0..3 {
        set(0, i + 1, 0, i + 1, tidal[i]);
        for j in 0..3 {
            if i != j {
                set(i + 1, j + 1, i + 1, j + 1, sectional[i][j]);
            }
        }
    }
    r
}

/// Stored 36-component form of the curvature at point `idx` of a time derivative.
pub fn stored_rate(td: &cby::system::TimeDerivative, idx: usize) -> [f64; 36] {
    std::array::from_fn(|c| if c < 18 { td.dr_ss[c][idx] } else { td.dr_0s[c - 18][idx] })
}

/// Kasner `s_i = t^{p_i}`: `s'/s = p/t`, `s''/s = p (p - 1) / t^2`.
pub fn kasner_riemann(p: [f64; 3], t: f64) -> Tensor4 {
    diagonal_bianchi_i_riemann(p.map(|q| q / t), p.map(|q| q * (q - 1.0) / (t * t)))
}

/// Flat FLRW with Hubble rate `h`, density `mu`, pressure `p`:
/// `s''/s = H' + H^2 = -(mu + 3p)/6`.
pub fn flrw_riemann(h: f64, mu: f64, p: f64) -> Tensor4 {
    let acc = -(mu + 3.0 * p) / 6.0;
    diagonal_bianchi_i_riemann([h; 3], [acc; 3])
}

/// Flat FLRW with `p = w mu` integrated as the first-order system
/// `a' = a H`, `H' = -H^2 - (mu + 3p)/6`, `mu' = -3 H (mu + p)` by fixed-step
/// RK4 with a step far below anything the evolution code uses.
/// Returns `(a, H, mu)` at `t`.
pub fn flrw_ode(mu0: f64, h0: f64, w: f64, t: f64) -> (f64, f64, f64) {
    let f = |y: [f64; 3]| -> [f64; 3] {
        let (a, h, mu) = (y[0], y[1], y[2]);
        let p = w * mu;
        [a * h, -h * h - (mu + 3.0 * p) / 6.0, -3.0 * h * (mu + p)]
    };
    let steps = ((t.abs() / 1e-5).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let mut y = [1.0, h0, mu0];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(std::array::from_fn(|i| y[i] + 0.5 * dt * k1[i]));
        let k3 = f(std::array::from_fn(|i| y[i] + 0.5 * dt * k2[i]));
        let k4 = f(std::array::from_fn(|i| y[i] + dt * k3[i]));
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[1], y[2])
}

pub fn max_tensor_diff(a: &Tensor4, b: &Tensor4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    m = m.max((a[i][j][k][l] - b[i][j][k][l]).abs());
                }
            }
        }
    }
    m
}

/// Largest deviation of the curvature of `state` from `oracle` over all points.
pub fn curvature_error(state: &GridState, oracle: &Tensor4) -> f64 {
    (0..state.npoints()).map(|i| max_tensor_diff(&expand_riemann(&state.point(i).r), oracle)).fold(0.0, f64::max)
}

/// Largest absolute component difference between two states of equal shape.
pub fn max_state_diff(a: &GridState, b: &GridState) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Largest absolute component of a state.
pub fn max_abs(a: &GridState) -> f64 {
    a.components().iter().flat_map(|c| c.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Values of `fine` at the points of a grid coarser by `factor` per axis.
pub fn restrict(fine: &GridState, factor: usize) -> Vec<Vec<f64>> {
    let nc = fine.n / factor;
    fine.components()
        .iter()
        .map(|c| {
            let mut out = Vec::with_capacity(nc * nc * nc);
            for k in 0..nc {
                for j in 0..nc {
                    for i in 0..nc {
                        out.push(c[fine.index(i * factor, j * factor, k * factor)]);
                    }
                }
            }
            out
        })
        .collect()
}

/// Discrete L2 norm (cell-volume weighted) of the difference of two component sets.
pub fn l2_diff(a: &[Vec<f64>], b: &[Vec<f64>], cell_volume: f64) -> f64 {
    let s: f64 = a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v) * (u - v))).sum();
    (s * cell_volume).sqrt()
}

pub fn components_of(s: &GridState) -> Vec<Vec<f64>> {
    s.components().iter().map(|c| c.to_vec()).collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
