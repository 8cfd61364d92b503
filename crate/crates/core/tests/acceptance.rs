//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cby::cli_io::{read_snapshot, EXIT_BREAKDOWN, EXIT_REFUSED};
use cby::frame_state::algebra::{expand_riemann, FrameGeometry};
use cby::initial_data::{
    bump_vacuum_eulerian, curvature_from_constraints, flat_data, flrw_data, flrw_hubble, from_rest_eulerian,
    kasner_data, perturbed_flrw_data, tilted_flat_data, Direction,
};
use cby::integrator::{evolve, Event, EvolveConfig, RunStatus};
use cby::monitor::{residual_report, symmetry_residuals, RESIDUAL_NAMES};
use cby::system::blocks::{block_from_geometry, BlockId};
use cby::{Eos, GridState};

use common::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixed(dt: f64, monitor_every: usize) -> EvolveConfig {
    EvolveConfig { fixed_dt: Some(dt), monitor_every, ..EvolveConfig::default() }
}

/// Evolves to `t_end`, returning the final state and the largest residual seen
/// on monitor steps. Any status other than completion is an error.
fn run(state: GridState, t_end: f64, cfg: &EvolveConfig) -> Result<(GridState, usize, f64), String> {
    let mut worst: f64 = 0.0;
    let out = evolve(state, t_end, cfg, |ev| {
        let Event::Step { report, .. } = ev;
        if let Some(r) = report {
            worst = if r.max_linf().is_nan() { f64::NAN } else { worst.max(r.max_linf()) };
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    match out.status {
        RunStatus::Completed => Ok((out.state, out.steps, worst)),
        s => Err(format!("run ended with {s:?} after {} steps", out.steps)),
    }
}

fn eigenvalue_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let a: Matrix3<f64> = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0)) + 2.0 * Matrix3::identity();
        let dir = loop {
            let v = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                break v / n;
            }
        };
        let nb: f64 = rng.gen_range(0.0..0.99);
        let tilt = dir * nb;
        let b = -a.transpose() * tilt;
        let geo = FrameGeometry::new(&a, &b).map_err(|e| e.to_string())?;
        let m0 = block_from_geometry(&geo, 1.0, BlockId::RiemannPair).m0;
        let mut eig: Vec<f64> = m0.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let expect = [1.0 - nb, 1.0 - nb, 1.0, 1.0, 1.0 + nb, 1.0 + nb];
        for (e, x) in eig.iter().zip(expect) {
            worst = worst.max((e - x).abs());
        }
    }
    check(worst <= 1e-12, format!("10000 frames, max eigenvalue error {worst:.3e}"))
}

fn flat_fixed_point() -> Outcome {
    let initial = flat_data(16, 1.0);
    let dt = 0.25 / 16.0;
    let cfg = fixed(dt, 100);
    let (end, steps, res) = run(initial.clone(), 1000.0 * dt, &cfg)?;
    let change = max_state_diff(&initial, &end);
    check(
        steps == 1000 && change <= 1e-13 && res <= 1e-12,
        format!("{steps} steps, max field change {change:.3e}, max residual {res:.3e}"),
    )
}

fn kasner() -> Outcome {
    let p = [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0];
    let cfg = fixed(1e-3, 50);
    let (end, steps, res) = run(kasner_data(8, 1.0, p, 1.0).map_err(|e| e.to_string())?, 2.0, &cfg)?;
    let mut rel: f64 = 0.0;
    for (i, d) in [0, 4, 8].into_iter().enumerate() {
        let exact = 2f64.powf(p[i]);
        for v in &end.frame.a[d] {
            rel = rel.max((v / exact - 1.0).abs());
        }
    }
    check(
        rel <= 1e-8 && res <= 1e-9,
        format!("{steps} steps, max relative a_ii error {rel:.3e}, max residual {res:.3e}"),
    )
}

fn flrw() -> Outcome {
    let mu0 = 3.0;
    let eos = Eos::radiation();
    let h0 = flrw_hubble(mu0, Direction::Expanding);
    let cfg = fixed(1e-3, 1);
    let (end, steps, res) = run(flrw_data(8, 1.0, mu0, eos).map_err(|e| e.to_string())?, 0.5, &cfg)?;
    let (a_ref, _, mu_ref) = flrw_ode(mu0, h0, eos.w, 0.5);
    let mu = &end.fluid.as_ref().ok_or("fluid lost")?.mu;
    let mu_err = mu.iter().map(|m| (m / mu_ref - 1.0).abs()).fold(0.0, f64::max);
    let a_err = [0, 4, 8]
        .iter()
        .flat_map(|&d| end.frame.a[d].iter())
        .map(|a| (a / a_ref - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        mu_err <= 1e-7 && a_err <= 1e-7 && res <= 1e-9,
        format!("{steps} steps, relative error mu {mu_err:.3e}, a {a_err:.3e}, max residual {res:.3e}"),
    )
}

/// Perturbed FLRW at n, 2n, 4n with dt = dx/4 to a common time, with the
/// dissipation used for perturbed runs.
fn convergence() -> Outcome {
    let eos = Eos::radiation();
    let t_end = 8.0 * 0.25 / 16.0;
    let mut runs = Vec::new();
    for n in [16usize, 32, 64] {
        let dx = 1.0 / n as f64;
        let s = perturbed_flrw_data(n, 1.0, 3.0, eos, 1e-3, 4).map_err(|e| e.to_string())?;
        let mut cfg = fixed(0.25 * dx, 0);
        cfg.stencil.dissipation_eps = 0.1;
        let (end, steps, _) = run(s, t_end, &cfg)?;
        let report = residual_report(&end, 4).map_err(|e| e.to_string())?;
        runs.push((end, steps, report));
    }
    let coarse = components_of(&runs[0].0);
    let mid = restrict(&runs[1].0, 2);
    let fine = restrict(&runs[2].0, 4);
    let vol = (1.0f64 / 16.0).powi(3);
    let solution_ratio = l2_diff(&coarse, &mid, vol) / l2_diff(&mid, &fine, vol);
    let in_band = |r: f64| (12.0..=20.0).contains(&r);
    let mut ok = in_band(solution_ratio);
    let mut detail = format!(
        "steps {}/{}/{}, solution ratio {solution_ratio:.2}",
        runs[0].1, runs[1].1, runs[2].1
    );
    for (k, name) in RESIDUAL_NAMES.iter().enumerate() {
        let r: Vec<f64> = runs.iter().map(|(_, _, rep)| rep.norms[k].l2).collect();
        if r.iter().all(|v| *v == 0.0) {
            detail.push_str(&format!(", {name} exact"));
            continue;
        }
        let (q1, q2) = (r[0] / r[1], r[1] / r[2]);
        ok &= in_band(q1) && in_band(q2);
        detail.push_str(&format!(", {name} {q1:.2}/{q2:.2}"));
    }
    check(ok, detail)
}

fn symmetry_suite() -> Result<Vec<(&'static str, GridState, bool)>, String> {
    let e = |r: cby::Result<GridState>| r.map_err(|e| e.to_string());
    Ok(vec![
        ("flat", flat_data(8, 1.0), false),
        ("tilted", tilted_flat_data(8, 1.0, [0.3, -0.2, 0.1]), false),
        ("kasner", e(kasner_data(8, 1.0, [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0], 1.0))?, false),
        ("flrw", e(flrw_data(8, 1.0, 3.0, Eos::radiation()))?, false),
        ("perturbed_flrw", e(perturbed_flrw_data(8, 1.0, 3.0, Eos::radiation(), 1e-3, 4))?, true),
        ("bump_vacuum", e(from_rest_eulerian(&bump_vacuum_eulerian(8, 1.0, 1e-2), 4))?, true),
    ])
}

fn rebuild_fine(name: &str) -> Result<GridState, String> {
    let e = |r: cby::Result<GridState>| r.map_err(|e| e.to_string());
    match name {
        "perturbed_flrw" => e(perturbed_flrw_data(16, 1.0, 3.0, Eos::radiation(), 1e-3, 4)),
        _ => e(from_rest_eulerian(&bump_vacuum_eulerian(16, 1.0, 1e-2), 4)),
    }
}

/// Symmetry violations stay within ten times the truncation level. The level
/// is the Richardson difference between dt and dt/2 (and, for inhomogeneous
/// data, between n and 2n on common points), floored at roundoff.
fn symmetry_propagation() -> Outcome {
    let dt = 0.25 / 8.0 / 2.0;
    let t_span = 10.0 * dt;
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, s0, inhomogeneous) in symmetry_suite()? {
        let t_end = s0.t + t_span;
        let (coarse, _, _) = run(s0.clone(), t_end, &fixed(dt, 0))?;
        let (halved, _, _) = run(s0, t_end, &fixed(dt / 2.0, 0))?;
        let mut level = max_state_diff(&coarse, &halved);
        if inhomogeneous {
            let (fine, _, _) = run(rebuild_fine(name)?, t_end, &fixed(dt, 0))?;
            let a = components_of(&coarse);
            let b = restrict(&fine, 2);
            let d = a
                .iter()
                .zip(&b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
                .fold(0.0, f64::max);
            level = level.max(d);
        }
        let floor = 1e-13 * max_abs(&coarse).max(1.0);
        let bound = 10.0 * level.max(floor);
        let sym = symmetry_residuals(&coarse);
        let worst = sym.pair_exchange.max(sym.cyclic).max(sym.first_pair).max(sym.omega);
        ok &= worst <= bound;
        detail.push(format!("{name} {worst:.2e}<={bound:.2e}"));
    }
    check(ok, detail.join(", "))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn breakdown_honesty() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_cby");

    let out_a = tmp.path().join("a");
    let cfg_a = write_config(
        tmp.path(),
        "superluminal.cfg",
        &format!("scenario = flrw\ngrid.n = 8\nt_end = 0.1\neos.w = 1.5\noutput.directory = {}\n", out_a.display()),
    );
    let a = Command::new(bin).arg("run").arg(&cfg_a).output().map_err(|e| e.to_string())?;
    let code_a = a.status.code();
    let no_steps = !out_a.join("state_1.bin").exists();
    let refused = code_a == Some(EXIT_REFUSED) && no_steps;

    let out_b = tmp.path().join("b");
    let cfg_b = write_config(
        tmp.path(),
        "collapse.cfg",
        &format!(
            "scenario = flrw\nscenario.direction = collapse\ngrid.n = 8\nt_end = 1.0\noutput.every_steps = 1000000\noutput.directory = {}\n",
            out_b.display()
        ),
    );
    let b = Command::new(bin).arg("run").arg(&cfg_b).output().map_err(|e| e.to_string())?;
    let code_b = b.status.code();
    let last = std::fs::read_dir(&out_b)
        .map_err(|e| e.to_string())?
        .filter_map(|e| {
            let name = e.ok()?.file_name().into_string().ok()?;
            name.strip_prefix("state_")?.strip_suffix(".bin")?.parse::<usize>().ok()
        })
        .max()
        .ok_or("no snapshot written")?;
    let snap = read_snapshot(out_b.join(format!("state_{last}.bin"))).map_err(|e| e.to_string())?;
    let finite = snap.components().iter().all(|c| c.iter().all(|v| v.is_finite()));
    // Radiation FLRW from H = -1 collapses at t = 1/2.
    let halted = code_b == Some(EXIT_BREAKDOWN) && finite && (snap.t - 0.5).abs() <= 1e-3 && last > 0;
    check(
        refused && halted,
        format!(
            "w=1.5 exit {code_a:?} (no steps: {no_steps}); collapse exit {code_b:?} at t={:.6} step {last}, finite {finite}",
            snap.t
        ),
    )
}

fn kasner_exponents(u: f64) -> [f64; 3] {
    let d = 1.0 + u + u * u;
    [-u / d, (1.0 + u) / d, u * (1.0 + u) / d]
}

fn curvature_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    for w in [0.0, 1.0 / 3.0, 0.8, 1.0] {
        for mu0 in [0.5, 3.0, 12.0] {
            let eos = Eos { w, p_ref: 1.0 };
            let s = flrw_data(8, 1.0, mu0, eos).map_err(|e| e.to_string())?;
            let mut s2 = s.clone();
            s2.curv = curvature_from_constraints(&s, 4).map_err(|e| e.to_string())?;
            let h = flrw_hubble(mu0, Direction::Expanding);
            worst = worst.max(curvature_error(&s2, &flrw_riemann(h, mu0, w * mu0)));
        }
    }
    let mut exps = vec![[2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0], [0.0, 0.0, 1.0]];
    exps.extend([0.5, 2.0, 3.5].map(kasner_exponents));
    for p in exps {
        for t0 in [0.5, 1.0, 3.0] {
            let s = kasner_data(8, 1.0, p, t0).map_err(|e| e.to_string())?;
            let mut s2 = s.clone();
            s2.curv = curvature_from_constraints(&s, 4).map_err(|e| e.to_string())?;
            worst = worst.max(curvature_error(&s2, &kasner_riemann(p, t0)));
        }
    }
    // The stored data must agree with the oracle too.
    let k = kasner_data(4, 1.0, [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0], 1.5).map_err(|e| e.to_string())?;
    worst = worst.max(max_tensor_diff(&expand_riemann(&k.point(0).r), &kasner_riemann([2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0], 1.5)));
    check(worst <= 1e-12, format!("max curvature deviation {worst:.3e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("1 eigenvalue law", eigenvalue_law, Duration::from_secs(5)),
        ("2 flat fixed point", flat_fixed_point, Duration::from_secs(30)),
        ("3 kasner", kasner, Duration::from_secs(60)),
        ("4 flrw", flrw, Duration::from_secs(60)),
        ("5 convergence", convergence, Duration::from_secs(600)),
        ("6 symmetry propagation", symmetry_propagation, Duration::from_secs(600)),
        ("7 breakdown honesty", breakdown_honesty, Duration::from_secs(120)),
        ("8 curvature oracles", curvature_oracles, Duration::from_secs(60)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|k| name.contains(k.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!("{} criterion {name}: {detail} [{:.1}s]", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
