//! Line-oriented `key = value` run configuration with dotted section keys.

use std::fmt::Write as _;

use thiserror::Error;

use crate::frame_state::Eos;
use crate::integrator::{EvolveConfig, StencilConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationKind {
    /// A value outside its admissible range.
    Range,
    /// The configuration would violate symmetric hyperbolicity (`mu' < 1`).
    Hyperbolicity,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String, kind: ValidationKind },
}

impl ConfigError {
    fn range(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation { key: key.into(), message: message.into(), kind: ValidationKind::Range }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Flat,
    /// Minkowski space in a frame with constant tilt covector `b`.
    Tilted { b: [f64; 3] },
    Kasner { p: [f64; 3], t0: f64 },
    Flrw { mu0: f64, collapse: bool },
    PerturbedFlrw { mu0: f64, epsilon: f64 },
    /// Initial state read from a snapshot file.
    Snapshot { path: String },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Flat => "flat",
            Scenario::Tilted { .. } => "tilted",
            Scenario::Kasner { .. } => "kasner",
            Scenario::Flrw { .. } => "flrw",
            Scenario::PerturbedFlrw { .. } => "perturbed_flrw",
            Scenario::Snapshot { .. } => "snapshot",
        }
    }

    pub fn is_fluid(&self) -> bool {
        matches!(self, Scenario::Flrw { .. } | Scenario::PerturbedFlrw { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub domain_length: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub fd_order: usize,
    pub dissipation_eps: f64,
    pub eos_w: f64,
    pub eos_p_ref: f64,
    pub every_steps: usize,
    pub directory: String,
    pub max_residual: f64,
    pub min_dt: f64,
    pub fosh_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Flat,
            n: 8,
            domain_length: 1.0,
            t_end: 1.0,
            cfl: 0.25,
            fd_order: 4,
            dissipation_eps: 0.0,
            eos_w: 1.0 / 3.0,
            eos_p_ref: 1.0,
            every_steps: 10,
            directory: "out".into(),
            max_residual: 1e3,
            min_dt: 1e-8,
            fosh_every: 10,
        }
    }
}

const KEYS: [&str; 24] = [
    "scenario",
    "scenario.p1",
    "scenario.p2",
    "scenario.p3",
    "scenario.t0",
    "scenario.mu0",
    "scenario.direction",
    "scenario.epsilon",
    "scenario.b1",
    "scenario.b2",
    "scenario.b3",
    "scenario.path",
    "grid.n",
    "grid.L",
    "t_end",
    "cfl",
    "fd_order",
    "dissipation_eps",
    "eos.w",
    "eos.p_ref",
    "output.every_steps",
    "output.directory",
    "halt.max_residual",
    "halt.min_dt",
];
const EXTRA_KEYS: [&str; 1] = ["halt.fosh_every"];

/// Keys that only apply to some scenarios.
fn scenario_keys(name: &str) -> &'static [&'static str] {
    match name {
        "tilted" => &["scenario.b1", "scenario.b2", "scenario.b3"],
        "kasner" => &["scenario.p1", "scenario.p2", "scenario.p3", "scenario.t0"],
        "flrw" => &["scenario.mu0", "scenario.direction"],
        "perturbed_flrw" => &["scenario.mu0", "scenario.epsilon"],
        "snapshot" => &["scenario.path"],
        _ => &[],
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse::<T>().map_err(|_| ConfigError::range(key, format!("cannot parse `{v}`")))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: Vec<(String, String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) && !EXTRA_KEYS.contains(&k) {
            return Err(ConfigError::Parse { line, message: format!("unknown key `{k}`") });
        }
        if v.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("empty value for `{k}`") });
        }
        if entries.iter().any(|(ek, _, _)| ek == k) {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{k}`") });
        }
        entries.push((k.to_string(), v.to_string(), line));
    }
    let get = |k: &str| entries.iter().find(|(ek, _, _)| ek == k).map(|(_, v, _)| v.as_str());

    let scen_name = get("scenario").unwrap_or("flat");
    for (k, _, line) in &entries {
        if k.starts_with("scenario.") && !scenario_keys(scen_name).contains(&k.as_str()) {
            return Err(ConfigError::Parse {
                line: *line,
                message: format!("key `{k}` does not apply to scenario `{scen_name}`"),
            });
        }
    }
    let f = |k: &str, d: f64| -> Result<f64, ConfigError> { get(k).map_or(Ok(d), |v| num(k, v)) };
    let u = |k: &str, d: usize| -> Result<usize, ConfigError> { get(k).map_or(Ok(d), |v| num(k, v)) };

    let scenario = match scen_name {
        "flat" => Scenario::Flat,
        "tilted" => Scenario::Tilted {
            b: [f("scenario.b1", 0.0)?, f("scenario.b2", 0.0)?, f("scenario.b3", 0.0)?],
        },
        "kasner" => Scenario::Kasner {
            p: [
                f("scenario.p1", 2.0 / 3.0)?,
                f("scenario.p2", 2.0 / 3.0)?,
                f("scenario.p3", -1.0 / 3.0)?,
            ],
            t0: f("scenario.t0", 1.0)?,
        },
        "flrw" => Scenario::Flrw {
            mu0: f("scenario.mu0", 3.0)?,
            collapse: match get("scenario.direction").unwrap_or("expand") {
                "expand" => false,
                "collapse" => true,
                other => {
                    return Err(ConfigError::range(
                        "scenario.direction",
                        format!("expected `expand` or `collapse`, got `{other}`"),
                    ))
                }
            },
        },
        "perturbed_flrw" => Scenario::PerturbedFlrw {
            mu0: f("scenario.mu0", 3.0)?,
            epsilon: f("scenario.epsilon", 1e-3)?,
        },
        "snapshot" => Scenario::Snapshot {
            path: get("scenario.path")
                .ok_or_else(|| ConfigError::range("scenario.path", "required for scenario `snapshot`"))?
                .to_string(),
        },
        other => return Err(ConfigError::range("scenario", format!("unknown scenario `{other}`"))),
    };

    let d = RunConfig::default();
    let cfg = RunConfig {
        scenario,
        n: u("grid.n", d.n)?,
        domain_length: f("grid.L", d.domain_length)?,
        t_end: f("t_end", d.t_end)?,
        cfl: f("cfl", d.cfl)?,
        fd_order: u("fd_order", d.fd_order)?,
        dissipation_eps: f("dissipation_eps", d.dissipation_eps)?,
        eos_w: f("eos.w", d.eos_w)?,
        eos_p_ref: f("eos.p_ref", d.eos_p_ref)?,
        every_steps: u("output.every_steps", d.every_steps)?,
        directory: get("output.directory").unwrap_or(&d.directory).to_string(),
        max_residual: f("halt.max_residual", d.max_residual)?,
        min_dt: f("halt.min_dt", d.min_dt)?,
        fosh_every: u("halt.fosh_every", d.fosh_every)?,
    };
    validate(&cfg)?;
    Ok(cfg)
}

/// Range checks. A sound speed above light speed is reported with
/// [`ValidationKind::Hyperbolicity`].
pub fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    if c.fd_order != 2 && c.fd_order != 4 {
        return Err(ConfigError::range("fd_order", "must be 2 or 4"));
    }
    if c.n < c.fd_order.max(3) + 1 {
        return Err(ConfigError::range(
            "grid.n",
            format!("need at least {} points for the order-{} stencil", c.fd_order + 1, c.fd_order),
        ));
    }
    if !(c.domain_length > 0.0 && c.domain_length.is_finite()) {
        return Err(ConfigError::range("grid.L", "must be positive"));
    }
    if !(c.t_end.is_finite()) {
        return Err(ConfigError::range("t_end", "must be finite"));
    }
    if !(c.cfl > 0.0 && c.cfl < 1.0) {
        return Err(ConfigError::range("cfl", "must lie in (0, 1)"));
    }
    if !(c.dissipation_eps >= 0.0 && c.dissipation_eps.is_finite()) {
        return Err(ConfigError::range("dissipation_eps", "must be >= 0"));
    }
    if !(c.eos_w > 0.0 && c.eos_w.is_finite()) {
        return Err(ConfigError::range("eos.w", "must be positive"));
    }
    if c.eos_w > 1.0 {
        return Err(ConfigError::Validation {
            key: "eos.w".into(),
            message: format!("w = {} gives mu' = 1/w < 1 (sound faster than light); need mu' >= 1", c.eos_w),
            kind: ValidationKind::Hyperbolicity,
        });
    }
    if !(c.eos_p_ref > 0.0 && c.eos_p_ref.is_finite()) {
        return Err(ConfigError::range("eos.p_ref", "must be positive"));
    }
    if c.every_steps == 0 {
        return Err(ConfigError::range("output.every_steps", "must be >= 1"));
    }
    if !(c.max_residual > 0.0) {
        return Err(ConfigError::range("halt.max_residual", "must be positive"));
    }
    if !(c.min_dt > 0.0) {
        return Err(ConfigError::range("halt.min_dt", "must be positive"));
    }
    match &c.scenario {
        Scenario::Kasner { t0, .. } if !(*t0 > 0.0) => return Err(ConfigError::range("scenario.t0", "must be positive")),
        Scenario::Flrw { mu0, .. } | Scenario::PerturbedFlrw { mu0, .. } if !(*mu0 > 0.0) => {
            return Err(ConfigError::range("scenario.mu0", "must be positive"))
        }
        _ => {}
    }
    Ok(())
}

/// Writes every key, so that `parse_config(print_config(c)) == c`.
pub fn print_config(c: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario = {}", c.scenario.name());
    match &c.scenario {
        Scenario::Flat => {}
        Scenario::Tilted { b } => {
            for (i, v) in b.iter().enumerate() {
                let _ = writeln!(s, "scenario.b{} = {v:?}", i + 1);
            }
        }
        Scenario::Kasner { p, t0 } => {
            for (i, v) in p.iter().enumerate() {
                let _ = writeln!(s, "scenario.p{} = {v:?}", i + 1);
            }
            let _ = writeln!(s, "scenario.t0 = {t0:?}");
        }
        Scenario::Flrw { mu0, collapse } => {
            let _ = writeln!(s, "scenario.mu0 = {mu0:?}");
            let _ = writeln!(s, "scenario.direction = {}", if *collapse { "collapse" } else { "expand" });
        }
        Scenario::PerturbedFlrw { mu0, epsilon } => {
            let _ = writeln!(s, "scenario.mu0 = {mu0:?}");
            let _ = writeln!(s, "scenario.epsilon = {epsilon:?}");
        }
        Scenario::Snapshot { path } => {
            let _ = writeln!(s, "scenario.path = {path}");
        }
    }
    let _ = writeln!(s, "grid.n = {}", c.n);
    let _ = writeln!(s, "grid.L = {:?}", c.domain_length);
    let _ = writeln!(s, "t_end = {:?}", c.t_end);
    let _ = writeln!(s, "cfl = {:?}", c.cfl);
    let _ = writeln!(s, "fd_order = {}", c.fd_order);
    let _ = writeln!(s, "dissipation_eps = {:?}", c.dissipation_eps);
    let _ = writeln!(s, "eos.w = {:?}", c.eos_w);
    let _ = writeln!(s, "eos.p_ref = {:?}", c.eos_p_ref);
    let _ = writeln!(s, "output.every_steps = {}", c.every_steps);
    let _ = writeln!(s, "output.directory = {}", c.directory);
    let _ = writeln!(s, "halt.max_residual = {:?}", c.max_residual);
    let _ = writeln!(s, "halt.min_dt = {:?}", c.min_dt);
    let _ = writeln!(s, "halt.fosh_every = {}", c.fosh_every);
    s
}

impl RunConfig {
    pub fn eos(&self) -> Eos {
        Eos { w: self.eos_w, p_ref: self.eos_p_ref }
    }

    pub fn stencil(&self) -> StencilConfig {
        StencilConfig { fd_order: self.fd_order, dissipation_eps: self.dissipation_eps, cfl: self.cfl }
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            stencil: self.stencil(),
            fosh_every: self.fosh_every,
            monitor_every: self.every_steps,
            max_residual: self.max_residual,
            min_dt: self.min_dt,
            fixed_dt: None,
            ..EvolveConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_flat_config() {
        let c = parse_config("scenario = flat\ngrid.n = 8\ngrid.L = 1.0\nt_end = 1.0").unwrap();
        assert_eq!(c.scenario, Scenario::Flat);
        assert_eq!((c.fd_order, c.cfl, c.dissipation_eps, c.every_steps), (4, 0.25, 0.0, 10));
    }

    #[test]
    fn small_grid_rejected() {
        match parse_config("grid.n = 3").unwrap_err() {
            ConfigError::Validation { key, kind, .. } => {
                assert_eq!(key, "grid.n");
                assert_eq!(kind, ValidationKind::Range);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn superluminal_sound_rejected() {
        match parse_config("eos.w = 1.5").unwrap_err() {
            ConfigError::Validation { key, kind, message } => {
                assert_eq!(key, "eos.w");
                assert_eq!(kind, ValidationKind::Hyperbolicity);
                assert!(message.contains("mu' >= 1"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            parse_config("# comment\n\ngrid.n = 8\nbogus = 1").unwrap_err(),
            ConfigError::Parse { line: 4, message: "unknown key `bogus`".into() }
        );
        assert!(matches!(parse_config("grid.n 8"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_config("scenario = flat\nscenario.mu0 = 3"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
    }

    fn scenario() -> impl Strategy<Value = Scenario> {
        prop_oneof![
            Just(Scenario::Flat),
            proptest::array::uniform3(-0.5..0.5f64).prop_map(|b| Scenario::Tilted { b }),
            (proptest::array::uniform3(-1.0..1.0f64), 0.1..5.0f64).prop_map(|(p, t0)| Scenario::Kasner { p, t0 }),
            (0.01..10.0f64, any::<bool>()).prop_map(|(mu0, collapse)| Scenario::Flrw { mu0, collapse }),
            (0.01..10.0f64, 0.0..0.1f64).prop_map(|(mu0, epsilon)| Scenario::PerturbedFlrw { mu0, epsilon }),
            "[a-z_/]{1,12}\\.bin".prop_map(|path| Scenario::Snapshot { path }),
        ]
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(
            scenario in scenario(),
            n in 5usize..80,
            l in 0.1..10.0f64,
            t_end in 0.01..5.0f64,
            cfl in 0.01..0.99f64,
            order in prop_oneof![Just(2usize), Just(4usize)],
            eps in 0.0..1.0f64,
            w in 0.01..1.0f64,
            every in 1usize..100,
        ) {
            let c = RunConfig {
                scenario, n, domain_length: l, t_end, cfl, fd_order: order, dissipation_eps: eps,
                eos_w: w, eos_p_ref: 1.5, every_steps: every, directory: "runs/a".into(),
                max_residual: 10.0, min_dt: 1e-9, fosh_every: 3,
            };
            prop_assert_eq!(parse_config(&print_config(&c)).unwrap(), c);
        }
    }
}
