//! `RunConfig`: strict TOML with dotted keys, overridable per key through
//! `HDIRAC_<SECTION>_<KEY>` environment variables.

use std::path::{Path, PathBuf};

use hdirac_core::evolution::EvolutionConfig;
use hdirac_core::potential::{PotentialKind, PotentialSpec, ZeroModePolicy};
use hdirac_core::{BoxGrid, Exponent, Sign};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const ENV_PREFIX: &str = "HDIRAC_";

/// Every accepted key, in file order.
pub const KEYS: &[&str] = &[
    "mass",
    "coupling",
    "grid.n",
    "grid.length",
    "potential.kind",
    "potential.gamma",
    "potential.mu0",
    "potential.zero_mode",
    "solver.dt",
    "solver.T",
    "solver.picard_iters",
    "solver.picard_horizon",
    "solver.s",
    "solver.save_every",
    "initial.amplitude",
    "initial.width",
    "initial.branch",
    "initial.file",
    "sweep.kind",
    "sweep.trials",
    "sweep.seed",
    "sweep.k",
    "sweep.k1",
    "sweep.k2",
    "sweep.kprime",
    "sweep.p",
    "sweep.q",
    "sweep.samples",
    "sweep.mc_samples",
    "sweep.lams",
    "sweep.eps",
    "sweep.eps_list",
    "sweep.s",
    "sweep.targets",
    "sweep.cap_levels",
    "sweep.cube_scales",
    "output.dir",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 32, length: 32.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    pub kind: PotentialKind,
    /// Defaults per kind: 0 for yukawa and constant, 2 for coulomb.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Defaults to 1 for yukawa.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    pub zero_mode: ZeroModePolicy,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { kind: PotentialKind::Yukawa, gamma: None, mu0: None, zero_mode: ZeroModePolicy::Zero }
    }
}

impl PotentialSection {
    pub fn spec(&self) -> PotentialSpec {
        let gamma = self.gamma.unwrap_or(match self.kind {
            PotentialKind::Coulomb => 2.0,
            _ => 0.0,
        });
        let mu0 = match (self.kind, self.mu0) {
            (PotentialKind::Yukawa, None) => Some(1.0),
            (_, m) => m,
        };
        PotentialSpec { kind: self.kind, gamma, mu0, zero_mode: self.zero_mode }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub picard_iters: usize,
    /// Horizon of the Picard run in `solve`; 0 skips it.
    pub picard_horizon: f64,
    pub s: f64,
    pub save_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { dt: 1.0 / 64.0, horizon: 8.0, picard_iters: 4, picard_horizon: 0.5, s: 0.25, save_every: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    /// `‖ψ₀‖_{H^s}` of the Gaussian packet.
    pub amplitude: f64,
    pub width: f64,
    /// `"+"`, `"-"` or `"both"`.
    pub branch: String,
    /// Binary field file replacing the packet.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { amplitude: 1e-2, width: 1.0, branch: "+".into(), file: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Bilinear regime: `"opposite"` or `"same"`.
    pub kind: String,
    pub trials: usize,
    pub seed: u64,
    pub k: Vec<i32>,
    pub k1: Vec<i32>,
    /// Empty means `k2 = k1`.
    pub k2: Vec<i32>,
    pub kprime: Vec<i32>,
    pub p: String,
    pub q: String,
    /// Random samples for the algebra and kernel-entry suites.
    pub samples: usize,
    /// Monte Carlo samples per point in `illposed`.
    pub mc_samples: usize,
    pub lams: Vec<f64>,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub s: f64,
    pub targets: usize,
    pub cap_levels: Vec<u32>,
    pub cube_scales: Vec<i32>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kind: "opposite".into(),
            trials: 16,
            seed: 0,
            k: vec![0, 1, 2, 3, 4, 5],
            k1: vec![7],
            k2: vec![],
            kprime: vec![0, 1, 2],
            p: "4".into(),
            q: "3".into(),
            samples: 10_000,
            mc_samples: 100_000,
            lams: vec![8.0, 16.0, 32.0],
            eps: 0.05,
            eps_list: vec![0.0125, 0.025, 0.05, 0.1],
            s: -0.25,
            targets: 32,
            cap_levels: vec![1, 2, 3, 4],
            cube_scales: vec![-1, 0, 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mass: f64,
    pub coupling: f64,
    pub grid: GridSection,
    pub potential: PotentialSection,
    pub solver: SolverSection,
    pub initial: InitialSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            coupling: 1.0,
            grid: GridSection::default(),
            potential: PotentialSection::default(),
            solver: SolverSection::default(),
            initial: InitialSection::default(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
        }
    }
}

pub fn env_var_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

/// Env values are read as TOML literals, falling back to plain strings.
fn env_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn insert(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return err(format!("key `{part}` is not a table")),
        };
    }
    Ok(())
}

/// Final config from an optional file, then `HDIRAC_*` variables from `env`.
pub fn parse_config<I>(path: Option<&Path>, env: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
            // Typed parse of the file alone keeps line numbers in the error.
            toml::from_str::<RunConfig>(&text).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| ConfigError(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (name, raw) in vars {
        let Some(key) = KEYS.iter().find(|k| env_var_name(k) == name) else {
            return err(format!("unknown environment override {name}"));
        };
        insert(&mut table, key, env_value(&raw))?;
    }
    let cfg: RunConfig = RunConfig::deserialize(table).map_err(|e| ConfigError(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_sign(s: &str) -> Result<Option<Sign>, ConfigError> {
    match s {
        "+" | "plus" => Ok(Some(Sign::Plus)),
        "-" | "minus" => Ok(Some(Sign::Minus)),
        "both" => Ok(None),
        _ => err(format!("branch `{s}`: expected +, - or both")),
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<BoxGrid, ConfigError> {
        BoxGrid::new(self.grid.n, self.grid.length).map_err(|e| ConfigError(format!("grid: {e}")))
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        self.potential.spec()
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            mass: self.mass,
            coupling: self.coupling,
            potential: self.potential_spec(),
            dt: self.solver.dt,
            horizon: self.solver.horizon,
            picard_iters: self.solver.picard_iters,
            sobolev_index: self.solver.s,
            save_every: self.solver.save_every,
        }
    }

    pub fn exponents(&self) -> Result<(Exponent, Exponent), ConfigError> {
        let p = self.sweep.p.parse().map_err(|e| ConfigError(format!("sweep.p: {e}")))?;
        let q = self.sweep.q.parse().map_err(|e| ConfigError(format!("sweep.q: {e}")))?;
        Ok((p, q))
    }

    /// Checks every value against the preconditions of the modules it feeds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return err(format!("mass = {} must be finite and >= 0", self.mass));
        }
        self.potential_spec().validate().map_err(|e| ConfigError(format!("potential: {e}")))?;
        let ev = self.evolution();
        ev.validate().map_err(|e| ConfigError(format!("solver: {e}")))?;
        ev.steps().map_err(|e| ConfigError(format!("solver: {e}")))?;
        if self.solver.picard_iters < 2 {
            return err("solver.picard_iters must be >= 2");
        }
        if !(self.solver.picard_horizon >= 0.0 && self.solver.picard_horizon <= self.solver.horizon) {
            return err("solver.picard_horizon must lie in [0, solver.T]");
        }
        if self.solver.picard_horizon > 0.0 {
            let p = EvolutionConfig { horizon: self.solver.picard_horizon, ..ev };
            p.steps().map_err(|e| ConfigError(format!("solver.picard_horizon: {e}")))?;
        }
        if !(self.initial.amplitude >= 0.0 && self.initial.width > 0.0) {
            return err("initial.amplitude must be >= 0 and initial.width > 0");
        }
        parse_sign(&self.initial.branch)?;
        let s = &self.sweep;
        if !matches!(s.kind.as_str(), "opposite" | "same") {
            return err(format!("sweep.kind `{}`: expected opposite or same", s.kind));
        }
        if s.trials == 0 {
            return err("sweep.trials must be >= 1");
        }
        self.exponents()?;
        if s.samples == 0 || s.mc_samples < 2 || s.targets == 0 {
            return err("sweep.samples >= 1, sweep.mc_samples >= 2 and sweep.targets >= 1 required");
        }
        if s.lams.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return err("sweep.lams must be positive");
        }
        if std::iter::once(&s.eps).chain(&s.eps_list).any(|&e| !(e > 0.0 && e < 1.0)) {
            return err("sweep.eps values must lie in (0, 1)");
        }
        if !s.s.is_finite() {
            return err("sweep.s must be finite");
        }
        if !s.k2.is_empty() && s.k2.len() != s.k1.len() {
            return err("sweep.k2 must be empty or match sweep.k1 in length");
        }
        if let Some(&l) = s.cap_levels.iter().find(|&&l| l == 0 || l > hdirac_core::grid::MAX_CAP_LEVEL) {
            return err(format!("sweep.cap_levels: level {l} outside 1..={}", hdirac_core::grid::MAX_CAP_LEVEL));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML of everything except `output`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection { dir: PathBuf::new() };
        let text = toml::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        parse_config(Some(f.path()), Vec::new())
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_str("grid.n = 32\ngrid.length = 32.0\nmass = 1.0\n").unwrap();
        assert_eq!(c.solver, SolverSection::default());
        assert_eq!(c.potential_spec(), PotentialSpec::yukawa(1.0));
    }

    #[test]
    fn rejects_bad_values_and_keys() {
        let e = parse_str("grid.n = 33\n").unwrap_err();
        assert!(e.0.contains("power of two required"), "{e}");
        let e = parse_str("potential.kind = \"coulomb\"\npotential.mu0 = 1.0\n").unwrap_err();
        assert!(e.0.contains("mu0 only for yukawa"), "{e}");
        let e = parse_str("grid.nn = 32\n").unwrap_err();
        assert!(e.0.contains("unknown field"), "{e}");
        assert!(e.0.contains("line 1"), "{e}");
        assert!(parse_str("sweep.kind = \"sideways\"\n").is_err());
    }

    #[test]
    fn env_overrides_file() {
        let env = vec![
            ("HDIRAC_GRID_N".to_string(), "16".to_string()),
            ("HDIRAC_SWEEP_K".to_string(), "[1, 2, 3]".to_string()),
            ("HDIRAC_POTENTIAL_KIND".to_string(), "coulomb".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ];
        let c = parse_config(None, env).unwrap();
        assert_eq!(c.grid.n, 16);
        assert_eq!(c.sweep.k, vec![1, 2, 3]);
        assert_eq!(c.potential_spec(), PotentialSpec::coulomb());
        assert!(parse_config(None, vec![("HDIRAC_NOPE".into(), "1".into())]).is_err());
    }

    #[test]
    fn keys_cover_every_field() {
        let mut c = RunConfig::default();
        c.potential.gamma = Some(0.0);
        c.potential.mu0 = Some(1.0);
        c.initial.file = Some("x".into());
        let table = toml::Table::try_from(&c).unwrap();
        let mut found = Vec::new();
        for (k, v) in &table {
            match v {
                toml::Value::Table(t) => found.extend(t.keys().map(|s| format!("{k}.{s}"))),
                _ => found.push(k.clone()),
            }
        }
        found.sort();
        let mut keys: Vec<String> = KEYS.iter().map(|s| s.to_string()).collect();
        keys.sort();
        assert_eq!(found, keys);
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.sweep.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
