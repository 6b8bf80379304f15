use std::path::Path;

use anyhow::{Context, Result};
use hdirac_core::{Check, ExponentFit, SweepPoint};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const VERSION: &str = concat!("hdirac ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: ExponentFit,
}

/// Outcome of one suite. Contains no timestamps, so reruns are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub fits: Vec<NamedFit>,
    pub data: serde_json::Value,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(suite: &str, cfg: &RunConfig) -> Self {
        Self {
            suite: suite.to_string(),
            version: VERSION.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.sweep.seed,
            passed: true,
            checks: Vec::new(),
            fits: Vec::new(),
            data: serde_json::Value::Null,
            artifacts: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn fit(&mut self, name: &str, fit: ExponentFit) {
        self.fits.push(NamedFit { name: name.to_string(), fit });
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(format!("{}.json", self.suite));
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn table(&self) -> String {
        let mut out = format!("suite {} ({}), config {}\n", self.suite, self.version, &self.config_hash[..12]);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("  {tag}  {:<36} {:>12.4e}  (tol {:.3e})\n", c.name, c.residual, c.tolerance));
        }
        for f in &self.fits {
            out.push_str(&format!("  fit   {:<36} slope {:+.4}  rms {:.3e}\n", f.name, f.fit.slope, f.fit.residual));
        }
        out.push_str(if self.passed { "  => all invariants pass\n" } else { "  => invariant failure\n" });
        out
    }
}

pub const SWEEP_HEADER: [&str; 14] =
    ["k", "k1", "k2", "l", "theta1", "theta2", "m", "p", "q", "trials", "seed", "measured", "bound", "ratio"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn sign(s: Option<hdirac_core::Sign>) -> String {
    s.map(|s| if s.as_i8() > 0 { "+" } else { "-" }.to_string()).unwrap_or_default()
}

/// One row per sweep point. The localized sweep stores `k′` in the `k1` column.
pub fn write_sweep_csv(path: &Path, rows: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            opt(r.k1.or(r.k_prime)),
            opt(r.k2),
            opt(r.l),
            sign(r.theta1),
            sign(r.theta2),
            r.m.to_string(),
            opt(r.p),
            opt(r.q),
            r.trials.to_string(),
            r.seed.to_string(),
            r.measured.to_string(),
            r.bound.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
