//! Flat `key = value` run configuration with `#` comments.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const KNOWN_KEYS: &[&str] = &[
    "potential.kind",
    "potential.n",
    "potential.B",
    "potential.M",
    "potential.m",
    "potential.gamma",
    "potential.mu",
    "potential.beta",
    "potential.a",
    "potential.b",
    "L",
    "n_points",
    "v",
    "x0",
    "t_start",
    "t_final",
    "dt",
    "snapshot_every",
    "mode",
    "outer",
    "inner",
    "lambda_min",
    "lambda_max",
    "lambda_steps",
    "exclusion",
    "times",
    "loop_L",
    "loop_tau",
    "wilson_lambdas",
    "pt_lambda",
    "x_c",
    "t_c",
    "c1",
    "c2",
    "radiation_margin",
    "out",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_pair(line).map_err(|e| ConfigError(format!("{origin}:{}: {e}", ln + 1)))?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` assignment.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("expected key = value, got {pair:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(ConfigError(format!("unknown key {k:?}")));
        }
        if v.is_empty() {
            return Err(ConfigError(format!("empty value for {k}")));
        }
        self.values.insert(k.to_string(), v.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => {
                let v: f64 = s.parse().map_err(|_| ConfigError(format!("{key}: not a number: {s:?}")))?;
                if !v.is_finite() {
                    return Err(ConfigError(format!("{key}: must be finite")));
                }
                Ok(Some(v))
            }
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return Err(ConfigError(format!("{key}: must be > 0, got {v}")));
        }
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| ConfigError(format!("{key}: not a non-negative integer: {s:?}"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| ConfigError(format!("{key}: bad list entry {p:?}")))
                })
                .collect(),
        }
    }

    /// Sorted `key = value` lines.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of [`Config::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let c = Config::parse("# header\n\npotential.n = 4  # deformed\ndt=0.001\n", "t").unwrap();
        assert_eq!(c.get("potential.n"), Some("4"));
        assert_eq!(c.f64_or("dt", 1.0).unwrap(), 0.001);
        assert_eq!(c.f64_or("v", 0.5).unwrap(), 0.5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(Config::parse("bogus = 1", "t").unwrap_err().0.contains("t:1"));
        assert!(Config::parse("dt 0.1", "t").is_err());
        assert!(Config::parse("dt = ", "t").is_err());
    }

    #[test]
    fn hash_ignores_order_and_formatting() {
        let a = Config::parse("dt = 0.5\nv=0.2", "a").unwrap();
        let b = Config::parse("v = 0.2\n# x\ndt=0.5", "b").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = Config::parse("v = 0.3\ndt=0.5", "c").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn typed_getters_validate() {
        let c = Config::parse("dt = -1\nn_points = x\ntimes = 1, 2,3", "t").unwrap();
        assert!(c.positive_or("dt", 1.0).is_err());
        assert!(c.usize_or("n_points", 1).is_err());
        assert_eq!(c.list_or("times", &[]).unwrap(), vec![1.0, 2.0, 3.0]);
    }
}
