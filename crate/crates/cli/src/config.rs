//! Flat key=value run configuration: file first, then command-line
//! overrides, later entries winning.

use std::collections::BTreeMap;
use std::path::Path;

use hcme_core::principal_series::Parity;
use hcme_core::Complex64;

use crate::CliError;

/// Every key the configuration accepts.
pub const KEYS: &[&str] = &[
    "s", "t", "parity", "m", "n", "grid", "word_degree", "ell", "shifts", "n_fit", "n_holdout", "samples", "seed",
    "tol", "radius", "points", "t_re", "t_im", "scan_lo", "scan_hi", "n_max", "threads", "output",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Reads `path` (if any) and applies `overrides` on top.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut config = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                config
                    .set_pair(line)
                    .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            }
        }
        for pair in overrides {
            config.set_pair(pair).map_err(CliError::Config)?;
        }
        Ok(config)
    }

    fn set_pair(&mut self, pair: &str) -> Result<(), String> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{pair}'"))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(format!("unknown key '{key}'"));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T>(&self, key: &str, default: T, f: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => f(v).ok_or_else(|| CliError::Config(format!("cannot parse {key} = '{v}'"))),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.parse(key, default, |v| v.parse().ok())
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64, CliError> {
        self.parse(key, default, |v| v.parse().ok())
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.parse(key, default, |v| v.parse().ok().filter(|x: &f64| x.is_finite()))
    }

    pub fn parity(&self, default: Parity) -> Result<Parity, CliError> {
        self.parse("parity", default, |v| v.parse().ok())
    }

    /// Comma-separated complex numbers ("0.3+0.7i", "-0.5", "1.2i").
    pub fn complex_list(&self, key: &str, default: &[Complex64]) -> Result<Vec<Complex64>, CliError> {
        self.parse(key, default.to_vec(), |v| {
            split_list(v).map(|x| x.parse::<Complex64>().ok()).collect()
        })
    }

    /// Comma-separated reals, or `lo:hi:count` for equispaced points
    /// including both ends.
    pub fn float_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        self.parse(key, default.to_vec(), parse_float_list)
    }

    /// Comma-separated integers, or `lo:hi` for the inclusive range.
    pub fn int_list(&self, key: &str, default: &[i32]) -> Result<Vec<i32>, CliError> {
        self.parse(key, default.to_vec(), |v| {
            if let Some((lo, hi)) = v.split_once(':') {
                let (lo, hi): (i32, i32) = (lo.trim().parse().ok()?, hi.trim().parse().ok()?);
                return Some((lo..=hi).collect());
            }
            split_list(v).map(|x| x.parse().ok()).collect()
        })
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn parse_float_list(v: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let (lo, hi): (f64, f64) = (parts[0].parse().ok()?, parts[1].parse().ok()?);
        let count: usize = parts[2].parse().ok()?;
        return Some(match count {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..count)
                .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                .collect(),
        });
    }
    if parts.len() != 1 {
        return None;
    }
    split_list(v)
        .map(|x| x.parse::<f64>().ok().filter(|y| y.is_finite()))
        .collect()
}
