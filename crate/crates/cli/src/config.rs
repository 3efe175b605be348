//! Flat `key=value` run configuration.

use std::path::PathBuf;

use choquard_core::potential::check_s;
use choquard_core::{Error, Result};

pub const DEFAULT_OUT: &str = "output";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: usize,
    pub r_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub s_values: Vec<f64>,
    pub k_max: usize,
    pub n_eigs: usize,
    pub out_dir: PathBuf,
    pub extension: bool,
    pub oracle: bool,
    pub continuation: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: 1024,
            r_max: 40.0,
            tol: 1e-10,
            max_iter: 2000,
            s_values: vec![1.0],
            k_max: 4,
            n_eigs: 4,
            out_dir: PathBuf::from(DEFAULT_OUT),
            extension: true,
            oracle: true,
            continuation: true,
            seed: 0,
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// One `key=value` line per field; floats use the shortest exact form.
    pub fn serialize(&self) -> String {
        let pairs = self.pairs();
        pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("M", self.m.to_string()),
            ("R_max", self.r_max.to_string()),
            ("tol", self.tol.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("s", join(&self.s_values)),
            ("k_max", self.k_max.to_string()),
            ("n_eigs", self.n_eigs.to_string()),
            ("out", self.out_dir.display().to_string()),
            ("extension", self.extension.to_string()),
            ("oracle", self.oracle.to_string()),
            ("continuation", self.continuation.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Apply `key=value` lines on top of the defaults. Blank lines and lines
    /// starting with `#` are ignored; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
        }
        match key {
            "M" => self.m = num(key, value)?,
            "R_max" => self.r_max = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "s" => {
                self.s_values = value
                    .split(',')
                    .map(|x| num(key, x.trim()))
                    .collect::<Result<Vec<f64>>>()?
            }
            "k_max" => self.k_max = num(key, value)?,
            "n_eigs" => self.n_eigs = num(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "extension" => self.extension = num(key, value)?,
            "oracle" => self.oracle = num(key, value)?,
            "continuation" => self.continuation = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 16 {
            return Err(Error::Config(format!("M must be at least 16, got {}", self.m)));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("R_max must be positive, got {}", self.r_max)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tol must be positive and max_iter nonzero".into()));
        }
        if self.s_values.is_empty() {
            return Err(Error::Config("s list is empty".into()));
        }
        for &s in &self.s_values {
            check_s(s)?;
        }
        if self.k_max < 2 || self.n_eigs == 0 {
            return Err(Error::Config("k_max must be at least 2 and n_eigs at least 1".into()));
        }
        Ok(())
    }
}
