//! Run configuration: built-in defaults, then a `key=value` file, then flags.

use std::path::PathBuf;

use fbdomain::analysis::{Slice, VerifyConfig};
use fbdomain::fatou::{MachineConfig, TruncPolicy};
use fbdomain::regions::RegionParams;
use num_complex::Complex64;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub jet_order: usize,
    pub n_max: usize,
    pub tol: f64,
    pub budget: usize,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub slice: Slice,
    pub out: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let m = MachineConfig::default();
        let v = VerifyConfig::default();
        Config {
            eps: m.params.eps,
            r: m.params.r,
            jet_order: m.curve_order,
            n_max: m.policy.n_max,
            tol: m.policy.tol,
            budget: v.budget,
            seed: v.seed,
            width: 256,
            height: 256,
            slice: Slice::standard(),
            out: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Usage(format!("invalid value for {key}: {value:?}")))
}

/// `a,b` as a pair of floats.
pub fn parse_pair(key: &str, value: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = value.split_once(',').ok_or_else(|| CliError::Usage(format!("{key} expects two comma-separated numbers, got {value:?}")))?;
    Ok((parse(key, a)?, parse(key, b)?))
}

pub fn parse_complex(key: &str, value: &str) -> Result<Complex64, CliError> {
    let (re, im) = parse_pair(key, value)?;
    Ok(Complex64::new(re, im))
}

impl Config {
    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "eps" => self.eps = parse(key, value)?,
            "R" | "r" => self.r = parse(key, value)?,
            "order" | "jet_order" => self.jet_order = parse(key, value)?,
            "n_max" => self.n_max = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "budget" => self.budget = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "width" => self.width = parse(key, value)?,
            "height" => self.height = parse(key, value)?,
            "slice_w" => self.slice = Slice::z_plane(parse_complex(key, value)?, self.slice.s, self.slice.t),
            "slice_re" => self.slice.s = parse_pair(key, value)?,
            "slice_im" => self.slice.t = parse_pair(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Lines of `key=value`; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<RegionParams, CliError> {
        RegionParams::new(self.eps, self.r).map_err(|e| CliError::Usage(format!("parameters rejected: {e}")))
    }

    pub fn machine(&self) -> Result<MachineConfig, CliError> {
        let d = MachineConfig::default();
        if self.jet_order < 4 {
            return Err(CliError::Usage(format!("order must be at least 4 for the curve, got {}", self.jet_order)));
        }
        Ok(MachineConfig {
            params: self.params()?,
            curve_order: self.jet_order,
            series_order: d.series_order.min(self.jet_order - 2),
            policy: TruncPolicy { n_max: self.n_max, tol: self.tol },
        })
    }

    pub fn verify(&self) -> VerifyConfig {
        VerifyConfig { eps: self.eps, r: self.r, order: self.jet_order, budget: self.budget, tol: self.tol, seed: self.seed }
    }
}
