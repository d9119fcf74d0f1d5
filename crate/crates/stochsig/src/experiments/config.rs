//! Plain-text `key = value` experiment configuration.

use std::collections::BTreeSet;

use crate::error::{invalid, Result};

/// Settings shared by every suite. Sample sizes left as `None` fall back to
/// per-experiment defaults; `paths` overrides the main Monte Carlo count of
/// whichever suite runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub seed: u64,
    pub paths: Option<usize>,
    pub output: Option<String>,
    pub h: f64,
    /// Tolerance in standard errors for rows checked against a mean.
    pub se_multiple: f64,
    pub oracle_paths: Option<usize>,
    pub oracle_steps: Option<usize>,

    pub sort_gamma: f64,
    pub sort_t: f64,
    pub sort_x0_var: f64,
    pub sort_ns: Vec<usize>,

    pub igbm_a: f64,
    pub igbm_b: f64,
    pub igbm_sigma: f64,
    pub igbm_y0: f64,
    pub igbm_t: f64,
    pub igbm_ns: Vec<usize>,
    pub igbm_fine_steps: usize,
    pub igbm_weak_ns: Vec<usize>,
    pub igbm_weak_paths: usize,

    pub osc_sigma: f64,
    pub osc_y0: f64,
    pub osc_t: f64,
    pub ratio_ns: Vec<usize>,
    pub ratio_fine_steps: usize,

    pub fhn_eps: f64,
    pub fhn_gamma: f64,
    pub fhn_beta: f64,
    pub fhn_sigma1: f64,
    pub fhn_sigma2: f64,
    pub fhn_t: f64,
    pub fhn_ns: Vec<usize>,
    pub fhn_fine_steps: usize,
    pub fhn_paths: usize,

    pub heston_r: f64,
    pub heston_kappa: f64,
    pub heston_theta: f64,
    pub heston_sigma: f64,
    pub heston_s0: f64,
    pub heston_v0: f64,
    pub heston_strike: f64,
    pub heston_t: f64,
    pub mlmc_base_steps: usize,
    pub mlmc_levels: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: 0,
            paths: None,
            output: None,
            h: 1.0,
            se_multiple: 5.0,
            oracle_paths: None,
            oracle_steps: None,
            sort_gamma: 2.0,
            sort_t: 1.0,
            sort_x0_var: 10.0,
            sort_ns: vec![4, 8, 16, 32, 64],
            igbm_a: 0.1,
            igbm_b: 0.04,
            igbm_sigma: 0.6,
            igbm_y0: 0.06,
            igbm_t: 5.0,
            igbm_ns: vec![10, 20, 50, 100],
            igbm_fine_steps: 1000,
            igbm_weak_ns: vec![1, 2, 4, 5, 10],
            igbm_weak_paths: 100_000,
            osc_sigma: 1.0,
            osc_y0: 1.0,
            osc_t: 1.0,
            ratio_ns: vec![10, 16, 32, 64, 128],
            ratio_fine_steps: 2560,
            fhn_eps: 1.0,
            fhn_gamma: 1.0,
            fhn_beta: 1.0,
            fhn_sigma1: 1.0,
            fhn_sigma2: 1.0,
            fhn_t: 5.0,
            fhn_ns: vec![10, 20, 40, 80, 160],
            fhn_fine_steps: 2560,
            fhn_paths: 1000,
            heston_r: 0.05,
            heston_kappa: 2.0,
            heston_theta: 0.04,
            heston_sigma: 0.3,
            heston_s0: 100.0,
            heston_v0: 0.04,
            heston_strike: 100.0,
            heston_t: 1.0,
            mlmc_base_steps: 8,
            mlmc_levels: 6,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| invalid(format!("bad value `{v}` for `{key}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<usize>> {
    let ns: Vec<usize> = v.split(',').map(|s| num(key, s.trim())).collect::<Result<_>>()?;
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!("`{key}` must be positive and strictly increasing")));
    }
    Ok(ns)
}

impl ExperimentConfig {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(invalid(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, k: &str, v: &str) -> Result<()> {
        match k {
            "experiment" => self.experiment = Some(v.to_string()),
            "seed" => self.seed = num(k, v)?,
            "paths" => self.paths = Some(num(k, v)?),
            "output" => self.output = Some(v.to_string()),
            "h" => self.h = num(k, v)?,
            "se_multiple" => self.se_multiple = num(k, v)?,
            "oracle_paths" => self.oracle_paths = Some(num(k, v)?),
            "oracle_steps" => self.oracle_steps = Some(num(k, v)?),
            "sort_gamma" => self.sort_gamma = num(k, v)?,
            "sort_t" => self.sort_t = num(k, v)?,
            "sort_x0_var" => self.sort_x0_var = num(k, v)?,
            "sort_ns" => self.sort_ns = list(k, v)?,
            "igbm_a" => self.igbm_a = num(k, v)?,
            "igbm_b" => self.igbm_b = num(k, v)?,
            "igbm_sigma" => self.igbm_sigma = num(k, v)?,
            "igbm_y0" => self.igbm_y0 = num(k, v)?,
            "igbm_t" => self.igbm_t = num(k, v)?,
            "igbm_ns" => self.igbm_ns = list(k, v)?,
            "igbm_fine_steps" => self.igbm_fine_steps = num(k, v)?,
            "igbm_weak_ns" => self.igbm_weak_ns = list(k, v)?,
            "igbm_weak_paths" => self.igbm_weak_paths = num(k, v)?,
            "osc_sigma" => self.osc_sigma = num(k, v)?,
            "osc_y0" => self.osc_y0 = num(k, v)?,
            "osc_t" => self.osc_t = num(k, v)?,
            "ratio_ns" => self.ratio_ns = list(k, v)?,
            "ratio_fine_steps" => self.ratio_fine_steps = num(k, v)?,
            "fhn_eps" => self.fhn_eps = num(k, v)?,
            "fhn_gamma" => self.fhn_gamma = num(k, v)?,
            "fhn_beta" => self.fhn_beta = num(k, v)?,
            "fhn_sigma1" => self.fhn_sigma1 = num(k, v)?,
            "fhn_sigma2" => self.fhn_sigma2 = num(k, v)?,
            "fhn_t" => self.fhn_t = num(k, v)?,
            "fhn_ns" => self.fhn_ns = list(k, v)?,
            "fhn_fine_steps" => self.fhn_fine_steps = num(k, v)?,
            "fhn_paths" => self.fhn_paths = num(k, v)?,
            "heston_r" => self.heston_r = num(k, v)?,
            "heston_kappa" => self.heston_kappa = num(k, v)?,
            "heston_theta" => self.heston_theta = num(k, v)?,
            "heston_sigma" => self.heston_sigma = num(k, v)?,
            "heston_s0" => self.heston_s0 = num(k, v)?,
            "heston_v0" => self.heston_v0 = num(k, v)?,
            "heston_strike" => self.heston_strike = num(k, v)?,
            "heston_t" => self.heston_t = num(k, v)?,
            "mlmc_base_steps" => self.mlmc_base_steps = num(k, v)?,
            "mlmc_levels" => self.mlmc_levels = num(k, v)?,
            other => return Err(invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("paths", self.paths), ("oracle_paths", self.oracle_paths), ("fhn_paths", Some(self.fhn_paths)), ("igbm_weak_paths", Some(self.igbm_weak_paths))] {
            if let Some(n) = n {
                if n < 100 {
                    return Err(invalid(format!("`{name}` must be at least 100, got {n}")));
                }
            }
        }
        if !(self.h > 0.0 && self.se_multiple > 0.0) {
            return Err(invalid("`h` and `se_multiple` must be positive"));
        }
        if let Some(m) = self.oracle_steps {
            if m < 2 || !m.is_power_of_two() {
                return Err(invalid("`oracle_steps` must be a power of two >= 2"));
            }
        }
        for (name, ns, fine) in [
            ("igbm_ns", &self.igbm_ns, self.igbm_fine_steps),
            ("igbm_weak_ns", &self.igbm_weak_ns, self.igbm_fine_steps),
            ("ratio_ns", &self.ratio_ns, self.ratio_fine_steps),
            ("fhn_ns", &self.fhn_ns, self.fhn_fine_steps),
        ] {
            if let Some(&n) = ns.iter().find(|&&n| fine % n != 0 || fine < 10 * n) {
                return Err(invalid(format!("`{name}` entry {n} must divide the fine grid {fine} at least ten times")));
            }
        }
        if self.mlmc_levels < 2 || self.mlmc_base_steps == 0 {
            return Err(invalid("MLMC needs at least two levels and a positive base step count"));
        }
        Ok(())
    }

    /// `paths` if set, otherwise `default`.
    pub fn n(&self, default: usize) -> usize {
        self.paths.unwrap_or(default)
    }
}
