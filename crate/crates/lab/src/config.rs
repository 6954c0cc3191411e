//! Campaign configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! n_grid = 64, 144, 256, 576, 1024
//! reps = 50
//! p_list = 1, 2
//! seed = 1
//! m_policy = zero-override      # or: paper
//! M_factor = 1
//! solver_mode = exact           # or: auction
//! output_dir = circlaw-out
//! j_list = 3, 5, 8
//! theta_list = pi, 2pi          # radians; accepts pi, 2pi, pi/2, 0.75
//! t_list = 4, 8, 12, 16
//! ell_list = 4, 8, 16
//! s_list = 1, 2, 3
//! edge_t_list = 4.5
//! tol.wilson_z = 2.5758293035489004
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use circlaw::{MPolicy, SolverMode};

use crate::error::{LabError, LabResult};

/// Tolerance names understood by the campaigns, with defaults.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    // two-sided 99% normal quantile for Wilson intervals
    ("wilson_z", 2.5758293035489004),
    // deviation shape fit must be within this factor of linear
    ("shape_factor", 5.0),
    // exceedance-quantile scaling in ℓ must be within this factor of √ℓ
    ("scaling_factor", 2.0),
    // exceedance level whose quantile is tracked across ℓ
    ("exceedance_level", 0.1),
    // shape fit uses rows with exceedance frequency ≥ floor / reps
    ("frequency_floor", 10.0),
    // slack allowed where an analytic inequality holds with equality
    ("equality", 1e-8),
    ("slope_min", -0.35),
    ("slope_max_p1", -0.15),
    ("slope_max", -0.12),
    // quantization experiments use M = factor · n
    ("quantization_m_factor", 400.0),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub p_list: Vec<f64>,
    pub seed: u64,
    pub m_policy: MPolicy,
    pub m_factor: usize,
    pub solver_mode: SolverMode,
    pub output_dir: PathBuf,
    pub tolerances: BTreeMap<String, f64>,
    pub j_list: Vec<usize>,
    pub theta_list: Vec<f64>,
    pub t_list: Vec<f64>,
    pub ell_list: Vec<usize>,
    pub s_list: Vec<f64>,
    pub edge_t_list: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![64, 144, 256, 576, 1024],
            reps: 50,
            p_list: vec![1.0, 2.0],
            seed: 1,
            m_policy: MPolicy::Zero,
            m_factor: 1,
            solver_mode: SolverMode::Exact,
            output_dir: PathBuf::from("circlaw-out"),
            tolerances: DEFAULT_TOLERANCES
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
            j_list: vec![3, 5, 8],
            theta_list: vec![PI, 2.0 * PI],
            t_list: vec![4.0, 8.0, 12.0, 16.0],
            ell_list: vec![4, 8, 16],
            s_list: (1..=32).map(|i| 0.5 * i as f64).collect(),
            edge_t_list: vec![4.5],
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> LabError {
    LabError::Config(format!("{key} = {value}: {why}"))
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> LabResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).ok_or_else(|| bad(key, value, &format!("cannot parse {s:?}"))))
        .collect()
}

/// Reals with optional `pi` notation: `pi`, `2pi`, `pi/2`, `1.5pi/4`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some("") => PI,
        Some(k) => k.trim().parse::<f64>().ok()? * PI,
        None => num.parse::<f64>().ok()?,
    };
    let v = value / den;
    v.is_finite().then_some(v)
}

pub fn parse_m_policy(s: &str) -> Option<MPolicy> {
    match s {
        "paper" => Some(MPolicy::Paper),
        "zero-override" | "zero" => Some(MPolicy::Zero),
        _ => None,
    }
}

pub fn parse_solver(s: &str) -> Option<SolverMode> {
    match s {
        "exact" => Some(SolverMode::Exact),
        "auction" => Some(SolverMode::Auction),
        _ => None,
    }
}

pub fn m_policy_name(p: MPolicy) -> &'static str {
    match p {
        MPolicy::Paper => "paper",
        MPolicy::Zero => "zero-override",
    }
}

pub fn solver_name(s: SolverMode) -> &'static str {
    match s {
        SolverMode::Exact => "exact",
        SolverMode::Auction => "auction",
    }
}

impl ExperimentConfig {
    /// Parses a config file on top of the defaults.
    pub fn from_text(text: &str) -> LabResult<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> LabResult<()> {
        let num = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite());
        match key {
            "n_grid" => self.n_grid = parse_list(key, value, |s| s.parse().ok())?,
            "reps" => self.reps = value.parse().map_err(|_| bad(key, value, "not an integer"))?,
            "p_list" => self.p_list = parse_list(key, value, num)?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value, "not a u64"))?,
            "m_policy" => {
                self.m_policy =
                    parse_m_policy(value).ok_or_else(|| bad(key, value, "expected paper or zero-override"))?
            }
            "M_factor" | "m_factor" => {
                self.m_factor = value.parse().map_err(|_| bad(key, value, "not an integer"))?
            }
            "solver_mode" => {
                self.solver_mode = parse_solver(value).ok_or_else(|| bad(key, value, "expected exact or auction"))?
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            "j_list" => self.j_list = parse_list(key, value, |s| s.parse().ok())?,
            "theta_list" => self.theta_list = parse_list(key, value, parse_angle)?,
            "t_list" => self.t_list = parse_list(key, value, num)?,
            "ell_list" => self.ell_list = parse_list(key, value, |s| s.parse().ok())?,
            "s_list" => self.s_list = parse_list(key, value, num)?,
            "edge_t_list" => self.edge_t_list = parse_list(key, value, num)?,
            _ => match key.strip_prefix("tol.") {
                Some(name) if self.tolerances.contains_key(name) => {
                    let v = num(value).ok_or_else(|| bad(key, value, "not a finite real"))?;
                    self.tolerances.insert(name.to_string(), v);
                }
                _ => return Err(LabError::Config(format!("unknown key {key:?}"))),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.reps == 0 {
            return Err(LabError::Config("reps must be ≥ 1".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 2) {
            return Err(LabError::Config(format!("every n must be ≥ 2, got {n}")));
        }
        if let Some(&p) = self.p_list.iter().find(|&&p| !(p >= 1.0)) {
            return Err(LabError::Config(format!("every p must be ≥ 1, got {p}")));
        }
        if self.m_factor == 0 {
            return Err(LabError::Config("M_factor must be positive".into()));
        }
        if let Some(&j) = self.j_list.iter().find(|&&j| j == 0) {
            return Err(LabError::Config(format!("j values must be ≥ 1, got {j}")));
        }
        if let Some(&t) = self.theta_list.iter().find(|&&t| !(t > 0.0 && t <= 2.0 * PI + 1e-12)) {
            return Err(LabError::Config(format!("θ values must lie in (0, 2π], got {t}")));
        }
        if let Some(&l) = self.ell_list.iter().find(|&&l| l < 2) {
            return Err(LabError::Config(format!("ℓ values must be ≥ 2, got {l}")));
        }
        for &n in &self.n_grid {
            self.big_m(n)?;
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        match self.tolerances.get(name) {
            Some(&v) => v,
            None => panic!("unknown tolerance {name:?}"),
        }
    }

    /// `M = M_factor · n` rounded to the nearest perfect square, never
    /// below `n`.
    pub fn big_m(&self, n: usize) -> LabResult<usize> {
        rounded_square(self.m_factor.checked_mul(n).ok_or_else(|| {
            LabError::Config(format!("M_factor · n overflows for n={n}"))
        })?, n)
    }

    /// Stable text rendering used in report headers.
    pub fn summary(&self) -> BTreeMap<&'static str, String> {
        let join = |v: Vec<String>| v.join(",");
        let mut m = BTreeMap::new();
        m.insert("n_grid", join(self.n_grid.iter().map(|x| x.to_string()).collect()));
        m.insert("reps", self.reps.to_string());
        m.insert("p_list", join(self.p_list.iter().map(|x| x.to_string()).collect()));
        m.insert("seed", self.seed.to_string());
        m.insert("m_policy", m_policy_name(self.m_policy).to_string());
        m.insert("M_factor", self.m_factor.to_string());
        m.insert("solver_mode", solver_name(self.solver_mode).to_string());
        m
    }
}

pub fn rounded_square(target: usize, floor: usize) -> LabResult<usize> {
    let r = target.isqrt();
    let candidates = [r, r + 1];
    let best = candidates
        .iter()
        .map(|&c| c * c)
        .filter(|&sq| sq >= floor)
        .min_by_key(|&sq| sq.abs_diff(target))
        .ok_or_else(|| LabError::Config(format!("no perfect square near {target}")))?;
    Ok(best)
}
