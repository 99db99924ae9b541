//! Experiment configuration and the four problem presets.
//!
//! A config file is a flat TOML table. Only `problem` is required; every other
//! key falls back to the preset of that problem at the selected scale.
//!
//! | key | meaning |
//! |-----|---------|
//! | `problem` | `sod`, `toro`, `shu-osher` or `blast2d` |
//! | `scale` | `desk` (default) or `paper`; picks grid size and ensemble size |
//! | `nx`, `ny` | node counts (`ny` only for 2D problems) |
//! | `final_time` | end of the assimilation window |
//! | `observation_steps` | number of observation times, equally spaced |
//! | `skip` | leading observation steps without analysis |
//! | `ensemble_size` | number of particles |
//! | `beta_w` | likelihood underweighting factor |
//! | `obs_variance` | observation error variance (`R = obs_variance * I`) |
//! | `seed` | RNG seed |
//! | `filter` | `etpf`, `fp-etpf` or `bootstrap` |
//! | `output_dir` | where `run` writes its files |
//! | `cfl` | Courant number of the solver |
//! | `interpolation` | `nearest` (default) or `linear` |
//! | `truth_<param>` | true initial-condition parameter |
//! | `sigma_<param>` | sampling standard deviation of that parameter |
//!
//! Parameter names per problem are listed by [`Problem::param_names`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::combine::Interpolation;
use crate::euler::Grid;
use crate::filters::FilterKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Sod,
    Toro,
    ShuOsher,
    Blast2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sod" => Ok(Problem::Sod),
            "toro" => Ok(Problem::Toro),
            "shu-osher" => Ok(Problem::ShuOsher),
            "blast2d" => Ok(Problem::Blast2d),
            other => Err(Error::Config(format!(
                "unknown problem '{other}' (expected sod, toro, shu-osher or blast2d)"
            ))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::Config(format!("unknown scale '{other}' (expected desk or paper)"))),
        }
    }
}

const ONE_D: [&str; 7] = ["rho_l", "u_l", "p_l", "rho_r", "u_r", "p_r", "x_d"];
const BLAST: [&str; 7] = ["x_c", "y_c", "r", "rho_in", "p_in", "rho_out", "p_out"];

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Sod => "sod",
            Problem::Toro => "toro",
            Problem::ShuOsher => "shu-osher",
            Problem::Blast2d => "blast2d",
        }
    }

    pub fn dim(self) -> usize {
        if self == Problem::Blast2d {
            2
        } else {
            1
        }
    }

    /// Domain extent of every axis.
    pub fn extent(self) -> (f64, f64) {
        if self == Problem::Blast2d {
            (0.0, 2.0)
        } else {
            (0.0, 1.0)
        }
    }

    /// Names of the initial-condition parameters. For `shu-osher`, `rho_r` is
    /// the mean of the sinusoidal right-hand density.
    pub fn param_names(self) -> &'static [&'static str] {
        if self == Problem::Blast2d {
            &BLAST
        } else {
            &ONE_D
        }
    }

    pub fn truth_params(self) -> Vec<f64> {
        match self {
            Problem::Sod => vec![1.0, 0.0, 1.0, 0.125, 0.0, 0.1, 0.5],
            Problem::Toro => vec![5.99924, 19.5975, 460.894, 5.99242, -6.19633, 46.0950, 0.5],
            Problem::ShuOsher => vec![3.857143, 2.629369, 10.3333, 1.0, 0.0, 1.0, 0.1],
            Problem::Blast2d => vec![1.0, 1.0, 0.4, 1.0, 1000.0, 1.0, 0.01],
        }
    }

    pub fn sampling_sigmas(self) -> Vec<f64> {
        match self {
            Problem::Sod => vec![0.05, 0.0, 0.05, 0.006, 0.0, 0.005, 0.2],
            Problem::Toro => vec![0.2, 0.0, 10.0, 0.0, 0.0, 1.0, 0.1],
            Problem::ShuOsher => vec![0.4, 0.2, 1.03, 0.1, 0.0, 0.1, 0.05],
            Problem::Blast2d => vec![0.2, 0.2, 0.05, 0.05, 0.1, 0.0, 0.0],
        }
    }

    pub fn final_time(self) -> f64 {
        match self {
            Problem::Sod => 0.2,
            Problem::Toro => 0.0245,
            Problem::ShuOsher => 0.25,
            Problem::Blast2d => 0.01,
        }
    }

    pub fn observation_steps(self) -> usize {
        if self == Problem::Toro {
            70
        } else {
            100
        }
    }

    pub fn beta_w(self) -> f64 {
        match self {
            Problem::Sod => 20.0,
            Problem::Toro => 1e8,
            Problem::ShuOsher => 1e3,
            Problem::Blast2d => 1e7,
        }
    }

    pub fn nodes(self, scale: Scale) -> usize {
        match (self.dim(), scale) {
            (1, Scale::Desk) => 501,
            (1, Scale::Paper) => 5001,
            (_, Scale::Desk) => 101,
            (_, Scale::Paper) => 401,
        }
    }

    /// Sensor coordinates: 9 points in 1D, a 9 x 9 lattice in 2D.
    pub fn sensors(self) -> Vec<(f64, f64)> {
        if self == Problem::Blast2d {
            let ticks: Vec<f64> = (1..=9).map(|k| 0.2 * k as f64).collect();
            ticks.iter().flat_map(|&x| ticks.iter().map(move |&y| (x, y))).collect()
        } else {
            (1..=9).map(|k| (k as f64 / 10.0, 0.0)).collect()
        }
    }
}

pub fn ensemble_size(scale: Scale) -> usize {
    match scale {
        Scale::Desk => 10,
        Scale::Paper => 20,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub nx: usize,
    /// 1 for 1D problems.
    pub ny: usize,
    pub final_time: f64,
    pub observation_steps: usize,
    pub skip: usize,
    pub ensemble_size: usize,
    pub beta_w: f64,
    pub obs_variance: f64,
    pub truth: Vec<f64>,
    pub sigma: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub filter: FilterKind,
    pub cfl: f64,
    pub interpolation: Interpolation,
}

impl ExperimentConfig {
    /// Preset of `problem` at `scale`.
    pub fn preset(problem: Problem, scale: Scale) -> Self {
        let n = problem.nodes(scale);
        ExperimentConfig {
            problem,
            nx: n,
            ny: if problem.dim() == 2 { n } else { 1 },
            final_time: problem.final_time(),
            observation_steps: problem.observation_steps(),
            skip: 10,
            ensemble_size: ensemble_size(scale),
            beta_w: problem.beta_w(),
            obs_variance: 0.1,
            truth: problem.truth_params(),
            sigma: problem.sampling_sigmas(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            filter: FilterKind::FeaturePreserving,
            cfl: 0.45,
            interpolation: Interpolation::Nearest,
        }
    }

    /// Parses a config file. `scale` overrides the file's `scale` key.
    pub fn from_toml_str(text: &str, scale: Option<Scale>) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let problem: Problem = take_str(&mut table, "problem")?
            .ok_or_else(|| Error::Config("missing key 'problem'".into()))?
            .parse()?;
        let file_scale = take_str(&mut table, "scale")?.map(|s| s.parse()).transpose()?;
        let mut cfg = ExperimentConfig::preset(problem, scale.or(file_scale).unwrap_or_default());

        if let Some(v) = take_usize(&mut table, "nx")? {
            cfg.nx = v;
        }
        if let Some(v) = take_usize(&mut table, "ny")? {
            if problem.dim() == 1 {
                return Err(Error::Config(format!("'ny' is not used by the 1D problem {problem}")));
            }
            cfg.ny = v;
        }
        if let Some(v) = take_f64(&mut table, "final_time")? {
            cfg.final_time = v;
        }
        if let Some(v) = take_usize(&mut table, "observation_steps")? {
            cfg.observation_steps = v;
        }
        if let Some(v) = take_usize(&mut table, "skip")? {
            cfg.skip = v;
        }
        if let Some(v) = take_usize(&mut table, "ensemble_size")? {
            cfg.ensemble_size = v;
        }
        if let Some(v) = take_f64(&mut table, "beta_w")? {
            cfg.beta_w = v;
        }
        if let Some(v) = take_f64(&mut table, "obs_variance")? {
            cfg.obs_variance = v;
        }
        if let Some(v) = take_usize(&mut table, "seed")? {
            cfg.seed = v as u64;
        }
        if let Some(v) = take_str(&mut table, "output_dir")? {
            cfg.output_dir = PathBuf::from(v);
        }
        if let Some(v) = take_str(&mut table, "filter")? {
            cfg.filter = v.parse()?;
        }
        if let Some(v) = take_f64(&mut table, "cfl")? {
            cfg.cfl = v;
        }
        if let Some(v) = take_str(&mut table, "interpolation")? {
            cfg.interpolation = match v.as_str() {
                "nearest" => Interpolation::Nearest,
                "linear" => Interpolation::Linear,
                other => return Err(Error::Config(format!("unknown interpolation '{other}'"))),
            };
        }
        for (k, name) in problem.param_names().iter().enumerate() {
            if let Some(v) = take_f64(&mut table, &format!("truth_{name}"))? {
                cfg.truth[k] = v;
            }
            if let Some(v) = take_f64(&mut table, &format!("sigma_{name}"))? {
                cfg.sigma[k] = v;
            }
        }
        if let Some(key) = table.keys().next() {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let min = crate::euler::MIN_NODES;
        if self.nx < min || (self.problem.dim() == 2 && self.ny < min) {
            return bad(format!("grids need at least {min} nodes per axis"));
        }
        if self.problem.dim() == 1 && self.ny != 1 {
            return bad("1D problems have ny = 1".into());
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return bad(format!("final_time must be positive, got {}", self.final_time));
        }
        if self.observation_steps == 0 {
            return bad("observation_steps must be at least 1".into());
        }
        if self.ensemble_size < 2 {
            return bad("ensemble_size must be at least 2".into());
        }
        if !(self.beta_w >= 1.0) || !self.beta_w.is_finite() {
            return bad(format!("beta_w must be >= 1, got {}", self.beta_w));
        }
        if !(self.obs_variance > 0.0) || !self.obs_variance.is_finite() {
            return bad(format!("obs_variance must be positive, got {}", self.obs_variance));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if self.sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return bad("sampling standard deviations must be nonnegative".into());
        }
        if self.truth.iter().any(|v| !v.is_finite()) {
            return bad("truth parameters must be finite".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let ext = self.problem.extent();
        if self.problem.dim() == 1 {
            Grid::new_1d(self.nx, ext)
        } else {
            Grid::new_2d(self.nx, self.ny, ext, ext)
        }
    }

    /// Observation interval.
    pub fn observation_interval(&self) -> f64 {
        self.final_time / self.observation_steps as f64
    }

    /// Time of observation `k` (1-based); the last one is exactly `final_time`.
    pub fn observation_time(&self, k: usize) -> f64 {
        if k == self.observation_steps {
            self.final_time
        } else {
            k as f64 * self.observation_interval()
        }
    }
}

fn take_str(t: &mut toml::Table, key: &str) -> Result<Option<String>> {
    match t.remove(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s)),
        Some(v) => Err(Error::Config(format!("'{key}' must be a string, got {v}"))),
    }
}

fn take_f64(t: &mut toml::Table, key: &str) -> Result<Option<f64>> {
    match t.remove(key) {
        None => Ok(None),
        Some(toml::Value::Float(v)) => Ok(Some(v)),
        Some(toml::Value::Integer(v)) => Ok(Some(v as f64)),
        Some(v) => Err(Error::Config(format!("'{key}' must be a number, got {v}"))),
    }
}

fn take_usize(t: &mut toml::Table, key: &str) -> Result<Option<usize>> {
    match t.remove(key) {
        None => Ok(None),
        Some(toml::Value::Integer(v)) if v >= 0 => Ok(Some(v as usize)),
        Some(v) => Err(Error::Config(format!("'{key}' must be a nonnegative integer, got {v}"))),
    }
}
