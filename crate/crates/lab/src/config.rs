//! Experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use annealpath_core::annealer::{Backend, Integrator, SimConfig};
use annealpath_core::bayesopt::{Acquisition, OptimizeOptions, SuggestOptions};
use annealpath_core::problems::ProblemKind;
use annealpath_core::schedules::AnnealFunctions;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "RA")]
    Ra,
    #[serde(rename = "HG")]
    Hg,
    #[serde(rename = "RA+HG")]
    RaHg,
    #[serde(rename = "FA")]
    Fa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ra, Method::Hg, Method::RaHg, Method::Fa];

    pub fn uses_reverse(self) -> bool {
        matches!(self, Method::Ra | Method::RaHg)
    }

    pub fn uses_hgain(self) -> bool {
        matches!(self, Method::Hg | Method::RaHg)
    }

    /// File-name friendly form.
    pub fn slug(self) -> &'static str {
        match self {
            Method::Ra => "ra",
            Method::Hg => "hg",
            Method::RaHg => "ra-hg",
            Method::Fa => "fa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ra => "RA",
            Method::Hg => "HG",
            Method::RaHg => "RA+HG",
            Method::Fa => "FA",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ra" => Ok(Method::Ra),
            "hg" => Ok(Method::Hg),
            "ra+hg" | "ra-hg" | "rahg" => Ok(Method::RaHg),
            "fa" => Ok(Method::Fa),
            _ => Err(format!(
                "unknown method {s:?} (expected RA, HG, RA+HG or FA)"
            )),
        }
    }
}

/// Which instance set a graph belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Training,
    Validation,
}

impl Role {
    pub fn bit(self) -> u64 {
        match self {
            Role::Training => 0,
            Role::Validation => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Training => "training",
            Role::Validation => "validation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BayesSettings {
    pub init_points: usize,
    pub n_iter: usize,
    pub noise: f64,
    pub acquisition: Acquisition,
    pub random_starts: usize,
    pub grid_resolution: usize,
}

impl Default for BayesSettings {
    fn default() -> Self {
        Self {
            init_points: 100,
            n_iter: 200,
            noise: 0.01,
            acquisition: Acquisition::default(),
            random_starts: 1000,
            grid_resolution: 50,
        }
    }
}

impl BayesSettings {
    pub fn options(&self, seed: u64, probes: Vec<Vec<f64>>) -> OptimizeOptions {
        OptimizeOptions {
            init_points: self.init_points,
            n_iter: self.n_iter,
            noise: self.noise,
            seed,
            acquisition: self.acquisition,
            suggest: SuggestOptions {
                random_starts: self.random_starts,
                ..SuggestOptions::default()
            },
            probes,
            grid_resolution: self.grid_resolution,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub n: usize,
    pub densities: Vec<f64>,
    pub instances_per_density: usize,
    pub validation_instances: usize,
    pub baseline_shots: usize,
    #[serde(rename = "baseline_T")]
    pub baseline_t: f64,
    /// Shots per method run.
    pub shots: usize,
    /// Method tuned by `tune-schedule`.
    pub method: Method,
    /// Methods evaluated by `compare`.
    pub methods: Vec<Method>,
    pub backend: Backend,
    pub integrator: Integrator,
    pub dt: Option<f64>,
    pub classical_sweeps: usize,
    pub seed: u64,
    /// Durations evaluated by `compare`.
    #[serde(rename = "anneal_T")]
    pub anneal_t: Vec<f64>,
    /// Duration at which schedules and scaling factors are tuned.
    #[serde(rename = "tune_T")]
    pub tune_t: f64,
    pub alpha_bounds: (f64, f64),
    /// Tune the scaling factors together with the HG schedule.
    pub joint_alpha: bool,
    pub bayes: BayesSettings,
    /// `s,A,B` table; linear `A = 1 - s`, `B = s` when absent.
    pub anneal_functions: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::MaxCut,
            n: 12,
            densities: vec![0.1, 0.5, 0.9],
            instances_per_density: 10,
            validation_instances: 10,
            baseline_shots: 1000,
            baseline_t: 1.0,
            shots: 1000,
            method: Method::Hg,
            methods: Method::ALL.to_vec(),
            backend: Backend::Statevector,
            integrator: Integrator::Rk4,
            dt: None,
            classical_sweeps: 1000,
            seed: 0,
            anneal_t: vec![1.0, 10.0],
            tune_t: 1.0,
            alpha_bounds: (0.01, 1.0),
            joint_alpha: false,
            bayes: BayesSettings::default(),
            anneal_functions: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).map_err(annealpath_core::Error::from)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("n must be >= 2, got {}", self.n)));
        }
        if self.densities.is_empty() {
            return Err(invalid("densities must not be empty"));
        }
        if let Some(p) = self.densities.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(invalid(format!("density {p} is outside (0, 1]")));
        }
        for (name, v) in [
            ("instances_per_density", self.instances_per_density),
            ("validation_instances", self.validation_instances),
            ("baseline_shots", self.baseline_shots),
            ("shots", self.shots),
            ("classical_sweeps", self.classical_sweeps),
            ("bayes.init_points", self.bayes.init_points),
        ] {
            if v == 0 {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        for (name, t) in std::iter::once(("baseline_T", self.baseline_t))
            .chain(std::iter::once(("tune_T", self.tune_t)))
            .chain(self.anneal_t.iter().map(|&t| ("anneal_T", t)))
        {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("{name} must be > 0, got {t}")));
            }
        }
        if self.anneal_t.is_empty() {
            return Err(invalid("anneal_T must list at least one duration"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods must not be empty"));
        }
        let (lo, hi) = self.alpha_bounds;
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(invalid(format!(
                "alpha_bounds must satisfy 0 <= lo < hi, got ({lo}, {hi})"
            )));
        }
        if !(self.bayes.noise >= 0.0 && self.bayes.noise.is_finite()) {
            return Err(invalid("bayes.noise must be >= 0"));
        }
        if matches!(self.dt, Some(dt) if !(dt > 0.0 && dt.is_finite())) {
            return Err(invalid("dt must be > 0"));
        }
        Ok(())
    }

    pub fn functions(&self) -> Result<AnnealFunctions> {
        Ok(AnnealFunctions::load(self.anneal_functions.as_deref())?)
    }

    pub fn sim_config(&self, shots: usize, seed: u64) -> SimConfig {
        SimConfig {
            dt: self.dt,
            integrator: self.integrator,
            shots,
            seed,
            backend: self.backend,
            classical_sweeps: self.classical_sweeps,
            ..SimConfig::default()
        }
    }

    pub fn instance_count(&self, role: Role) -> usize {
        match role {
            Role::Training => self.instances_per_density,
            Role::Validation => self.validation_instances,
        }
    }
}
