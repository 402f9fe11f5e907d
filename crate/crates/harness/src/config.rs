//! Study configuration files and built-in presets.
//!
//! Schema, version 1 (TOML; unknown keys are rejected):
//!
//! ```toml
//! version = 1
//! reps = 500            # Monte Carlo repetitions per grid point
//! alpha = 0.05
//! permutations = 500    # B, random permutation replicates per test
//! kinds = ["l2", "l1", "exp", "log"]
//! master_seed = 1
//! threads = 8           # optional; CLI --threads wins
//!
//! [[grid]]
//! scenario = "shrinking" # catalogue id or the id of a [[scenario]] below
//! dims = [2, 4, 8]      # optional; defaults to the scenario's own grid
//! beta = 0.5            # optional free parameters, where the scenario has them
//! gamma = 1.1
//! size = 20             # optional n = m for fixed-size scenarios
//!
//! [[scenario]]          # optional user-defined scenarios (`balldiv catalogue` prints the built-ins)
//! id = "mine"
//! ...
//! ```

use std::path::Path;

use balldiv::scenarios::{catalogue, lookup, Law, ScenarioParams, ScenarioSpec, ScenarioTemplate};
use balldiv::{DistanceKind, MAX_POOLED};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_REPS: usize = 500;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 500;
/// Desk preset: dimension cap and repetitions.
pub const DESK_MAX_DIM: usize = 256;
pub const DESK_REPS: usize = 200;

fn default_reps() -> usize {
    DEFAULT_REPS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

fn default_kinds() -> Vec<DistanceKind> {
    DistanceKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub version: u32,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<DistanceKind>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub grid: Vec<GridEntry>,
    #[serde(default, rename = "scenario", skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioTemplate>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
}

impl GridEntry {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            ..Self::default()
        }
    }

    pub fn dims(mut self, dims: &[usize]) -> Self {
        self.dims = Some(dims.to_vec());
        self
    }

    /// Series name used in output files and in seed derivation.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(b) = self.beta {
            parts.push(format!("beta={b}"));
        }
        if let Some(g) = self.gamma {
            parts.push(format!("gamma={g}"));
        }
        if let Some(s) = self.size {
            parts.push(format!("n={s}"));
        }
        if parts.is_empty() {
            self.scenario.clone()
        } else {
            format!("{}[{}]", self.scenario, parts.join(","))
        }
    }

    fn params(&self) -> ScenarioParams {
        ScenarioParams {
            beta: self.beta,
            gamma: self.gamma,
            size: self.size,
        }
    }
}

/// One (series, dimension) cell of a study, with its laws resolved.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub label: String,
    pub spec: ScenarioSpec,
    pub f: Law,
    pub g: Law,
}

impl StudyConfig {
    pub fn new(grid: Vec<GridEntry>) -> Self {
        Self {
            version: CONFIG_VERSION,
            reps: DEFAULT_REPS,
            alpha: DEFAULT_ALPHA,
            permutations: DEFAULT_PERMUTATIONS,
            kinds: default_kinds(),
            master_seed: 0,
            threads: None,
            grid,
            scenarios: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|source| Error::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    fn template(&self, entry: &GridEntry) -> Result<ScenarioTemplate> {
        match self.scenarios.iter().find(|s| s.id == entry.scenario) {
            Some(custom) => {
                if entry.beta.is_some() || entry.gamma.is_some() {
                    return Err(Error::Config(format!(
                        "custom scenario `{}` takes no beta/gamma",
                        custom.id
                    )));
                }
                let mut t = custom.clone();
                if let Some(size) = entry.size {
                    t.sizes = balldiv::scenarios::SizeRule::Fixed { n: size, m: size };
                }
                Ok(t)
            }
            None => Ok(lookup(&entry.scenario, &entry.params())?),
        }
    }

    /// Checks everything, so a study never fails part-way on a bad grid point.
    pub fn validate(&self) -> Result<()> {
        self.grid_points().map(|_| ())
    }

    /// Grid points in file order, dimensions in the order given.
    pub fn grid_points(&self) -> Result<Vec<GridPoint>> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.permutations == 0 {
            return Err(Error::Config("permutations must be at least 1".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("kinds must name at least one distance".into()));
        }
        for (i, k) in self.kinds.iter().enumerate() {
            if self.kinds[..i].contains(k) {
                return Err(Error::Config(format!("distance kind `{k}` listed twice")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("the grid is empty".into()));
        }
        for s in &self.scenarios {
            s.validate()?;
            if catalogue().iter().any(|c| c.id == s.id) {
                return Err(Error::Config(format!("custom scenario id `{}` shadows a built-in", s.id)));
            }
        }
        let mut points = Vec::new();
        let mut seen = Vec::new();
        for entry in &self.grid {
            let label = entry.label();
            if seen.contains(&label) {
                return Err(Error::Config(format!("grid series `{label}` appears twice")));
            }
            seen.push(label.clone());
            let template = self.template(entry)?;
            let dims = entry.dims.clone().unwrap_or_else(|| template.dims.clone());
            if dims.is_empty() {
                return Err(Error::Config(format!("series `{label}` has no dimensions")));
            }
            for &d in &dims {
                let spec = template.at(d)?;
                if spec.n + spec.m > MAX_POOLED {
                    return Err(Error::Core(balldiv::Error::PooledTooLarge(spec.n + spec.m)));
                }
                points.push(GridPoint {
                    label: label.clone(),
                    f: spec.f_law()?,
                    g: spec.g_law()?,
                    spec,
                });
            }
        }
        Ok(points)
    }
}

/// `balldiv subsample --config` file, version 1.
///
/// ```toml
/// version = 1
/// data = "colon.csv"     # relative paths resolve against the config file
/// label_column = "class"
/// sizes = [15, 19, 23, 27, 31]
/// reps = 500
/// alpha = 0.05
/// permutations = 500
/// kinds = ["l2", "exp"]
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsampleConfig {
    pub version: u32,
    pub data: std::path::PathBuf,
    pub label_column: String,
    pub sizes: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<DistanceKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SubsampleConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = toml::from_str(&text).map_err(|source| Error::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        if config.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                config.version
            )));
        }
        if config.data.is_relative() {
            if let Some(dir) = path.parent() {
                config.data = dir.join(&config.data);
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `d <= 256`, 200 repetitions.
    Desk,
    /// The full published grids at 500 repetitions.
    Full,
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            _ => Err(format!("unknown preset `{s}` (expected desk or full)")),
        }
    }
}

const SHRINKING_BETAS: [f64; 3] = [0.2, 0.3, 0.5];
const SHRINKING_GAMMAS: [f64; 7] = [0.0, 0.4, 0.5, 0.6, 0.9, 1.0, 1.1];
const LEVEL_SIZES: [usize; 3] = [20, 35, 50];

fn apply_preset(mut grid: Vec<GridEntry>, preset: Preset) -> StudyConfig {
    let reps = match preset {
        Preset::Desk => {
            for entry in &mut grid {
                let dims = entry.dims.clone().unwrap_or_else(|| {
                    catalogue()
                        .into_iter()
                        .find(|t| t.id == entry.scenario)
                        .map(|t| t.dims)
                        .unwrap_or_default()
                });
                entry.dims = Some(dims.into_iter().filter(|&d| d <= DESK_MAX_DIM).collect());
            }
            DESK_REPS
        }
        Preset::Full => DEFAULT_REPS,
    };
    StudyConfig {
        reps,
        ..StudyConfig::new(grid)
    }
}

/// Examples 1-14 over their grids plus the shrinking-alternative (beta, gamma) grid.
pub fn power_preset(preset: Preset) -> StudyConfig {
    let mut grid: Vec<GridEntry> = (1..=14).map(|k| GridEntry::new(&format!("ex{k}"))).collect();
    for beta in SHRINKING_BETAS {
        for gamma in SHRINKING_GAMMAS {
            grid.push(GridEntry {
                beta: Some(beta),
                gamma: Some(gamma),
                ..GridEntry::new("shrinking")
            });
        }
    }
    apply_preset(grid, preset)
}

/// The null scenario at n = m in {20, 35, 50}, L2 only.
pub fn level_preset(preset: Preset) -> StudyConfig {
    let grid = LEVEL_SIZES
        .iter()
        .map(|&size| GridEntry {
            size: Some(size),
            ..GridEntry::new("level")
        })
        .collect();
    StudyConfig {
        kinds: vec![DistanceKind::L2],
        ..apply_preset(grid, preset)
    }
}
