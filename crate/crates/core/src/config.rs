//! Run configuration: one TOML document holding every parameter of a run.
//! Missing sections fall back to the full-scale defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::TrainConfig;
use crate::citygen::{generate_buildings, BuildingParams, EnvRealization};
use crate::geometry::{Bounds, Vec3};
use crate::mdp::{NavModel, NavParams};
use crate::neural::PretrainConfig;
use crate::radio::{hex_site_positions, make_sites, RadioParams, SectorTemplate};
use crate::radiomap::RadioMapConfig;
use crate::snarm::{PlanningSchedule, SnarmConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CityConfig {
    pub buildings: BuildingParams,
    pub seed: u64,
}

impl Default for CityConfig {
    fn default() -> Self {
        Self { buildings: BuildingParams::default(), seed: 2020 }
    }
}

/// Either a hexagonal layout (center plus ring) or explicit site positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SitesConfig {
    pub center: [f64; 2],
    pub isd: f64,
    pub count: usize,
    /// Overrides the hexagonal layout when non-empty.
    pub positions: Vec<[f64; 2]>,
    pub sector: SectorTemplate,
}

impl Default for SitesConfig {
    fn default() -> Self {
        Self { center: [1000.0, 1000.0], isd: 577.0, count: 7, positions: Vec::new(), sector: SectorTemplate::default() }
    }
}

impl SitesConfig {
    pub fn site_positions(&self) -> Vec<[f64; 2]> {
        if self.positions.is_empty() {
            hex_site_positions(self.center, self.isd, self.count)
        } else {
            self.positions.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub pitch: f64,
    /// Fading draws per grid point.
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { pitch: 10.0, samples: 1000, seed: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Random starts written by `eval` when no starts file is given.
    pub starts: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { starts: 200, seed: 11 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Resumable state is written every this many episodes and at the end.
    pub checkpoint_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { checkpoint_every: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub navigation: NavParams,
    pub training: TrainConfig,
    pub pretrain: PretrainConfig,
    pub radio: RadioParams,
    pub city: CityConfig,
    pub sites: SitesConfig,
    pub radiomap: RadioMapConfig,
    pub planning: PlanningSchedule,
    pub oracle: OracleConfig,
    pub eval: EvalConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            navigation: NavParams::default(),
            training: TrainConfig::default(),
            pretrain: PretrainConfig::default(),
            radio: RadioParams::default(),
            city: CityConfig::default(),
            sites: SitesConfig::default(),
            radiomap: RadioMapConfig::default(),
            planning: PlanningSchedule::default(),
            oracle: OracleConfig::default(),
            eval: EvalConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        NavModel::new(&self.navigation)?;
        self.city.buildings.validate()?;
        let t = &self.training;
        for (name, v) in [
            ("training.episodes", t.episodes),
            ("training.replay_capacity", t.replay_capacity),
            ("training.n_step", t.n_step),
            ("training.target_sync_episodes", t.target_sync_episodes),
            ("training.batch_size", t.batch_size),
            ("radio.measurements", self.radio.measurements),
            ("radiomap.batch_size", self.radiomap.batch_size),
            ("radiomap.db_capacity", self.radiomap.db_capacity),
            ("oracle.samples", self.oracle.samples),
            ("pretrain.batch_size", self.pretrain.batch_size),
            ("pretrain.check_every", self.pretrain.check_every),
            ("output.checkpoint_every", self.output.checkpoint_every),
        ] {
            positive(name, v as f64)?;
        }
        positive("training.learning_rate", t.learning_rate)?;
        positive("training.gamma", t.gamma)?;
        positive("radiomap.learning_rate", self.radiomap.learning_rate)?;
        positive("oracle.pitch", self.oracle.pitch)?;
        positive("sites.isd", self.sites.isd)?;
        if !(0.0..=1.0).contains(&t.epsilon0) || !(0.0..=1.0).contains(&t.epsilon_decay) {
            return Err(Error::InvalidConfig("epsilon settings must lie in [0, 1]".into()));
        }
        if self.sites.site_positions().is_empty() {
            return Err(Error::InvalidConfig("at least one cell site is required".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML serialization, lowercase hex.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn nav_model(&self) -> Result<NavModel> {
        NavModel::new(&self.navigation)
    }

    pub fn snarm(&self) -> SnarmConfig {
        SnarmConfig { planning: self.planning, radiomap: self.radiomap.clone() }
    }

    pub fn airspace(&self) -> Result<Bounds> {
        let n = &self.navigation;
        Bounds::new(Vec3::from(n.lower), Vec3::from(n.upper))
    }

    /// Buildings, sites and airspace for this configuration.
    pub fn realize_env(&self) -> Result<EnvRealization> {
        Ok(EnvRealization {
            params: self.city.buildings,
            seed: self.city.seed,
            buildings: generate_buildings(&self.city.buildings, self.city.seed)?,
            sites: make_sites(&self.sites.site_positions(), &self.sites.sector),
            bounds: self.airspace()?,
        })
    }
}
