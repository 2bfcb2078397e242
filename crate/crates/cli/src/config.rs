use std::path::{Path, PathBuf};

use avatar_contest::contest::{
    AwardSetting, ContestantState, EffortRule, ScenarioConfig, SelectionMode, DEFAULT_COST_SCALE,
};
use avatar_contest::dqn::{DqnConfig, RewardMode};
use avatar_contest::oracle::{DEFAULT_EFFORT_CAP, DEFAULT_GRID_STEP};
use avatar_contest::seeds;
use avatar_contest::skeleton::{
    generate_synthetic, MotionKind, MotionProfile, QuantizationBounds, SkeletonSequence,
    DEFAULT_JOINTS,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub users: usize,
    /// Native capture rate of every user, fps.
    pub native_rate: u32,
    pub joints: usize,
    pub frames: usize,
    /// Total rendering budget, fps.
    pub budget: u32,
    pub pool: f64,
    /// One motion profile per user.
    pub profiles: Vec<MotionKind>,
    /// Starting prize vector; the equal split when absent.
    pub awards: Option<Vec<f64>>,
    pub selection_mode: SelectionMode,
    pub cost_scale: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            users: 4,
            native_rate: 60,
            joints: DEFAULT_JOINTS,
            frames: 300,
            budget: 120,
            pool: 100.0,
            profiles: MotionKind::ALL.to_vec(),
            awards: None,
            selection_mode: SelectionMode::Net,
            cost_scale: DEFAULT_COST_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecSection {
    pub lo: f64,
    pub hi: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub bits_per_pixel: u32,
}

impl Default for CodecSection {
    fn default() -> Self {
        let b = QuantizationBounds::default();
        Self {
            lo: b.lo(),
            hi: b.hi(),
            image_width: 1080,
            image_height: 1908,
            bits_per_pixel: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub step: f64,
    pub effort_cap: u64,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            step: DEFAULT_GRID_STEP,
            effort_cap: DEFAULT_EFFORT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub scenario: ScenarioSection,
    pub dqn: DqnConfig,
    pub codec: CodecSection,
    pub search: SearchSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            scenario: ScenarioSection::default(),
            dqn: DqnConfig::default(),
            codec: CodecSection::default(),
            search: SearchSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scenario;
        if s.users == 0 {
            return invalid("scenario.users must be at least 1");
        }
        if s.profiles.len() != s.users {
            return invalid(format!(
                "scenario.profiles lists {} profiles for {} users",
                s.profiles.len(),
                s.users
            ));
        }
        if s.native_rate == 0 || s.joints == 0 {
            return invalid("scenario.native_rate and scenario.joints must be positive");
        }
        if s.frames < 2 {
            return invalid("scenario.frames must be at least 2");
        }
        if s.budget == 0 {
            return invalid("scenario.budget must be positive");
        }
        if !(s.pool.is_finite() && s.pool >= 0.0) {
            return invalid("scenario.pool must be a non-negative number");
        }
        if !(s.cost_scale.is_finite() && s.cost_scale >= 0.0) {
            return invalid("scenario.cost_scale must be a non-negative number");
        }
        if let Some(a) = &s.awards {
            check_awards(a, s.pool, s.users)?;
        }
        QuantizationBounds::new(self.codec.lo, self.codec.hi)
            .map_err(|e| ConfigError::Invalid(format!("codec: {e}")))?;
        if self.search.step.is_nan() || self.search.step <= 0.0 {
            return invalid("search.step must be positive");
        }
        let mut dqn = self.dqn.clone();
        dqn.seed = self.seed;
        dqn.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn reward_mode(&self) -> RewardMode {
        self.dqn.reward_mode
    }

    pub fn dqn_config(&self) -> DqnConfig {
        DqnConfig {
            seed: self.seed,
            ..self.dqn.clone()
        }
    }

    pub fn effort_rule(&self) -> EffortRule {
        EffortRule {
            mode: self.scenario.selection_mode,
            cost_scale: self.scenario.cost_scale,
        }
    }

    pub fn bounds(&self) -> QuantizationBounds {
        QuantizationBounds::new(self.codec.lo, self.codec.hi).expect("validated")
    }

    /// Synthetic sequence for user `i`, seeded from the run seed.
    pub fn sequence(&self, i: usize) -> anyhow::Result<SkeletonSequence> {
        let s = &self.scenario;
        let kind = s.profiles[i];
        let mut seq = generate_synthetic(
            &MotionProfile::preset(kind),
            s.frames,
            s.native_rate,
            s.joints,
            seeds::derive_seed(self.seed, &format!("{}/{i}", seeds::DATA)),
        )?;
        seq.set_user_label(format!("user{}_{}", i + 1, kind));
        Ok(seq)
    }

    pub fn scenario_config(&self) -> anyhow::Result<ScenarioConfig> {
        let s = &self.scenario;
        let users = (0..s.users)
            .map(|i| Ok(ContestantState::new(i, self.sequence(i)?)?))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let awards = match &s.awards {
            Some(a) => AwardSetting::sorted(a.clone())?,
            None => AwardSetting::equal_split(s.pool, s.users)?,
        };
        Ok(ScenarioConfig::new(
            users,
            s.budget,
            awards,
            self.effort_rule(),
        )?)
    }
}

/// Prize vectors given on the command line or in config must share out the
/// pool exactly, one prize per user at most.
pub fn check_awards(awards: &[f64], pool: f64, users: usize) -> Result<(), ConfigError> {
    if awards.is_empty() || awards.len() > users {
        return invalid(format!("awards must list between 1 and {users} prizes"));
    }
    if awards.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return invalid("awards must be non-negative numbers");
    }
    let sum: f64 = awards.iter().sum();
    if (sum - pool).abs() > 1e-9 * pool.max(1.0) {
        return invalid(format!("awards sum to {sum}, expected the pool {pool}"));
    }
    Ok(())
}
