use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dqn::{DqnConfig, EpsilonSchedule};
use crate::emote::ImaginationConfig;
use crate::error::{Error, Result};
use crate::gridworld::{GameConfig, GameId};
use crate::irl::CslConfig;
use crate::numerics::{OptimizerConfig, RegressionLoss};
use crate::sympathy::{Baseline, CslTraining, ImaginationTraining, SelfishnessPolicy};

/// DQN settings used for both the learner and independent-agent pre-training
/// unless a config overrides them.
pub fn default_dqn() -> DqnConfig {
    DqnConfig {
        hidden: vec![64, 64],
        buffer_capacity: 20_000,
        batch_size: 32,
        epsilon: EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_steps: 40_000,
        },
        target_sync_steps: 500,
        train_every: 2,
        learning_starts: 1_000,
        optimizer: OptimizerConfig::adam(5e-4),
        loss: RegressionLoss::Huber { delta: 10.0 },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Residual exploration of the learner during evaluation.
    pub epsilon: f64,
    /// Evaluation episodes whose empathetic states are dumped.
    pub dump_episodes: u64,
    /// Evaluation episodes whose transitions are logged.
    pub log_episodes: u64,
    /// Episodes the feature reward table averages over.
    pub reward_episodes: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            dump_episodes: 5,
            log_episodes: 10,
            reward_episodes: 100,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

/// One baseline on one game, for one or more seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameId,
    pub baseline: Baseline,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "ExperimentConfig::default_train_episodes")]
    pub train_episodes: u64,
    #[serde(default = "ExperimentConfig::default_eval_episodes")]
    pub eval_episodes: u64,
    /// Weight of the reconstruction term in the imagination loss. The l1
    /// term sums over all observation components, hence the small default.
    #[serde(default = "ExperimentConfig::default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub selfishness: SelfishnessPolicy,
    /// Per-seed run directories are created below this path.
    pub output_dir: PathBuf,
    /// Pre-trained independent-agent policy.
    pub ia_checkpoint: PathBuf,
    #[serde(default = "ExperimentConfig::default_ia_epsilon")]
    pub ia_epsilon: f64,
    /// Overrides the game's default configuration.
    #[serde(default)]
    pub game_config: Option<GameConfig>,
    #[serde(default = "default_dqn")]
    pub dqn: DqnConfig,
    #[serde(default)]
    pub imagination: ImaginationConfig,
    #[serde(default)]
    pub imagination_training: ImaginationTraining,
    #[serde(default)]
    pub csl: CslConfig,
    #[serde(default)]
    pub csl_training: CslTraining,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl ExperimentConfig {
    fn default_train_episodes() -> u64 {
        3_000
    }

    fn default_eval_episodes() -> u64 {
        100
    }

    fn default_delta() -> f64 {
        0.05
    }

    fn default_ia_epsilon() -> f64 {
        0.05
    }

    /// Defaults for everything except the required fields.
    pub fn new(game: GameId, baseline: Baseline, output_dir: PathBuf, ia_checkpoint: PathBuf) -> Self {
        Self {
            game,
            baseline,
            seeds: default_seeds(),
            train_episodes: Self::default_train_episodes(),
            eval_episodes: Self::default_eval_episodes(),
            delta: Self::default_delta(),
            selfishness: SelfishnessPolicy::default(),
            output_dir,
            ia_checkpoint,
            ia_epsilon: Self::default_ia_epsilon(),
            game_config: None,
            dqn: default_dqn(),
            imagination: ImaginationConfig::default(),
            imagination_training: ImaginationTraining::default(),
            csl: CslConfig::default(),
            csl_training: CslTraining::default(),
            eval: EvalConfig::default(),
        }
    }

    pub fn game_config(&self) -> GameConfig {
        self.game_config
            .clone()
            .unwrap_or_else(|| GameConfig::default_for(self.game))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return bad(format!("delta {} outside [0, 1]", self.delta));
        }
        if !(0.0..=1.0).contains(&self.ia_epsilon) || !(0.0..=1.0).contains(&self.eval.epsilon) {
            return bad("exploration rates must lie in [0, 1]".into());
        }
        if let Some(g) = &self.game_config {
            if g.game != self.game {
                return bad(format!("game_config is for {} but game is {}", g.game, self.game));
            }
            g.validate()?;
        }
        self.selfishness.validate()?;
        self.dqn.validate()?;
        if let Some(v) = self.baseline.variant() {
            self.imagination.validate(v)?;
            self.imagination_training.validate()?;
        }
        if self.baseline == Baseline::Sympathy && (self.csl.batch_size == 0 || self.csl_training.rescale_episodes == 0)
        {
            return bad("csl batch_size and rescale_episodes must be positive".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config; relative paths are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let base = std::path::absolute(parent).map_err(|e| Error::io(path, e))?;
        cfg.output_dir = resolve(&base, &cfg.output_dir);
        cfg.ia_checkpoint = resolve(&base, &cfg.ia_checkpoint);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn run_dir(&self, seed: u64) -> PathBuf {
        self.output_dir.join(format!("seed-{seed}"))
    }

    /// A copy restricted to one seed.
    pub fn for_seed(&self, seed: u64) -> Self {
        Self {
            seeds: vec![seed],
            ..self.clone()
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Settings of independent-agent pre-training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PretrainConfig {
    pub episodes: u64,
    pub dqn: DqnConfig,
    /// Assistive games: fraction of episodes that start with the doors open.
    pub door_open_fraction: f64,
    /// Adversarial games: per-round probability of forcing the harm window.
    pub harm_window_rate: f64,
    /// Greedy episodes used for the summary printed after training.
    pub eval_episodes: u64,
    pub game_config: Option<GameConfig>,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            episodes: 2_000,
            dqn: default_dqn(),
            door_open_fraction: 0.5,
            harm_window_rate: 0.05,
            eval_episodes: 100,
            game_config: None,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.door_open_fraction) || !(0.0..=1.0).contains(&self.harm_window_rate) {
            return Err(Error::Config("pretrain probabilities must lie in [0, 1]".into()));
        }
        if let Some(g) = &self.game_config {
            g.validate()?;
        }
        self.dqn.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("pretrain config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
