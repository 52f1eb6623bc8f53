use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameId {
    #[serde(alias = "Assistive1", alias = "assistive-1")]
    Assistive1,
    #[serde(alias = "Assistive2", alias = "assistive-2")]
    Assistive2,
    #[serde(alias = "Adversarial1", alias = "adversarial-1")]
    Adversarial1,
    #[serde(alias = "Adversarial2", alias = "adversarial-2")]
    Adversarial2,
}

impl GameId {
    pub const ALL: [GameId; 4] = [
        GameId::Assistive1,
        GameId::Assistive2,
        GameId::Adversarial1,
        GameId::Adversarial2,
    ];

    pub fn is_adversarial(self) -> bool {
        matches!(self, GameId::Adversarial1 | GameId::Adversarial2)
    }

    pub fn name(self) -> &'static str {
        match self {
            GameId::Assistive1 => "assistive1",
            GameId::Assistive2 => "assistive2",
            GameId::Adversarial1 => "adversarial1",
            GameId::Adversarial2 => "adversarial2",
        }
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', '_', ' '], "");
        Self::ALL
            .into_iter()
            .find(|g| g.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown game {s:?}")))
    }
}

/// Reward-bearing events. A reward table maps each to the owner's reward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardEvent {
    LaPellet,
    IaPellet,
    WinBonus,
    Button,
    Step,
    LaHarmed,
    IaHarmed,
}

pub type RewardTable = BTreeMap<RewardEvent, f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub game: GameId,
    /// Interior width in cells (the border wall is added around it).
    pub width: usize,
    pub height: usize,
    pub la_pellets: usize,
    pub ia_pellets: usize,
    /// Episode length limit in rounds (one move per living agent).
    pub time_limit: u32,
    /// Rounds the button keeps the harm window open (adversarial games).
    pub harm_window: u32,
    pub gamma: f64,
    /// The learning agent's environment rewards.
    pub rewards: RewardTable,
    /// The independent agent's hidden reward function.
    pub ia_rewards: RewardTable,
}

impl GameConfig {
    pub fn default_for(game: GameId) -> Self {
        use RewardEvent::*;
        let (rewards, ia_rewards, ia_pellets): (RewardTable, RewardTable, usize) = match game {
            GameId::Assistive1 | GameId::Assistive2 => (
                [(LaPellet, 10.0), (WinBonus, 5.0), (Button, -1.0), (Step, -1.0)].into(),
                [(IaPellet, 10.0), (Step, -1.0)].into(),
                2,
            ),
            GameId::Adversarial1 | GameId::Adversarial2 => (
                [
                    (LaPellet, 20.0),
                    (WinBonus, 30.0),
                    (Button, -1.0),
                    (Step, -1.0),
                    (LaHarmed, -50.0),
                    (IaHarmed, 10.0),
                ]
                .into(),
                [(IaPellet, 20.0), (Step, -1.0), (IaHarmed, -50.0), (LaHarmed, 10.0)].into(),
                if game == GameId::Adversarial1 { 2 } else { 0 },
            ),
        };
        Self {
            game,
            width: 8,
            height: 8,
            la_pellets: 3,
            ia_pellets,
            time_limit: 100,
            harm_window: 15,
            gamma: 0.95,
            rewards,
            ia_rewards,
        }
    }

    pub fn required_la_events(game: GameId) -> &'static [RewardEvent] {
        use RewardEvent::*;
        if game.is_adversarial() {
            &[LaPellet, WinBonus, Button, Step, LaHarmed, IaHarmed]
        } else {
            &[LaPellet, WinBonus, Button, Step]
        }
    }

    pub fn required_ia_events(game: GameId) -> &'static [RewardEvent] {
        use RewardEvent::*;
        if game.is_adversarial() {
            &[IaPellet, Step, IaHarmed, LaHarmed]
        } else {
            &[IaPellet, Step]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_limit == 0 {
            return Err(Error::Config("time_limit must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        if self.width < 6 || self.height < 6 {
            return Err(Error::Config(format!(
                "interior {}x{} too small; layouts need at least 6x6",
                self.width, self.height
            )));
        }
        if self.game.is_adversarial() && self.harm_window == 0 {
            return Err(Error::Config("harm_window must be positive".into()));
        }
        if self.la_pellets == 0 {
            return Err(Error::Config("the learning agent needs at least one pellet".into()));
        }
        for (table, name, required) in [
            (&self.rewards, "rewards", Self::required_la_events(self.game)),
            (&self.ia_rewards, "ia_rewards", Self::required_ia_events(self.game)),
        ] {
            for key in required {
                if !table.contains_key(key) {
                    return Err(Error::Config(format!("{name} is missing {key:?}")));
                }
            }
            if let Some((k, v)) = table.iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::Config(format!("{name}.{k:?} = {v} is not finite")));
            }
        }
        Ok(())
    }

    pub fn la_reward(&self, event: RewardEvent) -> f64 {
        self.rewards.get(&event).copied().unwrap_or(0.0)
    }

    pub fn ia_reward(&self, event: RewardEvent) -> f64 {
        self.ia_rewards.get(&event).copied().unwrap_or(0.0)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(format!("game config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("game config serializes")
    }
}
