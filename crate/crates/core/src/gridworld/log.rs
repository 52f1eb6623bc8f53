use serde::{Deserialize, Serialize};

use crate::gridworld::observe::Observation;
use crate::gridworld::tile::{Action, AgentId};
use crate::gridworld::world::{Event, EventSet};

/// One agent's transition, as written to episode logs (one JSON object per line).
///
/// `next_obs` is absent when the actor was removed from the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub episode: u64,
    pub t: u32,
    pub actor: AgentId,
    pub obs: Observation,
    pub action: Action,
    /// Reward to `actor` in game currency.
    pub reward: f64,
    pub next_obs: Option<Observation>,
    pub terminal: bool,
    pub events: EventSet,
}

impl TransitionRecord {
    /// Observation to bootstrap from: `None` when the actor was removed or the
    /// game ended with a win or the learner being harmed. Timeouts bootstrap.
    pub fn successor(&self) -> Option<Observation> {
        if self.terminal || self.events.contains(Event::Win) || self.events.contains(Event::LaHarmed) {
            None
        } else {
            self.next_obs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::config::{GameConfig, GameId};
    use crate::gridworld::observe::observe;
    use crate::gridworld::world::Game;

    #[test]
    fn record_serializes_to_one_line_and_back() {
        let g = Game::new(GameConfig::default_for(GameId::Adversarial1)).unwrap();
        let w = g.reset(2).unwrap();
        let obs = observe(&w, AgentId::Learning);
        let rec = TransitionRecord {
            episode: 3,
            t: 17,
            actor: AgentId::Learning,
            obs,
            action: Action::Left,
            reward: -1.0,
            next_obs: Some(obs),
            terminal: false,
            events: [Event::Blocked].into_iter().collect(),
        };
        let line = serde_json::to_string(&rec).unwrap();
        assert!(!line.contains('\n'));
        assert!(line.contains("\"events\":[\"blocked\"]"));
        let back: TransitionRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
    }
}
