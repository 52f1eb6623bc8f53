//! Turn loop shared by pre-training, training and evaluation.
//!
//! Each agent's transition runs from its observation before a move to its
//! observation at its next turn, so it includes the other agent's reply.

use crate::error::Result;
use crate::gridworld::log::TransitionRecord;
use crate::gridworld::observe::{observe, Observation};
use crate::gridworld::tile::{Action, AgentId};
use crate::gridworld::world::{Event, EventSet, StepOutcome, Termination, WorldState};

/// Callbacks driven by [`play_episode`].
pub trait EpisodeDriver {
    /// Called before every round; may alter the world (pre-training uses it
    /// to force doors and harm windows).
    fn before_round(&mut self, _world: &mut WorldState) {}

    fn act(&mut self, actor: AgentId, world: &WorldState, obs: &Observation) -> Result<Action>;

    /// Called once per completed transition. An independent-agent transition
    /// always closes before the learning-agent transition that was open
    /// during its last move.
    fn closed(&mut self, record: TransitionRecord) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub termination: Termination,
    pub rounds: u32,
    pub la_return: f64,
    pub ia_return: f64,
    pub win: bool,
    pub button_pressed: bool,
    pub la_harmed: bool,
    pub ia_harmed: bool,
    pub events: EventSet,
}

struct Open {
    t: u32,
    actor: AgentId,
    obs: Observation,
    action: Action,
    reward: f64,
    events: EventSet,
}

impl Open {
    fn add(&mut self, out: &StepOutcome) {
        self.reward += match self.actor {
            AgentId::Learning => out.la_reward,
            AgentId::Independent => out.ia_reward,
        };
        self.events = self.events.union(out.events);
    }

    fn close(self, episode: u64, next_obs: Option<Observation>, terminal: bool) -> TransitionRecord {
        TransitionRecord {
            episode,
            t: self.t,
            actor: self.actor,
            obs: self.obs,
            action: self.action,
            reward: self.reward,
            next_obs,
            terminal,
            events: self.events,
        }
    }
}

fn open(world: &WorldState, actor: AgentId, obs: Observation, action: Action) -> Open {
    Open {
        t: world.step_count(),
        actor,
        obs,
        action,
        reward: 0.0,
        events: EventSet::empty(),
    }
}

/// Plays `world` to termination.
pub fn play_episode<D: EpisodeDriver + ?Sized>(
    world: &mut WorldState,
    episode: u64,
    driver: &mut D,
) -> Result<EpisodeOutcome> {
    let mut la_open: Option<Open> = None;
    let mut ia_open: Option<Open> = None;
    let mut la_return = 0.0;
    let mut ia_return = 0.0;
    let mut events = EventSet::empty();

    while !world.is_terminal() {
        driver.before_round(world);
        let la_obs = observe(world, AgentId::Learning);
        if let Some(o) = la_open.take() {
            driver.closed(o.close(episode, Some(la_obs), false))?;
        }
        let a = driver.act(AgentId::Learning, world, &la_obs)?;
        let mut la = open(world, AgentId::Learning, la_obs, a);
        let out = world.step(AgentId::Learning, a);
        la_return += out.la_reward;
        ia_return += out.ia_reward;
        events = events.union(out.events);
        la.add(&out);
        if let Some(mut o) = ia_open.take() {
            o.add(&out);
            let alive = world.is_alive(AgentId::Independent);
            let next = alive.then(|| observe(world, AgentId::Independent));
            driver.closed(o.close(episode, next, !alive))?;
        }
        la_open = Some(la);
        if world.is_terminal() || !world.is_alive(AgentId::Independent) {
            continue;
        }

        let ia_obs = observe(world, AgentId::Independent);
        let a = driver.act(AgentId::Independent, world, &ia_obs)?;
        let mut ia = open(world, AgentId::Independent, ia_obs, a);
        let out = world.step(AgentId::Independent, a);
        la_return += out.la_reward;
        ia_return += out.ia_reward;
        events = events.union(out.events);
        ia.add(&out);
        if let Some(o) = la_open.as_mut() {
            o.add(&out);
        }
        let alive = world.is_alive(AgentId::Independent);
        if !alive || world.is_terminal() {
            let next = alive.then(|| observe(world, AgentId::Independent));
            driver.closed(ia.close(episode, next, !alive))?;
        } else {
            ia_open = Some(ia);
        }
    }

    let termination = world.termination();
    if let Some(o) = la_open.take() {
        let terminal = matches!(termination, Termination::Win | Termination::LaHarmed);
        let next = world
            .is_alive(AgentId::Learning)
            .then(|| observe(world, AgentId::Learning));
        driver.closed(o.close(episode, next, terminal))?;
    }

    Ok(EpisodeOutcome {
        termination,
        rounds: world.step_count(),
        la_return,
        ia_return,
        win: termination == Termination::Win,
        button_pressed: world.button_presses() > 0,
        la_harmed: events.contains(Event::LaHarmed),
        ia_harmed: events.contains(Event::IaHarmed),
        events,
    })
}
