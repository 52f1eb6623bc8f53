use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::config::{GameConfig, RewardEvent};
use crate::gridworld::layout::Layout;
use crate::gridworld::tile::{Action, AgentId, Facing, Pos, TileKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    LaPellet,
    IaPellet,
    ButtonPressed,
    DoorOpened,
    LaHarmed,
    IaHarmed,
    Win,
    Timeout,
    Blocked,
}

impl Event {
    pub const ALL: [Event; 9] = [
        Event::LaPellet,
        Event::IaPellet,
        Event::ButtonPressed,
        Event::DoorOpened,
        Event::LaHarmed,
        Event::IaHarmed,
        Event::Win,
        Event::Timeout,
        Event::Blocked,
    ];

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

/// Small set of [`Event`]s; serialized as a list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EventSet(u16);

impl EventSet {
    pub fn empty() -> Self {
        Self(0)
    }

    pub fn insert(&mut self, e: Event) {
        self.0 |= e.bit();
    }

    pub fn contains(&self, e: Event) -> bool {
        self.0 & e.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: EventSet) -> Self {
        Self(self.0 | other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Event> + '_ {
        Event::ALL.into_iter().filter(|e| self.contains(*e))
    }
}

impl FromIterator<Event> for EventSet {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        let mut s = Self::empty();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl Serialize for EventSet {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for EventSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Vec::<Event>::deserialize(d)?.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    None,
    Win,
    Timeout,
    LaHarmed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: Pos,
    pub facing: Facing,
    pub alive: bool,
}

/// Rewards and events produced by one agent move (including harm resolution
/// and, at the end of a round, the timer tick).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepOutcome {
    /// Learning agent's environment reward from this move.
    pub la_reward: f64,
    /// Independent agent's hidden reward from this move.
    pub ia_reward: f64,
    pub events: EventSet,
}

/// Complete, plain-value game state.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    config: Arc<GameConfig>,
    layout: Arc<Layout>,
    cells: Vec<TileKind>,
    agents: [AgentState; 2],
    harm_remaining: u32,
    step: u32,
    remaining_pellets: [usize; 2],
    termination: Termination,
    to_move: AgentId,
    door_opened: bool,
    button_presses: u32,
}

/// Builds worlds for one configuration.
#[derive(Clone, Debug)]
pub struct Game {
    config: Arc<GameConfig>,
    layout: Arc<Layout>,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::build(&config);
        let free = layout.la_pellet_cells.len();
        if config.la_pellets + config.ia_pellets + 2 > free + layout.locked_ia_pellet_cells.len() {
            return Err(Error::Config(format!(
                "{} pellets and two agents do not fit in {free} free cells",
                config.la_pellets + config.ia_pellets
            )));
        }
        Ok(Self {
            config: Arc::new(config),
            layout: Arc::new(layout),
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Fresh episode. Identical seeds give identical worlds.
    pub fn reset(&self, seed: u64) -> Result<WorldState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = &self.layout;
        let cfg = &self.config;
        let mut cells = layout.base.clone();

        let la_pos = *layout
            .la_spawn
            .choose(&mut rng)
            .ok_or_else(|| Error::Config("no spawn cells for the learning agent".into()))?;
        let ia_options: Vec<Pos> = layout
            .ia_spawn
            .iter()
            .copied()
            .filter(|p| *p != la_pos && p.chebyshev(la_pos) >= layout.min_spawn_distance)
            .collect();
        let ia_pos = *ia_options
            .choose(&mut rng)
            .ok_or_else(|| Error::Config("no spawn cell for the independent agent".into()))?;

        let mut taken = vec![la_pos, ia_pos];
        let mut place =
            |cands: &[Pos], n: usize, tile: TileKind, cells: &mut Vec<TileKind>, rng: &mut ChaCha8Rng| -> Result<()> {
                let free: Vec<Pos> = cands.iter().copied().filter(|p| !taken.contains(p)).collect();
                if free.len() < n {
                    return Err(Error::Config(format!(
                        "cannot place {n} {} pellets in {} free cells",
                        tile.name(),
                        free.len()
                    )));
                }
                for p in free.choose_multiple(rng, n) {
                    cells[layout.index(*p)] = tile;
                    taken.push(*p);
                }
                Ok(())
            };

        let mut ia_open = cfg.ia_pellets;
        if !layout.locked_ia_pellet_cells.is_empty() && cfg.ia_pellets > 0 {
            place(
                &layout.locked_ia_pellet_cells,
                1,
                TileKind::IaPellet,
                &mut cells,
                &mut rng,
            )?;
            ia_open -= 1;
        }
        place(
            &layout.la_pellet_cells,
            cfg.la_pellets,
            TileKind::LaPellet,
            &mut cells,
            &mut rng,
        )?;
        place(
            &layout.ia_pellet_cells,
            ia_open,
            TileKind::IaPellet,
            &mut cells,
            &mut rng,
        )?;

        let facing = [Facing::North, Facing::South, Facing::West, Facing::East];
        let agents = [
            AgentState {
                pos: la_pos,
                facing: *facing.choose(&mut rng).unwrap(),
                alive: true,
            },
            AgentState {
                pos: ia_pos,
                facing: *facing.choose(&mut rng).unwrap(),
                alive: true,
            },
        ];
        Ok(WorldState {
            config: self.config.clone(),
            layout: self.layout.clone(),
            cells,
            agents,
            harm_remaining: 0,
            step: 0,
            remaining_pellets: [cfg.la_pellets, cfg.ia_pellets],
            termination: Termination::None,
            to_move: AgentId::Learning,
            door_opened: false,
            button_presses: 0,
        })
    }
}

impl WorldState {
    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn width(&self) -> usize {
        self.layout.width
    }

    pub fn height(&self) -> usize {
        self.layout.height
    }

    /// Static tile at `p` (agents are not included); out of bounds reads as wall.
    pub fn tile(&self, p: Pos) -> TileKind {
        if self.layout.in_bounds(p) {
            self.cells[self.layout.index(p)]
        } else {
            TileKind::Wall
        }
    }

    /// Tile as seen by an observer: living agents drawn over the static tile.
    pub fn visible_tile(&self, p: Pos) -> TileKind {
        for id in [AgentId::Learning, AgentId::Independent] {
            let a = self.agent(id);
            if a.alive && a.pos == p {
                return id.tile();
            }
        }
        self.tile(p)
    }

    pub fn agent(&self, id: AgentId) -> &AgentState {
        &self.agents[id.index()]
    }

    pub fn is_alive(&self, id: AgentId) -> bool {
        self.agents[id.index()].alive
    }

    /// Button status `b`: 1 while the harm window is open.
    pub fn button_status(&self) -> bool {
        self.harm_remaining > 0
    }

    pub fn harm_remaining(&self) -> u32 {
        self.harm_remaining
    }

    pub fn step_count(&self) -> u32 {
        self.step
    }

    pub fn remaining_pellets(&self, id: AgentId) -> usize {
        self.remaining_pellets[id.index()]
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn is_terminal(&self) -> bool {
        self.termination != Termination::None
    }

    pub fn to_move(&self) -> AgentId {
        self.to_move
    }

    pub fn door_opened(&self) -> bool {
        self.door_opened
    }

    pub fn button_presses(&self) -> u32 {
        self.button_presses
    }

    /// Opens every door without a button press (used by IA pre-training).
    pub fn force_open_doors(&mut self) {
        for c in self.cells.iter_mut() {
            if *c == TileKind::DoorClosed {
                *c = TileKind::DoorOpen;
            }
        }
    }

    /// Opens the harm window without a button press (used by IA pre-training).
    pub fn force_harm_window(&mut self) {
        if self.config.game.is_adversarial() {
            self.harm_remaining = self.config.harm_window;
        }
    }

    /// One move by `actor`, followed by harm resolution, the win check and,
    /// when the round completes, [`WorldState::tick_timer`].
    ///
    /// Panics when the world is terminal, the actor is dead, or it is not the
    /// actor's turn.
    pub fn step(&mut self, actor: AgentId, action: Action) -> StepOutcome {
        assert!(!self.is_terminal(), "step called on a terminal world");
        assert!(self.is_alive(actor), "dead agent {actor:?} cannot act");
        assert_eq!(self.to_move, actor, "it is not {actor:?}'s turn");
        let cfg = self.config.clone();
        let mut out = StepOutcome::default();
        let mut la_parts = 0usize;
        let mut ia_parts = 0usize;

        let me = actor.index();
        self.agents[me].facing = self.agents[me].facing.after(action);
        let from = self.agents[me].pos;
        let target = from.offset(action);
        let other = self.agent(actor.other());
        let occupied = other.alive && other.pos == target;
        let moved = action != Action::NoOp && self.tile(target).walkable() && !occupied;
        if action != Action::NoOp && !moved {
            out.events.insert(Event::Blocked);
        }
        if moved {
            self.agents[me].pos = target;
            let idx = self.layout.index(target);
            let tile = self.cells[idx];
            if tile == actor.pellet() {
                self.cells[idx] = TileKind::Floor;
                self.remaining_pellets[me] -= 1;
                match actor {
                    AgentId::Learning => {
                        out.events.insert(Event::LaPellet);
                        out.la_reward += cfg.la_reward(RewardEvent::LaPellet);
                        la_parts += 1;
                    }
                    AgentId::Independent => {
                        out.events.insert(Event::IaPellet);
                        out.ia_reward += cfg.ia_reward(RewardEvent::IaPellet);
                        ia_parts += 1;
                    }
                }
            } else if tile == TileKind::Button && actor == AgentId::Learning {
                out.events.insert(Event::ButtonPressed);
                self.button_presses += 1;
                out.la_reward += cfg.la_reward(RewardEvent::Button);
                la_parts += 1;
                if cfg.game.is_adversarial() {
                    self.harm_remaining = cfg.harm_window;
                } else if !self.door_opened {
                    self.force_open_doors();
                    self.door_opened = true;
                    out.events.insert(Event::DoorOpened);
                }
            }
        }

        let (la_harm, ia_harm, harm_events) = self.resolve_harm();
        if !harm_events.is_empty() {
            out.events = out.events.union(harm_events);
            out.la_reward += la_harm;
            out.ia_reward += ia_harm;
            la_parts += 1;
            ia_parts += 1;
        }

        if self.termination == Termination::None && self.remaining_pellets[0] == 0 {
            self.termination = Termination::Win;
            out.events.insert(Event::Win);
            out.la_reward += cfg.la_reward(RewardEvent::WinBonus);
            la_parts += 1;
        }

        if actor == AgentId::Learning && la_parts == 0 {
            out.la_reward += cfg.la_reward(RewardEvent::Step);
        }
        if actor == AgentId::Independent && ia_parts == 0 {
            out.ia_reward += cfg.ia_reward(RewardEvent::Step);
        }

        let round_over = actor == AgentId::Independent || !self.is_alive(AgentId::Independent);
        if round_over {
            out.events = out.events.union(self.tick_timer());
            self.to_move = AgentId::Learning;
        } else {
            self.to_move = AgentId::Independent;
        }
        out
    }

    /// Automatic harm on adjacency (Chebyshev distance at most 1) in
    /// adversarial games. Returns the learning agent's and the independent
    /// agent's reward deltas.
    pub fn resolve_harm(&mut self) -> (f64, f64, EventSet) {
        let mut events = EventSet::empty();
        if !self.config.game.is_adversarial()
            || self.is_terminal()
            || !self.is_alive(AgentId::Learning)
            || !self.is_alive(AgentId::Independent)
        {
            return (0.0, 0.0, events);
        }
        let la = self.agent(AgentId::Learning).pos;
        let ia = self.agent(AgentId::Independent).pos;
        if la.chebyshev(ia) > 1 {
            return (0.0, 0.0, events);
        }
        let cfg = &self.config;
        if self.button_status() {
            events.insert(Event::IaHarmed);
            self.agents[AgentId::Independent.index()].alive = false;
            (
                cfg.la_reward(RewardEvent::IaHarmed),
                cfg.ia_reward(RewardEvent::IaHarmed),
                events,
            )
        } else {
            events.insert(Event::LaHarmed);
            self.termination = Termination::LaHarmed;
            (
                cfg.la_reward(RewardEvent::LaHarmed),
                cfg.ia_reward(RewardEvent::LaHarmed),
                events,
            )
        }
    }

    /// Ends a round: shrinks the harm window, advances the step counter and
    /// flags a timeout at the time limit.
    pub fn tick_timer(&mut self) -> EventSet {
        let mut events = EventSet::empty();
        self.harm_remaining = self.harm_remaining.saturating_sub(1);
        if self.step < self.config.time_limit {
            self.step += 1;
        }
        if self.termination == Termination::None && self.step >= self.config.time_limit {
            self.termination = Termination::Timeout;
            events.insert(Event::Timeout);
        }
        events
    }

    /// Full-grid text render (agents drawn over tiles).
    pub fn render(&self) -> String {
        let mut s = String::new();
        for y in 0..self.height() as i32 {
            for x in 0..self.width() as i32 {
                s.push(self.visible_tile(Pos::new(x, y)).glyph());
            }
            s.push('\n');
        }
        s
    }

    #[cfg(test)]
    pub(crate) fn set_tile(&mut self, p: Pos, t: TileKind) {
        let i = self.layout.index(p);
        self.cells[i] = t;
    }

    #[cfg(test)]
    pub(crate) fn place_agent(&mut self, id: AgentId, p: Pos) {
        self.agents[id.index()].pos = p;
    }

    #[cfg(test)]
    pub(crate) fn set_harm_remaining(&mut self, r: u32) {
        self.harm_remaining = r;
    }

    #[cfg(test)]
    pub(crate) fn set_step(&mut self, s: u32) {
        self.step = s;
    }

    #[cfg(test)]
    pub(crate) fn set_remaining(&mut self, id: AgentId, n: usize) {
        self.remaining_pellets[id.index()] = n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::config::GameId;

    fn game(id: GameId) -> Game {
        Game::new(GameConfig::default_for(id)).unwrap()
    }

    /// Empties the board and puts the agents where requested.
    fn staged(id: GameId, la: Pos, ia: Pos) -> WorldState {
        let mut w = game(id).reset(1).unwrap();
        for y in 1..=8 {
            for x in 1..=8 {
                let p = Pos::new(x, y);
                if matches!(w.tile(p), TileKind::LaPellet | TileKind::IaPellet) {
                    w.set_tile(p, TileKind::Floor);
                }
            }
        }
        w.place_agent(AgentId::Learning, la);
        w.place_agent(AgentId::Independent, ia);
        w.set_remaining(AgentId::Learning, 3);
        w
    }

    #[test]
    fn reset_is_deterministic() {
        let g = game(GameId::Assistive1);
        assert_eq!(g.reset(7).unwrap(), g.reset(7).unwrap());
        assert_ne!(g.reset(7).unwrap(), g.reset(8).unwrap());
    }

    #[test]
    fn assistive1_starts_with_closed_door_even_without_ia_pellets() {
        let mut cfg = GameConfig::default_for(GameId::Assistive1);
        cfg.ia_pellets = 0;
        let w = Game::new(cfg).unwrap().reset(3).unwrap();
        assert!(!w.door_opened());
        assert_eq!(w.remaining_pellets(AgentId::Independent), 0);
        let doors = (0..10)
            .flat_map(|y| (0..10).map(move |x| Pos::new(x, y)))
            .filter(|&p| w.tile(p) == TileKind::DoorClosed)
            .count();
        assert_eq!(doors, 1);
    }

    #[test]
    fn too_many_pellets_is_a_config_error() {
        let mut cfg = GameConfig::default_for(GameId::Adversarial1);
        cfg.la_pellets = 100;
        assert!(matches!(Game::new(cfg), Err(Error::Config(_))));
    }

    #[test]
    fn pellets_do_not_overlap_agents_or_each_other() {
        let g = game(GameId::Assistive2);
        for seed in 0..50 {
            let w = g.reset(seed).unwrap();
            let count = |t| {
                (0..10)
                    .flat_map(|y| (0..10).map(move |x| Pos::new(x, y)))
                    .filter(|&p| w.tile(p) == t)
                    .count()
            };
            assert_eq!(count(TileKind::LaPellet), 3);
            assert_eq!(count(TileKind::IaPellet), 2);
            for id in [AgentId::Learning, AgentId::Independent] {
                assert_eq!(w.tile(w.agent(id).pos), TileKind::Floor);
            }
        }
    }

    #[test]
    fn assistive_pellet_rewards_and_win_bonus() {
        let mut w = staged(GameId::Assistive1, Pos::new(2, 6), Pos::new(8, 1));
        w.set_tile(Pos::new(3, 6), TileKind::LaPellet);
        let out = w.step(AgentId::Learning, Action::Right);
        assert_eq!(out.la_reward, 10.0);
        assert!(out.events.contains(Event::LaPellet));
        assert_eq!(w.tile(Pos::new(3, 6)), TileKind::Floor);

        w.step(AgentId::Independent, Action::NoOp);
        w.set_remaining(AgentId::Learning, 1);
        w.set_tile(Pos::new(4, 6), TileKind::LaPellet);
        let out = w.step(AgentId::Learning, Action::Right);
        assert_eq!(out.la_reward, 15.0);
        assert_eq!(w.termination(), Termination::Win);
    }

    #[test]
    fn adversarial_pellet_rewards_and_win_bonus() {
        let mut w = staged(GameId::Adversarial1, Pos::new(1, 8), Pos::new(8, 1));
        w.set_tile(Pos::new(2, 8), TileKind::LaPellet);
        assert_eq!(w.step(AgentId::Learning, Action::Right).la_reward, 20.0);
        w.step(AgentId::Independent, Action::NoOp);
        w.set_remaining(AgentId::Learning, 1);
        w.set_tile(Pos::new(3, 8), TileKind::LaPellet);
        assert_eq!(w.step(AgentId::Learning, Action::Right).la_reward, 50.0);
        assert_eq!(w.termination(), Termination::Win);
    }

    #[test]
    fn plain_move_costs_one() {
        let mut w = staged(GameId::Assistive1, Pos::new(2, 6), Pos::new(8, 1));
        assert_eq!(w.step(AgentId::Learning, Action::Down).la_reward, -1.0);
    }

    #[test]
    fn blocked_move_still_counts_as_a_step() {
        let mut w = staged(GameId::Assistive1, Pos::new(1, 6), Pos::new(8, 1));
        let out = w.step(AgentId::Learning, Action::Left);
        assert_eq!(out.la_reward, -1.0);
        assert!(out.events.contains(Event::Blocked));
        assert_eq!(w.agent(AgentId::Learning).pos, Pos::new(1, 6));
        w.step(AgentId::Independent, Action::NoOp);
        assert_eq!(w.step_count(), 1);
    }

    #[test]
    fn button_opens_the_door_for_good() {
        let mut w = staged(GameId::Assistive1, Pos::new(3, 3), Pos::new(8, 1));
        // Button at (w - 4, 3) = (4, 3); door at (6, 2).
        let out = w.step(AgentId::Learning, Action::Right);
        assert_eq!(out.la_reward, -1.0);
        assert!(out.events.contains(Event::DoorOpened));
        assert_eq!(w.tile(Pos::new(6, 2)), TileKind::DoorOpen);
        for _ in 0..5 {
            w.step(AgentId::Independent, Action::NoOp);
            w.step(AgentId::Learning, Action::Left);
            assert_eq!(w.tile(Pos::new(6, 2)), TileKind::DoorOpen);
        }
    }

    #[test]
    fn independent_agent_cannot_pass_closed_door() {
        let mut w = staged(GameId::Assistive1, Pos::new(1, 8), Pos::new(7, 2));
        w.step(AgentId::Learning, Action::NoOp);
        let out = w.step(AgentId::Independent, Action::Left);
        assert!(out.events.contains(Event::Blocked));
        assert_eq!(w.agent(AgentId::Independent).pos, Pos::new(7, 2));
    }

    #[test]
    fn harm_direction_follows_button_status() {
        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(3, 3));
        let (la, _, ev) = w.resolve_harm();
        assert_eq!(la, -50.0);
        assert!(ev.contains(Event::LaHarmed));
        assert_eq!(w.termination(), Termination::LaHarmed);

        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(3, 3));
        w.set_harm_remaining(5);
        let (la, ia, ev) = w.resolve_harm();
        assert_eq!((la, ia), (10.0, -50.0));
        assert!(ev.contains(Event::IaHarmed));
        assert!(!w.is_alive(AgentId::Independent));
        assert!(!w.is_terminal());

        for b in [0, 5] {
            let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(4, 2));
            w.set_harm_remaining(b);
            let before = w.clone();
            assert_eq!(w.resolve_harm(), (0.0, 0.0, EventSet::empty()));
            assert_eq!(w, before);
        }
    }

    #[test]
    fn harm_replaces_the_step_penalty() {
        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(4, 2));
        let out = w.step(AgentId::Learning, Action::Right);
        assert_eq!(out.la_reward, -50.0);
        assert!(w.is_terminal());
    }

    #[test]
    fn independent_move_can_harm_the_learner() {
        let mut w = staged(GameId::Adversarial2, Pos::new(2, 2), Pos::new(4, 2));
        w.step(AgentId::Learning, Action::NoOp);
        let out = w.step(AgentId::Independent, Action::Left);
        assert_eq!(out.la_reward, -50.0);
        assert_eq!(out.ia_reward, 10.0);
        assert_eq!(w.termination(), Termination::LaHarmed);
    }

    #[test]
    fn adversarial_button_opens_harm_window() {
        let mut w = staged(GameId::Adversarial1, Pos::new(4, 5), Pos::new(8, 8));
        // Button at ((8 + 1) / 2, (8 + 1) / 2) = (4, 4).
        let out = w.step(AgentId::Learning, Action::Up);
        assert!(out.events.contains(Event::ButtonPressed));
        assert!(w.button_status());
        w.step(AgentId::Independent, Action::NoOp);
        assert_eq!(w.harm_remaining(), 14);
    }

    #[test]
    fn timer_behaviour() {
        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(6, 6));
        w.set_harm_remaining(1);
        w.tick_timer();
        assert_eq!(w.harm_remaining(), 0);
        assert!(!w.button_status());
        w.tick_timer();
        assert_eq!(w.harm_remaining(), 0);

        let limit = w.config().time_limit;
        w.set_step(limit - 1);
        let ev = w.tick_timer();
        assert!(ev.contains(Event::Timeout));
        assert_eq!(w.termination(), Termination::Timeout);
    }

    #[test]
    #[should_panic(expected = "terminal")]
    fn stepping_a_terminal_world_panics() {
        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(4, 2));
        w.step(AgentId::Learning, Action::Right);
        w.step(AgentId::Learning, Action::Right);
    }

    #[test]
    #[should_panic(expected = "dead agent")]
    fn dead_agent_cannot_act() {
        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(3, 3));
        w.set_harm_remaining(5);
        w.resolve_harm();
        w.step(AgentId::Independent, Action::NoOp);
    }

    #[test]
    fn learner_moves_every_round_once_the_other_is_gone() {
        let mut w = staged(GameId::Adversarial1, Pos::new(2, 2), Pos::new(3, 3));
        w.set_harm_remaining(5);
        w.resolve_harm();
        w.step(AgentId::Learning, Action::NoOp);
        assert_eq!(w.to_move(), AgentId::Learning);
        assert_eq!(w.step_count(), 1);
    }
}
