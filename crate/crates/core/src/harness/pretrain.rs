//! Pre-training of the independent agent on its hidden reward, next to a
//! uniformly random learner.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dqn::{argmax, Learner, ReplayBuffer, RewardChannel, TrainingMetricsRow, Transition};
use crate::error::{Error, Result};
use crate::gridworld::{
    play_episode, Action, AgentId, EpisodeDriver, Game, GameConfig, GameId, Observation, TransitionRecord, WorldState,
    OBS_DIM,
};
use crate::harness::config::PretrainConfig;
use crate::numerics::{Checkpoint, Mlp};
use crate::{csvio, Network, Real};

pub const POLICY_NETWORK: &str = "policy";
pub const POLICY_FILE: &str = "policy.json";

/// Behaviour of a pre-trained policy measured with greedy actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainSummary {
    pub game: GameId,
    pub seed: u64,
    pub episodes: u64,
    pub eval_episodes: u64,
    pub mean_ia_return: f64,
    /// Assistive: episodes, with doors forced open, in which every
    /// independent-agent pellet was eaten.
    pub all_pellets_rate: Option<f64>,
    /// Adversarial: mean change of the agents' Chebyshev distance over the
    /// independent agent's own moves, split by button status.
    pub distance_change_b0: Option<f64>,
    pub distance_change_b1: Option<f64>,
}

pub struct PretrainOutcome {
    pub policy: Network,
    pub curve: Vec<TrainingMetricsRow>,
    pub summary: PretrainSummary,
}

struct Trainer<'a> {
    learner: &'a mut Learner<Real>,
    buffer: &'a mut ReplayBuffer<Transition<Real>>,
    la_rng: ChaCha8Rng,
    ia_rng: ChaCha8Rng,
    train_rng: ChaCha8Rng,
    force_rng: ChaCha8Rng,
    harm_window_rate: f64,
    losses: (f64, u64),
}

fn random_action(rng: &mut ChaCha8Rng) -> Action {
    Action::from_index(rng.gen_range(0..Action::COUNT))
}

impl EpisodeDriver for Trainer<'_> {
    fn before_round(&mut self, world: &mut WorldState) {
        if world.config().game.is_adversarial()
            && !world.button_status()
            && self.force_rng.gen::<f64>() < self.harm_window_rate
        {
            world.force_harm_window();
        }
    }

    fn act(&mut self, actor: AgentId, _: &WorldState, obs: &Observation) -> Result<Action> {
        Ok(match actor {
            AgentId::Learning => random_action(&mut self.la_rng),
            AgentId::Independent => {
                let eps = self.learner.epsilon();
                Action::from_index(
                    self.learner
                        .q
                        .select_action(&obs.encode::<Real>(), eps, &mut self.ia_rng),
                )
            }
        })
    }

    fn closed(&mut self, rec: TransitionRecord) -> Result<()> {
        if rec.actor != AgentId::Independent {
            return Ok(());
        }
        self.buffer.push(Transition::new(
            rec.obs.encode(),
            rec.action.index(),
            rec.reward as Real,
            rec.successor().map(|o| o.encode()),
        ));
        if let Some(l) = self.learner.on_env_step(self.buffer, &mut self.train_rng)? {
            self.losses.0 += f64::from(l);
            self.losses.1 += 1;
        }
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn reset(
    game: &Game,
    env_rng: &mut ChaCha8Rng,
    force_rng: &mut ChaCha8Rng,
    door_open_fraction: f64,
) -> Result<WorldState> {
    let mut w = game.reset(env_rng.gen())?;
    if !game.config().game.is_adversarial() && force_rng.gen::<f64>() < door_open_fraction {
        w.force_open_doors();
    }
    Ok(w)
}

/// Trains the independent agent with DQN and measures the greedy result.
pub fn pretrain_independent(game: GameId, seed: u64, config: &PretrainConfig) -> Result<PretrainOutcome> {
    config.validate()?;
    let gc = config
        .game_config
        .clone()
        .unwrap_or_else(|| GameConfig::default_for(game));
    if gc.game != game {
        return Err(Error::Config(format!(
            "pretrain game_config is for {} not {game}",
            gc.game
        )));
    }
    let g = Game::new(gc.clone())?;
    let mut init = rng(seed, 0);
    let mut learner = Learner::new(
        OBS_DIM,
        Action::COUNT,
        &config.dqn,
        gc.gamma,
        RewardChannel::Environment,
        &mut init,
    );
    let mut buffer = ReplayBuffer::new(config.dqn.buffer_capacity);
    let mut env_rng = rng(seed, 1);
    let mut t = Trainer {
        learner: &mut learner,
        buffer: &mut buffer,
        la_rng: rng(seed, 2),
        ia_rng: rng(seed, 3),
        train_rng: rng(seed, 4),
        force_rng: rng(seed, 5),
        harm_window_rate: config.harm_window_rate,
        losses: (0.0, 0),
    };
    let mut curve = Vec::with_capacity(config.episodes as usize);
    for episode in 0..config.episodes {
        let mut w = reset(&g, &mut env_rng, &mut t.force_rng, config.door_open_fraction)?;
        t.losses = (0.0, 0);
        let out = play_episode(&mut w, episode, &mut t)?;
        curve.push(TrainingMetricsRow {
            step: t.learner.steps(),
            loss: (t.losses.1 > 0).then(|| t.losses.0 / t.losses.1 as f64),
            epsilon: t.learner.epsilon(),
            episodic_return: out.ia_return,
        });
    }
    let policy = learner.q.online().clone();
    let summary = summarize(&g, &policy, seed, config)?;
    Ok(PretrainOutcome { policy, curve, summary })
}

struct Greedy<'a> {
    policy: &'a Mlp<Real>,
    la_rng: ChaCha8Rng,
    distance: [(f64, u64); 2],
}

impl EpisodeDriver for Greedy<'_> {
    fn act(&mut self, actor: AgentId, _: &WorldState, obs: &Observation) -> Result<Action> {
        Ok(match actor {
            AgentId::Learning => random_action(&mut self.la_rng),
            AgentId::Independent => Action::from_index(argmax(&self.policy.predict(&obs.encode::<Real>()))),
        })
    }

    fn closed(&mut self, _: TransitionRecord) -> Result<()> {
        Ok(())
    }
}

fn summarize(g: &Game, policy: &Network, seed: u64, config: &PretrainConfig) -> Result<PretrainSummary> {
    let adversarial = g.config().game.is_adversarial();
    let mut env_rng = rng(seed, 6);
    let mut d = Greedy {
        policy,
        la_rng: rng(seed, 7),
        distance: [(0.0, 0); 2],
    };
    let (mut ret, mut all) = (0.0, 0u64);
    for episode in 0..config.eval_episodes {
        let mut w = g.reset(env_rng.gen())?;
        if !adversarial {
            w.force_open_doors();
        }
        let out = if adversarial {
            play_tracking_distance(&mut w, episode, &mut d)?
        } else {
            play_episode(&mut w, episode, &mut d)?.ia_return
        };
        ret += out;
        if !adversarial && w.remaining_pellets(AgentId::Independent) == 0 {
            all += 1;
        }
    }
    let n = config.eval_episodes.max(1) as f64;
    let dist = |i: usize| (d.distance[i].1 > 0).then(|| d.distance[i].0 / d.distance[i].1 as f64);
    Ok(PretrainSummary {
        game: g.config().game,
        seed,
        episodes: config.episodes,
        eval_episodes: config.eval_episodes,
        mean_ia_return: ret / n,
        all_pellets_rate: (!adversarial).then(|| all as f64 / n),
        distance_change_b0: if adversarial { dist(0) } else { None },
        distance_change_b1: if adversarial { dist(1) } else { None },
    })
}

/// Plays one greedy episode, recording how each independent move changes the
/// distance to the learner. Returns the independent agent's return.
fn play_tracking_distance(w: &mut WorldState, episode: u64, d: &mut Greedy<'_>) -> Result<f64> {
    struct Tracking<'b, 'c> {
        inner: &'b mut Greedy<'c>,
        before: Option<(bool, i32)>,
    }
    impl EpisodeDriver for Tracking<'_, '_> {
        fn act(&mut self, actor: AgentId, world: &WorldState, obs: &Observation) -> Result<Action> {
            if actor == AgentId::Independent {
                let dist = world
                    .agent(AgentId::Learning)
                    .pos
                    .chebyshev(world.agent(AgentId::Independent).pos);
                self.before = Some((world.button_status(), dist));
            }
            self.inner.act(actor, world, obs)
        }

        fn closed(&mut self, rec: TransitionRecord) -> Result<()> {
            self.inner.closed(rec)
        }

        fn before_round(&mut self, world: &mut WorldState) {
            // The previous round's independent move is complete here.
            if let Some((b, before)) = self.before.take() {
                if world.is_alive(AgentId::Independent) {
                    let now = world
                        .agent(AgentId::Learning)
                        .pos
                        .chebyshev(world.agent(AgentId::Independent).pos);
                    let slot = &mut self.inner.distance[usize::from(b)];
                    slot.0 += f64::from(now - before);
                    slot.1 += 1;
                }
            }
        }
    }
    let mut t = Tracking { inner: d, before: None };
    Ok(play_episode(w, episode, &mut t)?.ia_return)
}

/// Writes `policy.json`, `training.csv` and `summary.json` into `dir`.
pub fn write_pretrained(dir: &Path, outcome: &PretrainOutcome) -> Result<()> {
    Checkpoint::default()
        .with(POLICY_NETWORK, &outcome.policy)
        .save(&dir.join(POLICY_FILE))?;
    csvio::write(&dir.join("training.csv"), &outcome.curve)?;
    let summary = serde_json::to_string_pretty(&outcome.summary)?;
    let p = dir.join("summary.json");
    std::fs::write(&p, summary).map_err(|e| Error::io(&p, e))
}

/// Loads a policy written by [`write_pretrained`]; a missing file is a
/// precondition failure.
pub fn load_policy(path: &Path) -> Result<Network> {
    if !path.is_file() {
        return Err(Error::Precondition(format!(
            "no pre-trained independent policy at {}; run `pretrain` first",
            path.display()
        )));
    }
    let ckpt = Checkpoint::<Real>::load(path)?;
    let net = ckpt.get(POLICY_NETWORK)?.clone();
    if net.input_dim() != OBS_DIM || net.output_dim() != Action::COUNT {
        return Err(Error::Checkpoint(format!(
            "policy at {} has the wrong shape",
            path.display()
        )));
    }
    Ok(net)
}
