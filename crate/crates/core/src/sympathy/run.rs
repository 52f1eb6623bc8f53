//! The learner's side of an episode: acting from `Q_symp`, inferring the
//! independent agent's rewards and storing both reward channels.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dqn::{epsilon_greedy, max_value, ReplayBuffer, Transition};
use crate::emote::EmpatheticDump;
use crate::error::Result;
use crate::gridworld::{
    observe, play_episode, Action, AgentId, EpisodeDriver, Observation, TransitionRecord, WorldState, BUTTON_INDEX,
};
use crate::irl::LabeledReward;
use crate::numerics::Mlp;
use crate::scalar::Scalar;
use crate::sympathy::dual::DualQTrainer;
use crate::sympathy::estimator::Estimator;
use crate::sympathy::reward::{sympathetic_reward, SelfishnessPolicy};

/// Frozen, pre-trained independent agent.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependentPolicy<S> {
    pub net: Mlp<S>,
    pub epsilon: f64,
}

impl<S: Scalar> IndependentPolicy<S> {
    pub fn act(&self, s_i: &[S], rng: &mut ChaCha8Rng) -> usize {
        epsilon_greedy(&self.net.predict(s_i), self.epsilon, rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    /// Exploration from the schedule, replay storage and gradient steps.
    Train,
    /// Fixed exploration, no learning.
    Eval { epsilon: f64 },
}

/// One row of the per-episode CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: u64,
    pub return_env: f64,
    pub return_symp: f64,
    pub beta_mean: f64,
    pub win: bool,
    pub door_opened: bool,
    /// The learner was harmed.
    pub harmed: bool,
    /// The learner harmed the independent agent.
    pub ia_harmed: bool,
    pub rounds: u32,
    pub loss_selfish: Option<f64>,
    pub loss_symp: Option<f64>,
    pub loss_imagination: Option<f64>,
}

/// Optional per-episode artifacts.
#[derive(Clone, Debug, Default)]
pub struct Recorder {
    pub keep_transitions: bool,
    pub keep_dumps: bool,
    pub transitions: Vec<TransitionRecord>,
    pub dumps: Vec<EmpatheticDump>,
    /// Inferred (learner-unit) reward of every closed independent transition.
    pub rewards: Vec<LabeledReward>,
    /// `(b of s_i, predicted button status of s_e)` for every independent
    /// observation, when an empathy model is present.
    pub button: Vec<(bool, f64)>,
    /// Independent actions whose greedy `Q_indep` action matched, and total.
    pub agreement: (u64, u64),
}

/// All mutable state of one learner run.
pub struct SympathyAgent<S> {
    pub gamma: f64,
    pub trainer: DualQTrainer<S>,
    pub buffer: ReplayBuffer<Transition<S>>,
    pub estimator: Estimator<S>,
    pub selfishness: SelfishnessPolicy,
    pub independent: IndependentPolicy<S>,
    pub la_rng: ChaCha8Rng,
    pub ia_rng: ChaCha8Rng,
    pub train_rng: ChaCha8Rng,
}

struct Driver<'a, S> {
    agent: &'a mut SympathyAgent<S>,
    phase: Phase,
    episode: u64,
    rec: &'a mut Recorder,
    beta: f64,
    beta_sum: f64,
    la_moves: u64,
    r_hat: f64,
    return_symp: f64,
    losses: [(f64, u64); 3],
}

fn mean(acc: (f64, u64)) -> Option<f64> {
    (acc.1 > 0).then(|| acc.0 / acc.1 as f64)
}

impl<S: Scalar> SympathyAgent<S> {
    pub fn play(
        &mut self,
        world: &mut WorldState,
        episode: u64,
        phase: Phase,
        rec: &mut Recorder,
    ) -> Result<EpisodeRow> {
        let mut d = Driver {
            agent: self,
            phase,
            episode,
            rec,
            beta: 1.0,
            beta_sum: 0.0,
            la_moves: 0,
            r_hat: 0.0,
            return_symp: 0.0,
            losses: [(0.0, 0); 3],
        };
        let out = play_episode(world, episode, &mut d)?;
        let row = EpisodeRow {
            episode,
            return_env: out.la_return,
            return_symp: d.return_symp,
            beta_mean: if d.la_moves > 0 {
                d.beta_sum / d.la_moves as f64
            } else {
                1.0
            },
            win: out.win,
            door_opened: out.button_pressed,
            harmed: out.la_harmed,
            ia_harmed: out.ia_harmed,
            rounds: out.rounds,
            loss_selfish: mean(d.losses[0]),
            loss_symp: mean(d.losses[1]),
            loss_imagination: mean(d.losses[2]),
        };
        if phase == Phase::Train {
            let q = self.trainer.selfish().q.online().clone();
            self.estimator.end_episode(&q);
        }
        Ok(row)
    }

    fn beta_for(&self, s_la: &[S], world: &WorldState) -> f64 {
        if !self.trainer.is_dual() {
            return 1.0;
        }
        if !self.selfishness.needs_values() {
            return self.selfishness.beta(0.0, None);
        }
        let max_selfish = max_value(&self.trainer.selfish().q.values(s_la)).as_f64();
        let max_indep = if world.is_alive(AgentId::Independent) {
            let s_i = observe(world, AgentId::Independent).encode::<S>();
            self.estimator.values(&s_i).map(|q| max_value(&q).as_f64())
        } else {
            None
        };
        self.selfishness.beta(max_selfish, max_indep)
    }
}

impl<S: Scalar> Driver<'_, S> {
    fn close_learner(&mut self, rec: &TransitionRecord) -> Result<()> {
        let r = rec.reward;
        let r_hat = std::mem::take(&mut self.r_hat);
        let symp = if self.agent.trainer.is_dual() {
            sympathetic_reward(r, r_hat, self.beta)
        } else {
            r
        };
        self.return_symp += symp;
        if self.phase != Phase::Train {
            return Ok(());
        }
        let a = &mut *self.agent;
        let next = rec.successor().map(|o| o.encode::<S>());
        a.buffer.push(Transition {
            obs: rec.obs.encode(),
            action: rec.action.index(),
            rewards: [S::of(r), S::of(symp)],
            next_obs: next,
        });
        let losses = a.trainer.on_env_step(&a.buffer, &mut a.train_rng)?;
        if let Some(l) = losses.selfish {
            self.losses[0].0 += l.as_f64();
            self.losses[0].1 += 1;
        }
        if let Some(l) = losses.symp {
            self.losses[1].0 += l.as_f64();
            self.losses[1].1 += 1;
        }
        let updates = a.trainer.selfish().updates();
        if let Some(l) = a.estimator.train_step(updates, &mut a.train_rng)? {
            self.losses[2].0 += l.total.as_f64();
            self.losses[2].1 += 1;
        }
        Ok(())
    }

    fn close_independent(&mut self, rec: &TransitionRecord) {
        let a = &mut *self.agent;
        if a.estimator.is_absent() {
            return;
        }
        let s_i = rec.obs.encode::<S>();
        let next = rec.successor().map(|o| o.encode::<S>());
        let raw = a
            .estimator
            .infer_raw(&s_i, rec.action.index(), next.as_deref(), a.gamma);
        let scaled = raw * a.estimator.csl_scale().unwrap_or(1.0);
        self.r_hat += scaled;
        self.rec.rewards.push(LabeledReward {
            episode: rec.episode,
            events: rec.events,
            reward: scaled,
        });
        if self.phase == Phase::Train {
            let labeled = LabeledReward {
                episode: rec.episode,
                events: rec.events,
                reward: raw,
            };
            a.estimator.observe(s_i, rec.action.index(), labeled);
        }
    }
}

impl<S: Scalar> EpisodeDriver for Driver<'_, S> {
    fn act(&mut self, actor: AgentId, world: &WorldState, obs: &Observation) -> Result<Action> {
        let s = obs.encode::<S>();
        match actor {
            AgentId::Learning => {
                self.beta = self.agent.beta_for(&s, world);
                self.beta_sum += self.beta;
                self.la_moves += 1;
                let eps = match self.phase {
                    Phase::Train => self.agent.trainer.epsilon(),
                    Phase::Eval { epsilon } => epsilon,
                };
                let a = &mut *self.agent;
                Ok(Action::from_index(a.trainer.select_action(&s, eps, &mut a.la_rng)))
            }
            AgentId::Independent => {
                let a = &mut *self.agent;
                let action = a.independent.act(&s, &mut a.ia_rng);
                if let (Phase::Eval { .. }, Some(model)) = (self.phase, a.estimator.empathy_model()) {
                    let s_e = model.empathetic_state(&s);
                    self.rec.button.push((obs.button, s_e[BUTTON_INDEX].as_f64()));
                    if self.rec.keep_dumps {
                        self.rec
                            .dumps
                            .push(EmpatheticDump::new(self.episode, world.step_count(), &s, &s_e));
                    }
                }
                if let Phase::Eval { .. } = self.phase {
                    if let Some(hit) = a.estimator.predicts(&s, action) {
                        self.rec.agreement.0 += u64::from(hit);
                        self.rec.agreement.1 += 1;
                    }
                }
                Ok(Action::from_index(action))
            }
        }
    }

    fn closed(&mut self, rec: TransitionRecord) -> Result<()> {
        match rec.actor {
            AgentId::Learning => self.close_learner(&rec)?,
            AgentId::Independent => self.close_independent(&rec),
        }
        if self.rec.keep_transitions {
            self.rec.transitions.push(rec);
        }
        Ok(())
    }
}
