//! A small analogy task with a known answer.
//!
//! A fixed linear Q-function is attracted to learner pellets and repelled,
//! more weakly, by the other agent's. The
//! independent agent acts greedily under that same function after its view
//! has had the pellet channels swapped, so it is drawn to its own pellets. An
//! imagination network trained on the independent agent's behaviour should
//! rediscover the swap.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dqn::argmax;
use crate::emote::divergence::state_divergence;
use crate::emote::imagination::{ImaginationConfig, ImaginationNetwork, Variant};
use crate::emote::loss::train_imagination;
use crate::emote::transform::bvis_transform;
use crate::gridworld::{Action, AgentId, Observation, TileKind, CELLS, CENTER, CHANNELS, OBS_DIM, VIEW};
use crate::numerics::{Activation, Dense, Mlp, Optimizer};
use crate::scalar::Scalar;

/// Weight of the repulsion from independent-agent pellets, relative to the
/// attraction to learner pellets.
pub const REPULSION: f64 = 0.5;

/// Linear Q-function that moves towards nearby learner pellets and away from
/// independent-agent pellets at `repulsion` times that weight.
pub fn pellet_seeking_q<S: Scalar>(scale: f64, repulsion: f64) -> Mlp<S> {
    let mut d = Dense::zeros(OBS_DIM, Action::COUNT, Activation::Identity);
    let half = (VIEW / 2) as i32;
    for cell in 0..CELLS {
        let dy = (cell / VIEW) as i32 - half;
        let dx = (cell % VIEW) as i32 - half;
        let dist = dx.abs() + dy.abs();
        if dist == 0 {
            continue;
        }
        for a in Action::ALL {
            let (mx, my) = a.delta();
            let along = dx * mx + dy * my;
            if along <= 0 {
                continue;
            }
            // Nearer pellets and straighter lines weigh more; the per-action
            // factor keeps diagonal pellets from producing exact ties.
            let w = scale
                * 0.75f64.powi(dist - 1)
                * (1.0 + 0.25 * along as f64 / dist as f64)
                * (1.0 + 0.01 * a.index() as f64);
            let i = cell * CHANNELS + TileKind::LaPellet.channel();
            d.weights[i * Action::COUNT + a.index()] = S::of(w);
            let j = cell * CHANNELS + TileKind::IaPellet.channel();
            d.weights[j * Action::COUNT + a.index()] = S::of(-repulsion * w);
        }
    }
    Mlp::from_layers(vec![d]).unwrap()
}

/// Random 5x5 view with the observer at the centre, some walls, one to
/// three pellets of each kind.
pub fn random_view<R: Rng + ?Sized>(rng: &mut R) -> Observation {
    let mut tiles = [TileKind::Floor; CELLS];
    tiles[CENTER] = TileKind::IndependentAgent;
    let mut free: Vec<usize> = (0..CELLS).filter(|&c| c != CENTER).collect();
    free.shuffle(rng);
    let mut it = free.into_iter();
    for (kind, lo, hi) in [
        (TileKind::IaPellet, 1, 3),
        (TileKind::LaPellet, 1, 3),
        (TileKind::Wall, 0, 3),
    ] {
        for _ in 0..rng.gen_range(lo..=hi) {
            tiles[it.next().unwrap()] = kind;
        }
    }
    Observation {
        tiles,
        button: false,
        observer: AgentId::Independent,
    }
}

/// Labelled `(s_i, a_i)` data for the task.
pub struct PelletSwapTask<S> {
    pub q: Mlp<S>,
    pub train: Vec<Vec<S>>,
    pub train_actions: Vec<usize>,
    pub test: Vec<Vec<S>>,
    pub test_actions: Vec<usize>,
}

/// Training settings that solve the task reliably.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSettings {
    pub delta: f64,
    pub steps: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            delta: 0.1,
            steps: 3000,
            batch: 32,
            learning_rate: 3e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PelletSwapOutcome {
    /// Held-out rate of `argmax Q(M(s_i)) == a_i`.
    pub action_match: f64,
    /// Held-out rate of states whose changed cells are all pellet cells (and not none).
    pub localized: f64,
    pub final_l1: f64,
}

impl<S: Scalar> PelletSwapTask<S> {
    pub fn new(seed: u64, n_train: usize, n_test: usize) -> Self {
        let q = pellet_seeking_q::<S>(40.0, REPULSION);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = |n: usize| -> (Vec<Vec<S>>, Vec<usize>) {
            (0..n)
                .map(|_| {
                    let s = random_view(&mut rng).encode::<S>();
                    let a = argmax(&q.predict(&bvis_transform(&s)));
                    (s, a)
                })
                .unzip()
        };
        let (train, train_actions) = sample(n_train);
        let (test, test_actions) = sample(n_test);
        Self {
            q,
            train,
            train_actions,
            test,
            test_actions,
        }
    }

    /// Trains a fresh imagination network on the task and scores it on the held-out split.
    pub fn fit(
        &self,
        variant: Variant,
        config: &ImaginationConfig,
        settings: &FitSettings,
        seed: u64,
    ) -> (ImaginationNetwork<S>, PelletSwapOutcome) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = ImaginationNetwork::new(variant, config, &mut rng);
        let mut opt = Optimizer::adam(settings.learning_rate);
        let mut last = S::zero();
        let batch = settings.batch.min(self.train.len());
        for _ in 0..settings.steps {
            let ix = rand::seq::index::sample(&mut rng, self.train.len(), batch);
            let mut s = Vec::with_capacity(ix.len() * OBS_DIM);
            let mut a = Vec::with_capacity(ix.len());
            for i in ix {
                s.extend_from_slice(&self.train[i]);
                a.push(self.train_actions[i]);
            }
            last = train_imagination(&mut net, &self.q, &s, &a, S::of(settings.delta), &mut opt)
                .expect("non-empty batch")
                .l1;
        }
        let outcome = self.score(&net, last.as_f64());
        (net, outcome)
    }

    pub fn score(&self, net: &ImaginationNetwork<S>, final_l1: f64) -> PelletSwapOutcome {
        let pellets = [TileKind::LaPellet, TileKind::IaPellet];
        let mut hits = 0;
        let mut localized = 0;
        for (s, &a) in self.test.iter().zip(&self.test_actions) {
            let e = net.imagine(s);
            if argmax(&self.q.predict(&e)) == a {
                hits += 1;
            }
            if state_divergence(s, &e).confined_to(&pellets) {
                localized += 1;
            }
        }
        let n = self.test.len().max(1) as f64;
        PelletSwapOutcome {
            action_match: hits as f64 / n,
            localized: localized as f64 / n,
            final_l1,
        }
    }
}
