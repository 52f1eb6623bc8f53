//! Independent tabular oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// Deterministic or stochastic tabular MDP: `p[s][a][s']`, `r[s][a]`.
#[derive(Clone, Debug)]
pub struct TabularMdp {
    pub p: Vec<Vec<Vec<f64>>>,
    pub r: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl TabularMdp {
    pub fn states(&self) -> usize {
        self.r.len()
    }

    pub fn actions(&self) -> usize {
        self.r[0].len()
    }

    pub fn random<R: Rng>(rng: &mut R, states: usize, actions: usize, gamma: f64, deterministic: bool) -> Self {
        let p = (0..states)
            .map(|_| {
                (0..actions)
                    .map(|_| {
                        let mut row = vec![0.0; states];
                        if deterministic {
                            row[rng.gen_range(0..states)] = 1.0;
                        } else {
                            let w: Vec<f64> = (0..states).map(|_| rng.gen::<f64>()).collect();
                            let t: f64 = w.iter().sum();
                            for (x, v) in row.iter_mut().zip(w) {
                                *x = v / t;
                            }
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        let r = (0..states)
            .map(|_| (0..actions).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        Self { p, r, gamma }
    }

    /// Optimal action values by value iteration to a fixed point.
    pub fn value_iteration(&self) -> Vec<Vec<f64>> {
        let (ns, na) = (self.states(), self.actions());
        let mut q = vec![vec![0.0; na]; ns];
        loop {
            let v: Vec<f64> = q
                .iter()
                .map(|row| row.iter().cloned().fold(f64::MIN, f64::max))
                .collect();
            let mut change = 0.0f64;
            for s in 0..ns {
                for a in 0..na {
                    let next: f64 = (0..ns).map(|t| self.p[s][a][t] * v[t]).sum();
                    let new = self.r[s][a] + self.gamma * next;
                    change = change.max((new - q[s][a]).abs());
                    q[s][a] = new;
                }
            }
            if change < 1e-14 {
                return q;
            }
        }
    }
}

/// Largest relative error between the analytic gradient of the imagination
/// loss and central differences, over `probes` sampled parameters.
pub fn emote_gradcheck(seed: u64, probes: usize) -> f64 {
    use emote_core::emote::{emote_loss, ImaginationConfig, ImaginationNetwork, Init, Variant};
    use emote_core::gridworld::{Action, OBS_DIM};
    use emote_core::numerics::{Activation, Mlp, Parameters};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variant = if rng.gen() { Variant::Feature } else { Variant::Image };
    let cfg = ImaginationConfig {
        hidden: vec![rng.gen_range(3..10)],
        cell_coordinates: rng.gen(),
        init: Init::Random,
        ..Default::default()
    };
    let mut net = ImaginationNetwork::<f64>::new(variant, &cfg, &mut rng);
    for s in net.slices_mut() {
        for v in s.iter_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
    }
    let q = Mlp::<f64>::new(
        &[OBS_DIM, 12, Action::COUNT],
        Activation::Relu,
        Activation::Identity,
        &mut rng,
    );
    let batch = rng.gen_range(1..4);
    let mut s_i = Vec::with_capacity(batch * OBS_DIM);
    let mut actions = Vec::with_capacity(batch);
    for _ in 0..batch {
        let mut view = emote_core::emote::synthetic::random_view(&mut rng);
        view.button = rng.gen();
        s_i.extend(view.encode::<f64>());
        actions.push(rng.gen_range(0..Action::COUNT));
    }
    let delta = rng.gen_range(0.0..1.0);

    let mut grads = net.zero_grads();
    emote_loss(&net, &q, &s_i, &actions, delta, Some(&mut grads));
    let analytic: Vec<f64> = grads.slices().iter().flat_map(|s| s.iter().copied()).collect();
    let lens: Vec<usize> = net.slices().iter().map(|s| s.len()).collect();
    let total: usize = lens.iter().sum();

    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let k = rng.gen_range(0..total);
        let (mut si, mut j) = (0, k);
        while j >= lens[si] {
            j -= lens[si];
            si += 1;
        }
        let eval = |d: f64| {
            let mut n = net.clone();
            n.slices_mut()[si][j] += d;
            emote_loss(&n, &q, &s_i, &actions, delta, None).total
        };
        let numeric = (eval(h) - eval(-h)) / (2.0 * h);
        let err = (analytic[k] - numeric).abs() / (analytic[k].abs() + numeric.abs()).max(1e-4);
        worst = worst.max(err);
    }
    worst
}
