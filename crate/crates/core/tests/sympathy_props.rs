use emote_core::dqn::{DqnConfig, EpsilonSchedule, Learner, QFunction, ReplayBuffer, RewardChannel, Transition};
use emote_core::numerics::{MethodName, Mlp, OptimizerConfig, Parameters, RegressionLoss};
use emote_core::sympathy::{sympathetic_reward, DualQTrainer, SelfishnessPolicy};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_sgd() -> DqnConfig {
    DqnConfig {
        hidden: vec![],
        buffer_capacity: 64,
        batch_size: 8,
        epsilon: EpsilonSchedule {
            start: 1.0,
            end: 1.0,
            decay_steps: 1,
        },
        target_sync_steps: 25,
        train_every: 1,
        learning_starts: 8,
        optimizer: OptimizerConfig {
            method: MethodName::Sgd,
            learning_rate: 0.05,
        },
        loss: RegressionLoss::Squared,
    }
}

fn halved(net: &Mlp<f64>) -> Mlp<f64> {
    let mut n = net.clone();
    for s in n.slices_mut() {
        s.iter_mut().for_each(|v| *v *= 0.5);
    }
    n
}

fn random_buffer(rng: &mut ChaCha8Rng, dim: usize, symp: impl Fn(f64) -> f64) -> ReplayBuffer<Transition<f64>> {
    let mut buf = ReplayBuffer::new(64);
    for _ in 0..64 {
        let obs: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let next = rng
            .gen_bool(0.8)
            .then(|| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect());
        let r = rng.gen_range(-10.0..10.0);
        buf.push(Transition {
            obs,
            action: rng.gen_range(0..3),
            rewards: [r, symp(r)],
            next_obs: next,
        });
    }
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sympathetic_reward_interpolates(r in -100.0f64..100.0, r_hat in -100.0f64..100.0, beta in 0.0f64..=1.0) {
        let v = sympathetic_reward(r, r_hat, beta);
        let eps = 1e-12 * (r.abs() + r_hat.abs() + 1.0);
        prop_assert!(v >= r.min(r_hat) - eps && v <= r.max(r_hat) + eps);
        prop_assert_eq!(sympathetic_reward(r, r_hat, 1.0), r);
        prop_assert_eq!(sympathetic_reward(r, r_hat, 0.0), r_hat);
        let mid = sympathetic_reward(r, r_hat, 0.5);
        prop_assert!((mid - (r + r_hat) / 2.0).abs() <= eps);
    }

    #[test]
    fn adaptive_selfishness_stays_in_bounds(
        max_selfish in -1e3f64..1e3,
        max_indep in proptest::option::of(-1e3f64..1e3),
        lo in 0.0f64..0.5,
        hi in 0.5f64..=1.0,
        temperature in 0.0f64..10.0,
    ) {
        let p = SelfishnessPolicy::ValueAdaptive { temperature, lo, hi };
        let b = p.beta(max_selfish, max_indep);
        prop_assert!(b >= lo && b <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// With `r_hat = 0` and `beta = 1/2` every target is half the selfish
    /// one, so a linear learner started at half the weights stays at half.
    #[test]
    fn zero_inferred_reward_halves_the_sympathetic_values(seed in any::<u64>(), steps in 10usize..80) {
        let cfg = linear_sgd();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let buf = random_buffer(&mut rng, 4, |r| sympathetic_reward(r, 0.0, 0.5));
        let q = QFunction::<f64>::new(4, &[], 3, &mut rng);
        let mut env = Learner::from_q(q.clone(), &cfg, 0.9, RewardChannel::Environment);
        let half = QFunction::from_parts(halved(q.online()), halved(q.target()));
        let mut symp = Learner::from_q(half, &cfg, 0.9, RewardChannel::Sympathetic);
        let (mut ra, mut rb) = (ChaCha8Rng::seed_from_u64(seed ^ 1), ChaCha8Rng::seed_from_u64(seed ^ 1));
        for _ in 0..steps {
            env.on_env_step(&buf, &mut ra).unwrap();
            symp.on_env_step(&buf, &mut rb).unwrap();
        }
        for t in (0..8).map(|i| buf.get(i)) {
            for (a, b) in env.q.values(&t.obs).iter().zip(symp.q.values(&t.obs)) {
                prop_assert!((a / 2.0 - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn selfish_values_never_see_the_sympathetic_channel(seed in any::<u64>(), k in -100.0f64..100.0) {
        let cfg = DqnConfig { hidden: vec![6], ..linear_sgd() };
        let run = |scale: f64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let buf = random_buffer(&mut rng, 4, |r| r * scale);
            let mut t = DualQTrainer::<f64>::new(4, 3, &cfg, 0.9, true, &mut rng);
            for _ in 0..30 {
                t.on_env_step(&buf, &mut rng).unwrap();
            }
            t
        };
        let (a, b) = (run(1.0), run(k));
        prop_assert_eq!(a.selfish().q.online(), b.selfish().q.online());
        prop_assert!(std::ptr::eq(a.acting(), a.symp().unwrap()));
    }
}
