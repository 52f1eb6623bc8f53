use emote_core::numerics::{softmax, Activation, Mlp, Optimizer, Parameters};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ACTIVATIONS: [Activation; 3] = [Activation::Relu, Activation::Sigmoid, Activation::Identity];

/// `sum_o c_o * y_o` over a batch, the simplest loss with a known output gradient.
fn weighted_sum(net: &Mlp<f64>, x: &[f64], batch: usize, c: &[f64]) -> f64 {
    let cache = net.forward_slice(x, batch);
    cache.output().iter().zip(c).map(|(y, w)| y * w).sum()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn backprop_matches_central_differences(
        seed in any::<u64>(),
        widths in proptest::collection::vec(1usize..=16, 2..=4),
        hidden_ix in 0usize..3,
        output_ix in 0usize..3,
        batch in 1usize..4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Mlp::<f64>::new(&widths, ACTIVATIONS[hidden_ix], ACTIVATIONS[output_ix], &mut rng);
        // Nonzero biases keep pre-activations off the relu kink.
        for layer in net.layers_mut() {
            for b in layer.bias.iter_mut() {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        let x: Vec<f64> = (0..batch * widths[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..batch * net.output_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let cache = net.forward_slice(&x, batch);
        let mut grads = net.zero_grads();
        let gx = net.backward(&cache, &c, &mut grads);

        let h = 1e-6;
        let mut worst = 0.0f64;
        let analytic: Vec<f64> = grads.slices().iter().flat_map(|s| s.iter().copied()).collect();
        let mut k = 0;
        let n_slices = net.clone().slices_mut().len();
        for si in 0..n_slices {
            let len = net.clone().slices_mut()[si].len();
            for j in 0..len {
                let mut plus = net.clone();
                plus.slices_mut()[si][j] += h;
                let mut minus = net.clone();
                minus.slices_mut()[si][j] -= h;
                let numeric = (weighted_sum(&plus, &x, batch, &c) - weighted_sum(&minus, &x, batch, &c)) / (2.0 * h);
                worst = worst.max(rel_err(analytic[k], numeric));
                k += 1;
            }
        }
        for j in 0..x.len() {
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            let numeric = (weighted_sum(&net, &xp, batch, &c) - weighted_sum(&net, &xm, batch, &c)) / (2.0 * h);
            worst = worst.max(rel_err(gx[j], numeric));
        }
        prop_assert!(worst < 1e-3, "max relative error {worst}");
    }

    #[test]
    fn softmax_survives_extreme_logits(
        logits in proptest::collection::vec(prop_oneof![Just(-1e4f64), Just(1e4f64), -1e4f64..1e4], 1..10),
    ) {
        let p = softmax(&logits);
        prop_assert!(p.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let m = logits.iter().cloned().fold(f64::MIN, f64::max);
        let top = logits.iter().zip(&p).filter(|(l, _)| **l == m).map(|(_, p)| *p).sum::<f64>();
        prop_assert!(top >= 1.0 / logits.len() as f64 - 1e-12);
    }

    #[test]
    fn optimizer_updates_are_bit_identical(seed in any::<u64>(), adam in any::<bool>(), steps in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Mlp::<f32>::new(&[4, 6, 3], Activation::Relu, Activation::Identity, &mut rng);
        let grads: Vec<_> = (0..steps)
            .map(|_| {
                let mut g = base.zero_grads();
                for s in g.slices_mut() {
                    for v in s.iter_mut() {
                        *v = rng.gen_range(-1.0..1.0);
                    }
                }
                g
            })
            .collect();
        let run = || {
            let mut net = base.clone();
            let mut opt = if adam { Optimizer::adam(1e-2) } else { Optimizer::sgd(1e-2) };
            for g in &grads {
                opt.step(&mut net, g);
            }
            net
        };
        let (a, b) = (run(), run());
        let bits = |n: &Mlp<f32>| -> Vec<u32> { n.slices().iter().flat_map(|s| s.iter().map(|v| v.to_bits())).collect() };
        prop_assert_eq!(bits(&a), bits(&b));
    }
}
