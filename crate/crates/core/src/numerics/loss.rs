use crate::scalar::Scalar;

/// Probability floor used when taking logarithms of softmax outputs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerically stable softmax (max-subtracted).
///
/// Panics on an empty input.
pub fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    assert!(!logits.is_empty(), "softmax of an empty vector");
    let max = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Value and logit-gradient of a loss term.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGrad<S> {
    pub loss: S,
    pub grad: Vec<S>,
}

/// Categorical cross entropy `-ln p[target]` of softmax probabilities against
/// a one-hot target. The gradient is with respect to the logits that produced
/// `probs`, i.e. `probs - target`.
///
/// Panics if lengths differ or the target is not one-hot.
pub fn cross_entropy<S: Scalar>(target: &[S], probs: &[S]) -> LossGrad<S> {
    assert_eq!(target.len(), probs.len(), "target/probability length mismatch");
    let hot = one_hot_index(target).expect("cross entropy target must be one-hot");
    let p = probs[hot].max(S::of(PROB_FLOOR));
    LossGrad {
        loss: -p.ln(),
        grad: probs.iter().zip(target).map(|(&p, &t)| p - t).collect(),
    }
}

/// Cross entropy with the target given as a class index.
pub fn cross_entropy_index<S: Scalar>(target: usize, probs: &[S]) -> LossGrad<S> {
    assert!(target < probs.len(), "target class out of range");
    let p = probs[target].max(S::of(PROB_FLOOR));
    let mut grad = probs.to_vec();
    grad[target] -= S::one();
    LossGrad { loss: -p.ln(), grad }
}

fn one_hot_index<S: Scalar>(v: &[S]) -> Option<usize> {
    let mut hot = None;
    for (i, &x) in v.iter().enumerate() {
        if x == S::one() {
            if hot.is_some() {
                return None;
            }
            hot = Some(i);
        } else if x != S::zero() {
            return None;
        }
    }
    hot
}

/// `sum |a - b|` with subgradient `sign(a - b)` (zero at ties), taken with respect to `a`.
///
/// Panics on a length mismatch.
pub fn l1_loss<S: Scalar>(a: &[S], b: &[S]) -> LossGrad<S> {
    assert_eq!(a.len(), b.len(), "l1 loss shape mismatch");
    let mut loss = S::zero();
    let grad = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            loss += d.abs();
            if d > S::zero() {
                S::one()
            } else if d < S::zero() {
                -S::one()
            } else {
                S::zero()
            }
        })
        .collect();
    LossGrad { loss, grad }
}

/// Regression loss used for temporal-difference errors.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegressionLoss {
    /// `0.5 * (prediction - target)^2`.
    Squared,
    /// Huber with the given threshold.
    Huber { delta: f64 },
}

impl RegressionLoss {
    /// Loss and derivative with respect to the prediction.
    pub fn eval<S: Scalar>(self, prediction: S, target: S) -> (S, S) {
        let d = prediction - target;
        match self {
            RegressionLoss::Squared => (S::of(0.5) * d * d, d),
            RegressionLoss::Huber { delta } => {
                let k = S::of(delta);
                if d.abs() <= k {
                    (S::of(0.5) * d * d, d)
                } else {
                    (k * (d.abs() - S::of(0.5) * k), k * d.signum())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn uniform_softmax() {
        let p = softmax(&[0.0f64; 4]);
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn softmax_large_logits_do_not_overflow() {
        let p = softmax(&[1000.0f64, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] >= 0.0 && p[1] < 1e-300);
    }

    #[test]
    fn softmax_closed_form() {
        let p = softmax(&[2f64.ln(), 0.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn softmax_empty_panics() {
        softmax::<f64>(&[]);
    }

    #[test]
    fn cross_entropy_cases() {
        let ce = cross_entropy(&[0.0, 1.0, 0.0], &[0.0f64, 1.0, 0.0]);
        assert_eq!(ce.loss, 0.0);
        let uniform = [0.2f64; 5];
        let ce = cross_entropy(&[0.0, 0.0, 1.0, 0.0, 0.0], &uniform);
        assert!((ce.loss - 5f64.ln()).abs() < 1e-15);
        assert!((ce.grad[2] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_clamps_probability() {
        let ce = cross_entropy(&[1.0, 0.0], &[0.0f64, 1.0]);
        assert!((ce.loss - (-(PROB_FLOOR.ln()))).abs() < 1e-9);
    }

    #[test]
    #[should_panic(expected = "one-hot")]
    fn cross_entropy_rejects_soft_targets() {
        cross_entropy(&[0.5, 0.5], &[0.5f64, 0.5]);
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_difference() {
        let logits = [0.3f64, -1.2, 2.0, 0.1];
        let target = [0.0, 0.0, 0.0, 1.0];
        let ce = cross_entropy(&target, &softmax(&logits));
        let h = 1e-4;
        for i in 0..logits.len() {
            let mut up = logits;
            let mut dn = logits;
            up[i] += h;
            dn[i] -= h;
            let fd =
                (cross_entropy(&target, &softmax(&up)).loss - cross_entropy(&target, &softmax(&dn)).loss) / (2.0 * h);
            let rel = (fd - ce.grad[i]).abs() / fd.abs().max(ce.grad[i].abs()).max(1e-8);
            assert!(rel < 1e-3, "component {i}: fd {fd} analytic {}", ce.grad[i]);
        }
    }

    #[test]
    fn l1_cases() {
        assert_eq!(l1_loss(&[0.3f64, 0.7], &[0.3, 0.7]).loss, 0.0);
        let l = l1_loss(&[1.0f64, 0.0], &[0.0, 1.0]);
        assert_eq!(l.loss, 2.0);
        assert_eq!(l.grad, vec![1.0, -1.0]);
        assert_eq!(l1_loss(&[0.5f64], &[0.5]).grad, vec![0.0]);
    }

    #[test]
    fn l1_gradient_matches_finite_difference_away_from_ties() {
        let a = [0.3f64, -0.4, 1.5];
        let b = [0.1f64, 0.2, 1.0];
        let g = l1_loss(&a, &b).grad;
        let h = 1e-4;
        for i in 0..3 {
            let mut up = a;
            let mut dn = a;
            up[i] += h;
            dn[i] -= h;
            let fd = (l1_loss(&up, &b).loss - l1_loss(&dn, &b).loss) / (2.0 * h);
            assert!((fd - g[i]).abs() / g[i].abs() < 1e-3);
        }
    }

    #[test]
    fn huber_is_linear_in_the_tails() {
        let (l, d) = RegressionLoss::Huber { delta: 1.0 }.eval(5.0f64, 0.0);
        assert_eq!((l, d), (4.5, 1.0));
        let (l, d) = RegressionLoss::Squared.eval(3.0f64, 1.0);
        assert_eq!((l, d), (2.0, 2.0));
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(logits in prop::collection::vec(-1e4f64..1e4, 1..12)) {
            let p = softmax(&logits);
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v) && v.is_finite()));
        }
    }
}
