use crate::dqn::max_value;
use crate::numerics::Mlp;
use crate::scalar::Scalar;

/// Anything that maps an encoded state to one value per action.
pub trait ActionValues<S> {
    fn action_values(&self, state: &[S]) -> Vec<S>;
}

impl<S: Scalar> ActionValues<S> for Mlp<S> {
    fn action_values(&self, state: &[S]) -> Vec<S> {
        self.predict(state)
    }
}

impl<S, F: Fn(&[S]) -> Vec<S>> ActionValues<S> for F {
    fn action_values(&self, state: &[S]) -> Vec<S> {
        self(state)
    }
}

/// One `(s, a, s')` triple; `next` is `None` for terminal transitions.
#[derive(Clone, Copy, Debug)]
pub struct InversionStep<'a, S> {
    pub state: &'a [S],
    pub action: usize,
    pub next: Option<&'a [S]>,
}

/// `q_sa - gamma * max(next_values)`, or `q_sa` when terminal.
pub fn invert_one<S: Scalar>(q_sa: S, next_values: Option<&[S]>, gamma: f64) -> S {
    match next_values {
        Some(v) => q_sa - S::of(gamma) * max_value(v),
        None => q_sa,
    }
}

/// Per-transition reward implied by `q` under the Bellman optimality equation.
pub fn bellman_invert<S: Scalar, Q: ActionValues<S> + ?Sized>(
    q: &Q,
    steps: &[InversionStep<'_, S>],
    gamma: f64,
) -> Vec<S> {
    assert!((0.0..=1.0).contains(&gamma), "gamma {gamma} outside [0, 1]");
    steps
        .iter()
        .map(|t| {
            let q_sa = q.action_values(t.state)[t.action];
            let next = t.next.map(|s| q.action_values(s));
            invert_one(q_sa, next.as_deref(), gamma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: Vec<Vec<f64>>) -> impl Fn(&[f64]) -> Vec<f64> {
        move |s: &[f64]| rows[s[0] as usize].clone()
    }

    #[test]
    fn zero_discount_returns_q() {
        let q = table(vec![vec![1.0, 2.0], vec![7.0, -3.0]]);
        let (s0, s1) = ([0.0], [1.0]);
        let steps = [
            InversionStep {
                state: &s0[..],
                action: 1,
                next: Some(&s1[..]),
            },
            InversionStep {
                state: &s1[..],
                action: 0,
                next: Some(&s0[..]),
            },
        ];
        assert_eq!(bellman_invert(&q, &steps, 0.0), vec![2.0, 7.0]);
    }

    #[test]
    fn terminal_returns_q() {
        let q = table(vec![vec![-50.0, 0.0]]);
        let s = [0.0];
        let steps = [InversionStep {
            state: &s[..],
            action: 0,
            next: None,
        }];
        assert_eq!(bellman_invert(&q, &steps, 0.95), vec![-50.0]);
    }

    #[test]
    fn bootstraps_with_max() {
        assert_eq!(invert_one(10.0, Some(&[1.0, 4.0, 2.0]), 0.5), 8.0);
    }
}
