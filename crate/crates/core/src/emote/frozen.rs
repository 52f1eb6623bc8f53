use crate::numerics::Mlp;
use crate::scalar::Scalar;

/// Periodically refreshed copy of the learner's selfish Q-network.
///
/// Parameters only ever change by copying; nothing trains them.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenQCopy<S> {
    net: Mlp<S>,
    interval: u32,
    since_refresh: u32,
}

impl<S: Scalar> FrozenQCopy<S> {
    pub fn new(source: &Mlp<S>, interval: u32) -> Self {
        assert!(interval > 0, "refresh interval must be positive");
        Self {
            net: source.clone(),
            interval,
            since_refresh: 0,
        }
    }

    pub fn net(&self) -> &Mlp<S> {
        &self.net
    }

    pub fn interval(&self) -> u32 {
        self.interval
    }

    pub fn since_refresh(&self) -> u32 {
        self.since_refresh
    }

    /// Records `elapsed` finished episodes and copies `source` once at least
    /// `interval` have accumulated. Returns whether a copy happened.
    pub fn refresh(&mut self, source: &Mlp<S>, elapsed: u32) -> bool {
        self.since_refresh += elapsed;
        if self.since_refresh >= self.interval {
            self.net.copy_from(source);
            self.since_refresh = 0;
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::numerics::Activation;

    fn net(seed: u64) -> Mlp<f32> {
        Mlp::new(
            &[3, 4, 2],
            Activation::Relu,
            Activation::Identity,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
    }

    #[test]
    fn copies_only_after_interval() {
        let mut c = FrozenQCopy::new(&net(0), 10);
        let live = net(1);
        assert!(!c.refresh(&live, 9));
        assert_eq!(c.net(), &net(0));
        assert!(c.refresh(&live, 1));
        assert_eq!(c.net(), &live);
        assert_eq!(c.since_refresh(), 0);
    }

    #[test]
    fn repeated_refresh_is_idempotent() {
        let mut c = FrozenQCopy::new(&net(0), 1);
        let live = net(2);
        c.refresh(&live, 1);
        let once = c.clone();
        c.refresh(&live, 1);
        assert_eq!(c, once);
    }
}
