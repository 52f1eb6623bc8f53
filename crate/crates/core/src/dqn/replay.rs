use rand::seq::index;
use rand::Rng;

/// Which stored reward a TD update regresses on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RewardChannel {
    /// Reward returned by the environment.
    Environment = 0,
    /// Sympathetic composite reward.
    Sympathetic = 1,
}

/// Encoded transition held in replay.
///
/// Both reward channels are stored side by side so one buffer can feed two
/// learners; `next_obs` is `None` for terminal transitions.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S> {
    pub obs: Vec<S>,
    pub action: usize,
    pub rewards: [S; 2],
    pub next_obs: Option<Vec<S>>,
}

impl<S: Copy> Transition<S> {
    /// Transition with the same value on both reward channels.
    pub fn new(obs: Vec<S>, action: usize, reward: S, next_obs: Option<Vec<S>>) -> Self {
        Self {
            obs,
            action,
            rewards: [reward, reward],
            next_obs,
        }
    }

    pub fn reward(&self, channel: RewardChannel) -> S {
        self.rewards[channel as usize]
    }

    pub fn is_terminal(&self) -> bool {
        self.next_obs.is_none()
    }
}

/// Fixed-capacity ring buffer.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    items: Vec<T>,
    capacity: usize,
    cursor: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Inserts, overwriting the oldest item once full.
    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.cursor] = item;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> &T {
        &self.items[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// Storage slots of `batch` distinct items, uniformly at random.
    /// `None` when fewer than `batch` items are stored.
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R, batch: usize) -> Option<Vec<usize>> {
        if batch == 0 || self.items.len() < batch {
            return None;
        }
        Some(index::sample(rng, self.items.len(), batch).into_vec())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, batch: usize) -> Option<Vec<&T>> {
        self.sample_indices(rng, batch)
            .map(|ix| ix.into_iter().map(|i| &self.items[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn ring_overwrites_oldest() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(i);
        }
        assert_eq!(b.len(), 3);
        let mut v: Vec<_> = b.iter().copied().collect();
        v.sort();
        assert_eq!(v, vec![2, 3, 4]);
    }

    #[test]
    fn underfilled_buffer_gives_skip_signal() {
        let mut b = ReplayBuffer::new(10);
        b.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(b.sample(&mut rng, 2).is_none());
        assert!(b.sample(&mut rng, 0).is_none());
        assert_eq!(b.sample(&mut rng, 1).unwrap(), vec![&1]);
    }

    #[test]
    fn batch_has_no_repeats() {
        let mut b = ReplayBuffer::new(100);
        for i in 0..100 {
            b.push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut s = b.sample_indices(&mut rng, 64).unwrap();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), 64);
        }
    }

    #[test]
    fn reward_channels() {
        let mut t = Transition::new(vec![0.0f32], 2, 1.0, None);
        t.rewards[RewardChannel::Sympathetic as usize] = 0.5;
        assert_eq!(t.reward(RewardChannel::Environment), 1.0);
        assert_eq!(t.reward(RewardChannel::Sympathetic), 0.5);
        assert!(t.is_terminal());
    }
}
