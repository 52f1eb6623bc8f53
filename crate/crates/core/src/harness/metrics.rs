use serde::{Deserialize, Serialize};

use crate::gridworld::GameId;
use crate::irl::{Feature, FeatureRewardRow, FeatureStat};
use crate::sympathy::{Baseline, EpisodeRow};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// A binomial rate with its normal-approximation 95% half width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: u64,
    pub n: u64,
    pub rate: f64,
    pub half_width: f64,
}

impl Rate {
    pub fn new(successes: u64, n: u64) -> Self {
        assert!(n > 0 && successes <= n, "rate needs 0 <= successes <= n, n > 0");
        let p = successes as f64 / n as f64;
        Self {
            successes,
            n,
            rate: p,
            half_width: Z95 * (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    /// Episode-weighted merge.
    pub fn pooled(rates: &[Rate]) -> Self {
        let s = rates.iter().map(|r| r.successes).sum();
        let n = rates.iter().map(|r| r.n).sum();
        Self::new(s, n)
    }

    pub fn of(rows: &[EpisodeRow], f: impl Fn(&EpisodeRow) -> bool) -> Self {
        Self::new(rows.iter().filter(|r| f(r)).count() as u64, rows.len() as u64)
    }
}

/// Mean and population standard deviation of predicted button status,
/// grouped by the true status `b` of `s_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ButtonStat {
    pub b: u8,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Merges (mean, std, n) summaries as if all samples were pooled.
pub fn pool_stats(parts: &[FeatureStat]) -> Option<FeatureStat> {
    let n: usize = parts.iter().map(|p| p.n).sum();
    if n == 0 {
        return None;
    }
    let mean = parts.iter().map(|p| p.mean * p.n as f64).sum::<f64>() / n as f64;
    let second = parts
        .iter()
        .map(|p| (p.std * p.std + p.mean * p.mean) * p.n as f64)
        .sum::<f64>()
        / n as f64;
    Some(FeatureStat {
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
        n,
    })
}

pub fn button_stats(samples: &[(bool, f64)]) -> Vec<ButtonStat> {
    let mut out = Vec::new();
    for b in [false, true] {
        let mut v: Vec<f64> = samples.iter().filter(|s| s.0 == b).map(|s| s.1).collect();
        if let Some(st) = FeatureStat::of(&mut v) {
            out.push(ButtonStat {
                b: u8::from(b),
                mean: st.mean,
                std: st.std,
                n: st.n,
            });
        }
    }
    out
}

/// Evaluation metrics of one run, or of several runs pooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub game: GameId,
    pub baseline: Baseline,
    pub seeds: Vec<u64>,
    pub episodes: u64,
    pub win: Rate,
    /// Assistive games: the button was pressed at least once.
    pub door: Option<Rate>,
    /// Adversarial games: the learner harmed the independent agent.
    pub harm: Option<Rate>,
    /// The independent agent harmed the learner.
    pub la_harmed: Rate,
    pub mean_return_env: f64,
    /// Fraction of independent moves matched by the greedy `Q_indep` action.
    pub action_agreement: Option<f64>,
    pub rewards: Vec<FeatureRewardRow>,
    pub button: Vec<ButtonStat>,
}

impl MetricsReport {
    /// Episode-derived fields; reward and button tables start empty.
    pub fn from_episodes(game: GameId, baseline: Baseline, seed: u64, rows: &[EpisodeRow]) -> Self {
        let adversarial = game.is_adversarial();
        Self {
            game,
            baseline,
            seeds: vec![seed],
            episodes: rows.len() as u64,
            win: Rate::of(rows, |r| r.win),
            door: (!adversarial).then(|| Rate::of(rows, |r| r.door_opened)),
            harm: adversarial.then(|| Rate::of(rows, |r| r.ia_harmed)),
            la_harmed: Rate::of(rows, |r| r.harmed),
            mean_return_env: rows.iter().map(|r| r.return_env).sum::<f64>() / rows.len() as f64,
            action_agreement: None,
            rewards: Vec::new(),
            button: Vec::new(),
        }
    }

    /// Merges runs of the same game and baseline. Panics on an empty slice or
    /// mixed cells.
    pub fn pooled(parts: &[MetricsReport]) -> Self {
        let first = parts.first().expect("nothing to pool");
        assert!(
            parts
                .iter()
                .all(|p| p.game == first.game && p.baseline == first.baseline),
            "pooling different games or baselines"
        );
        let rates = |f: &dyn Fn(&MetricsReport) -> Option<Rate>| -> Option<Rate> {
            let v: Vec<Rate> = parts.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| Rate::pooled(&v))
        };
        let episodes: u64 = parts.iter().map(|p| p.episodes).sum();
        let agreement: Vec<(f64, u64)> = parts
            .iter()
            .filter_map(|p| p.action_agreement.map(|a| (a, p.episodes)))
            .collect();
        let mut seeds: Vec<u64> = parts.iter().flat_map(|p| p.seeds.iter().copied()).collect();
        seeds.sort_unstable();
        Self {
            game: first.game,
            baseline: first.baseline,
            seeds,
            episodes,
            win: rates(&|p| Some(p.win)).unwrap(),
            door: rates(&|p| p.door),
            harm: rates(&|p| p.harm),
            la_harmed: rates(&|p| Some(p.la_harmed)).unwrap(),
            mean_return_env: parts.iter().map(|p| p.mean_return_env * p.episodes as f64).sum::<f64>() / episodes as f64,
            action_agreement: (!agreement.is_empty()).then(|| {
                let w: u64 = agreement.iter().map(|a| a.1).sum();
                agreement.iter().map(|a| a.0 * a.1 as f64).sum::<f64>() / w as f64
            }),
            rewards: pool_rewards(parts),
            button: pool_button(parts),
        }
    }

    pub fn reward(&self, feature: Feature) -> Option<&FeatureRewardRow> {
        self.rewards.iter().find(|r| r.feature == feature)
    }

    pub fn button_mean(&self, b: u8) -> Option<f64> {
        self.button.iter().find(|s| s.b == b).map(|s| s.mean)
    }
}

fn pool_rewards(parts: &[MetricsReport]) -> Vec<FeatureRewardRow> {
    let mut keys: Vec<Feature> = parts.iter().flat_map(|p| p.rewards.iter().map(|r| r.feature)).collect();
    keys.sort();
    keys.dedup();
    let first = &parts[0];
    keys.into_iter()
        .filter_map(|k| {
            let stats: Vec<FeatureStat> = parts
                .iter()
                .flat_map(|p| p.rewards.iter().filter(|r| r.feature == k))
                .map(|r| FeatureStat {
                    mean: r.mean,
                    std: r.std,
                    n: r.n,
                })
                .collect();
            pool_stats(&stats).map(|s| FeatureRewardRow {
                game: first.game.name().to_string(),
                baseline: first.baseline.name().to_string(),
                feature: k,
                mean: s.mean,
                std: s.std,
                n: s.n,
            })
        })
        .collect()
}

fn pool_button(parts: &[MetricsReport]) -> Vec<ButtonStat> {
    let mut out = Vec::new();
    for b in [0u8, 1] {
        let stats: Vec<FeatureStat> = parts
            .iter()
            .flat_map(|p| p.button.iter().filter(|s| s.b == b))
            .map(|s| FeatureStat {
                mean: s.mean,
                std: s.std,
                n: s.n,
            })
            .collect();
        if let Some(s) = pool_stats(&stats) {
            out.push(ButtonStat {
                b,
                mean: s.mean,
                std: s.std,
                n: s.n,
            });
        }
    }
    out
}
