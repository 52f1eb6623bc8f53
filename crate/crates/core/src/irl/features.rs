use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{Event, EventSet, GameConfig, RewardEvent};

/// Environment features inferred rewards are reported against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    IaPellet,
    LaPellet,
    Step,
    Button,
    Door,
    IaHarmed,
    LaHarmed,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::IaPellet,
        Feature::LaPellet,
        Feature::Step,
        Feature::Button,
        Feature::Door,
        Feature::IaHarmed,
        Feature::LaHarmed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::IaPellet => "ia_pellet",
            Feature::LaPellet => "la_pellet",
            Feature::Step => "step",
            Feature::Button => "button",
            Feature::Door => "door",
            Feature::IaHarmed => "ia_harmed",
            Feature::LaHarmed => "la_harmed",
        }
    }

    /// Features present in a transition's events; `Step` when none apply.
    pub fn of_events(events: EventSet) -> Vec<Feature> {
        let mut out = Vec::new();
        for (e, f) in [
            (Event::IaPellet, Feature::IaPellet),
            (Event::LaPellet, Feature::LaPellet),
            (Event::ButtonPressed, Feature::Button),
            (Event::DoorOpened, Feature::Door),
            (Event::IaHarmed, Feature::IaHarmed),
            (Event::LaHarmed, Feature::LaHarmed),
        ] {
            if events.contains(e) {
                out.push(f);
            }
        }
        if out.is_empty() {
            out.push(Feature::Step);
        }
        out
    }
}

/// An inferred per-transition reward with its episode and event labels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledReward {
    pub episode: u64,
    pub events: EventSet,
    pub reward: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
}

impl FeatureStat {
    /// Order-independent: values are sorted before summation.
    pub fn of(values: &mut [f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        dev.sort_by(f64::total_cmp);
        let std = (dev.iter().sum::<f64>() / n as f64).sqrt();
        Some(Self { mean, std, n })
    }
}

pub type FeatureTable = BTreeMap<Feature, FeatureStat>;

/// Mean inferred reward per feature over the `last_episodes` most recent
/// episodes (highest episode numbers). Features with no samples are omitted.
pub fn feature_reward_report(samples: &[LabeledReward], last_episodes: usize) -> FeatureTable {
    let episodes: BTreeSet<u64> = samples.iter().map(|s| s.episode).collect();
    let keep: BTreeSet<u64> = episodes.iter().rev().take(last_episodes).copied().collect();
    let mut buckets: BTreeMap<Feature, Vec<f64>> = BTreeMap::new();
    for s in samples.iter().filter(|s| keep.contains(&s.episode)) {
        for f in Feature::of_events(s.events) {
            buckets.entry(f).or_default().push(s.reward);
        }
    }
    buckets
        .into_iter()
        .filter_map(|(f, mut v)| FeatureStat::of(&mut v).map(|st| (f, st)))
        .collect()
}

/// The learning agent's own reward for each reportable feature.
pub fn la_feature_rewards(config: &GameConfig) -> BTreeMap<Feature, f64> {
    let mut out = BTreeMap::new();
    for (f, e) in [
        (Feature::LaPellet, RewardEvent::LaPellet),
        (Feature::Step, RewardEvent::Step),
        (Feature::Button, RewardEvent::Button),
        (Feature::IaHarmed, RewardEvent::IaHarmed),
        (Feature::LaHarmed, RewardEvent::LaHarmed),
    ] {
        if let Some(&r) = config.rewards.get(&e) {
            out.insert(f, r);
        }
    }
    out
}

/// The learning agent's reward vector: every entry of its reward table.
pub fn la_reward_vector(config: &GameConfig) -> Vec<f64> {
    config.rewards.values().copied().collect()
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Scale factor `|R_LA|_1 / |r_hat|_1` between two reward vectors.
pub fn l1_scale(inferred: &[f64], la_rewards: &[f64]) -> Result<f64> {
    let (num, den) = (l1_norm(la_rewards), l1_norm(inferred));
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::Degenerate(format!("inferred reward vector has l1 norm {den}")));
    }
    if !(num > 0.0) || !num.is_finite() {
        return Err(Error::Degenerate(format!("learner reward vector has l1 norm {num}")));
    }
    Ok(num / den)
}

/// Rescales `inferred` so its l1 norm matches that of `la_rewards`.
pub fn l1_rescale(inferred: &[f64], la_rewards: &[f64]) -> Result<(Vec<f64>, f64)> {
    let c = l1_scale(inferred, la_rewards)?;
    Ok((inferred.iter().map(|v| v * c).collect(), c))
}

/// One row of a per-feature reward CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRewardRow {
    pub game: String,
    pub baseline: String,
    pub feature: Feature,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Baseline label of the learner's own environment rewards in reward tables.
pub const LA_ENVIRONMENT: &str = "la-environment";

pub fn feature_rows(game: &str, baseline: &str, table: &FeatureTable) -> Vec<FeatureRewardRow> {
    table
        .iter()
        .map(|(&feature, st)| FeatureRewardRow {
            game: game.into(),
            baseline: baseline.into(),
            feature,
            mean: st.mean,
            std: st.std,
            n: st.n,
        })
        .collect()
}

/// Rows for the learner's environment rewards, for side-by-side display.
pub fn la_environment_rows(config: &GameConfig) -> Vec<FeatureRewardRow> {
    la_feature_rewards(config)
        .into_iter()
        .map(|(feature, r)| FeatureRewardRow {
            game: config.game.name().into(),
            baseline: LA_ENVIRONMENT.into(),
            feature,
            mean: r,
            std: 0.0,
            n: 0,
        })
        .collect()
}
