//! Reward extraction from action-value estimates.

pub mod bellman;
pub mod csl;
pub mod features;

pub use bellman::{bellman_invert, invert_one, ActionValues, InversionStep};
pub use csl::{CslConfig, StandaloneQHat};
pub use features::{
    feature_reward_report, feature_rows, l1_norm, l1_rescale, l1_scale, la_environment_rows, la_feature_rewards,
    la_reward_vector, Feature, FeatureRewardRow, FeatureStat, FeatureTable, LabeledReward, LA_ENVIRONMENT,
};
