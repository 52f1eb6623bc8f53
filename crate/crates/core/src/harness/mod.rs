//! Experiment orchestration: independent-agent pre-training, training and
//! evaluation of each baseline, and pooled reports.

pub mod config;
pub mod metrics;
pub mod pretrain;
pub mod report;
pub mod run;

pub use config::{default_dqn, EvalConfig, ExperimentConfig, PretrainConfig};
pub use metrics::{button_stats, pool_stats, ButtonStat, MetricsReport, Rate};
pub use pretrain::{load_policy, pretrain_independent, write_pretrained, PretrainOutcome, PretrainSummary};
pub use report::{find_runs, report, Manifest, ReportBundle, Table1Row};
pub use run::{dump_states, evaluate, load_metrics, run_experiment, train_seed, RunInfo};
