use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dqn::{Learner, QFunction, ReplayBuffer, RewardChannel, TrainingMetricsRow};
use crate::emote::{EmpathyModel, ImaginationNetwork};
use crate::error::{Error, Result};
use crate::gridworld::{Action, Game, GameConfig, OBS_DIM};
use crate::harness::config::ExperimentConfig;
use crate::harness::metrics::{button_stats, MetricsReport};
use crate::harness::pretrain::load_policy;
use crate::irl::{feature_reward_report, feature_rows, la_environment_rows, la_reward_vector, StandaloneQHat};
use crate::jsonl::JsonLinesWriter;
use crate::numerics::Checkpoint;
use crate::sympathy::{
    Baseline, DualQTrainer, EpisodeRow, Estimator, IndependentPolicy, Phase, Recorder, SympathyAgent,
};
use crate::{csvio, Network, Real};

pub const CONFIG_FILE: &str = "config.toml";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const RUN_FILE: &str = "run.json";
pub const TRAINING_FILE: &str = "training.csv";
pub const EPISODES_FILE: &str = "episodes.csv";
pub const EVAL_EPISODES_FILE: &str = "eval_episodes.csv";
pub const EVAL_TRANSITIONS_FILE: &str = "eval_transitions.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const REWARDS_FILE: &str = "rewards.csv";
pub const BUTTON_FILE: &str = "button.csv";
pub const STATES_FILE: &str = "states.jsonl";

/// Random streams of one run. Evaluation streams are independent of training
/// so that re-evaluating a checkpoint reproduces the original evaluation.
mod stream {
    pub const INIT: u64 = 0;
    pub const LA: u64 = 1;
    pub const IA: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const ENV: u64 = 4;
    pub const EVAL_ENV: u64 = 10;
    pub const EVAL_LA: u64 = 11;
    pub const EVAL_IA: u64 = 12;
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Scalars saved next to the checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub game: crate::gridworld::GameId,
    pub baseline: Baseline,
    pub seed: u64,
    pub train_episodes: u64,
    pub selfish_updates: u64,
    pub symp_updates: Option<u64>,
    pub imagination_updates: u64,
    pub csl_scale: Option<f64>,
}

/// One row of the button-status CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ButtonRow {
    pub game: String,
    pub baseline: String,
    pub b: u8,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

fn fresh_agent(cfg: &ExperimentConfig, seed: u64, gc: &GameConfig, ia: Network) -> SympathyAgent<Real> {
    let mut init = rng(seed, stream::INIT);
    let trainer = DualQTrainer::new(
        OBS_DIM,
        Action::COUNT,
        &cfg.dqn,
        gc.gamma,
        cfg.baseline.is_dual(),
        &mut init,
    );
    let estimator = match cfg.baseline {
        Baseline::Selfish => Estimator::Absent,
        Baseline::Sympathy => Estimator::csl(
            StandaloneQHat::new(OBS_DIM, Action::COUNT, &cfg.csl, &mut init),
            &cfg.csl,
            &cfg.csl_training,
            la_reward_vector(gc),
        ),
        b => {
            let model = match (b.variant(), b.benchmark()) {
                (Some(v), _) => EmpathyModel::Learned(ImaginationNetwork::new(v, &cfg.imagination, &mut init)),
                (None, Some(k)) => EmpathyModel::Fixed(k),
                _ => unreachable!("baseline without an empathy model"),
            };
            Estimator::empathy(
                model,
                trainer.selfish().q.online(),
                &cfg.imagination_training,
                cfg.delta,
            )
        }
    };
    assemble(cfg, seed, gc, ia, trainer, estimator)
}

fn assemble(
    cfg: &ExperimentConfig,
    seed: u64,
    gc: &GameConfig,
    ia: Network,
    trainer: DualQTrainer<Real>,
    estimator: Estimator<Real>,
) -> SympathyAgent<Real> {
    SympathyAgent {
        gamma: gc.gamma,
        trainer,
        buffer: ReplayBuffer::new(cfg.dqn.buffer_capacity),
        estimator,
        selfishness: cfg.selfishness,
        independent: IndependentPolicy {
            net: ia,
            epsilon: cfg.ia_epsilon,
        },
        la_rng: rng(seed, stream::LA),
        ia_rng: rng(seed, stream::IA),
        train_rng: rng(seed, stream::TRAIN),
    }
}

fn restored_agent(
    cfg: &ExperimentConfig,
    info: &RunInfo,
    gc: &GameConfig,
    ia: Network,
    ckpt: &Checkpoint<Real>,
) -> Result<SympathyAgent<Real>> {
    let learner = |online: &str, target: &str, channel| -> Result<Learner<Real>> {
        let q = QFunction::from_parts(ckpt.get(online)?.clone(), ckpt.get(target)?.clone());
        Ok(Learner::from_q(q, &cfg.dqn, gc.gamma, channel))
    };
    let selfish = learner("q_selfish", "q_selfish_target", RewardChannel::Environment)?;
    let symp = if cfg.baseline.is_dual() {
        Some(learner("q_symp", "q_symp_target", RewardChannel::Sympathetic)?)
    } else {
        None
    };
    let trainer = DualQTrainer::from_learners(selfish, symp);
    let mut estimator = match cfg.baseline {
        Baseline::Selfish => Estimator::Absent,
        Baseline::Sympathy => Estimator::csl(
            StandaloneQHat::from_network(ckpt.get("csl_qhat")?.clone(), &cfg.csl),
            &cfg.csl,
            &cfg.csl_training,
            la_reward_vector(gc),
        ),
        b => {
            let model = match (b.variant(), b.benchmark()) {
                (Some(v), _) => EmpathyModel::Learned(ImaginationNetwork::load(v, ckpt)?),
                (None, Some(k)) => EmpathyModel::Fixed(k),
                _ => unreachable!("baseline without an empathy model"),
            };
            Estimator::empathy(model, ckpt.get("q_copy")?, &cfg.imagination_training, cfg.delta)
        }
    };
    if let Some(k) = info.csl_scale {
        estimator.set_csl_scale(k);
    }
    Ok(assemble(cfg, info.seed, gc, ia, trainer, estimator))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Trains and evaluates every seed of `cfg`. Returns per-seed run directories
/// and reports.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<(PathBuf, MetricsReport)>> {
    cfg.validate()?;
    let ia = load_policy(&cfg.ia_checkpoint)?;
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let dir = cfg.run_dir(seed);
        let report = train_seed(cfg, seed, ia.clone(), &dir)?;
        out.push((dir, report));
    }
    Ok(out)
}

/// Trains one seed into `dir`, then evaluates it.
pub fn train_seed(cfg: &ExperimentConfig, seed: u64, ia: Network, dir: &Path) -> Result<MetricsReport> {
    let gc = cfg.game_config();
    let game = Game::new(gc.clone())?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let single = cfg.for_seed(seed);
    let p = dir.join(CONFIG_FILE);
    std::fs::write(&p, single.to_toml_string()).map_err(|e| Error::io(&p, e))?;

    let mut agent = fresh_agent(cfg, seed, &gc, ia);
    let mut env = rng(seed, stream::ENV);
    let mut rows = Vec::with_capacity(cfg.train_episodes as usize);
    let mut curve = Vec::with_capacity(cfg.train_episodes as usize);
    for episode in 0..cfg.train_episodes {
        let mut world = game.reset(env.gen())?;
        let mut rec = Recorder::default();
        let row = agent.play(&mut world, episode, Phase::Train, &mut rec)?;
        curve.push(TrainingMetricsRow {
            step: agent.trainer.acting().steps(),
            loss: row.loss_symp.or(row.loss_selfish),
            epsilon: agent.trainer.epsilon(),
            episodic_return: row.return_env,
        });
        if (episode + 1) % 250 == 0 {
            log::info!(
                "{} {} seed {seed}: episode {} return {:.1} win {}",
                cfg.game,
                cfg.baseline,
                episode + 1,
                row.return_env,
                row.win
            );
        }
        rows.push(row);
    }
    csvio::write(&dir.join(EPISODES_FILE), &rows)?;
    csvio::write(&dir.join(TRAINING_FILE), &curve)?;

    let info = RunInfo {
        game: cfg.game,
        baseline: cfg.baseline,
        seed,
        train_episodes: cfg.train_episodes,
        selfish_updates: agent.trainer.selfish().updates(),
        symp_updates: agent.trainer.symp().map(|l| l.updates()),
        imagination_updates: agent.estimator.imagination_updates(),
        csl_scale: agent.estimator.csl_scale(),
    };
    let ckpt = agent.estimator.store(agent.trainer.store(Checkpoint::default()));
    ckpt.save(&dir.join(CHECKPOINT_FILE))?;
    write_json(&dir.join(RUN_FILE), &info)?;
    evaluate_agent(&mut agent, &single, seed, cfg.eval_episodes, dir)
}

/// Loads a run directory's config, run info and restored agent.
fn load_run(dir: &Path) -> Result<(ExperimentConfig, RunInfo, SympathyAgent<Real>)> {
    let cfg_path = dir.join(CONFIG_FILE);
    let ckpt_path = dir.join(CHECKPOINT_FILE);
    if !cfg_path.is_file() || !ckpt_path.is_file() {
        return Err(Error::Precondition(format!(
            "{} is not a completed run directory",
            dir.display()
        )));
    }
    let text = std::fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    let info: RunInfo = read_json(&dir.join(RUN_FILE))?;
    let ia = load_policy(&cfg.ia_checkpoint)?;
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let agent = restored_agent(&cfg, &info, &cfg.game_config(), ia, &ckpt)?;
    Ok((cfg, info, agent))
}

/// Re-evaluates a completed run from its checkpoint, rewriting its
/// evaluation artifacts.
pub fn evaluate(dir: &Path, episodes: u64) -> Result<MetricsReport> {
    if episodes == 0 {
        return Err(Error::Config("evaluation needs at least one episode".into()));
    }
    let (cfg, info, mut agent) = load_run(dir)?;
    evaluate_agent(&mut agent, &cfg, info.seed, episodes, dir)
}

fn eval_rngs(agent: &mut SympathyAgent<Real>, seed: u64) -> ChaCha8Rng {
    agent.la_rng = rng(seed, stream::EVAL_LA);
    agent.ia_rng = rng(seed, stream::EVAL_IA);
    rng(seed, stream::EVAL_ENV)
}

fn evaluate_agent(
    agent: &mut SympathyAgent<Real>,
    cfg: &ExperimentConfig,
    seed: u64,
    episodes: u64,
    dir: &Path,
) -> Result<MetricsReport> {
    let gc = cfg.game_config();
    let game = Game::new(gc.clone())?;
    let mut env = eval_rngs(agent, seed);
    let phase = Phase::Eval {
        epsilon: cfg.eval.epsilon,
    };
    let empathy = cfg.baseline.uses_empathy();
    let mut rec = Recorder::default();
    let mut rows: Vec<EpisodeRow> = Vec::with_capacity(episodes as usize);
    let mut transitions = JsonLinesWriter::create(&dir.join(EVAL_TRANSITIONS_FILE))?;
    let mut states = if empathy {
        Some(JsonLinesWriter::create(&dir.join(STATES_FILE))?)
    } else {
        None
    };
    for episode in 0..episodes {
        rec.keep_transitions = episode < cfg.eval.log_episodes;
        rec.keep_dumps = empathy && episode < cfg.eval.dump_episodes;
        let mut world = game.reset(env.gen())?;
        rows.push(agent.play(&mut world, episode, phase, &mut rec)?);
        for t in rec.transitions.drain(..) {
            transitions.write(&t)?;
        }
        if let Some(w) = states.as_mut() {
            for d in rec.dumps.drain(..) {
                w.write(&d)?;
            }
        }
    }
    transitions.finish()?;
    if let Some(w) = states {
        w.finish()?;
    }

    let mut report = MetricsReport::from_episodes(cfg.game, cfg.baseline, seed, &rows);
    if rec.agreement.1 > 0 {
        report.action_agreement = Some(rec.agreement.0 as f64 / rec.agreement.1 as f64);
    }
    let (game_name, baseline_name) = (cfg.game.name(), cfg.baseline.name());
    if !agent.estimator.is_absent() {
        let table = feature_reward_report(&rec.rewards, cfg.eval.reward_episodes);
        report.rewards = feature_rows(game_name, baseline_name, &table);
    }
    if empathy {
        report.button = button_stats(&rec.button);
    }

    csvio::write(&dir.join(EVAL_EPISODES_FILE), &rows)?;
    let mut reward_rows = report.rewards.clone();
    reward_rows.extend(la_environment_rows(&gc));
    csvio::write(&dir.join(REWARDS_FILE), &reward_rows)?;
    if empathy {
        let button: Vec<ButtonRow> = report
            .button
            .iter()
            .map(|s| ButtonRow {
                game: game_name.into(),
                baseline: baseline_name.into(),
                b: s.b,
                mean: s.mean,
                std: s.std,
                n: s.n,
            })
            .collect();
        csvio::write(&dir.join(BUTTON_FILE), &button)?;
    }
    write_json(&dir.join(METRICS_FILE), &report)?;
    Ok(report)
}

/// Writes the empathetic states of `episodes` evaluation episodes to `out`
/// (default: the run's `states.jsonl`). Returns the number of records.
pub fn dump_states(dir: &Path, episodes: u64, out: Option<&Path>) -> Result<usize> {
    let (cfg, info, mut agent) = load_run(dir)?;
    if !cfg.baseline.uses_empathy() {
        return Err(Error::Precondition(format!(
            "baseline {} has no empathetic states",
            cfg.baseline
        )));
    }
    let game = Game::new(cfg.game_config())?;
    let mut env = eval_rngs(&mut agent, info.seed);
    let phase = Phase::Eval {
        epsilon: cfg.eval.epsilon,
    };
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join(STATES_FILE));
    let mut w = JsonLinesWriter::create(&path)?;
    let mut rec = Recorder {
        keep_dumps: true,
        ..Recorder::default()
    };
    let mut n = 0;
    for episode in 0..episodes {
        let mut world = game.reset(env.gen())?;
        agent.play(&mut world, episode, phase, &mut rec)?;
        for d in rec.dumps.drain(..) {
            w.write(&d)?;
            n += 1;
        }
    }
    w.finish()?;
    Ok(n)
}

/// Reads a run's metrics.
pub fn load_metrics(dir: &Path) -> Result<MetricsReport> {
    read_json(&dir.join(METRICS_FILE))
}
