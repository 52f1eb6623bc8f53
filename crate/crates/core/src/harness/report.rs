//! Merges finished runs into pooled tables and an artifact manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};
use crate::gridworld::GameId;
use crate::harness::config::ExperimentConfig;
use crate::harness::metrics::{MetricsReport, Rate};
use crate::harness::run::{self, ButtonRow};
use crate::irl::{la_environment_rows, FeatureRewardRow};
use crate::sympathy::Baseline;

pub const MANIFEST_FORMAT: &str = "emote-report";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub kind: String,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub game: GameId,
    pub baseline: Baseline,
    pub seed: u64,
    pub dir: PathBuf,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    /// Files written by the report itself, the manifest included.
    pub artifacts: Vec<Artifact>,
    pub runs: Vec<RunEntry>,
}

/// One row of the pooled (or per-seed) performance table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub game: String,
    pub baseline: String,
    /// Seed for per-seed rows; empty when pooled.
    pub seed: Option<u64>,
    pub seeds: usize,
    pub episodes: u64,
    pub win_rate: f64,
    pub win_pm: f64,
    pub door_rate: Option<f64>,
    pub door_pm: Option<f64>,
    pub harm_rate: Option<f64>,
    pub harm_pm: Option<f64>,
}

impl Table1Row {
    fn of(m: &MetricsReport, seed: Option<u64>) -> Self {
        let split = |r: Option<Rate>| (r.map(|r| r.rate), r.map(|r| r.half_width));
        let (door_rate, door_pm) = split(m.door);
        let (harm_rate, harm_pm) = split(m.harm);
        Self {
            game: m.game.name().into(),
            baseline: m.baseline.name().into(),
            seed,
            seeds: m.seeds.len(),
            episodes: m.episodes,
            win_rate: m.win.rate,
            win_pm: m.win.half_width,
            door_rate,
            door_pm,
            harm_rate,
            harm_pm,
        }
    }
}

pub struct ReportBundle {
    pub pooled: Vec<MetricsReport>,
    pub runs: Vec<(PathBuf, MetricsReport)>,
    pub manifest: Manifest,
}

/// Run directories matched by `pattern`: a match that holds a metrics file,
/// or whose immediate subdirectories do.
pub fn find_runs(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| Error::Config(format!("bad glob {pattern:?}: {e}")))?;
    let mut out = Vec::new();
    for p in paths {
        let p = p.map_err(|e| Error::io(e.path().to_path_buf(), std::io::Error::from(e)))?;
        if p.is_file() && p.file_name().is_some_and(|n| n == run::METRICS_FILE) {
            out.extend(p.parent().map(Path::to_path_buf));
        } else if p.join(run::METRICS_FILE).is_file() {
            out.push(p);
        } else if p.is_dir() {
            let mut sub: Vec<PathBuf> = std::fs::read_dir(&p)
                .map_err(|e| Error::io(&p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|s| s.join(run::METRICS_FILE).is_file())
                .collect();
            sub.sort();
            out.extend(sub);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

const RUN_FILES: [(&str, &str); 11] = [
    ("config", run::CONFIG_FILE),
    ("checkpoint", run::CHECKPOINT_FILE),
    ("run-info", run::RUN_FILE),
    ("training-curve", run::TRAINING_FILE),
    ("training-episodes", run::EPISODES_FILE),
    ("eval-episodes", run::EVAL_EPISODES_FILE),
    ("eval-transitions", run::EVAL_TRANSITIONS_FILE),
    ("metrics", run::METRICS_FILE),
    ("rewards", run::REWARDS_FILE),
    ("button", run::BUTTON_FILE),
    ("empathetic-states", run::STATES_FILE),
];

fn run_entry(dir: &Path, m: &MetricsReport) -> RunEntry {
    RunEntry {
        game: m.game,
        baseline: m.baseline,
        seed: m.seeds.first().copied().unwrap_or(0),
        dir: dir.to_path_buf(),
        artifacts: RUN_FILES
            .iter()
            .filter(|(_, f)| dir.join(f).is_file())
            .map(|(k, f)| Artifact {
                kind: (*k).into(),
                path: dir.join(f),
            })
            .collect(),
    }
}

/// Pools every run matched by `pattern` and writes the bundle into `out`.
pub fn report(pattern: &str, out: &Path) -> Result<ReportBundle> {
    let dirs = find_runs(pattern)?;
    if dirs.is_empty() {
        return Err(Error::Precondition(format!("no completed runs match {pattern:?}")));
    }
    let mut runs = Vec::new();
    let mut groups: BTreeMap<(GameId, Baseline), Vec<MetricsReport>> = BTreeMap::new();
    let mut game_configs = BTreeMap::new();
    for d in dirs {
        let m = run::load_metrics(&d)?;
        if let Ok(text) = std::fs::read_to_string(d.join(run::CONFIG_FILE)) {
            if let Ok(c) = ExperimentConfig::from_toml_str(&text) {
                game_configs.entry(m.game).or_insert_with(|| c.game_config());
            }
        }
        groups.entry((m.game, m.baseline)).or_default().push(m.clone());
        runs.push((d, m));
    }
    let pooled: Vec<MetricsReport> = groups.values().map(|v| MetricsReport::pooled(v)).collect();

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut artifacts = Vec::new();
    let mut emit = |kind: &str, name: &str| {
        let p = out.join(name);
        artifacts.push(Artifact {
            kind: kind.into(),
            path: p.clone(),
        });
        p
    };

    let table1: Vec<Table1Row> = pooled.iter().map(|m| Table1Row::of(m, None)).collect();
    csvio::write(&emit("table1", "table1.csv"), &table1)?;
    let per_seed: Vec<Table1Row> = runs
        .iter()
        .map(|(_, m)| Table1Row::of(m, m.seeds.first().copied()))
        .collect();
    csvio::write(&emit("per-seed", "per_seed.csv"), &per_seed)?;

    let mut rewards: Vec<FeatureRewardRow> = pooled.iter().flat_map(|m| m.rewards.clone()).collect();
    for c in game_configs.values() {
        rewards.extend(la_environment_rows(c));
    }
    csvio::write(&emit("rewards", "rewards.csv"), &rewards)?;

    let table3: Vec<ButtonRow> = pooled
        .iter()
        .filter(|m| m.game.is_adversarial())
        .flat_map(|m| {
            m.button.iter().map(|s| ButtonRow {
                game: m.game.name().into(),
                baseline: m.baseline.name().into(),
                b: s.b,
                mean: s.mean,
                std: s.std,
                n: s.n,
            })
        })
        .collect();
    csvio::write(&emit("table3", "table3.csv"), &table3)?;

    let p = emit("pooled-metrics", "report.json");
    std::fs::write(&p, serde_json::to_string_pretty(&pooled)?).map_err(|e| Error::io(&p, e))?;
    let manifest_path = emit("manifest", "manifest.json");

    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        artifacts,
        runs: runs.iter().map(|(d, m)| run_entry(d, m)).collect(),
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| Error::io(&manifest_path, e))?;
    Ok(ReportBundle { pooled, runs, manifest })
}
