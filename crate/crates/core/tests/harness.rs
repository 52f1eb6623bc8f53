use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use emote_core::gridworld::GameId;
use emote_core::harness::{
    evaluate, pretrain_independent, report, run_experiment, write_pretrained, ExperimentConfig, MetricsReport,
    PretrainConfig,
};
use emote_core::numerics::Checkpoint;
use emote_core::sympathy::{Baseline, EpisodeRow};
use emote_core::{csvio, Real};

fn pretrained(dir: &Path, game: GameId) -> PathBuf {
    let cfg = PretrainConfig {
        episodes: 4,
        eval_episodes: 2,
        ..Default::default()
    };
    let out = pretrain_independent(game, 3, &cfg).unwrap();
    std::fs::create_dir_all(dir).unwrap();
    write_pretrained(dir, &out).unwrap();
    dir.join("policy.json")
}

fn config(root: &Path, game: GameId, baseline: Baseline, name: &str) -> ExperimentConfig {
    let ia = pretrained(&root.join(format!("ia-{game}")), game);
    let mut c = ExperimentConfig::new(game, baseline, root.join(name), ia);
    c.seeds = vec![5];
    c.train_episodes = 6;
    c.eval_episodes = 4;
    c.dqn.learning_starts = 30;
    c.dqn.batch_size = 8;
    c.imagination_training.warmup_updates = 10;
    c.imagination_training.batch_size = 8;
    c.csl_training.rescale_episodes = 2;
    c.csl.batch_size = 8;
    c
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn reruns_are_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    for baseline in [Baseline::EFeature, Baseline::Sympathy] {
        let c = config(tmp.path(), GameId::Adversarial1, baseline, baseline.name());
        let dir = run_experiment(&c).unwrap().remove(0).0;
        let first = snapshot(&dir);
        run_experiment(&c).unwrap();
        let second = snapshot(&dir);
        assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
        for (name, bytes) in &first {
            assert!(bytes == &second[name], "{baseline}: {name} differs between runs");
        }
    }
}

#[test]
fn re_evaluation_reproduces_online_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), GameId::Assistive1, Baseline::BVis, "bvis");
    let (dir, online) = run_experiment(&c).unwrap().remove(0);
    let written = std::fs::read(dir.join("metrics.json")).unwrap();
    let offline = evaluate(&dir, c.eval_episodes).unwrap();
    assert_eq!(offline, online);
    assert_eq!(std::fs::read(dir.join("metrics.json")).unwrap(), written);
}

#[test]
fn metrics_are_recomputable_from_episode_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), GameId::Adversarial1, Baseline::Selfish, "selfish");
    let (dir, online) = run_experiment(&c).unwrap().remove(0);
    let rows: Vec<EpisodeRow> = csvio::read(&dir.join("eval_episodes.csv")).unwrap();
    let offline = MetricsReport::from_episodes(c.game, c.baseline, 5, &rows);
    assert_eq!(offline.win, online.win);
    assert_eq!(offline.harm, online.harm);
    assert_eq!(offline.door, online.door);
    assert_eq!(offline.la_harmed, online.la_harmed);
    assert_eq!(offline.mean_return_env, online.mean_return_env);
}

#[test]
fn selfish_runs_have_no_imagination_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), GameId::Assistive1, Baseline::Selfish, "selfish");
    let (dir, m) = run_experiment(&c).unwrap().remove(0);
    assert!(!dir.join("states.jsonl").exists());
    assert!(!dir.join("button.csv").exists());
    assert!(m.rewards.is_empty() && m.button.is_empty() && m.action_agreement.is_none());
    let ckpt = Checkpoint::<Real>::load(&dir.join("checkpoint.json")).unwrap();
    let names: Vec<&str> = ckpt.networks.keys().map(String::as_str).collect();
    assert_eq!(names, ["q_selfish", "q_selfish_target"]);
}

#[test]
fn empathy_runs_dump_states_and_button_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), GameId::Adversarial2, Baseline::EImage, "eimage");
    let (dir, m) = run_experiment(&c).unwrap().remove(0);
    let states = std::fs::read_to_string(dir.join("states.jsonl")).unwrap();
    assert!(states.lines().count() > 0);
    assert!(!m.button.is_empty());
    assert!(m.action_agreement.is_some());
    let ckpt = Checkpoint::<Real>::load(&dir.join("checkpoint.json")).unwrap();
    for name in ["q_selfish", "q_symp", "q_copy"] {
        assert!(ckpt.networks.contains_key(name), "{name}");
    }
}

#[test]
fn visible_and_feature_baselines_differ_only_in_the_tag() {
    let tmp = tempfile::tempdir().unwrap();
    let ia = pretrained(&tmp.path().join("ia"), GameId::Assistive1);
    let a = ExperimentConfig::new(GameId::Assistive1, Baseline::EFeature, "o".into(), ia.clone());
    let b = ExperimentConfig {
        baseline: Baseline::BVis,
        ..a.clone()
    };
    let la = a.to_toml_string();
    let lb = b.to_toml_string();
    let diff: Vec<(&str, &str)> = la.lines().zip(lb.lines()).filter(|(x, y)| x != y).collect();
    assert_eq!(diff, [("baseline = \"e-feature\"", "baseline = \"b-vis\"")]);
}

#[test]
fn report_pools_seeds_and_lists_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path(), GameId::Adversarial1, Baseline::EFeature, "efeature");
    c.seeds = vec![1, 2];
    let runs = run_experiment(&c).unwrap();
    let out = tmp.path().join("report");
    let pattern = format!("{}/seed-*", c.output_dir.display());
    let bundle = report(&pattern, &out).unwrap();
    assert_eq!(bundle.pooled.len(), 1);
    let pooled = &bundle.pooled[0];
    let harm: Vec<f64> = runs.iter().map(|r| r.1.harm.unwrap().rate).collect();
    let n: Vec<f64> = runs.iter().map(|r| r.1.episodes as f64).collect();
    let weighted = (harm[0] * n[0] + harm[1] * n[1]) / (n[0] + n[1]);
    assert!((pooled.harm.unwrap().rate - weighted).abs() < 1e-12);
    assert_eq!(pooled.seeds, vec![1, 2]);

    for a in &bundle.manifest.artifacts {
        assert!(a.path.is_file(), "{}", a.path.display());
    }
    let listed: Vec<&str> = bundle
        .manifest
        .artifacts
        .iter()
        .map(|a| a.path.file_name().unwrap().to_str().unwrap())
        .collect();
    let mut on_disk: Vec<String> = snapshot(&out).into_keys().collect();
    on_disk.sort();
    let mut listed_sorted: Vec<String> = listed.iter().map(|s| s.to_string()).collect();
    listed_sorted.sort();
    assert_eq!(listed_sorted, on_disk);
    assert_eq!(bundle.manifest.runs.len(), 2);
    for r in &bundle.manifest.runs {
        assert!(r.artifacts.iter().any(|a| a.kind == "empathetic-states"));
    }

    let single = report(
        &format!("{}/seed-1", c.output_dir.display()),
        &tmp.path().join("single"),
    )
    .unwrap();
    assert_eq!(single.pooled[0].win, runs[0].1.win);
    assert_eq!(single.pooled[0].harm, runs[0].1.harm);
}
