use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emote_core::gridworld::GameId;
use emote_core::harness::{
    dump_states, evaluate, pretrain_independent, report, run_experiment, write_pretrained, ExperimentConfig,
    MetricsReport, PretrainConfig,
};
use emote_core::Error;

#[derive(Parser)]
#[command(
    name = "emote",
    version,
    about = "Empathetic sympathy agents in two-agent gridworlds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pre-train the independent agent of a game.
    Pretrain {
        #[arg(long)]
        game: GameId,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory [default: ia/<game>-seed-<seed>]
        #[arg(long)]
        out: Option<PathBuf>,
        /// TOML file with pre-training settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the number of training episodes.
        #[arg(long)]
        episodes: Option<u64>,
    },
    /// Train and evaluate one baseline for every seed of a config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-evaluate a trained run from its checkpoint.
    Eval {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: u64,
    },
    /// Pool completed runs into tables and a manifest.
    Report {
        /// Glob matching run directories or their parents.
        #[arg(long)]
        runs: String,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Write empathetic states of a trained run as JSON lines.
    DumpStates {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 5)]
        episodes: u64,
        /// Output file [default: <run>/states.jsonl]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn summary(dir: &Path, m: &MetricsReport) -> String {
    let mut s = format!(
        "{} {} {} seed(s) {:?}: win {:.3}±{:.3}",
        dir.display(),
        m.game,
        m.baseline,
        m.seeds,
        m.win.rate,
        m.win.half_width
    );
    if let Some(d) = m.door {
        s += &format!(" door {:.3}±{:.3}", d.rate, d.half_width);
    }
    if let Some(h) = m.harm {
        s += &format!(" harm {:.3}±{:.3}", h.rate, h.half_width);
    }
    s
}

fn run(cli: Cli) -> emote_core::Result<()> {
    match cli.command {
        Command::Pretrain {
            game,
            seed,
            out,
            config,
            episodes,
        } => {
            let mut cfg = match config {
                Some(p) => PretrainConfig::load(&p)?,
                None => PretrainConfig::default(),
            };
            if let Some(n) = episodes {
                cfg.episodes = n;
            }
            let out = out.unwrap_or_else(|| PathBuf::from(format!("ia/{game}-seed-{seed}")));
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let outcome = pretrain_independent(game, seed, &cfg)?;
            write_pretrained(&out, &outcome)?;
            println!("{}", serde_json::to_string(&outcome.summary)?);
        }
        Command::Train { config, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg = cfg.for_seed(s);
            }
            for (dir, m) in run_experiment(&cfg)? {
                println!("{}", summary(&dir, &m));
            }
        }
        Command::Eval { run, episodes } => {
            let m = evaluate(&run, episodes)?;
            println!("{}", summary(&run, &m));
        }
        Command::Report { runs, out } => {
            let bundle = report(&runs, &out)?;
            for m in &bundle.pooled {
                println!("{}", summary(&out, m));
            }
            println!("manifest: {}", out.join("manifest.json").display());
        }
        Command::DumpStates { run, episodes, out } => {
            let n = dump_states(&run, episodes, out.as_deref())?;
            println!("{n} empathetic states written");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
