//! `windfarm`: one entry point for every experiment step.
//!
//! Exit status: 0 on success, 2 on configuration errors, 1 otherwise.
//! Log verbosity comes from `WINDFARM_LOG` (e.g. `WINDFARM_LOG=debug`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use windfarm_core::experiments::{
    self, load_policy, load_predictor, write_trace, Controller, ExperimentConfig, InferenceSession, Profile,
};
use windfarm_core::{Error, Result};

#[derive(Parser)]
#[command(name = "windfarm", version, about = "Multi-agent wind farm training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config; profile defaults fill anything missing.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "runs/out")]
    out: PathBuf,
    /// Run only this seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel workers (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "desk")]
    profile: String,
    /// Dotted overrides applied last, e.g. `--set ppo.epsilon=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let profile: Profile = self.profile.parse()?;
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seeds=[{seed}]"));
        }
        profile.resolve(self.config.as_deref(), &overrides)
    }

    fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate wind data and train the frozen predictor.
    GnnTrain(Common),
    /// Train one policy per seed.
    Train(Common),
    /// Evaluate trained checkpoints.
    Infer {
        #[command(flatten)]
        common: Common,
        /// A checkpoint directory or a training run directory.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Also write a per-step CSV trace of the first repeat.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate across farm sizes.
    Scale {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Train and evaluate over neighbour counts.
    Sweep(Common),
    /// Summarise every run directory under `--out`.
    Report(Common),
    /// Stream a live inference session over WebSocket.
    Serve {
        #[command(flatten)]
        common: Common,
        /// Checkpoint directory; without it the scripted policy drives.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = windfarm_server::DEFAULT_PORT)]
        port: u16,
    },
}

fn write_echo(out: &Path, cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("config.toml");
    std::fs::write(&path, cfg.to_toml()?).map_err(|e| Error::io(&path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GnnTrain(c) => {
            let cfg = c.resolve()?;
            let (_, meta, report) = experiments::train_gnn(&cfg, &c.out)?;
            log::info!(
                "predictor: {} samples, held-out angular error {:.3} deg vs persistence {:.3} deg ({:.1}% better)",
                meta.samples,
                report.held_out_angular_error,
                report.persistence_angular_error,
                100.0 * report.gain()
            );
        }
        Command::Train(c) => {
            let cfg = c.resolve()?;
            let (summary, _) = experiments::run_training(&cfg, &c.out, c.jobs())?;
            for (seed, (r, s)) in summary
                .seeds
                .iter()
                .zip(summary.final_rewards.iter().zip(&summary.convergence_steps))
            {
                log::info!("seed {seed}: final reward {r:.2}, convergence step {s}");
            }
        }
        Command::Infer {
            common,
            checkpoint,
            trace,
        } => {
            let cfg = common.resolve()?;
            write_echo(&common.out, &cfg)?;
            let rows = experiments::run_inference(&cfg, &checkpoint, &common.out, common.jobs())?;
            if let Some(path) = trace {
                let (policy, meta) = load_first_policy(&checkpoint)?;
                let mut session = InferenceSession::for_repeat(
                    &cfg,
                    cfg.layout.build()?,
                    load_predictor(&cfg)?,
                    Controller::Policy {
                        policy: Arc::new(policy),
                        stochastic: cfg.inference.stochastic,
                    },
                    meta,
                    0,
                )?;
                write_trace(&mut session, cfg.inference.steps.min(cfg.episode_length), &path)?;
            }
            log::info!("{} inference rows written", rows.len());
        }
        Command::Scale { common, checkpoint } => {
            let cfg = common.resolve()?;
            write_echo(&common.out, &cfg)?;
            for r in experiments::run_scaling(&cfg, &checkpoint, &common.out, common.jobs())? {
                log::info!("{} turbines: {:.2} ± {:.2}", r.turbines, r.mean_reward, r.std_reward);
            }
        }
        Command::Sweep(c) => {
            let cfg = c.resolve()?;
            write_echo(&c.out, &cfg)?;
            for r in experiments::run_neighbour_sweep(&cfg, &c.out, c.jobs())? {
                log::info!(
                    "k={}: {:.2} ± {:.2}, comm {:.1}",
                    r.neighbours,
                    r.mean_reward,
                    r.std_reward,
                    r.mean_comm_count
                );
            }
        }
        Command::Report(c) => {
            let rows = experiments::write_report(&c.out)?;
            log::info!(
                "report over {} runs written to {}",
                rows.len(),
                c.out.join("report.md").display()
            );
        }
        Command::Serve {
            common,
            checkpoint,
            port,
        } => {
            let cfg = common.resolve()?;
            let controller = match &checkpoint {
                Some(dir) => Controller::Policy {
                    policy: Arc::new(load_first_policy(dir)?.0),
                    stochastic: cfg.inference.stochastic,
                },
                None => Controller::Oracle,
            };
            let seed = cfg.seeds[0];
            windfarm_server::run_blocking(windfarm_server::ServeOptions {
                config: cfg,
                controller,
                seed,
                port,
            })?;
        }
    }
    Ok(())
}

/// The checkpoint itself, or the lowest seed of a training run directory.
fn load_first_policy(dir: &Path) -> Result<(windfarm_core::ppo::PolicyNet, u64)> {
    let target = if dir.join("policy.bin").is_file() {
        dir.to_path_buf()
    } else {
        let mut seeds: Vec<(u64, PathBuf)> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let seed = e.file_name().to_str()?.strip_prefix("seed-")?.parse().ok()?;
                Some((seed, e.path()))
            })
            .collect();
        seeds.sort();
        seeds
            .into_iter()
            .next()
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Config(format!("no checkpoint under {}", dir.display())))?
    };
    let (policy, meta) = load_policy(&target)?;
    Ok((policy, meta.seed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WINDFARM_LOG", "info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
