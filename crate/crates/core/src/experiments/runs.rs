use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::io::write_inference;
use super::{
    detect_convergence, evaluate, load_policy, save_policy, write_episodes, write_metrics, Controller,
    ExperimentConfig, InferenceRow, PolicyMeta, SetupEnv, SetupKind, CONVERGENCE_WINDOW,
};
use crate::farm_env::FarmLayout;
use crate::ppo::{train_loop, EpisodeRecord, TrainOutcome};
use crate::predictor::{self, PredictorMeta, PredictorNet, TrainReport};
use crate::{Error, Result};

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Maps `f` over `items` on up to `jobs` threads; results keep input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<Result<R>>> = (0..items.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every item processed")).collect()
}

/// Loads the frozen predictor a communicating setup needs.
pub fn load_predictor(cfg: &ExperimentConfig) -> Result<Option<Arc<PredictorNet>>> {
    if !cfg.setup.communicates() {
        return Ok(None);
    }
    let path = cfg.predictor.as_ref().ok_or_else(|| {
        Error::Config(format!(
            "setup {} needs a predictor checkpoint (set `predictor`)",
            cfg.setup
        ))
    })?;
    if !path.is_file() {
        return Err(Error::Config(format!(
            "predictor checkpoint {} not found",
            path.display()
        )));
    }
    let (net, _) = predictor::load(path)?;
    Ok(Some(Arc::new(net)))
}

/// Generates the offline dataset, trains and saves the predictor into `out`.
pub fn train_gnn(cfg: &ExperimentConfig, out: &Path) -> Result<(PredictorNet, PredictorMeta, TrainReport)> {
    create_dir(out)?;
    let layouts = cfg
        .gnn
        .turbine_counts
        .iter()
        .map(|&n| FarmLayout::grid(n))
        .collect::<Result<Vec<_>>>()?;
    let dataset = predictor::generate_dataset(&layouts, &cfg.wind, &cfg.gnn.dataset)?;
    let (net, report) = predictor::train_offline(&dataset, &cfg.gnn.train)?;
    let meta = PredictorMeta {
        delay: cfg.gnn.dataset.delay,
        neighbours: cfg.gnn.dataset.neighbours,
        samples: dataset.len(),
        dataset_hash: predictor::dataset_hash(&dataset),
        param_hash: net.param_hash(),
        held_out_angular_error: report.held_out_angular_error,
        persistence_angular_error: report.persistence_angular_error,
        wind: cfg.wind.clone(),
    };
    predictor::save(&net, &meta, &out.join("predictor.bin"))?;
    write_text(&out.join("config.toml"), &cfg.to_toml()?)?;
    let mut w = csv::Writer::from_path(out.join("gnn_loss.csv"))?;
    w.write_record(["epoch", "train_mse"])?;
    for (i, l) in report.train_loss.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{l:.8}")])?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok((net, meta, report))
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub outcome: TrainOutcome,
    /// Index into the summaries.
    pub convergence_index: usize,
    pub convergence_step: u64,
    /// Mean of the last few summary rewards.
    pub final_reward: f64,
    pub wall_seconds: f64,
}

/// One training run on `layout`.
pub fn train_seed(
    cfg: &ExperimentConfig,
    layout: &FarmLayout,
    predictor: Option<Arc<PredictorNet>>,
    seed: u64,
) -> Result<SeedRun> {
    let start = Instant::now();
    let env = SetupEnv::new(cfg, layout.clone(), predictor, seed)?;
    let shape = env.shape().clone();
    let outcome = train_loop(&mut [env], shape.input_dim(), &shape.branches, &cfg.ppo, seed)?;
    let rewards: Vec<f64> = outcome.summaries.iter().map(|s| s.mean_cumulative_reward).collect();
    let convergence_index = detect_convergence(&rewards);
    let tail = &rewards[rewards.len().saturating_sub(CONVERGENCE_WINDOW)..];
    Ok(SeedRun {
        seed,
        convergence_index,
        convergence_step: outcome
            .summaries
            .get(convergence_index)
            .map_or(outcome.total_steps, |s| s.step),
        final_reward: tail.iter().sum::<f64>() / tail.len().max(1) as f64,
        wall_seconds: start.elapsed().as_secs_f64(),
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub setup: SetupKind,
    pub seeds: Vec<u64>,
    pub final_rewards: Vec<f64>,
    pub convergence_steps: Vec<u64>,
    pub wall_seconds: Vec<f64>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

/// Trains every configured seed and writes the run directory:
/// `config.toml`, `aggregate.csv` and one `seed-<s>/` per seed.
pub fn run_training(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<(TrainingSummary, Vec<SeedRun>)> {
    cfg.validate()?;
    let predictor = load_predictor(cfg)?;
    let layout = cfg.layout.build()?;
    create_dir(out)?;
    let echo = cfg.to_toml()?;
    write_text(&out.join("config.toml"), &echo)?;
    let runs = parallel_map(&cfg.seeds, jobs, |&seed| {
        log::info!("training {} seed {seed}", cfg.setup);
        let run = train_seed(cfg, &layout, predictor.clone(), seed)?;
        let dir = out.join(format!("seed-{seed}"));
        create_dir(&dir)?;
        write_text(&dir.join("config.toml"), &echo)?;
        write_metrics(&dir.join("metrics.csv"), &run.outcome.summaries)?;
        write_episodes(&dir.join("episodes.csv"), &run.outcome.episodes, None)?;
        let shape = cfg.setup.shape(layout.turbine_count(), cfg.neighbours());
        let learner = &run.outcome.learner;
        save_policy(
            &dir,
            &learner.policy,
            &learner.value,
            &PolicyMeta {
                setup: cfg.setup,
                turbines: layout.turbine_count(),
                neighbours: shape.neighbours,
                obs_dim: shape.input_dim(),
                branches: shape.branches.clone(),
                seed,
                total_steps: run.outcome.total_steps,
                policy_hash: learner.policy.net().param_hash(),
            },
        )?;
        write_text(
            &dir.join("timing.toml"),
            &format!("wall_seconds = {:.3}\n", run.wall_seconds),
        )?;
        log::info!(
            "{} seed {seed}: final reward {:.1}, converged at step {}",
            cfg.setup,
            run.final_reward,
            run.convergence_step
        );
        Ok(run)
    })?;

    let summary = TrainingSummary {
        setup: cfg.setup,
        seeds: runs.iter().map(|r| r.seed).collect(),
        final_rewards: runs.iter().map(|r| r.final_reward).collect(),
        convergence_steps: runs.iter().map(|r| r.convergence_step).collect(),
        wall_seconds: runs.iter().map(|r| r.wall_seconds).collect(),
    };
    let mut w = csv::Writer::from_path(out.join("aggregate.csv"))?;
    w.write_record([
        "seed",
        "final_mean_reward",
        "convergence_step",
        "total_steps",
        "episodes",
    ])?;
    for r in &runs {
        w.write_record([
            r.seed.to_string(),
            format!("{:.6}", r.final_reward),
            r.convergence_step.to_string(),
            r.outcome.total_steps.to_string(),
            r.outcome.episodes.len().to_string(),
        ])?;
    }
    let (rm, rs) = mean_std(&summary.final_rewards);
    let conv: Vec<f64> = summary.convergence_steps.iter().map(|&s| s as f64).collect();
    let (cm, cs) = mean_std(&conv);
    w.write_record([
        "mean".into(),
        format!("{rm:.6}"),
        format!("{cm:.1}"),
        String::new(),
        String::new(),
    ])?;
    w.write_record([
        "std".into(),
        format!("{rs:.6}"),
        format!("{cs:.1}"),
        String::new(),
        String::new(),
    ])?;
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok((summary, runs))
}

/// Policy checkpoints under `path`: the directory itself, or its `seed-*`
/// subdirectories in seed order.
fn checkpoint_dirs(path: &Path) -> Result<Vec<PathBuf>> {
    if path.join("policy.bin").is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
    let mut dirs: Vec<(u64, PathBuf)> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            let seed = name.strip_prefix("seed-")?.parse().ok()?;
            e.path().join("policy.bin").is_file().then(|| (seed, e.path()))
        })
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::Config(format!("no policy checkpoint under {}", path.display())));
    }
    Ok(dirs.into_iter().map(|(_, p)| p).collect())
}

fn load_controllers(cfg: &ExperimentConfig, checkpoint: &Path) -> Result<Vec<(u64, Controller)>> {
    checkpoint_dirs(checkpoint)?
        .iter()
        .map(|d| {
            let (policy, meta) = load_policy(d)?;
            if meta.setup != cfg.setup {
                return Err(Error::Contract(format!(
                    "checkpoint {} was trained for {}, config asks for {}",
                    d.display(),
                    meta.setup,
                    cfg.setup
                )));
            }
            Ok((
                meta.seed,
                Controller::Policy {
                    policy: Arc::new(policy),
                    stochastic: cfg.inference.stochastic,
                },
            ))
        })
        .collect()
}

/// Evaluates every checkpoint under `checkpoint`; writes `inference.csv`
/// (one row per seed and repeat) and `inference_episodes.csv` into `out`.
pub fn run_inference(cfg: &ExperimentConfig, checkpoint: &Path, out: &Path, jobs: usize) -> Result<Vec<InferenceRow>> {
    cfg.validate()?;
    let predictor = load_predictor(cfg)?;
    let layout = cfg.layout.build()?;
    let controllers = load_controllers(cfg, checkpoint)?;
    let results = parallel_map(&controllers, jobs, |(seed, c)| {
        evaluate(cfg, &layout, predictor.clone(), c, *seed)
    })?;
    create_dir(out)?;
    let mut rows = Vec::new();
    let mut episodes: Vec<EpisodeRecord> = Vec::new();
    let mut seeds = Vec::new();
    for ((seed, _), (r, e)) in controllers.iter().zip(results) {
        seeds.extend(std::iter::repeat_n(*seed, e.len()));
        rows.extend(r);
        episodes.extend(e);
    }
    write_inference(&out.join("inference.csv"), &rows)?;
    write_episodes(&out.join("inference_episodes.csv"), &episodes, Some(&seeds))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub turbines: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub episodes: usize,
}

/// Evaluates on default layouts of each configured turbine count. Shared
/// per-turbine policies run unchanged; the single agent's input grows with
/// the farm, so it is retrained for every count other than the
/// checkpoint's.
pub fn run_scaling(cfg: &ExperimentConfig, checkpoint: &Path, out: &Path, jobs: usize) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    let predictor = load_predictor(cfg)?;
    let controllers = load_controllers(cfg, checkpoint)?;
    let mut rows = Vec::new();
    for &turbines in &cfg.scaling.turbine_counts {
        let layout = FarmLayout::grid(turbines)?;
        let per_seed = if cfg.setup == SetupKind::SingleAgent && turbines != cfg.layout.turbines {
            parallel_map(&controllers, jobs, |(seed, _)| {
                log::info!("retraining single agent for {turbines} turbines, seed {seed}");
                let run = train_seed(cfg, &layout, predictor.clone(), *seed)?;
                let c = Controller::Policy {
                    policy: Arc::new(run.outcome.learner.policy),
                    stochastic: cfg.inference.stochastic,
                };
                evaluate(cfg, &layout, predictor.clone(), &c, *seed)
            })?
        } else {
            parallel_map(&controllers, jobs, |(seed, c)| {
                evaluate(cfg, &layout, predictor.clone(), c, *seed)
            })?
        };
        let rewards: Vec<f64> = per_seed
            .iter()
            .flat_map(|(_, eps)| eps.iter().map(|e| e.cumulative_reward))
            .collect();
        let (mean_reward, std_reward) = mean_std(&rewards);
        rows.push(ScalingRow {
            turbines,
            mean_reward,
            std_reward,
            episodes: rewards.len(),
        });
    }
    create_dir(out)?;
    let mut w = csv::Writer::from_path(out.join("scaling.csv"))?;
    w.write_record(["turbines", "mean_reward", "std_reward", "episodes"])?;
    for r in &rows {
        w.write_record([
            r.turbines.to_string(),
            format!("{:.6}", r.mean_reward),
            format!("{:.6}", r.std_reward),
            r.episodes.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub neighbours: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    /// Messages delivered per turbine per episode.
    pub mean_comm_count: f64,
}

/// Trains and evaluates a communicating setup once per neighbour count.
/// Each count gets a full run directory `k-<k>/` under `out`.
pub fn run_neighbour_sweep(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<Vec<SweepRow>> {
    if !cfg.setup.communicates() {
        return Err(Error::Config(format!(
            "setup {} does not communicate; nothing to sweep",
            cfg.setup
        )));
    }
    let layout = cfg.layout.build()?;
    let predictor = load_predictor(cfg)?;
    let mut rows = Vec::new();
    for &k in &cfg.sweep.neighbours {
        let kcfg = ExperimentConfig {
            neighbours: Some(k),
            ..cfg.clone()
        };
        let dir = out.join(format!("k-{k}"));
        let (_, runs) = run_training(&kcfg, &dir, jobs)?;
        let evals = parallel_map(&runs, jobs, |run| {
            let c = Controller::Policy {
                policy: Arc::new(run.outcome.learner.policy.clone()),
                stochastic: kcfg.inference.stochastic,
            };
            evaluate(&kcfg, &layout, predictor.clone(), &c, run.seed)
        })?;
        let episodes: Vec<&EpisodeRecord> = evals.iter().flat_map(|(_, e)| e).collect();
        let rewards: Vec<f64> = episodes.iter().map(|e| e.cumulative_reward).collect();
        let (mean_reward, std_reward) = mean_std(&rewards);
        rows.push(SweepRow {
            neighbours: k,
            mean_reward,
            std_reward,
            mean_comm_count: episodes.iter().map(|e| e.comm_count).sum::<f64>() / episodes.len().max(1) as f64,
        });
    }
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    w.write_record(["neighbours", "mean_reward", "std_reward", "mean_comm_count"])?;
    for r in &rows {
        w.write_record([
            r.neighbours.to_string(),
            format!("{:.6}", r.mean_reward),
            format!("{:.6}", r.std_reward),
            format!("{:.6}", r.mean_comm_count),
        ])?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(rows)
}
