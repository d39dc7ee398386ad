//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero only when a deterministic check fails; the empirical desk-scale
//! comparisons are reported as measured.
//!
//! Run with `cargo test -p windfarm-core --test acceptance`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windfarm_core::comm_graph::{pool_inbox, Inbox, Message};
use windfarm_core::experiments::{
    evaluate, oracle_actions, run_inference, run_scaling, run_training, train_gnn, Controller, ExperimentConfig,
    Profile, SetupEnv, SetupKind,
};
use windfarm_core::farm_env::{turbine_contribution, FarmLayout, RotationAction};
use windfarm_core::ppo::{
    compute_gae, minibatch_gradients, LossWeights, PolicyNet, PpoHyperparams, Transition, ValueNet,
};
use windfarm_core::Vec2;

// pinned tolerances and budgets
const REWARD_PAIRS: usize = 1000;
const REWARD_TOL: f64 = 1e-12;
const WNV_INBOXES: usize = 500;
const WNV_TOL: f64 = 1e-12;
const GAE_CASES: usize = 1000;
const GAE_TOL: f64 = 1e-10;
const GRAD_BATCHES: usize = 10;
const GRAD_REL_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;
const FORMULA_BUDGET_S: f64 = 60.0;
const PREDICTOR_MIN_GAIN: f64 = 0.10;
const PREDICTOR_BUDGET_S: f64 = 300.0;
const ORACLE_MIN_REWARD: f64 = 1500.0;
const ORACLE_EPISODES: usize = 20;
const ORACLE_BUDGET_S: f64 = 120.0;
const DESK_BUDGET_S: f64 = 4.0 * 3600.0;
const COST_TOL: f64 = 1e-9;

struct Report {
    lines: Vec<(bool, bool, String)>,
}

impl Report {
    /// `hard` failures make the target exit non-zero.
    fn record(&mut self, hard: bool, pass: bool, name: &str, detail: String) {
        let line = format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((hard, pass, line));
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(r: &mut ChaCha8Rng) -> Vec2 {
    let t: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    Vec2::new(t.cos(), t.sin())
}

// ---------------------------------------------------------------- formulas

fn brute_contribution(d: Vec2, o: Vec2) -> f64 {
    let cos = (d.x * o.x + d.y * o.y) / ((d.x * d.x + d.y * d.y).sqrt() * (o.x * o.x + o.y * o.y).sqrt());
    let a = cos.clamp(-1.0, 1.0).acos() * 180.0 / std::f64::consts::PI / 180.0;
    if a > 0.5 {
        a
    } else {
        -1.0
    }
}

fn check_reward(report: &mut Report) {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut branch_mismatch = 0;
    for _ in 0..REWARD_PAIRS {
        let d = unit(&mut r) * r.gen_range(0.1..3.0);
        let o = unit(&mut r);
        let got = turbine_contribution(d, o).unwrap();
        let want = brute_contribution(d, o);
        if (got == -1.0) != (want == -1.0) {
            branch_mismatch += 1;
        }
        worst = worst.max((got - want).abs());
    }
    let boundary = turbine_contribution(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
    let opposed = turbine_contribution(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)).unwrap();

    // per-episode bounds under random and scripted control
    let cfg = ExperimentConfig::default();
    let layout = cfg.layout.build().unwrap();
    let mut bounds_ok = true;
    let mut extremes = (f64::INFINITY, f64::NEG_INFINITY);
    for (seed, scripted) in [(0, true), (1, false)] {
        let mut env = SetupEnv::new(&cfg, layout.clone(), None, seed).unwrap();
        let mut ar = rng(seed + 10);
        let mut total = 0.0;
        loop {
            let rot: Vec<RotationAction> = if scripted {
                oracle_actions(env.farm())
            } else {
                (0..8).map(|_| RotationAction::ALL[ar.gen_range(0..3)]).collect()
            };
            let fb = env.step_decoded(&rot, &[]).unwrap();
            total += fb.efficiency;
            if fb.done {
                break;
            }
        }
        extremes = (extremes.0.min(total), extremes.1.max(total));
        bounds_ok &= total.abs() <= cfg.episode_length as f64;
    }
    let pass = worst <= REWARD_TOL && branch_mismatch == 0 && boundary == -1.0 && opposed == 1.0 && bounds_ok;
    report.record(
        true,
        pass,
        "formula.reward",
        format!(
            "{REWARD_PAIRS} pairs, max |diff| {worst:.1e} (tol {REWARD_TOL:.0e}), branch mismatches {branch_mismatch}, \
             a=0.5 -> {boundary}, episode totals in [{:.1}, {:.1}] within +-{}",
            extremes.0, extremes.1, cfg.episode_length
        ),
    );
}

fn check_wnv(report: &mut Report) {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut max_norm = 0.0f64;
    for _ in 0..WNV_INBOXES {
        let width = r.gen_range(0.5..2.0);
        let p = Vec2::new(r.gen_range(0.0..width), r.gen_range(0.0..width));
        let n = r.gen_range(1..10);
        let messages: Vec<Message> = (0..n)
            .map(|_| Message {
                sender_position: Vec2::new(r.gen_range(0.0..width), r.gen_range(0.0..width)),
                sender_wind: unit(&mut r),
                sent_at: 0,
            })
            .collect();
        let (mut sx, mut sy) = (0.0, 0.0);
        for m in &messages {
            let dist = ((p.x - m.sender_position.x).powi(2) + (p.y - m.sender_position.y).powi(2)).sqrt();
            let w = (1.0 - dist / width).clamp(0.0, 1.0);
            sx += w * m.sender_wind.x;
            sy += w * m.sender_wind.y;
        }
        let want = Vec2::new(sx / n as f64, sy / n as f64);
        let got = pool_inbox(p, &Inbox { messages }, width);
        worst = worst.max((got.x - want.x).abs()).max((got.y - want.y).abs());
        max_norm = max_norm.max(got.norm());
    }
    let empty = pool_inbox(Vec2::new(0.3, 0.3), &Inbox::default(), 1.0);
    let pass = worst <= WNV_TOL && empty == Vec2::ZERO && max_norm <= 1.0;
    report.record(
        true,
        pass,
        "formula.wnv",
        format!(
            "{WNV_INBOXES} inboxes, max |diff| {worst:.1e} (tol {WNV_TOL:.0e}), empty -> ({}, {}), max norm {max_norm:.4}",
            empty.x, empty.y
        ),
    );
}

fn check_gae(report: &mut Report) {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..GAE_CASES {
        let len = r.gen_range(1..=10);
        let rewards: Vec<f64> = (0..len).map(|_| r.gen_range(-1.0..1.0)).collect();
        let values: Vec<f64> = (0..len).map(|_| r.gen_range(-2.0..2.0)).collect();
        let bootstrap = if r.gen_bool(0.5) { 0.0 } else { r.gen_range(-2.0..2.0) };
        let gamma = r.gen_range(0.0..1.0);
        let lambda = r.gen_range(0.0..1.0);
        let (adv, ret) = compute_gae(&rewards, &values, bootstrap, gamma, lambda).unwrap();
        // A_t = sum_l (gamma lambda)^l delta_{t+l}
        for t in 0..len {
            let mut a = 0.0;
            for l in 0..len - t {
                let k = t + l;
                let next = if k + 1 < len { values[k + 1] } else { bootstrap };
                let delta = rewards[k] + gamma * next - values[k];
                a += (gamma * lambda).powi(l as i32) * delta;
            }
            worst = worst.max((adv[t] - a).abs()).max((ret[t] - (a + values[t])).abs());
        }
    }
    report.record(
        true,
        worst <= GAE_TOL,
        "formula.gae",
        format!("{GAE_CASES} trajectories of length 1..=10, max |diff| {worst:.1e} (tol {GAE_TOL:.0e})"),
    );
}

/// Loss recomputed from the public forward passes only.
fn reference_loss(policy: &PolicyNet, value: &ValueNet, batch: &[Transition], w: &LossWeights) -> f64 {
    let m = batch.len() as f64;
    let mut total = 0.0;
    for t in batch {
        let probs = policy.probabilities(&t.obs).unwrap();
        let log_prob: f64 = probs.iter().zip(&t.actions).map(|(p, &a)| p[a].ln()).sum();
        let ratio = (log_prob - t.log_prob).exp();
        let clipped = ratio.clamp(1.0 - w.epsilon, 1.0 + w.epsilon);
        let surrogate = (ratio * t.advantage).min(clipped * t.advantage);
        let entropy: f64 = probs.iter().map(|p| -p.iter().map(|q| q * q.ln()).sum::<f64>()).sum();
        let v = value.value(&t.obs);
        total += -w.surrogate * surrogate + w.value * (v - t.ret).powi(2) - w.entropy * entropy;
    }
    total / m
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn check_gradients(report: &mut Report) {
    let hp = PpoHyperparams {
        hidden_units: 6,
        num_layers: 2,
        ..Default::default()
    };
    let terms = [
        (
            "policy",
            LossWeights {
                epsilon: 0.2,
                surrogate: 1.0,
                value: 0.0,
                entropy: 0.0,
            },
        ),
        (
            "value",
            LossWeights {
                epsilon: 0.2,
                surrogate: 0.0,
                value: 1.0,
                entropy: 0.0,
            },
        ),
        (
            "entropy",
            LossWeights {
                epsilon: 0.2,
                surrogate: 0.0,
                value: 0.0,
                entropy: 1.0,
            },
        ),
    ];
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for b in 0..GRAD_BATCHES as u64 {
        let mut r = rng(100 + b);
        let branches = if b % 2 == 0 { vec![3] } else { vec![3, 2] };
        let obs_dim = 6;
        let mut policy = PolicyNet::new(obs_dim, &branches, &hp, &mut r);
        // sharpen the initially near-uniform head so ratios move off 1
        policy.net_mut().scale_output_layer(80.0);
        let value = ValueNet::new(obs_dim, &hp, &mut r);
        let batch: Vec<Transition> = (0..16)
            .map(|_| Transition {
                obs: (0..obs_dim).map(|_| r.gen_range(-1.0..1.0)).collect(),
                actions: branches.iter().map(|&n| r.gen_range(0..n)).collect(),
                log_prob: r.gen_range(-3.0..-0.2),
                value: 0.0,
                advantage: r.gen_range(-2.0..2.0),
                ret: r.gen_range(-1.0..1.0),
            })
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        for (name, w) in &terms {
            let (_, gp, gv) = minibatch_gradients(&policy, &value, &refs, w);
            let mut num_p = vec![0.0; gp.len()];
            for (i, slot) in num_p.iter_mut().enumerate() {
                let mut p = policy.clone();
                p.net_mut().params_mut()[i] += FD_STEP;
                let up = reference_loss(&p, &value, &batch, w);
                p.net_mut().params_mut()[i] -= 2.0 * FD_STEP;
                let down = reference_loss(&p, &value, &batch, w);
                *slot = (up - down) / (2.0 * FD_STEP);
            }
            let mut num_v = vec![0.0; gv.len()];
            for (i, slot) in num_v.iter_mut().enumerate() {
                let mut v = value.clone();
                v.net_mut().params_mut()[i] += FD_STEP;
                let up = reference_loss(&policy, &v, &batch, w);
                v.net_mut().params_mut()[i] -= 2.0 * FD_STEP;
                let down = reference_loss(&policy, &v, &batch, w);
                *slot = (up - down) / (2.0 * FD_STEP);
            }
            let analytic: Vec<f64> = gp.iter().chain(&gv).copied().collect();
            let numeric: Vec<f64> = num_p.iter().chain(&num_v).copied().collect();
            let e = worst.entry(name).or_insert(0.0);
            *e = e.max(relative_error(&analytic, &numeric));
        }
    }
    let pass = worst.values().all(|&e| e < GRAD_REL_TOL);
    let detail = worst
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    report.record(
        true,
        pass,
        "formula.ppo_gradients",
        format!("{GRAD_BATCHES} mini-batches, worst relative error: {detail} (tol {GRAD_REL_TOL:.0e})"),
    );
}

// ---------------------------------------------------------------- predictor and oracle

fn check_predictor(report: &mut Report, dir: &Path) -> PathBuf {
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    let (_, meta, _) = train_gnn(&cfg, dir).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let gain = 1.0 - meta.held_out_angular_error / meta.persistence_angular_error;
    report.record(
        true,
        gain >= PREDICTOR_MIN_GAIN && secs < PREDICTOR_BUDGET_S,
        "predictor.quality",
        format!(
            "held-out angular error {:.3} deg vs persistence {:.3} deg, gain {:.1}% (need >= {:.0}%), {secs:.0}s (budget {PREDICTOR_BUDGET_S:.0}s)",
            meta.held_out_angular_error,
            meta.persistence_angular_error,
            100.0 * gain,
            100.0 * PREDICTOR_MIN_GAIN
        ),
    );
    dir.join("predictor.bin")
}

fn check_oracle(report: &mut Report) {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.inference.repeats = ORACLE_EPISODES;
    cfg.inference.steps = cfg.episode_length;
    let layout = cfg.layout.build().unwrap();
    let (_, episodes) = evaluate(&cfg, &layout, None, &Controller::Oracle, 0).unwrap();
    let mean = episodes.iter().map(|e| e.cumulative_reward).sum::<f64>() / episodes.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    report.record(
        true,
        episodes.len() == ORACLE_EPISODES && mean >= ORACLE_MIN_REWARD && secs < ORACLE_BUDGET_S,
        "oracle.solvability",
        format!(
            "scripted policy mean episode reward {mean:.2} over {} episodes (need >= {ORACLE_MIN_REWARD}), {secs:.1}s",
            episodes.len()
        ),
    );
}

// ---------------------------------------------------------------- desk-scale orderings

struct SetupResult {
    convergence_steps: Vec<u64>,
    /// Mean evaluation reward per seed.
    seed_means: Vec<f64>,
    scaling: Vec<(usize, f64)>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

fn desk_config(setup: SetupKind, predictor: &Path) -> ExperimentConfig {
    let mut cfg = Profile::Desk.defaults();
    cfg.setup = setup;
    if setup.communicates() {
        cfg.predictor = Some(predictor.to_path_buf());
    }
    cfg
}

fn run_setup(setup: SetupKind, predictor: &Path, root: &Path, scale: bool) -> SetupResult {
    let cfg = desk_config(setup, predictor);
    let dir = root.join(setup.name());
    let (summary, _) = run_training(&cfg, &dir, 1).unwrap();
    let rows = run_inference(&cfg, &dir, &dir, 1).unwrap();
    let seed_means = cfg
        .seeds
        .iter()
        .map(|s| {
            let mine: Vec<f64> = rows.iter().filter(|r| r.seed == *s).map(|r| r.mean_reward).collect();
            mine.iter().sum::<f64>() / mine.len() as f64
        })
        .collect();
    let scaling = if scale {
        run_scaling(&cfg, &dir, &dir, 1)
            .unwrap()
            .iter()
            .map(|r| (r.turbines, r.mean_reward))
            .collect()
    } else {
        Vec::new()
    };
    SetupResult {
        convergence_steps: summary.convergence_steps,
        seed_means,
        scaling,
    }
}

fn relative_drop(scaling: &[(usize, f64)]) -> f64 {
    let first = scaling.first().unwrap().1;
    let last = scaling.last().unwrap().1;
    (first - last) / first.abs()
}

fn check_desk(report: &mut Report, predictor: &Path, root: &Path) {
    let start = Instant::now();
    let results: BTreeMap<SetupKind, SetupResult> = SetupKind::ALL
        .iter()
        .map(|&s| {
            let scale = matches!(s, SetupKind::SingleAgent | SetupKind::MaByChoice);
            (s, run_setup(s, predictor, root, scale))
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let sa = &results[&SetupKind::SingleAgent];
    let ma = &results[&SetupKind::MultiAgent];

    let per_seed: Vec<String> = ma
        .convergence_steps
        .iter()
        .zip(&sa.convergence_steps)
        .map(|(m, s)| format!("{m}/{s}"))
        .collect();
    let faster = ma
        .convergence_steps
        .iter()
        .zip(&sa.convergence_steps)
        .all(|(m, s)| m < s);
    report.record(
        false,
        faster,
        "desk.a_convergence",
        format!(
            "MA/SA convergence step per seed (need MA < SA): {}",
            per_seed.join(", ")
        ),
    );

    let order = [
        SetupKind::MaByChoice,
        SetupKind::MaBroadcasting,
        SetupKind::MultiAgent,
        SetupKind::SingleAgent,
    ];
    let stats: Vec<(f64, f64)> = order.iter().map(|s| mean_std(&results[s].seed_means)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for i in 0..3 {
        let (hi, lo) = (stats[i], stats[i + 1]);
        let verdict = if hi.0 >= lo.0 {
            ">="
        } else if i == 1 && lo.0 - hi.0 <= hi.1.max(lo.1) {
            "tie(<1 std)"
        } else {
            pass = false;
            "<"
        };
        parts.push(format!("{} {verdict} {}", order[i].name(), order[i + 1].name()));
    }
    let means = order
        .iter()
        .zip(&stats)
        .map(|(s, (m, sd))| format!("{}={m:.1}+-{sd:.1}", s.name()))
        .collect::<Vec<_>>()
        .join(" ");
    report.record(
        false,
        pass,
        "desk.b_reward_order",
        format!("{}; {means}", parts.join(", ")),
    );

    let bc = &results[&SetupKind::MaByChoice];
    let (bc_drop, sa_drop) = (relative_drop(&bc.scaling), relative_drop(&sa.scaling));
    report.record(
        false,
        bc_drop <= sa_drop && secs < DESK_BUDGET_S,
        "desk.c_scaling",
        format!(
            "relative drop 8->24 turbines: ma_by_choice {:.2}% vs single_agent {:.2}%; desk profile took {secs:.0}s",
            100.0 * bc_drop,
            100.0 * sa_drop
        ),
    );
}

// ---------------------------------------------------------------- reductions and determinism

fn base_trace(setup: SetupKind, predictor: &Arc<windfarm_core::predictor::PredictorNet>, seed: u64) -> Vec<f64> {
    let mut cfg = Profile::Desk.defaults();
    cfg.setup = setup;
    cfg.neighbours = Some(0);
    let layout = FarmLayout::grid(8).unwrap();
    let pred = setup.communicates().then(|| predictor.clone());
    let mut env = SetupEnv::new(&cfg, layout, pred, seed).unwrap();
    let mut r = rng(seed);
    let mut out = Vec::new();
    loop {
        let rot: Vec<RotationAction> = (0..8).map(|_| RotationAction::ALL[r.gen_range(0..3)]).collect();
        let sends: Vec<bool> = (0..8).map(|_| r.gen_bool(0.5)).collect();
        let sends = if setup == SetupKind::MultiAgent {
            Vec::new()
        } else {
            sends
        };
        let fb = env.step_decoded(&rot, &sends).unwrap();
        out.push(fb.efficiency);
        if fb.done {
            return out;
        }
    }
}

fn check_reductions(report: &mut Report, predictor_path: &Path) {
    let (net, _) = windfarm_core::predictor::load(predictor_path).unwrap();
    let net = Arc::new(net);
    let mut identical = true;
    for seed in 0..3 {
        let plain = base_trace(SetupKind::MultiAgent, &net, seed);
        for s in [SetupKind::MaBroadcasting, SetupKind::MaByChoice] {
            identical &= base_trace(s, &net, seed) == plain;
        }
    }

    let mut cfg = desk_config(SetupKind::MaBroadcasting, predictor_path);
    cfg.neighbours = Some(4);
    let layout = cfg.layout.build().unwrap();
    let mut env = SetupEnv::new(&cfg, layout, Some(net.clone()), 0).unwrap();
    let mut per_agent = [0.0f64; 8];
    loop {
        let rot = oracle_actions(env.farm());
        let fb = env.step_decoded(&rot, &[true; 8]).unwrap();
        for (acc, c) in per_agent.iter_mut().zip(env.last_costs()) {
            *acc += c;
        }
        if fb.done {
            break;
        }
    }
    let cost_ok = per_agent.iter().all(|c| (c - 25.0).abs() < COST_TOL);
    report.record(
        true,
        identical && cost_ok,
        "reductions",
        format!(
            "k=0 base-reward traces equal plain MA: {identical} (3 seeds x 2 setups); broadcasting episode cost per agent {:.3} .. {:.3}",
            per_agent.iter().cloned().fold(f64::INFINITY, f64::min),
            per_agent.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        ),
    );
}

fn check_determinism(report: &mut Report, predictor: &Path, root: &Path) {
    let mut cfg = desk_config(SetupKind::MaByChoice, predictor);
    cfg.seeds = vec![0];
    cfg.ppo.max_steps = 48_000;
    cfg.inference.repeats = 2;
    let files = [
        "seed-0/metrics.csv",
        "seed-0/episodes.csv",
        "aggregate.csv",
        "inference.csv",
        "inference_episodes.csv",
    ];
    let mut runs = Vec::new();
    for i in 0..2 {
        let dir = root.join(format!("determinism-{i}"));
        run_training(&cfg, &dir, 1).unwrap();
        run_inference(&cfg, &dir, &dir, 1).unwrap();
        runs.push(files.map(|f| std::fs::read(dir.join(f)).unwrap()));
    }
    let same = runs[0] == runs[1];
    report.record(
        true,
        same,
        "determinism",
        format!(
            "re-run of train + infer: {} metrics files byte-identical: {same}",
            files.len()
        ),
    );
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    let tmp = tempfile::tempdir().unwrap();

    let start = Instant::now();
    check_reward(&mut report);
    check_wnv(&mut report);
    check_gae(&mut report);
    check_gradients(&mut report);
    let formula_secs = start.elapsed().as_secs_f64();
    report.record(
        true,
        formula_secs < FORMULA_BUDGET_S,
        "formula.runtime",
        format!("{formula_secs:.1}s (budget {FORMULA_BUDGET_S:.0}s)"),
    );

    let predictor = check_predictor(&mut report, &tmp.path().join("gnn"));
    check_oracle(&mut report);
    check_reductions(&mut report, &predictor);
    check_determinism(&mut report, &predictor, tmp.path());
    check_desk(&mut report, &predictor, &tmp.path().join("desk"));

    let passed = report.lines.iter().filter(|l| l.1).count();
    println!("acceptance: {passed}/{} criteria pass", report.lines.len());
    if report.lines.iter().any(|(hard, pass, _)| *hard && !pass) {
        std::process::exit(1);
    }
}
