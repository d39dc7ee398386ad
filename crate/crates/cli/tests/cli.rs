use std::path::Path;
use std::process::{Command, Output};

fn windfarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windfarm"))
        .args(args)
        .env("WINDFARM_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = windfarm(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 8] = [
    "--set",
    "ppo.max_steps=16000",
    "--set",
    "ppo.summary_freq=1600",
    "--set",
    "inference.repeats=2",
    "--jobs",
    "1",
];

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = windfarm(&["train", "--config", "/no/such/file.toml", "--out", path(&out)]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "setup = \"multi_agent\"\nturbo = 3\n").unwrap();
    assert_eq!(
        windfarm(&["train", "--config", path(&bad), "--out", path(&out)])
            .status
            .code(),
        Some(2)
    );

    let no_predictor = windfarm(&["train", "--set", "setup=ma_by_choice", "--out", path(&out)]);
    assert_eq!(no_predictor.status.code(), Some(2));

    let outpaced = windfarm(&["train", "--set", "wind.main_rotation_step_max=0.5", "--out", path(&out)]);
    assert_eq!(outpaced.status.code(), Some(2));

    assert_eq!(
        windfarm(&["train", "--profile", "huge", "--out", path(&out)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn train_infer_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("ma");
    let mut args = vec!["train", "--out", path(&run), "--seed", "5", "--set", "ppo.epsilon=0.3"];
    args.extend(SMALL);
    ok(&args);

    let echo = std::fs::read_to_string(run.join("config.toml")).unwrap();
    assert!(echo.contains("epsilon = 0.3"), "{echo}");
    assert!(echo.contains("seeds = [5]"), "{echo}");
    let metrics = std::fs::read_to_string(run.join("seed-5/metrics.csv")).unwrap();
    assert!(metrics.starts_with("step,mean_cumulative_reward,value_loss,policy_loss,entropy,comm_count"));
    assert_eq!(metrics.lines().count(), 11);
    for f in [
        "policy.bin",
        "value.bin",
        "policy.meta.toml",
        "episodes.csv",
        "timing.toml",
    ] {
        assert!(run.join("seed-5").join(f).is_file(), "{f}");
    }

    let trace = dir.path().join("trace.csv");
    let mut args = vec!["infer", "--out", path(&run), "--checkpoint", path(&run), "--seed", "5"];
    args.extend(["--trace", path(&trace)]);
    args.extend(SMALL);
    ok(&args);
    let inference = std::fs::read_to_string(run.join("inference.csv")).unwrap();
    assert_eq!(inference.lines().count(), 3);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 2001);

    ok(&["report", "--out", path(dir.path())]);
    let md = std::fs::read(dir.path().join("report.md")).unwrap();
    let csv = std::fs::read(dir.path().join("report.csv")).unwrap();
    ok(&["report", "--out", path(dir.path())]);
    assert_eq!(std::fs::read(dir.path().join("report.md")).unwrap(), md);
    assert_eq!(std::fs::read(dir.path().join("report.csv")).unwrap(), csv);
    assert!(String::from_utf8(md).unwrap().contains("multi_agent"));
}

#[test]
fn seeded_training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let mut args = vec!["train", "--out", path(out), "--seed", "2"];
        args.extend(SMALL);
        ok(&args);
    }
    for f in [
        "seed-2/metrics.csv",
        "seed-2/episodes.csv",
        "aggregate.csv",
        "seed-2/policy.bin",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_and_overrides_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "episode_length = 500\n[ppo]\nepsilon = 0.25\nlambda = 0.9\n").unwrap();
    let run = dir.path().join("r");
    let mut args = vec!["train", "--config", path(&cfg), "--out", path(&run), "--seed", "0"];
    args.extend(["--set", "ppo.lambda=0.8"]);
    args.extend(SMALL);
    ok(&args);
    let echo = std::fs::read_to_string(run.join("config.toml")).unwrap();
    assert!(echo.contains("episode_length = 500"));
    assert!(echo.contains("epsilon = 0.25"));
    assert!(echo.contains("lambda = 0.8"));
}
