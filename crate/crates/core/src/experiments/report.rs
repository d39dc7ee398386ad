use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ExperimentConfig, SetupKind};
use crate::{Error, Result};

/// One line of the results table: a run directory's training, inference and
/// scaling numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub run: String,
    pub setup: SetupKind,
    pub seeds: usize,
    pub training_seconds: Option<f64>,
    pub convergence_step: Option<f64>,
    pub final_reward: Option<f64>,
    /// Mean and std over per-seed inference means.
    pub inference: Option<(f64, f64)>,
    /// Turbine count → (mean, std).
    pub scaling: BTreeMap<usize, (f64, f64)>,
}

fn read_csv(path: &Path) -> Result<Option<Vec<csv::StringRecord>>> {
    if !path.is_file() {
        return Ok(None);
    }
    let mut r = csv::Reader::from_path(path)?;
    Ok(Some(r.records().collect::<std::result::Result<_, _>>()?))
}

fn num(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<f64> {
    rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        reason: format!("column {i} is not a number"),
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

fn read_row(dir: &Path, name: String) -> Result<ReportRow> {
    let cfg_path = dir.join("config.toml");
    let text = std::fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Format {
        path: cfg_path.clone(),
        reason: e.to_string(),
    })?;
    let mut row = ReportRow {
        run: name,
        setup: cfg.setup,
        seeds: 0,
        training_seconds: None,
        convergence_step: None,
        final_reward: None,
        inference: None,
        scaling: BTreeMap::new(),
    };

    let agg_path = dir.join("aggregate.csv");
    if let Some(records) = read_csv(&agg_path)? {
        for rec in &records {
            match rec.get(0) {
                Some("mean") => {
                    row.final_reward = Some(num(rec, 1, &agg_path)?);
                    row.convergence_step = Some(num(rec, 2, &agg_path)?);
                }
                Some("std") => {}
                _ => row.seeds += 1,
            }
        }
        let mut secs = Vec::new();
        for seed in &cfg.seeds {
            let t = dir.join(format!("seed-{seed}")).join("timing.toml");
            if let Ok(text) = std::fs::read_to_string(&t) {
                let v: toml::Table = toml::from_str(&text).map_err(|e| Error::Format {
                    path: t.clone(),
                    reason: e.to_string(),
                })?;
                if let Some(s) = v.get("wall_seconds").and_then(|s| s.as_float()) {
                    secs.push(s);
                }
            }
        }
        if !secs.is_empty() {
            row.training_seconds = Some(mean_std(&secs).0);
        }
    }

    let inf_path = dir.join("inference.csv");
    if let Some(records) = read_csv(&inf_path)? {
        let mut per_seed: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for rec in &records {
            let seed = num(rec, 0, &inf_path)? as u64;
            per_seed.entry(seed).or_default().push(num(rec, 3, &inf_path)?);
        }
        let means: Vec<f64> = per_seed.values().map(|v| mean_std(v).0).collect();
        if !means.is_empty() {
            row.inference = Some(mean_std(&means));
        }
    }

    let sc_path = dir.join("scaling.csv");
    if let Some(records) = read_csv(&sc_path)? {
        for rec in &records {
            row.scaling.insert(
                num(rec, 0, &sc_path)? as usize,
                (num(rec, 1, &sc_path)?, num(rec, 2, &sc_path)?),
            );
        }
    }
    Ok(row)
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

/// Collects every run directory directly under `root` (one holding a
/// `config.toml`) and writes `report.md` and `report.csv` there. Output
/// depends only on the files read, so re-running is byte-identical.
pub fn write_report(root: &Path) -> Result<Vec<ReportRow>> {
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<(String, std::path::PathBuf)> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("config.toml").is_file() && e.path().join("aggregate.csv").is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.path()))
        .collect();
    if root.join("config.toml").is_file() && root.join("aggregate.csv").is_file() {
        let name = root
            .file_name()
            .map_or_else(|| ".".to_string(), |n| n.to_string_lossy().into_owned());
        dirs.push((name, root.to_path_buf()));
    }
    let mut rows = dirs
        .into_iter()
        .map(|(name, dir)| read_row(&dir, name))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.setup.cmp(&b.setup).then_with(|| a.run.cmp(&b.run)));

    let counts: Vec<usize> = {
        let mut c: Vec<usize> = rows.iter().flat_map(|r| r.scaling.keys().copied()).collect();
        c.sort_unstable();
        c.dedup();
        c
    };

    let mut md = String::from("# Results\n\n");
    let mut header = vec![
        "run".to_string(),
        "setup".into(),
        "seeds".into(),
        "training_seconds".into(),
        "convergence_step".into(),
        "final_train_reward".into(),
        "inference_mean".into(),
        "inference_std".into(),
    ];
    header.extend(
        counts
            .iter()
            .flat_map(|c| [format!("scale_{c}_mean"), format!("scale_{c}_std")]),
    );
    let _ = writeln!(md, "| {} |", header.join(" | "));
    let _ = writeln!(md, "|{}", "---|".repeat(header.len()));

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in &rows {
        let mut cells = vec![
            r.run.clone(),
            r.setup.to_string(),
            r.seeds.to_string(),
            opt(r.training_seconds, 1),
            opt(r.convergence_step, 0),
            opt(r.final_reward, 2),
            opt(r.inference.map(|x| x.0), 2),
            opt(r.inference.map(|x| x.1), 2),
        ];
        for c in &counts {
            let s = r.scaling.get(c);
            cells.push(opt(s.map(|x| x.0), 2));
            cells.push(opt(s.map(|x| x.1), 2));
        }
        let _ = writeln!(md, "| {} |", cells.join(" | "));
        w.write_record(&cells)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| Error::Format {
        path: root.join("report.csv"),
        reason: e.to_string(),
    })?;
    let md_path = root.join("report.md");
    std::fs::write(&md_path, md).map_err(|e| Error::io(&md_path, e))?;
    let csv_path = root.join("report.csv");
    std::fs::write(&csv_path, csv_bytes).map_err(|e| Error::io(&csv_path, e))?;
    Ok(rows)
}
