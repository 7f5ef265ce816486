//! Staged grid search with a resumable CSV log.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use dimreg::graph::load_edge_list;
use dimreg::pipeline::{sweep as staged_sweep, SweepGrid, SweepRecord, SweepStage};

use crate::config::RunConfig;

pub const HEADER: &str = "run_id,stage,variant,eta,p,q,n_negative,lambda,valid_auc,test_auc,best";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub run_id: String,
    pub record: SweepRecord,
    /// Winner of its stage.
    pub best: bool,
}

fn format_row(run_id: &str, r: &SweepRecord, best: bool) -> String {
    format!(
        "{run_id},{},{},{},{},{},{},{},{},{},{}",
        r.stage,
        r.variant,
        r.eta,
        r.p,
        r.q,
        r.n_negative,
        r.lambda,
        r.valid_auc,
        r.test_auc,
        if best { "1" } else { "" }
    )
}

/// `run_id -> (valid_auc, test_auc)` from an existing log. Unreadable rows
/// are skipped and recomputed.
pub fn read_finished(path: &Path) -> Result<HashMap<String, (f64, f64)>> {
    let mut done = HashMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let text = fs::read_to_string(path)?;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 10 {
            continue;
        }
        if let (Ok(v), Ok(t)) = (f[8].parse::<f64>(), f[9].parse::<f64>()) {
            done.insert(f[0].to_string(), (v, t));
        }
    }
    Ok(done)
}

/// Runs the three stages from `base`. Each finished cell is appended to
/// `csv` at once; at the end the file is rewritten with stage winners
/// marked in the `best` column.
pub fn run(base: &RunConfig, grid: &SweepGrid, csv: &Path) -> Result<Vec<SweepRow>> {
    let (g, _) = load_edge_list(&base.dataset, false).with_context(|| format!("loading {}", base.dataset.display()))?;
    let finished = read_finished(csv)?;
    if !csv.exists() {
        if let Some(parent) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(csv, format!("{HEADER}\n"))?;
    }
    let mut log = OpenOptions::new().append(true).open(csv)?;
    let mut ids = Vec::new();
    let id_of = |exp: &dimreg::pipeline::Experiment| base.with_experiment(exp).map(|c| c.hash());

    let (records, winners) = staged_sweep(
        &g,
        &base.experiment(),
        grid,
        base.seed,
        |exp| id_of(exp).ok().and_then(|id| finished.get(&id).copied()),
        |exp, rec| {
            let id = id_of(exp).map_err(|e| dimreg::Error::InvalidArgument(e.to_string()))?;
            if !rec.cached {
                writeln!(log, "{}", format_row(&id, rec, false))?;
                log.flush()?;
            }
            log::info!("{} {} valid {:.4}", rec.stage, id, rec.valid_auc);
            ids.push(id);
            Ok(())
        },
    )?;

    let winner_ids: Vec<(SweepStage, String)> = winners
        .iter()
        .map(|(stage, exp)| Ok((*stage, id_of(exp)?)))
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = records
        .into_iter()
        .zip(ids)
        .map(|(record, run_id)| {
            let best = winner_ids.iter().any(|(s, id)| *s == record.stage && *id == run_id);
            SweepRow { run_id, record, best }
        })
        .collect();
    let mut text = format!("{HEADER}\n");
    for r in &rows {
        text.push_str(&format_row(&r.run_id, &r.record, r.best));
        text.push('\n');
    }
    fs::write(csv, text)?;
    Ok(rows)
}
