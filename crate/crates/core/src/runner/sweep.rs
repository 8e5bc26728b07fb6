use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, SweepConfig};
use super::experiment::{run_prepared, Prepared, RepetitionOutcome, RepetitionStatus, RunOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub value: f64,
    /// Summed priming-variant angular error; absent when any repetition
    /// diverged.
    pub score: Option<f64>,
    pub diverged_repetitions: usize,
    pub run_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub algorithm: String,
    pub best: f64,
    pub best_index: usize,
    pub candidates: Vec<CandidateSummary>,
}

impl SweepReport {
    pub const FILE: &'static str = "sweep.json";
}

/// Number of checkpoints a run that never stops early records.
fn full_schedule_len(cfg: &RunConfig) -> usize {
    let n = cfg.priming.max_steps;
    n / cfg.eval_every + usize::from(n % cfg.eval_every != 0)
}

/// Sum of priming-variant angles over repetitions, checkpoints and
/// components. A run that terminated early (converged power iteration) keeps
/// contributing its final angles for the rest of the schedule.
pub fn score_repetitions(cfg: &RunConfig, reps: &[RepetitionOutcome]) -> Option<f64> {
    if reps
        .iter()
        .any(|r| matches!(r.status, RepetitionStatus::Diverged { .. }))
    {
        return None;
    }
    let schedule = full_schedule_len(cfg);
    let mut total = 0.0;
    for rep in reps {
        let records = rep.priming.records();
        for r in records {
            total += r.angles.iter().sum::<f64>();
        }
        if let Some(last) = records.last() {
            let missing = schedule.saturating_sub(records.len());
            total += missing as f64 * last.angles.iter().sum::<f64>();
        }
    }
    total.is_finite().then_some(total)
}

/// Index of the lowest score; exact ties go to the smaller candidate value.
pub fn select_best(candidates: &[(f64, Option<f64>)]) -> Result<usize> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, (value, score)) in candidates.iter().enumerate() {
        let Some(score) = *score else { continue };
        let better = match best {
            None => true,
            Some((_, bv, bs)) => score < bs || (score == bs && *value < bv),
        };
        if better {
            best = Some((i, *value, score));
        }
    }
    best.map(|(i, _, _)| i).ok_or(Error::AllDiverged)
}

/// Runs the template once per candidate (sharing dataset and ground truth),
/// writing each run under `out_dir/candidate_<i>` and a summary to
/// `out_dir/sweep.json`.
pub fn sweep(cfg: &SweepConfig, out_dir: &Path, opts: &RunOptions) -> Result<SweepReport> {
    cfg.validate()?;
    let prepared = Prepared::new(&cfg.template)?;
    sweep_prepared(&prepared, cfg, out_dir, opts)
}

pub fn sweep_prepared(
    prepared: &Prepared,
    cfg: &SweepConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<SweepReport> {
    let mut summaries = Vec::with_capacity(cfg.candidates.len());
    for (i, &value) in cfg.candidates.iter().enumerate() {
        let run_cfg = cfg.candidate_config(value);
        let dir = out_dir.join(format!("candidate_{i}"));
        let outcome = run_prepared(prepared, &run_cfg, &dir, opts)?;
        let diverged = outcome
            .repetitions
            .iter()
            .filter(|r| matches!(r.status, RepetitionStatus::Diverged { .. }))
            .count();
        let score = score_repetitions(&run_cfg, &outcome.repetitions);
        log::info!("candidate {value:e}: score {score:?}, {diverged} diverged");
        summaries.push(CandidateSummary {
            value,
            score,
            diverged_repetitions: diverged,
            run_dir: dir,
        });
    }
    let pairs: Vec<(f64, Option<f64>)> = summaries.iter().map(|c| (c.value, c.score)).collect();
    let best_index = select_best(&pairs)?;
    let report = SweepReport {
        algorithm: cfg.template.algorithm.as_str().to_string(),
        best: cfg.candidates[best_index],
        best_index,
        candidates: summaries,
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(SweepReport::FILE);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}
