//! Table and curve summaries over finished run directories.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::{Manifest, RepetitionStatus};
use crate::error::{Error, Result};
use crate::metrics::{threshold_label, Variant};

/// One checkpoint row read back from a repetition CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub step: usize,
    pub wall_ms: f64,
    pub variant: Variant,
    pub streaks: Vec<usize>,
}

/// Mean and standard error of the mean (sample deviation over `sqrt(n)`).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Two decimals with trailing zeros trimmed: `40 ± 0`, `3.5 ± 0.25`.
pub fn format_mean_stderr(mean: f64, stderr: f64) -> String {
    format!("{} ± {}", trim(mean), trim(stderr))
}

fn trim(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn read_series_csv(path: &Path, thresholds: &[f64]) -> Result<Vec<CsvRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column {name}", path.display())))
    };
    let step_col = col("step")?;
    let wall_col = col("wall_ms")?;
    let variant_col = col("variant")?;
    let streak_cols = thresholds
        .iter()
        .map(|v| col(&format!("streak_{}", threshold_label(*v))))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let bad = |column: usize| Error::Parse {
            line: i + 2,
            column: column + 1,
        };
        let get = |c: usize| cells.get(c).copied().ok_or_else(|| bad(c));
        let variant = match get(variant_col)? {
            "priming" => Variant::Priming,
            "ppca" => Variant::Ppca,
            _ => return Err(bad(variant_col)),
        };
        out.push(CsvRecord {
            step: get(step_col)?.parse().map_err(|_| bad(step_col))?,
            wall_ms: get(wall_col)?.parse().map_err(|_| bad(wall_col))?,
            variant,
            streaks: streak_cols
                .iter()
                .map(|&c| get(c)?.parse().map_err(|_| bad(c)))
                .collect::<Result<Vec<_>>>()?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub run: String,
    pub algorithm: String,
    pub l: usize,
    /// `oja`, `eigengame`, `power` for the priming variant; `ppca_<l>`
    /// otherwise.
    pub method: String,
    pub threshold: String,
    pub target: usize,
    pub reached: usize,
    pub repetitions: usize,
    /// `None` ("n.a.") unless every repetition reached the target.
    pub steps: Option<(f64, f64)>,
    pub wall_ms: Option<(f64, f64)>,
}

impl SummaryRow {
    pub fn steps_cell(&self) -> String {
        self.steps
            .map_or_else(|| "n.a.".into(), |(m, s)| format_mean_stderr(m, s))
    }

    pub fn wall_cell(&self) -> String {
        self.wall_ms
            .map_or_else(|| "n.a.".into(), |(m, s)| format_mean_stderr(m, s))
    }
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub curve_files: Vec<PathBuf>,
}

struct LoadedRun {
    name: String,
    manifest: Manifest,
    /// Per repetition; `None` for diverged ones.
    reps: Vec<Option<Vec<CsvRecord>>>,
}

fn load_run(dir: &Path) -> Result<LoadedRun> {
    let manifest = Manifest::load(dir)?;
    let reps = manifest
        .repetitions
        .iter()
        .map(|r| match r.status {
            RepetitionStatus::Diverged { .. } => Ok(None),
            RepetitionStatus::Completed => {
                read_series_csv(&dir.join(&r.csv), &manifest.thresholds).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let name = dir.file_name().map_or_else(
        || dir.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    Ok(LoadedRun {
        name,
        manifest,
        reps,
    })
}

fn method_name(m: &Manifest, variant: Variant) -> String {
    match variant {
        Variant::Priming => m.algorithm.clone(),
        Variant::Ppca => format!("ppca_{}", m.extra_l),
    }
}

/// Summarizes time-to-streak (target `k` from each manifest) for every run
/// directory, variant and threshold, and writes `summary.csv`,
/// `summary.txt` and per-curve CSVs into `out_dir`.
pub fn report(run_dirs: &[PathBuf], out_dir: &Path) -> Result<Summary> {
    if run_dirs.is_empty() {
        return Err(Error::Config("no run directories given".into()));
    }
    let runs = run_dirs
        .iter()
        .map(|d| load_run(d))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut rows = Vec::new();
    let mut curve_files = Vec::new();
    for (run_idx, run) in runs.iter().enumerate() {
        let m = &run.manifest;
        for variant in [Variant::Priming, Variant::Ppca] {
            for (t_idx, &v) in m.thresholds.iter().enumerate() {
                let mut hits = Vec::new();
                for rep in run.reps.iter().flatten() {
                    let hit = rep
                        .iter()
                        .filter(|r| r.variant == variant)
                        .find(|r| r.streaks[t_idx] >= m.k);
                    if let Some(r) = hit {
                        hits.push((r.step as f64, r.wall_ms));
                    }
                }
                let all = hits.len() == m.repetitions.len();
                let steps: Vec<f64> = hits.iter().map(|h| h.0).collect();
                let walls: Vec<f64> = hits.iter().map(|h| h.1).collect();
                rows.push(SummaryRow {
                    run: run.name.clone(),
                    algorithm: m.algorithm.clone(),
                    l: m.extra_l,
                    method: method_name(m, variant),
                    threshold: threshold_label(v),
                    target: m.k,
                    reached: hits.len(),
                    repetitions: m.repetitions.len(),
                    steps: all.then(|| mean_stderr(&steps)),
                    wall_ms: all.then(|| mean_stderr(&walls)),
                });

                let path = out_dir.join(format!(
                    "curve_{run_idx}_{}_l{}_{}_{}.csv",
                    m.algorithm,
                    m.extra_l,
                    variant.as_str(),
                    threshold_label(v)
                ));
                fs::write(&path, curve_csv(run, variant, t_idx))
                    .map_err(|e| Error::io(&path, e))?;
                curve_files.push(path);
            }
        }
    }

    let mut csv = String::from(
        "run,algorithm,l,method,threshold,target,reached,repetitions,steps_mean,steps_stderr,wall_ms_mean,wall_ms_stderr\n",
    );
    let opt = |x: Option<(f64, f64)>, i: usize| {
        x.map_or_else(
            || "n.a.".to_string(),
            |p| if i == 0 { p.0 } else { p.1 }.to_string(),
        )
    };
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.algorithm,
            r.l,
            r.method,
            r.threshold,
            r.target,
            r.reached,
            r.repetitions,
            opt(r.steps, 0),
            opt(r.steps, 1),
            opt(r.wall_ms, 0),
            opt(r.wall_ms, 1)
        );
    }
    let path = out_dir.join("summary.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let path = out_dir.join("summary.txt");
    fs::write(&path, render_table(&rows)).map_err(|e| Error::io(&path, e))?;

    Ok(Summary { rows, curve_files })
}

/// Step vs mean streak (with standard error) across repetitions. A
/// repetition that stopped early holds its last value.
fn curve_csv(run: &LoadedRun, variant: Variant, t_idx: usize) -> String {
    let reps: Vec<Vec<&CsvRecord>> = run
        .reps
        .iter()
        .flatten()
        .map(|r| r.iter().filter(|x| x.variant == variant).collect())
        .collect();
    let steps: BTreeSet<usize> = reps.iter().flatten().map(|r| r.step).collect();
    let mut out = String::from("step,mean_streak,stderr\n");
    for s in steps {
        let vals: Vec<f64> = reps
            .iter()
            .map(|rep| {
                rep.iter()
                    .take_while(|r| r.step <= s)
                    .last()
                    .map_or(0.0, |r| r.streaks[t_idx] as f64)
            })
            .collect();
        let (mean, se) = mean_stderr(&vals);
        let _ = writeln!(out, "{s},{mean},{se}");
    }
    out
}

/// Plain-text table: one line per (run, method), one column per threshold.
pub fn render_table(rows: &[SummaryRow]) -> String {
    let mut thresholds: Vec<String> = Vec::new();
    for r in rows {
        if !thresholds.contains(&r.threshold) {
            thresholds.push(r.threshold.clone());
        }
    }
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.run.clone(), r.method.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:<24} {:<12}", "run", "method");
    for t in &thresholds {
        let _ = write!(out, " {:>20}", t);
    }
    out.push('\n');
    for (run, method) in &keys {
        let _ = write!(out, "{:<24} {:<12}", run, method);
        for t in &thresholds {
            let cell = rows
                .iter()
                .find(|r| &r.run == run && &r.method == method && &r.threshold == t)
                .map_or_else(|| "-".to_string(), SummaryRow::steps_cell);
            let _ = write!(out, " {:>20}", cell);
        }
        out.push('\n');
    }
    out
}
