use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::data::{BatchStream, Dataset};
use crate::error::{Error, Result};
use crate::linalg::{covariance, SymmetricMatrix};
use crate::metrics::{self, threshold_label, MetricRecord, MetricSeries, SeriesMeta, Variant};
use crate::ppca::{self, check_prop3, ComponentSet, PpcaOptions};
use crate::priming::{Algorithm, PrimingState};
use crate::truth::GroundTruth;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for repetitions; 0 lets rayon decide.
    pub jobs: usize,
    /// Assert online that the exact step never shortens a streak whenever
    /// all variance-maximization conditions hold.
    pub verify_prop3: bool,
}

/// Monotonic stopwatch that only runs between `start` and `stop`.
#[derive(Debug, Default)]
struct Stopwatch {
    elapsed: Duration,
    started: Option<Instant>,
}

impl Stopwatch {
    fn start(&mut self) {
        self.started = Some(Instant::now());
    }

    fn stop(&mut self) {
        if let Some(t) = self.started.take() {
            self.elapsed += t.elapsed();
        }
    }

    fn add(&mut self, d: Duration) {
        self.elapsed += d;
    }

    fn ms(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1e3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "status")]
pub enum RepetitionStatus {
    Completed,
    Diverged { step: usize },
}

#[derive(Debug, Clone)]
pub struct RepetitionOutcome {
    pub index: usize,
    pub seed: u64,
    pub status: RepetitionStatus,
    pub priming: MetricSeries,
    pub ppca: MetricSeries,
    /// Checkpoints where every condition of the guarantee chain held.
    pub prop3_passed: usize,
    pub prop3_checked: usize,
}

/// Dataset, ground truth and (for the power method) covariance shared by all
/// repetitions of a run.
#[derive(Debug)]
pub struct Prepared {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    covariance: Option<(SymmetricMatrix, Duration)>,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let dataset = cfg.dataset.load()?;
        Self::from_dataset(cfg, dataset)
    }

    pub fn from_dataset(cfg: &RunConfig, dataset: Dataset) -> Result<Self> {
        if cfg.num_components() > dataset.cols() {
            return Err(Error::Config(format!(
                "k + extra_l = {} exceeds the data dimension {}",
                cfg.num_components(),
                dataset.cols()
            )));
        }
        let truth = GroundTruth::load_or_compute(&dataset, cfg.truth_cache.as_deref())?;
        let ties = truth.near_ties(cfg.k);
        if !ties.is_empty() {
            log::warn!(
                "ground-truth eigenvalues tie at indices {ties:?}; per-index angles are ill-defined there"
            );
        }
        let covariance = (cfg.algorithm == Algorithm::Power).then(|| {
            let t = Instant::now();
            let c = covariance(dataset.matrix(), false);
            (c, t.elapsed())
        });
        Ok(Self {
            dataset,
            truth,
            covariance,
        })
    }

    /// Runs every repetition, in parallel across `opts.jobs` threads.
    pub fn run(&self, cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<RepetitionOutcome>> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| {
            (0..cfg.repetitions)
                .into_par_iter()
                .map(|r| self.run_repetition(cfg, r, opts))
                .collect()
        })
    }

    pub fn run_repetition(
        &self,
        cfg: &RunConfig,
        repetition: usize,
        opts: &RunOptions,
    ) -> Result<RepetitionOutcome> {
        let seed = cfg.seed(repetition);
        let ds = &self.dataset;
        let truth_k = self.truth.top(cfg.k)?;
        let meta = SeriesMeta {
            config_hash: cfg.hash(),
            seed,
            algorithm: cfg.algorithm.as_str().to_string(),
        };
        let mut outcome = RepetitionOutcome {
            index: repetition,
            seed,
            status: RepetitionStatus::Completed,
            priming: MetricSeries::new(meta.clone()),
            ppca: MetricSeries::new(meta),
            prop3_passed: 0,
            prop3_checked: 0,
        };

        let mut state =
            PrimingState::init(cfg.algorithm, cfg.priming_config(repetition), ds.cols())?;
        let mut stream = BatchStream::new(ds, cfg.priming.batch_size, seed);
        let mut clock = Stopwatch::default();
        if let Some((_, cost)) = &self.covariance {
            clock.add(*cost);
        }
        let ppca_opts = PpcaOptions {
            sample_fraction: cfg.sample_fraction,
            sample_seed: seed,
            normalize_eigenvalues: false,
        };

        for step in 1..=cfg.priming.max_steps {
            clock.start();
            let stepped = match cfg.algorithm {
                Algorithm::Power => {
                    let (cov, _) = self
                        .covariance
                        .as_ref()
                        .expect("power runs carry a covariance");
                    state.power_step(cov).map(|flags| flags.iter().all(|f| *f))
                }
                Algorithm::Oja => state.oja_step(&stream.next_batch()).map(|_| false),
                Algorithm::EigenGame => state.eigengame_step(&stream.next_batch()).map(|_| false),
            };
            clock.stop();
            let converged = match stepped {
                Ok(c) => c,
                Err(Error::NonFiniteUpdate { step }) => {
                    outcome.status = RepetitionStatus::Diverged { step };
                    return Ok(outcome);
                }
                Err(e) => return Err(e),
            };
            let last = converged || step == cfg.priming.max_steps;
            if step % cfg.eval_every == 0 || last {
                // Unnormalized updates can blow up without overflowing: the
                // primed vectors turn parallel and the exact step has nothing
                // left to extract.
                match self.checkpoint(
                    cfg,
                    &state,
                    &truth_k,
                    &clock,
                    &ppca_opts,
                    opts,
                    &mut outcome,
                ) {
                    Ok(()) => {}
                    Err(Error::SubspaceCollapse { .. } | Error::ZeroVector { .. }) => {
                        outcome.status = RepetitionStatus::Diverged { step };
                        return Ok(outcome);
                    }
                    Err(e) => return Err(e),
                }
            }
            if converged {
                break;
            }
        }
        Ok(outcome)
    }

    #[allow(clippy::too_many_arguments)]
    fn checkpoint(
        &self,
        cfg: &RunConfig,
        state: &PrimingState,
        truth_k: &ComponentSet,
        clock: &Stopwatch,
        ppca_opts: &PpcaOptions,
        opts: &RunOptions,
        outcome: &mut RepetitionOutcome,
    ) -> Result<()> {
        let ds = &self.dataset;
        let step = state.step;
        let primed_wall = clock.ms();
        let t = Instant::now();
        let primed = state.current_components()?;
        let refined = ppca::ppca_with(ds, &primed, cfg.k, ppca_opts)?;
        let ppca_wall = primed_wall + t.elapsed().as_secs_f64() * 1e3;

        let head = primed.truncated(cfg.k);
        let record = |set: &ComponentSet, variant, wall_ms| -> Result<MetricRecord> {
            let (angles, streaks, captured_variance) =
                metrics::evaluate(set, truth_k, ds, &cfg.thresholds)?;
            Ok(MetricRecord {
                step,
                wall_ms,
                angles,
                streaks,
                captured_variance,
                variant,
                l: cfg.extra_l,
            })
        };
        let p = record(&head, Variant::Priming, primed_wall)?;
        let q = record(&refined.components, Variant::Ppca, ppca_wall)?;

        if opts.verify_prop3 {
            outcome.prop3_checked += 1;
            let flags = match check_prop3(ds, &primed, truth_k, cfg.k) {
                Ok(f) => f,
                Err(Error::DegenerateProjection { .. }) => vec![false],
                Err(e) => return Err(e),
            };
            if flags.iter().all(|f| *f) {
                outcome.prop3_passed += 1;
                for ((v, a), (_, b)) in p.streaks.iter().zip(&q.streaks) {
                    if b < a {
                        return Err(Error::VerificationFailed {
                            step,
                            detail: format!(
                                "streak at {} dropped from {a} to {b}",
                                threshold_label(*v)
                            ),
                        });
                    }
                }
            }
        }
        outcome.priming.push(p)?;
        outcome.ppca.push(q)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionEntry {
    pub index: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub status: RepetitionStatus,
    pub csv: String,
    pub checkpoints: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prop3_passed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub config: RunConfig,
    pub algorithm: String,
    pub k: usize,
    pub extra_l: usize,
    pub thresholds: Vec<f64>,
    pub truth_hash: String,
    pub rows: usize,
    pub cols: usize,
    pub repetitions: Vec<RepetitionEntry>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::FILE);
        if !path.exists() {
            return Err(Error::MissingManifest(dir.to_path_buf()));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn all_diverged(&self) -> bool {
        self.repetitions
            .iter()
            .all(|r| matches!(r.status, RepetitionStatus::Diverged { .. }))
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub repetitions: Vec<RepetitionOutcome>,
    pub out_dir: PathBuf,
}

/// CSV header: `step, wall_ms, variant, l, angle_1..k, streak_<V>..., var_1..k`.
pub fn csv_header(k: usize, thresholds: &[f64]) -> String {
    let mut cols: Vec<String> = ["step", "wall_ms", "variant", "l"]
        .map(String::from)
        .to_vec();
    cols.extend((1..=k).map(|i| format!("angle_{i}")));
    cols.extend(
        thresholds
            .iter()
            .map(|v| format!("streak_{}", threshold_label(*v))),
    );
    cols.extend((1..=k).map(|i| format!("var_{i}")));
    cols.join(",")
}

fn csv_row(r: &MetricRecord) -> String {
    let mut cells = vec![
        r.step.to_string(),
        format!("{:.3}", r.wall_ms),
        r.variant.as_str().to_string(),
        r.l.to_string(),
    ];
    cells.extend(r.angles.iter().map(|a| format!("{a:e}")));
    cells.extend(r.streaks.iter().map(|(_, s)| s.to_string()));
    cells.extend(r.captured_variance.iter().map(|v| format!("{v:e}")));
    cells.join(",")
}

/// Interleaves both variants per checkpoint, priming first.
pub fn series_csv(k: usize, thresholds: &[f64], rep: &RepetitionOutcome) -> String {
    let mut out = csv_header(k, thresholds);
    out.push('\n');
    for (p, q) in rep.priming.records().iter().zip(rep.ppca.records()) {
        out.push_str(&csv_row(p));
        out.push('\n');
        out.push_str(&csv_row(q));
        out.push('\n');
    }
    out
}

pub fn repetition_csv_name(index: usize) -> String {
    format!("rep_{index:03}.csv")
}

/// Runs `cfg` and writes one CSV per repetition plus `manifest.json` into
/// `out_dir`.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let prepared = Prepared::new(cfg)?;
    run_prepared(&prepared, cfg, out_dir, opts)
}

pub fn run_prepared(
    prepared: &Prepared,
    cfg: &RunConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    let repetitions = prepared.run(cfg, opts)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::with_capacity(repetitions.len());
    for rep in &repetitions {
        let name = repetition_csv_name(rep.index);
        let path = out_dir.join(&name);
        fs::write(&path, series_csv(cfg.k, &cfg.thresholds, rep))
            .map_err(|e| Error::io(&path, e))?;
        entries.push(RepetitionEntry {
            index: rep.index,
            seed: rep.seed,
            status: rep.status.clone(),
            csv: name,
            checkpoints: rep.priming.records().len(),
            prop3_passed: opts.verify_prop3.then_some(rep.prop3_passed),
        });
    }
    let manifest = Manifest {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        algorithm: cfg.algorithm.as_str().to_string(),
        k: cfg.k,
        extra_l: cfg.extra_l,
        thresholds: cfg.thresholds.clone(),
        truth_hash: prepared.truth.hash.clone(),
        rows: prepared.dataset.rows(),
        cols: prepared.dataset.cols(),
        repetitions: entries,
    };
    let path = out_dir.join(Manifest::FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(RunOutcome {
        manifest,
        repetitions,
        out_dir: out_dir.to_path_buf(),
    })
}
