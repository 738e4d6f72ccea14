//! Experiment execution: both domain protocols at configurable scale.
//!
//! Build tasks are sampled once per repetition; play tasks are sampled
//! fresh per (repetition, budget) and shared across modes so that paired
//! comparisons stay paired. Units run concurrently on the rayon pool, and
//! records are ordered by a deterministic key rather than completion time.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::{DomainSpec, ExperimentConfig, ModeName};
use super::records::{summarize, summary_csv, ExperimentRecord, SummaryRow};
use crate::engine::{BkRegistry, SolveOutcome, State, Task};
use crate::interp::{Interp, InterpError, Verdict};
use crate::logic::PredicateKind;
use crate::playgol::{play, write_bk_listing, Mode, PlayReport, PlaygolConfig, PlaygolError};
use crate::robot;
use crate::strings::{self, StringTask};
use crate::util::rng_for;

// Purpose tags for derived RNG streams.
const TAG_BUILD: u64 = 1;
const TAG_PLAY: u64 = 2;
const TAG_SPLIT: u64 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] strings::IngestError),
    #[error(transparent)]
    Gen(#[from] strings::GenError),
    #[error(transparent)]
    Playgol(#[from] PlaygolError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("play task name {0:?} collides with a build task")]
    NameCollision(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayUnitSummary {
    pub mode: String,
    pub play_budget: usize,
    pub repetition: usize,
    pub attempted: usize,
    pub solved: usize,
    pub programs_saved: usize,
    pub invented_added: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub domain: String,
    pub seed: u64,
    pub version: String,
    pub record_count: usize,
    pub config_toml: String,
    pub play_summaries: Vec<PlayUnitSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
    pub summary_csv: String,
    /// Persisted background-knowledge listing per (mode, budget, rep).
    pub bk_listings: BTreeMap<String, String>,
    pub manifest: Manifest,
}

pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<RunArtifacts, HarnessError> {
    cfg.validate()?;
    match cfg.domain_spec()? {
        DomainSpec::Robot { n, build_count } => run_robot(cfg, seed, n, build_count),
        DomainSpec::Strings { build_source } => {
            let text = std::fs::read_to_string(&build_source).map_err(|source| {
                HarnessError::Io { path: build_source.display().to_string(), source }
            })?;
            let corpus = strings::ingest_build_tasks(&text)?;
            run_strings(cfg, seed, &corpus)
        }
    }
}

fn playgol_config(cfg: &ExperimentConfig, mode: Mode, metarules: &[&str], seed: u64) -> PlaygolConfig {
    PlaygolConfig {
        max_d: cfg.max_d,
        per_task_deadline: cfg.deadline(),
        per_task_step_limit: cfg.step_limit,
        mode,
        metarules: metarules.iter().map(|s| s.to_string()).collect(),
        parallel_within_depth: false,
        seed,
    }
}

/// What one (mode, budget, repetition) run produced before scoring.
struct ModeRun<S: State> {
    bk: Arc<BkRegistry<S>>,
    outcomes: BTreeMap<String, SolveOutcome>,
    report: PlayReport,
}

fn engine_mode(mode: ModeName) -> Mode {
    match mode {
        ModeName::Nopi => Mode::Nopi,
        _ => Mode::Full,
    }
}

/// Runs play+build for every requested mode at one (rep, budget) cell.
/// Modes without a play stage (budget 0 or baseline) are computed once and
/// shared: with no play the mode cannot influence anything.
fn run_modes_at_cell<S: State>(
    cfg: &ExperimentConfig,
    seed: u64,
    metarules: &[&str],
    make_registry: impl Fn() -> BkRegistry<S>,
    play_tasks: &[Task<S>],
    build_tasks: &[Task<S>],
    budget: usize,
) -> Result<Vec<(ModeName, Arc<ModeRun<S>>)>, HarnessError> {
    let mut no_play: Option<Arc<ModeRun<S>>> = None;
    let mut out = Vec::with_capacity(cfg.modes.len());
    for &mode in &cfg.modes {
        let skip_play = budget == 0 || mode == ModeName::Baseline;
        let run = if skip_play {
            if no_play.is_none() {
                let bk = make_registry();
                let pcfg = playgol_config(cfg, Mode::Full, metarules, seed);
                let outcomes = crate::playgol::build(&bk, build_tasks, &pcfg)?;
                no_play = Some(Arc::new(ModeRun {
                    bk: Arc::new(bk),
                    outcomes,
                    report: PlayReport::default(),
                }));
            }
            no_play.clone().expect("just filled")
        } else {
            let pcfg = playgol_config(cfg, engine_mode(mode), metarules, seed);
            let (bk, report) = play(make_registry(), play_tasks, &pcfg)?;
            let outcomes = crate::playgol::build(&bk, build_tasks, &pcfg)?;
            Arc::new(ModeRun { bk: Arc::new(bk), outcomes, report })
        };
        out.push((mode, run));
    }
    Ok(out)
}

/// Counts body references to registry symbols learned (or invented) during
/// play.
fn reuse_counts<S: State>(
    program: &crate::logic::Program,
    bk: &BkRegistry<S>,
) -> (usize, usize) {
    let mut learned = 0;
    let mut invented = 0;
    for lit in program.clauses.iter().flat_map(|c| &c.body) {
        if let Some(id) = bk.id(&lit.pred.name) {
            match bk.symbol(id).kind {
                PredicateKind::LearnedTarget => learned += 1,
                PredicateKind::Invented => invented += 1,
                PredicateKind::Primitive => {}
            }
        }
    }
    (learned, invented)
}

type CellRecords = (usize, usize, Vec<ExperimentRecord>, Vec<PlayUnitSummary>, BTreeMap<String, String>);

fn assemble(
    cfg: &ExperimentConfig,
    seed: u64,
    domain: &str,
    mut cells: Vec<CellRecords>,
    warnings: Vec<String>,
) -> Result<RunArtifacts, HarnessError> {
    cells.sort_by_key(|(rep, budget, ..)| (*budget, *rep));
    let mode_order: Vec<&str> = cfg.modes.iter().map(|m| m.as_str()).collect();
    let mut records: Vec<ExperimentRecord> = Vec::new();
    let mut play_summaries = Vec::new();
    let mut bk_listings = BTreeMap::new();
    for (_, _, cell_records, summaries, listings) in &mut cells {
        records.append(cell_records);
        play_summaries.append(summaries);
        bk_listings.append(listings);
    }
    records.sort_by_key(|r| {
        let mode_idx = mode_order.iter().position(|m| *m == r.mode).unwrap_or(usize::MAX);
        (mode_idx, r.play_budget, r.repetition)
    });
    play_summaries.sort_by_key(|s| {
        let mode_idx = mode_order.iter().position(|m| *m == s.mode).unwrap_or(usize::MAX);
        (mode_idx, s.play_budget, s.repetition)
    });
    let summary = summarize(&records);
    let csv = summary_csv(&summary);
    let manifest = Manifest {
        domain: domain.to_string(),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        record_count: records.len(),
        config_toml: cfg.to_toml(),
        play_summaries,
        warnings,
    };
    Ok(RunArtifacts { records, summary, summary_csv: csv, bk_listings, manifest })
}

fn record_for_outcome<S: State>(
    domain: &str,
    mode: ModeName,
    budget: usize,
    rep: usize,
    task_name: &str,
    outcome: &SolveOutcome,
    bk: &BkRegistry<S>,
    score: impl FnOnce(&crate::logic::Program) -> Result<(Option<bool>, Option<f64>), HarnessError>,
) -> Result<ExperimentRecord, HarnessError> {
    let (correct, accuracy, program_size, learned_refs, invented_refs) =
        if let Some(program) = outcome.solution() {
            let (l, i) = reuse_counts(program, bk);
            let (correct, accuracy) = score(program)?;
            (correct, accuracy, Some(program.clauses.len()), Some(l), Some(i))
        } else if domain == "robot" {
            (Some(false), None, None, None, None)
        } else {
            (None, Some(0.0), None, None, None)
        };
    Ok(ExperimentRecord {
        domain: domain.to_string(),
        mode: mode.as_str().to_string(),
        play_budget: budget,
        repetition: rep,
        task: task_name.to_string(),
        outcome: outcome.label().to_string(),
        correct,
        accuracy,
        solve_ms: outcome.stats.elapsed.as_millis() as u64,
        solve_steps: outcome.stats.steps,
        program_size,
        learned_refs,
        invented_refs,
    })
}

fn run_robot(
    cfg: &ExperimentConfig,
    seed: u64,
    n: u8,
    build_count: usize,
) -> Result<RunArtifacts, HarnessError> {
    let metarules: Vec<&str> = robot::METARULES.to_vec();
    let eval_budget = cfg.eval_step_budget();

    // Build tasks once per repetition, before the budget loop.
    let build_tasks_per_rep: Vec<Vec<Task<robot::RobotState>>> = (0..cfg.repetitions)
        .map(|rep| {
            let mut rng = rng_for(seed, &[rep as u64, TAG_BUILD]);
            (0..build_count)
                .map(|i| robot::sample_task(&format!("build_{}", i + 1), n, &mut rng))
                .collect()
        })
        .collect();

    let cells: Vec<(usize, usize)> = (0..cfg.repetitions)
        .flat_map(|rep| cfg.play_budgets.iter().map(move |&b| (rep, b)))
        .collect();

    let cell_results: Vec<CellRecords> = cells
        .par_iter()
        .map(|&(rep, budget)| -> Result<CellRecords, HarnessError> {
            let mut rng = rng_for(seed, &[rep as u64, budget as u64, TAG_PLAY]);
            let play_tasks: Vec<Task<robot::RobotState>> = (0..budget)
                .map(|i| robot::sample_task(&format!("play_{}", i + 1), n, &mut rng))
                .collect();
            let build_tasks = &build_tasks_per_rep[rep];
            let runs = run_modes_at_cell(
                cfg,
                seed,
                &metarules,
                robot::registry,
                &play_tasks,
                build_tasks,
                budget,
            )?;
            let mut records = Vec::new();
            let mut summaries = Vec::new();
            let mut listings = BTreeMap::new();
            for (mode, run) in runs {
                for task in build_tasks {
                    let outcome = &run.outcomes[&task.name];
                    let ex = &task.positives[0];
                    let record = record_for_outcome(
                        "robot",
                        mode,
                        budget,
                        rep,
                        &task.name,
                        outcome,
                        &run.bk,
                        |program| {
                            let ok = robot::check_solution(
                                program, &run.bk, &ex.input, &ex.goal, eval_budget,
                            )?;
                            Ok((Some(ok), None))
                        },
                    )?;
                    records.push(record);
                }
                summaries.push(PlayUnitSummary {
                    mode: mode.as_str().to_string(),
                    play_budget: budget,
                    repetition: rep,
                    attempted: run.report.per_depth.iter().map(|d| d.attempted).sum(),
                    solved: run.report.programs_saved,
                    programs_saved: run.report.programs_saved,
                    invented_added: run.report.invented_added,
                });
                listings.insert(
                    format!("robot_{}_b{}_r{}.bk", mode.as_str(), budget, rep),
                    write_bk_listing(&run.bk),
                );
            }
            Ok((rep, budget, records, summaries, listings))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    assemble(cfg, seed, "robot", cell_results, Vec::new())
}

fn run_strings(
    cfg: &ExperimentConfig,
    seed: u64,
    corpus: &[StringTask],
) -> Result<RunArtifacts, HarnessError> {
    let metarules: Vec<&str> = strings::METARULES.to_vec();
    let eval_budget = cfg.eval_step_budget();
    let (train_n, test_n) = cfg.split_sizes();
    let need = train_n + test_n;

    let mut warnings = Vec::new();
    let usable: Vec<&StringTask> = corpus
        .iter()
        .filter(|t| {
            if t.examples.len() == need {
                true
            } else {
                warnings.push(format!(
                    "task {} skipped: {} examples, expected {}",
                    t.name,
                    t.examples.len(),
                    need
                ));
                false
            }
        })
        .collect();

    let alphabet = strings::Alphabet::standard();

    // Train/test splits once per (repetition, task).
    let splits_per_rep: Vec<Vec<(Task<strings::StringState>, Vec<crate::engine::Example<strings::StringState>>)>> =
        (0..cfg.repetitions)
            .map(|rep| {
                usable
                    .iter()
                    .enumerate()
                    .map(|(ti, task)| {
                        let mut rng = rng_for(seed, &[rep as u64, ti as u64, TAG_SPLIT]);
                        let mut indices: Vec<usize> = (0..task.examples.len()).collect();
                        shuffle(&mut indices, &mut rng);
                        let train = task.subset_task(&indices[..train_n]);
                        let test: Vec<_> =
                            indices[train_n..].iter().map(|&i| task.examples[i].clone()).collect();
                        (train, test)
                    })
                    .collect()
            })
            .collect();

    let cells: Vec<(usize, usize)> = (0..cfg.repetitions)
        .flat_map(|rep| cfg.play_budgets.iter().map(move |&b| (rep, b)))
        .collect();

    let cell_results: Vec<CellRecords> = cells
        .par_iter()
        .map(|&(rep, budget)| -> Result<CellRecords, HarnessError> {
            let mut rng = rng_for(seed, &[rep as u64, budget as u64, TAG_PLAY]);
            let mut play_tasks = Vec::with_capacity(budget);
            for i in 0..budget {
                let name = format!("play_{}", i + 1);
                if usable.iter().any(|t| t.name == name) {
                    return Err(HarnessError::NameCollision(name));
                }
                let generated = strings::generate_play_task(
                    &name,
                    &alphabet,
                    &mut rng,
                    strings::MAX_INPUT_LEN,
                )?;
                play_tasks.push(generated.task);
            }
            let splits = &splits_per_rep[rep];
            let build_tasks: Vec<Task<strings::StringState>> =
                splits.iter().map(|(train, _)| train.clone()).collect();
            let runs = run_modes_at_cell(
                cfg,
                seed,
                &metarules,
                strings::registry,
                &play_tasks,
                &build_tasks,
                budget,
            )?;
            let mut records = Vec::new();
            let mut summaries = Vec::new();
            let mut listings = BTreeMap::new();
            for (mode, run) in runs {
                for (train, test) in splits {
                    let outcome = &run.outcomes[&train.name];
                    let record = record_for_outcome(
                        "strings",
                        mode,
                        budget,
                        rep,
                        &train.name,
                        outcome,
                        &run.bk,
                        |program| {
                            let interp = Interp::new(program, &run.bk)?;
                            let hits = test
                                .iter()
                                .filter(|ex| {
                                    matches!(interp.example_holds(ex, eval_budget), Verdict::Pass)
                                })
                                .count();
                            Ok((None, Some(hits as f64 / test.len() as f64)))
                        },
                    )?;
                    records.push(record);
                }
                summaries.push(PlayUnitSummary {
                    mode: mode.as_str().to_string(),
                    play_budget: budget,
                    repetition: rep,
                    attempted: run.report.per_depth.iter().map(|d| d.attempted).sum(),
                    solved: run.report.programs_saved,
                    programs_saved: run.report.programs_saved,
                    invented_added: run.report.invented_added,
                });
                listings.insert(
                    format!("strings_{}_b{}_r{}.bk", mode.as_str(), budget, rep),
                    write_bk_listing(&run.bk),
                );
            }
            Ok((rep, budget, records, summaries, listings))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    assemble(cfg, seed, "strings", cell_results, warnings)
}

/// Fisher-Yates with our deterministic stream.
fn shuffle<T, R: rand::Rng>(xs: &mut [T], rng: &mut R) {
    for i in (1..xs.len()).rev() {
        let j = rng.random_range(0..=i);
        xs.swap(i, j);
    }
}

/// Runs the string experiment on an in-memory corpus (used by tests).
pub fn run_strings_with_corpus(
    cfg: &ExperimentConfig,
    seed: u64,
    corpus: &[StringTask],
) -> Result<RunArtifacts, HarnessError> {
    cfg.validate()?;
    run_strings(cfg, seed, corpus)
}

/// Writes the artifacts (records, summary, listings, manifest) under a
/// directory, atomically per file.
pub fn write_artifacts(artifacts: &RunArtifacts, dir: &Path) -> std::io::Result<()> {
    use super::records::write_records;
    use crate::util::atomic_write;
    std::fs::create_dir_all(dir)?;
    atomic_write(&dir.join("records.jsonl"), write_records(&artifacts.records).as_bytes())?;
    atomic_write(&dir.join("summary.csv"), artifacts.summary_csv.as_bytes())?;
    let bk_dir = dir.join("bk");
    for (name, listing) in &artifacts.bk_listings {
        atomic_write(&bk_dir.join(name), listing.as_bytes())?;
    }
    let manifest =
        serde_json::to_string_pretty(&artifacts.manifest).expect("manifest serialises");
    atomic_write(&dir.join("manifest.json"), manifest.as_bytes())?;
    Ok(())
}
