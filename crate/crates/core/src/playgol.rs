//! The play/build bootstrapping loop.
//!
//! `play` sweeps clause depths 1..=max_d over self-generated tasks,
//! registering each solution into the background knowledge immediately so
//! later tasks can reuse it (dependent learning). `build` then solves the
//! user-supplied tasks independently against the frozen, augmented
//! registry. With no play tasks the loop reduces to plain independent
//! learning.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{
    solve, solve_with_bounds, BkRegistry, RegistryError, SavedProgram, SolveConfig, SolveError,
    SolveOutcome, SolveResult, State, Task,
};
use crate::logic::{parse_program, render_program, ParseError, Program, ProgramError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Solutions are saved with target and invented predicates reusable.
    Full,
    /// Solutions are saved executable, but only targets become reusable.
    Nopi,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Nopi => "nopi",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlaygolConfig {
    /// Clause-depth ceiling and dependent-learning sweep bound.
    pub max_d: usize,
    /// Wall-clock budget per task, cumulative across depth sweeps.
    pub per_task_deadline: Duration,
    /// Optional deterministic step budget per task, cumulative likewise.
    pub per_task_step_limit: Option<u64>,
    pub mode: Mode,
    /// Metarule names handed to every solve call.
    pub metarules: Vec<String>,
    /// Freeze the registry at each depth start and solve that depth's tasks
    /// concurrently, merging solutions in task order at depth end. Loses
    /// within-depth reuse; off by default.
    pub parallel_within_depth: bool,
    pub seed: u64,
}

impl PlaygolConfig {
    pub fn new(max_d: usize, per_task_deadline: Duration, mode: Mode, metarules: &[&str]) -> Self {
        PlaygolConfig {
            max_d,
            per_task_deadline,
            per_task_step_limit: None,
            mode,
            metarules: metarules.iter().map(|s| s.to_string()).collect(),
            parallel_within_depth: false,
            seed: 0,
        }
    }

    fn solve_config(&self, max_clauses: usize) -> SolveConfig {
        SolveConfig {
            metarules: self.metarules.clone(),
            max_clauses,
            deadline: self.per_task_deadline,
            allow_invention: true,
            step_limit: self.per_task_step_limit,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DepthStats {
    pub depth: usize,
    pub attempted: usize,
    pub solved: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PlayReport {
    pub per_depth: Vec<DepthStats>,
    pub programs_saved: usize,
    pub targets_added: usize,
    pub invented_added: usize,
    pub total_steps: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Error)]
pub enum PlaygolError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("duplicate task name {0:?}")]
    DuplicateTask(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

fn check_tasks<S: State>(bk: &BkRegistry<S>, tasks: &[Task<S>]) -> Result<(), PlaygolError> {
    for (i, task) in tasks.iter().enumerate() {
        if bk.id(&task.name).is_some()
            || tasks[..i].iter().any(|t| t.name == task.name)
        {
            return Err(PlaygolError::DuplicateTask(task.name.clone()));
        }
    }
    Ok(())
}

/// Per-task attempt memory: budgets spent so far and what the last attempt
/// established, so depth sweeps do not repeat searches the registry has not
/// invalidated. Re-running an exhausted bound against an unchanged registry
/// provably exhausts again, and a timed-out bound times out again, so both
/// are skipped; any registry growth resets the memo.
#[derive(Debug, Clone, Default)]
struct AttemptMemo {
    spent: Duration,
    steps_spent: u64,
    reg_len: usize,
    exhausted_below: usize,
    timed_out: bool,
}

/// Unsupervised stage: attempt every task at clause bound d for d in
/// 1..=max_d, registering each solution immediately.
pub fn play<S: State>(
    mut bk: BkRegistry<S>,
    tasks: &[Task<S>],
    cfg: &PlaygolConfig,
) -> Result<(BkRegistry<S>, PlayReport), PlaygolError> {
    if cfg.max_d < 1 {
        return Err(PlaygolError::InvalidConfig("max_d must be >= 1".into()));
    }
    check_tasks(&bk, tasks)?;
    let started = Instant::now();
    let mut report = PlayReport::default();
    let mut pool: Vec<usize> = (0..tasks.len()).collect();
    let mut memos: Vec<AttemptMemo> = vec![AttemptMemo::default(); tasks.len()];

    for depth in 1..=cfg.max_d {
        let mut stats = DepthStats { depth, ..DepthStats::default() };
        if cfg.parallel_within_depth {
            let outcomes: Vec<(usize, SolveOutcome)> = {
                let frozen = &bk;
                let cfg_ref = &cfg;
                let memo_ref = &memos;
                pool.par_iter()
                    .map(|&ti| {
                        attempt(frozen, &tasks[ti], cfg_ref, depth, &memo_ref[ti])
                            .map(|o| (ti, o))
                    })
                    .collect::<Result<Vec<_>, SolveError>>()?
            };
            // Note memos against the frozen registry before any merge
            // grows it, then register solutions in task order.
            for (ti, outcome) in &outcomes {
                stats.attempted += 1;
                note_outcome(&mut memos[*ti], &bk, depth, outcome);
                report.total_steps += outcome.stats.steps;
            }
            for (ti, outcome) in outcomes {
                let steps = outcome.stats.steps;
                if let SolveResult::Solution(program) = outcome.result {
                    register_solution(&mut bk, program, depth, steps, cfg.mode, &mut report)?;
                    stats.solved += 1;
                    pool.retain(|&t| t != ti);
                }
            }
        } else {
            let mut solved_now: Vec<usize> = Vec::new();
            for &ti in &pool {
                stats.attempted += 1;
                let outcome = attempt(&bk, &tasks[ti], cfg, depth, &memos[ti])?;
                note_outcome(&mut memos[ti], &bk, depth, &outcome);
                report.total_steps += outcome.stats.steps;
                let steps = outcome.stats.steps;
                if let SolveResult::Solution(program) = outcome.result {
                    register_solution(&mut bk, program, depth, steps, cfg.mode, &mut report)?;
                    stats.solved += 1;
                    solved_now.push(ti);
                }
            }
            pool.retain(|t| !solved_now.contains(t));
        }
        report.per_depth.push(stats);
    }
    report.elapsed = started.elapsed();
    Ok((bk, report))
}

fn attempt<S: State>(
    bk: &BkRegistry<S>,
    task: &Task<S>,
    cfg: &PlaygolConfig,
    depth: usize,
    memo: &AttemptMemo,
) -> Result<SolveOutcome, SolveError> {
    let remaining = cfg.per_task_deadline.saturating_sub(memo.spent);
    let remaining_steps = cfg.per_task_step_limit.map(|l| l.saturating_sub(memo.steps_spent));
    let budget_gone = remaining.is_zero() || remaining_steps.is_some_and(|s| s == 0);
    let unchanged = memo.reg_len == bk.len();
    let min_bound = if unchanged { memo.exhausted_below + 1 } else { 1 };
    if budget_gone || (unchanged && memo.timed_out) || min_bound > depth {
        // Nothing new to search (or no budget left): the attempt's outcome
        // is already determined.
        let result = if unchanged && memo.exhausted_below >= depth && !memo.timed_out {
            SolveResult::Exhausted
        } else {
            SolveResult::TimedOut
        };
        return Ok(SolveOutcome { result, stats: Default::default() });
    }
    let mut solve_cfg = cfg.solve_config(depth);
    solve_cfg.deadline = remaining;
    solve_cfg.step_limit = remaining_steps;
    solve_with_bounds(task, bk, &solve_cfg, min_bound, depth)
}

fn note_outcome<S: State>(
    memo: &mut AttemptMemo,
    bk: &BkRegistry<S>,
    depth: usize,
    outcome: &SolveOutcome,
) {
    memo.spent += outcome.stats.elapsed;
    memo.steps_spent += outcome.stats.steps;
    if bk.len() != memo.reg_len {
        memo.reg_len = bk.len();
        memo.exhausted_below = 0;
        memo.timed_out = false;
    }
    match outcome.result {
        SolveResult::Exhausted => memo.exhausted_below = memo.exhausted_below.max(depth),
        SolveResult::TimedOut => memo.timed_out = true,
        SolveResult::Solution(_) => {}
    }
}

fn register_solution<S: State>(
    bk: &mut BkRegistry<S>,
    program: Program,
    depth: usize,
    steps: u64,
    mode: Mode,
    report: &mut PlayReport,
) -> Result<(), PlaygolError> {
    let invented = program.invented.len();
    bk.register_program(SavedProgram {
        program,
        depth: depth as u32,
        steps,
        reusable_invented: mode == Mode::Full,
    })?;
    report.programs_saved += 1;
    report.targets_added += 1;
    report.invented_added += invented;
    Ok(())
}

/// Supervised stage: each task solved independently, clause bound max_d,
/// against the same frozen registry. Tasks run concurrently on the ambient
/// rayon pool; outcomes are keyed by task name.
pub fn build<S: State>(
    bk: &BkRegistry<S>,
    tasks: &[Task<S>],
    cfg: &PlaygolConfig,
) -> Result<BTreeMap<String, SolveOutcome>, PlaygolError> {
    if cfg.max_d < 1 {
        return Err(PlaygolError::InvalidConfig("max_d must be >= 1".into()));
    }
    check_tasks(bk, tasks)?;
    let solve_cfg = cfg.solve_config(cfg.max_d);
    let outcomes: Vec<(String, SolveOutcome)> = tasks
        .par_iter()
        .map(|task| solve(task, bk, &solve_cfg).map(|o| (task.name.clone(), o)))
        .collect::<Result<Vec<_>, SolveError>>()?;
    Ok(outcomes.into_iter().collect())
}

/// The whole loop: generate play tasks, play, then build.
pub fn playgol<S: State>(
    build_tasks: &[Task<S>],
    bk: BkRegistry<S>,
    cfg: &PlaygolConfig,
    gen_tasks: impl FnOnce(&BkRegistry<S>) -> Vec<Task<S>>,
) -> Result<(BTreeMap<String, SolveOutcome>, PlayReport, BkRegistry<S>), PlaygolError> {
    let play_tasks = gen_tasks(&bk);
    let (bk, report) = play(bk, &play_tasks, cfg)?;
    let outcomes = build(&bk, build_tasks, cfg)?;
    Ok((outcomes, report, bk))
}

/// Serialises the learned programs of a registry, in acquisition order,
/// with enough provenance to resume: depth, deterministic step count, and
/// whether invented predicates were saved as reusable.
pub fn write_bk_listing<S: State>(bk: &BkRegistry<S>) -> String {
    let mut out = String::from("% playgol background-knowledge listing v1\n");
    for saved in bk.saved_programs() {
        out.push_str(&format!(
            "% program {} depth {} steps {} invented_reusable {}\n",
            saved.program.target.name, saved.depth, saved.steps, saved.reusable_invented
        ));
        out.push_str(&render_program(&saved.program).expect("saved programs are well-formed"));
    }
    out
}

#[derive(Debug, Error)]
pub enum BkListingError {
    #[error("line {0}: malformed program header")]
    BadHeader(usize),
    #[error("program {name:?}: {source}")]
    Parse {
        name: String,
        #[source]
        source: ParseError,
    },
    #[error("program {name:?}: {source}")]
    Invalid {
        name: String,
        #[source]
        source: ProgramError,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Restores learned programs from a listing into a registry that already
/// holds the domain primitives.
pub fn load_bk_listing<S: State>(
    mut bk: BkRegistry<S>,
    text: &str,
) -> Result<BkRegistry<S>, BkListingError> {
    struct Pending {
        name: String,
        depth: u32,
        steps: u64,
        reusable_invented: bool,
        clauses: String,
    }
    let mut pending: Option<Pending> = None;
    let flush = |bk: &mut BkRegistry<S>, p: Pending| -> Result<(), BkListingError> {
        let program = parse_program(&p.clauses)
            .map_err(|source| BkListingError::Parse { name: p.name.clone(), source })?;
        bk.register_program(SavedProgram {
            program,
            depth: p.depth,
            steps: p.steps,
            reusable_invented: p.reusable_invented,
        })?;
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("% program ") {
            if let Some(p) = pending.take() {
                flush(&mut bk, p)?;
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let parsed = (|| -> Option<Pending> {
                let name = parts.first()?.to_string();
                if parts.get(1)? != &"depth" || parts.get(3)? != &"steps" {
                    return None;
                }
                let depth = parts.get(2)?.parse().ok()?;
                let steps = parts.get(4)?.parse().ok()?;
                if parts.get(5)? != &"invented_reusable" {
                    return None;
                }
                let reusable_invented = parts.get(6)?.parse().ok()?;
                Some(Pending { name, depth, steps, reusable_invented, clauses: String::new() })
            })();
            pending = Some(parsed.ok_or(BkListingError::BadHeader(i + 1))?);
        } else if trimmed.starts_with('%') || trimmed.is_empty() {
            continue;
        } else if let Some(p) = pending.as_mut() {
            p.clauses.push_str(trimmed);
            p.clauses.push('\n');
        } else {
            return Err(BkListingError::BadHeader(i + 1));
        }
    }
    if let Some(p) = pending.take() {
        flush(&mut bk, p)?;
    }
    Ok(bk)
}
