//! Per-task experiment records and the summary table.

use serde::{Deserialize, Serialize};

use super::stats::mean_sem;

/// One row per (mode, budget, repetition, task).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentRecord {
    pub domain: String,
    pub mode: String,
    pub play_budget: usize,
    pub repetition: usize,
    pub task: String,
    /// solved | exhausted | timed_out
    pub outcome: String,
    /// Robot: solved and the plan checked out end to end.
    pub correct: Option<bool>,
    /// Strings: held-out accuracy in [0, 1]; 0 when nothing was learned.
    pub accuracy: Option<f64>,
    pub solve_ms: u64,
    pub solve_steps: u64,
    pub program_size: Option<usize>,
    /// Body references to background predicates learned during play.
    pub learned_refs: Option<usize>,
    /// Body references to invented predicates saved during play.
    pub invented_refs: Option<usize>,
}

impl ExperimentRecord {
    /// The per-task score the summary aggregates: correctness for the robot
    /// domain, held-out accuracy for strings.
    pub fn metric(&self) -> f64 {
        match (self.correct, self.accuracy) {
            (Some(c), _) => c as u8 as f64,
            (None, Some(a)) => a,
            (None, None) => 0.0,
        }
    }
}

pub fn write_records(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialises"));
        out.push('\n');
    }
    out
}

pub fn read_records(text: &str) -> Result<Vec<ExperimentRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Summary row per (mode, budget): mean of the per-repetition metric (in
/// percent) and its standard error over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub domain: String,
    pub mode: String,
    pub budget: usize,
    pub mean: f64,
    pub sem: f64,
    pub n_reps: usize,
    pub degenerate_sem: bool,
}

/// Aggregates records: per (mode, budget, repetition) the mean task metric
/// becomes one observation; rows report mean and SEM over repetitions.
/// Row order follows first appearance of (mode, budget) in the records.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    assert!(!records.is_empty(), "summarize needs at least one record");
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in records {
        let key = (r.mode.clone(), r.play_budget);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|(mode, budget)| {
            let group: Vec<&ExperimentRecord> = records
                .iter()
                .filter(|r| &r.mode == mode && r.play_budget == *budget)
                .collect();
            let mut reps: Vec<usize> = group.iter().map(|r| r.repetition).collect();
            reps.sort_unstable();
            reps.dedup();
            let per_rep: Vec<f64> = reps
                .iter()
                .map(|rep| {
                    let scores: Vec<f64> = group
                        .iter()
                        .filter(|r| r.repetition == *rep)
                        .map(|r| r.metric())
                        .collect();
                    100.0 * scores.iter().sum::<f64>() / scores.len() as f64
                })
                .collect();
            let s = mean_sem(&per_rep);
            SummaryRow {
                domain: group[0].domain.clone(),
                mode: mode.clone(),
                budget: *budget,
                mean: s.mean,
                sem: s.sem,
                n_reps: s.n,
                degenerate_sem: s.degenerate,
            }
        })
        .collect()
}

/// Plot-ready CSV with a stable schema across domains.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("domain,mode,budget,mean,sem,n_reps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{}\n",
            r.domain, r.mode, r.budget, r.mean, r.sem, r.n_reps
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(mode: &str, budget: usize, rep: usize, task: &str, correct: bool) -> ExperimentRecord {
        ExperimentRecord {
            domain: "robot".into(),
            mode: mode.into(),
            play_budget: budget,
            repetition: rep,
            task: task.into(),
            outcome: if correct { "solved" } else { "timed_out" }.into(),
            correct: Some(correct),
            accuracy: None,
            solve_ms: 1,
            solve_steps: 10,
            program_size: correct.then_some(2),
            learned_refs: Some(0),
            invented_refs: Some(0),
        }
    }

    #[test]
    fn records_roundtrip() {
        let rs = vec![record("full", 0, 0, "t_1", true), record("full", 0, 0, "t_2", false)];
        let text = write_records(&rs);
        assert_eq!(read_records(&text).unwrap(), rs);
    }

    #[test]
    fn summary_aggregates_per_repetition() {
        let mut rs = Vec::new();
        // rep 0: 2/2 correct; rep 1: 1/2 correct -> 100% and 50%
        rs.push(record("full", 100, 0, "t_1", true));
        rs.push(record("full", 100, 0, "t_2", true));
        rs.push(record("full", 100, 1, "t_1", true));
        rs.push(record("full", 100, 1, "t_2", false));
        let rows = summarize(&rs);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].mean - 75.0).abs() < 1e-12);
        assert_eq!(rows[0].n_reps, 2);
        let csv = summary_csv(&rows);
        assert!(csv.starts_with("domain,mode,budget,mean,sem,n_reps\n"));
        assert!(csv.contains("robot,full,100,75.000000,"));
    }
}
