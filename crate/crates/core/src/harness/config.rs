//! Experiment configuration, read from a TOML key-value file.

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    /// Play solutions saved with invented predicates reusable.
    Full,
    /// Play solutions saved without reusable invented predicates.
    Nopi,
    /// No play stage at all, whatever the budget column says.
    Baseline,
}

impl ModeName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::Full => "full",
            ModeName::Nopi => "nopi",
            ModeName::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "robot" or "strings".
    pub domain: String,
    /// Grid side length (robot only).
    pub grid_n: Option<u8>,
    /// Number of build tasks to sample per repetition (robot only).
    pub build_count: Option<usize>,
    /// Build-task file (strings only).
    pub build_source: Option<PathBuf>,
    /// Play budgets, ascending; 0 is the no-play baseline row.
    pub play_budgets: Vec<usize>,
    pub repetitions: usize,
    /// Per-task wall-clock deadline, seconds.
    pub deadline_secs: f64,
    /// Optional per-task deterministic step budget; when set, runs are
    /// reproducible byte-for-byte regardless of machine speed.
    pub step_limit: Option<u64>,
    /// Clause-depth ceiling (play sweep bound and build clause bound).
    pub max_d: usize,
    pub modes: Vec<ModeName>,
    /// Root seed; the CLI may override it.
    pub seed: Option<u64>,
    /// Step budget for scoring solutions with the interpreter.
    pub eval_step_budget: Option<u64>,
    /// Train/test examples drawn per string task (5 and 5 by default).
    pub train_examples: Option<usize>,
    pub test_examples: Option<usize>,
}

pub const DEFAULT_EVAL_STEP_BUDGET: u64 = 500_000;

#[derive(Debug, Clone)]
pub enum DomainSpec {
    Robot { n: u8, build_count: usize },
    Strings { build_source: PathBuf },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown domain {0:?} (expected \"robot\" or \"strings\")")]
    UnknownDomain(String),
    #[error("robot config requires grid_n and build_count")]
    MissingRobotFields,
    #[error("strings config requires build_source")]
    MissingStringsFields,
    #[error("play_budgets must be non-empty and sorted ascending")]
    BadBudgets,
    #[error("repetitions must be >= 1")]
    BadRepetitions,
    #[error("deadline_secs must be positive")]
    BadDeadline,
    #[error("max_d must be >= 1")]
    BadMaxD,
    #[error("modes must be non-empty and free of duplicates")]
    BadModes,
    #[error("seed required (set it in the config or pass --seed)")]
    MissingSeed,
    #[error("failed to parse config: {0}")]
    Toml(#[from] toml::de::Error),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn domain_spec(&self) -> Result<DomainSpec, ConfigError> {
        match self.domain.as_str() {
            "robot" => match (self.grid_n, self.build_count) {
                (Some(n), Some(build_count)) => Ok(DomainSpec::Robot { n, build_count }),
                _ => Err(ConfigError::MissingRobotFields),
            },
            "strings" => match &self.build_source {
                Some(p) => Ok(DomainSpec::Strings { build_source: p.clone() }),
                None => Err(ConfigError::MissingStringsFields),
            },
            other => Err(ConfigError::UnknownDomain(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.domain_spec()?;
        if self.play_budgets.is_empty() || self.play_budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::BadBudgets);
        }
        if self.repetitions < 1 {
            return Err(ConfigError::BadRepetitions);
        }
        if !(self.deadline_secs > 0.0) {
            return Err(ConfigError::BadDeadline);
        }
        if self.max_d < 1 {
            return Err(ConfigError::BadMaxD);
        }
        let duplicate_mode =
            self.modes.iter().enumerate().any(|(i, m)| self.modes[..i].contains(m));
        if self.modes.is_empty() || duplicate_mode {
            return Err(ConfigError::BadModes);
        }
        Ok(())
    }

    pub fn deadline(&self) -> Duration {
        Duration::from_secs_f64(self.deadline_secs)
    }

    pub fn eval_step_budget(&self) -> u64 {
        self.eval_step_budget.unwrap_or(DEFAULT_EVAL_STEP_BUDGET)
    }

    pub fn split_sizes(&self) -> (usize, usize) {
        (self.train_examples.unwrap_or(5), self.test_examples.unwrap_or(5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_robot_config() {
        let text = r#"
domain = "robot"
grid_n = 5
build_count = 100
play_budgets = [0, 100, 200, 300]
repetitions = 3
deadline_secs = 10.0
max_d = 5
modes = ["full", "nopi"]
seed = 7
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        cfg.validate().unwrap();
        assert!(matches!(cfg.domain_spec().unwrap(), DomainSpec::Robot { n: 5, build_count: 100 }));
        assert_eq!(cfg.seed, Some(7));
    }

    #[test]
    fn rejects_unsorted_budgets_and_unknown_fields() {
        let text = r#"
domain = "robot"
grid_n = 5
build_count = 10
play_budgets = [100, 0]
repetitions = 1
deadline_secs = 1.0
max_d = 2
modes = ["full"]
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::BadBudgets)));
        assert!(ExperimentConfig::from_toml("domain = \"robot\"\nbogus = 1\n").is_err());
    }
}
