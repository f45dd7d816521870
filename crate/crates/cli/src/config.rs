//! Profile configuration: one file for the constants every stage consumes.
//! Flags override matching fields; the effective values are echoed in each
//! command's output header so runs are self-describing.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    AscendingDocId,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreak::AscendingDocId => f.write_str("ascending-doc-id"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Term-frequency smoothing constant, in [0, 1).
    pub alpha: f64,
    /// Familiarity threshold for full understanding, in gl.
    pub f_t: f64,
    /// Forgetting-curve constants.
    pub retention_k: f64,
    pub retention_c: f64,
    /// Same-document sessions closer than this merge.
    pub merge_gap_secs: u64,
    /// Factors recorded when a session has no logged values.
    pub default_pps: f64,
    pub default_lm: f64,
    /// Top terms considered per topic when importing topic-model output.
    pub top_m: usize,
    /// Fraction of definitions that must reference a topic for it to become
    /// a child node (strictly more than).
    pub majority_rule: f64,
    pub tie_break: TieBreak,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            f_t: 100.0,
            retention_k: 1.84,
            retention_c: 1.25,
            merge_gap_secs: 1800,
            default_pps: 1.0,
            default_lm: 1.0,
            top_m: 20,
            majority_rule: 0.5,
            tie_break: TieBreak::default(),
        }
    }
}

impl ProfileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::validation(format!("config file {}: {e}", path.display()))
                })?
            }
            None => Self::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(CliError::validation("field `alpha` must lie in [0, 1)"));
        }
        if !(self.f_t > 0.0) {
            return Err(CliError::validation("field `f_t` must be strictly positive"));
        }
        if !(self.retention_k > 0.0) {
            return Err(CliError::validation("field `retention_k` must be strictly positive"));
        }
        if !(self.retention_c > 0.0) {
            return Err(CliError::validation("field `retention_c` must be strictly positive"));
        }
        if self.merge_gap_secs == 0 {
            return Err(CliError::validation("field `merge_gap_secs` must be strictly positive"));
        }
        for (field, value) in [("default_pps", self.default_pps), ("default_lm", self.default_lm)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(CliError::validation(format!("field `{field}` must lie in [0, 1]")));
            }
        }
        if self.top_m == 0 {
            return Err(CliError::validation("field `top_m` must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.majority_rule) {
            return Err(CliError::validation("field `majority_rule` must lie in [0, 1)"));
        }
        Ok(())
    }

    /// One-line header of the effective values, printed by every command.
    pub fn echo_line(&self) -> String {
        format!(
            "# config: alpha={} f_t={} retention_k={} retention_c={} merge_gap_secs={} \
             default_pps={} default_lm={} top_m={} majority_rule={} tie_break={}",
            self.alpha,
            self.f_t,
            self.retention_k,
            self.retention_c,
            self.merge_gap_secs,
            self.default_pps,
            self.default_lm,
            self.top_m,
            self.majority_rule,
            self.tie_break,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ProfileConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_fields_are_named() {
        let mut config = ProfileConfig::default();
        config.alpha = 1.0;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn round_trips_through_json() {
        let config = ProfileConfig::default();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: ProfileConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
        assert!(text.contains("ascending-doc-id"));
    }
}
