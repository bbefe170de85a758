use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bicop::{Candidate, SelectOptions};
use crate::error::{Error, Result};
use crate::marginals::PitMode;
use crate::vine::VineFitOptions;

/// Scenario labels over (demand, wind, solar), price in its upper tail.
pub const DEFAULT_SCENARIOS: [&str; 5] = ["HLL", "HHL", "HLH", "LHH", "LHL"];

/// Analysis settings. Loaded from a flat TOML document; absent keys take
/// their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub hours: Vec<u8>,
    pub window_days: usize,
    pub step_days: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Decreasing thresholds for tail ratios and Kendall coefficients.
    pub alpha_grid: Vec<f64>,
    /// Vine sample size per hour in the global study.
    pub n_mc: usize,
    /// Vine sample size per window in the rolling study.
    pub rolling_n_mc: usize,
    pub seed: u64,
    pub candidates: Vec<Candidate>,
    /// Kendall independence pretest level for pair copulas; 0 disables it.
    pub independence_test_level: f64,
    pub pit_mode: PitMode,
    pub scenarios: Vec<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            hours: (0..24).collect(),
            window_days: 730,
            step_days: 1,
            alpha: 0.05,
            beta: 0.05,
            alpha_grid: vec![0.1, 0.08, 0.06, 0.04, 0.02, 0.01],
            n_mc: 100_000,
            rolling_n_mc: 20_000,
            seed: 0,
            candidates: Candidate::default_set(),
            independence_test_level: 0.01,
            pit_mode: PitMode::Parametric,
            scenarios: DEFAULT_SCENARIOS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl AnalysisConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let mut hours = self.hours.clone();
        hours.sort_unstable();
        hours.dedup();
        if hours.len() != self.hours.len() || hours.iter().any(|&h| h > 23) {
            return bad(format!("hours must be distinct values in 0..=23, got {:?}", self.hours));
        }
        if self.step_days == 0 {
            return bad("step_days must be at least 1".into());
        }
        if self.window_days < 120 {
            return bad(format!("window_days must be at least 120, got {}", self.window_days));
        }
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(x > 0.0 && x < 0.5) {
                return bad(format!("{name} must lie in (0, 0.5), got {x}"));
            }
        }
        if self.alpha_grid.is_empty()
            || self.alpha_grid.iter().any(|&a| !(a > 0.0 && a <= 0.1))
            || self.alpha_grid.windows(2).any(|p| p[1] >= p[0])
        {
            return bad("alpha_grid must be non-empty, strictly decreasing and inside (0, 0.1]".into());
        }
        if self.n_mc < 10_000 || self.rolling_n_mc < 10_000 {
            return bad("n_mc and rolling_n_mc must be at least 10000".into());
        }
        if self.candidates.is_empty() {
            return bad("candidate family set is empty".into());
        }
        if !(0.0..1.0).contains(&self.independence_test_level) {
            return bad(format!("independence_test_level must lie in [0, 1), got {}", self.independence_test_level));
        }
        for s in &self.scenarios {
            if s.len() != 3 || !s.chars().all(|c| matches!(c, 'H' | 'L')) {
                return bad(format!("scenario {s:?} must be three letters from H and L"));
            }
        }
        Ok(())
    }

    pub fn vine_options(&self) -> VineFitOptions {
        let level = self.independence_test_level;
        VineFitOptions {
            select: SelectOptions {
                candidates: self.candidates.clone(),
                independence_test_level: (level > 0.0).then_some(level),
            },
        }
    }

    /// Scenario labels for a panel with `n_cond` conditioning variables:
    /// trailing letters beyond the available variables are dropped and
    /// duplicates removed, keeping first occurrences.
    pub fn scenario_labels(&self, n_cond: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.scenarios {
            let l: String = s.chars().take(n_cond).collect();
            if !out.contains(&l) {
                out.push(l);
            }
        }
        out
    }
}
